use morrey_bilinear::cli::{parse_args, RunConfig};
use morrey_bilinear::decomposition::{choose_a, cz_decompose, packing_sum};
use morrey_bilinear::experiments::{necessity_check, WeightSpec};
use morrey_bilinear::exponent::{Exponent, ExponentProfile};
use morrey_bilinear::grid::{box_average, enumerate_subcubes, AlignedBox, DyadicCube, Grid, GridFunction, PrefixTable};
use morrey_bilinear::norms::{lebesgue_norm, morrey_norm, weak_quasinorm, CubeFamily};
use morrey_bilinear::operators::{b_alpha, m_alpha_vector, m_tilde, KernelSpec};
use morrey_bilinear::weights::{char_remark, char_two_weight, CharParams, Characteristic, Variant, WeightSystem};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random(grid: Grid, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = (0..grid.cell_count()).map(|_| rng.gen_range(-2.0f64..2.0).exp()).collect();
    GridFunction::inferred(grid, v).unwrap()
}

fn random_box(grid: &Grid, rng: &mut ChaCha8Rng) -> AlignedBox {
    let n = grid.side_cells() as i64;
    let mut lo = [0i64; 2];
    let mut hi = [1i64; 2];
    for d in 0..grid.dim() {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(a + 1..=n);
        lo[d] = a;
        hi[d] = b;
    }
    AlignedBox::new(grid.dim(), lo, hi, n)
}

fn direct_sum(f: &GridFunction, b: &AlignedBox) -> f64 {
    let mut s = 0.0;
    for i0 in b.range(0) {
        for i1 in b.range(1) {
            s += f.get([i0, i1]);
        }
    }
    s * f.grid().cell_volume()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// Exponents with `1/s = 1/p + 1/r − α/n`, `t/s = q/p` and `s < 1`.
fn two_weight_params() -> CharParams {
    CharParams::new(Variant::TwoWeightSLt1, 0.5, 1, 1.2, 1.2, 0.625, 5.0 / 7.0, 24.0 / 35.0, 10.0 / 3.0, 1.02)
}

fn random_system(grid: Grid, seed: u64) -> WeightSystem {
    WeightSystem::new(random(grid, seed), random(grid, seed + 1), random(grid, seed + 2)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dyadic_cubes_nest_or_are_disjoint(dim in 1usize..=2, i in 0usize..4096, j in 0usize..4096) {
        let cubes = enumerate_subcubes(DyadicCube::unit(dim), if dim == 1 { -5 } else { -3 }).unwrap();
        let (a, b) = (&cubes[i % cubes.len()], &cubes[j % cubes.len()]);
        if a.intersects(b) {
            prop_assert!(a.contains(b) || b.contains(a));
        }
    }

    #[test]
    fn prefix_box_sums_match_direct_sums(dim in 1usize..=2, seed in any::<u64>()) {
        let g = Grid::unit(dim, if dim == 1 { 7 } else { 4 }).unwrap();
        let f = random(g, seed);
        let t = PrefixTable::new(&f);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for _ in 0..100 {
            let b = random_box(&g, &mut rng);
            prop_assert!(close(t.integral(&b), direct_sum(&f, &b), 1e-12));
        }
    }

    #[test]
    fn box_average_is_monotone(seed in any::<u64>(), power in 0.0f64..4.0) {
        let g = Grid::unit(1, 6).unwrap();
        let f = random(g, seed);
        let bigger = f.mul(&random(g, seed + 1).map(|x| 1.0 + x).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let b = random_box(&g, &mut rng);
            prop_assert!(box_average(&f, &b, power).unwrap() <= box_average(&bigger, &b, power).unwrap());
        }
    }

    #[test]
    fn morrey_norm_grows_with_q(seed in any::<u64>(), p in 2.0f64..6.0, lo in 0.2f64..1.0, hi in 0.0f64..1.0) {
        let g = Grid::unit(1, 5).unwrap();
        let f = random(g, seed);
        let (q2, q1) = (lo * p, (lo + (1.0 - lo) * hi) * p);
        let fam = CubeFamily::all_aligned(g.root());
        let a = morrey_norm(&f, p, q1, &fam).unwrap().value;
        let b = morrey_norm(&f, p, q2, &fam).unwrap().value;
        prop_assert!(a >= b * (1.0 - 1e-12), "{a} < {b}");
    }

    #[test]
    fn endpoint_morrey_norm_is_at_most_lebesgue(seed in any::<u64>(), p in 0.5f64..5.0) {
        let g = Grid::unit(1, 5).unwrap();
        let f = random(g, seed);
        let m = morrey_norm(&f, p, p, &CubeFamily::all_aligned(g.root())).unwrap();
        let l = lebesgue_norm(&f, p, &g.root_box()).unwrap();
        prop_assert!(m.value <= l * (1.0 + 1e-12));
        if m.attaining.bx == g.root_box() {
            prop_assert!(close(m.value, l, 1e-12));
        }
    }

    #[test]
    fn morrey_norm_is_homogeneous(seed in any::<u64>(), c in -8.0f64..8.0) {
        let g = Grid::unit(1, 5).unwrap();
        let f = random(g, seed);
        let fam = CubeFamily::dyadic(g.root());
        let a = morrey_norm(&f.scale(c), 3.0, 1.5, &fam).unwrap().value;
        let b = morrey_norm(&f, 3.0, 1.5, &fam).unwrap().value;
        prop_assert!(close(a, c.abs() * b, 1e-13));
    }

    #[test]
    fn bilinear_integral_scales_exactly(seed in any::<u64>(), k1 in -6i32..6, k2 in -6i32..6) {
        let g = Grid::unit(1, 5).unwrap();
        let (f, h) = (random(g, seed), random(g, seed + 1));
        let k = KernelSpec::new(0.4, 1).unwrap();
        let (c1, c2) = (2f64.powi(k1), 2f64.powi(k2));
        let base = b_alpha(&f, &h, &k).unwrap();
        let scaled = b_alpha(&f.scale(c1), &h.scale(c2), &k).unwrap();
        for (x, y) in scaled.values().iter().zip(base.values()) {
            prop_assert_eq!(*x, c1 * c2 * y);
        }
    }

    #[test]
    fn bilinear_integral_is_symmetric_for_even_pairs(seed in any::<u64>(), alpha in 0.1f64..0.9) {
        // Even about the midpoint of cell m: values depend on |i − m| only.
        let g = Grid::unit(1, 6).unwrap();
        let m = 29usize;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let prof: Vec<(f64, f64)> = (0..64).map(|_| (rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0))).collect();
        let f = GridFunction::from_fn(g, |x| prof[((x[0] * 64.0) as i64 - m as i64).unsigned_abs() as usize].0).unwrap();
        let h = GridFunction::from_fn(g, |x| prof[((x[0] * 64.0) as i64 - m as i64).unsigned_abs() as usize].1).unwrap();
        let k = KernelSpec::new(alpha, 1).unwrap();
        let a = b_alpha(&f, &h, &k).unwrap().values()[m];
        let b = b_alpha(&h, &f, &k).unwrap().values()[m];
        prop_assert!(close(a, b, 1e-12));
    }

    #[test]
    fn averaging_maximals_ignore_refinement(seed in any::<u64>(), alpha in 0.0f64..0.9, t in 0.3f64..1.0) {
        let g = Grid::unit(1, 4).unwrap();
        let (f, h, v) = (random(g, seed), random(g, seed + 1), random(g, seed + 2));
        let fam = CubeFamily::dyadic(g.root());
        let coarse = m_alpha_vector(&f, &h, alpha, 1.5, 2.0, &fam).unwrap();
        let fine = m_alpha_vector(&f.refine(2).unwrap(), &h.refine(2).unwrap(), alpha, 1.5, 2.0, &fam).unwrap();
        for (x, y) in fine.values().iter().zip(coarse.function().refine(2).unwrap().values()) {
            prop_assert!(close(*x, *y, 1e-12));
        }
        let coarse = m_tilde(&f, &h, &v, alpha, t, &fam).unwrap();
        let fine = m_tilde(&f.refine(2).unwrap(), &h.refine(2).unwrap(), &v.refine(2).unwrap(), alpha, t, &fam).unwrap();
        for (x, y) in fine.values().iter().zip(coarse.function().refine(2).unwrap().values()) {
            prop_assert!(close(*x, *y, 1e-12));
        }
    }

    #[test]
    fn characteristic_homogeneity(seed in any::<u64>(), cv in 0.1f64..10.0, c1 in 0.1f64..10.0, c2 in 0.1f64..10.0) {
        let g = Grid::unit(1, 4).unwrap();
        let ws = random_system(g, seed);
        let fam = CubeFamily::dyadic(g.root());
        let cp = two_weight_params();
        let base = char_two_weight(&ws, &cp, &fam).unwrap().value;
        let scaled = char_two_weight(&ws.scaled(cv, c1, c2).unwrap(), &cp, &fam).unwrap().value;
        prop_assert!(close(scaled, base * cv / (c1 * c2), 1e-12));
    }

    #[test]
    fn characteristic_grows_with_the_family(seed in any::<u64>(), min_level in -5i32..=0) {
        let g = Grid::unit(1, 5).unwrap();
        let ws = random_system(g, seed);
        let cp = two_weight_params();
        let small = char_two_weight(&ws, &cp, &CubeFamily::dyadic_to(g.root(), min_level)).unwrap().value;
        let full = char_two_weight(&ws, &cp, &CubeFamily::dyadic(g.root())).unwrap().value;
        prop_assert!(small <= full);
        let aligned = Characteristic::new(&ws, cp).unwrap().sup(&CubeFamily::all_aligned(g.root()), u64::MAX).unwrap().value;
        prop_assert!(full <= aligned);
    }

    #[test]
    fn attaining_pair_reproduces_the_value(seed in any::<u64>()) {
        let g = Grid::unit(1, 5).unwrap();
        let ws = random_system(g, seed);
        let ch = Characteristic::new(&ws, two_weight_params()).unwrap();
        let r = ch.sup(&CubeFamily::dyadic(g.root()), u64::MAX).unwrap();
        prop_assert_eq!(ch.log_at(&r.inner.bx, &r.outer.bx), r.log_value);
        prop_assert_eq!(r.log_value.exp(), r.value);
    }

    #[test]
    fn two_weight_is_below_remark(seed in any::<u64>()) {
        let g = Grid::unit(1, 5).unwrap();
        let ws = random_system(g, seed);
        let fam = CubeFamily::dyadic(g.root());
        let cp = two_weight_params();
        let tw = char_two_weight(&ws, &cp, &fam).unwrap().value;
        let rm = char_remark(&ws, &cp.with_variant(Variant::Remark), &fam).unwrap().value;
        prop_assert!(tw <= rm * (1.0 + 1e-12));
    }

    #[test]
    fn stopping_time_structure(seed in any::<u64>()) {
        let g = Grid::unit(1, 6).unwrap();
        let (f, h) = (random(g, seed).map(|x| x.powi(3)).unwrap(), random(g, seed + 1).map(|x| x.powi(3)).unwrap());
        let a = choose_a(&f, &h, &g.root()).unwrap();
        let sf = cz_decompose(&f, &h, &g.root(), a).unwrap();
        let mut seen = vec![0u32; g.cell_count()];
        for c in sf.e0_cells.iter().chain(sf.generations.iter().flat_map(|g| g.cubes.iter().flat_map(|c| &c.e_cells))) {
            seen[*c] += 1;
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        for w in sf.generations.windows(2) {
            for q in &w[1].cubes {
                prop_assert!(w[0].cubes.iter().any(|p| p.cube.contains(&q.cube)));
            }
        }
        for gen in &sf.generations {
            let thr = a.powi(gen.k as i32);
            for q in &gen.cubes {
                prop_assert!(thr < q.m3q && q.m3q <= 4.0 * thr);
            }
        }
    }

    #[test]
    fn packing_ratio_at_most_one(seed in any::<u64>(), ti in 0usize..3, ai in 0usize..3) {
        let t = [0.3, 0.5, 0.7][ti];
        let alpha = [0.25, 0.5, 0.75][ai];
        let g = Grid::unit(1, 6).unwrap();
        prop_assert!(packing_sum(&g.root(), &random(g, seed), t, alpha).unwrap() <= 1.0);
    }

    #[test]
    fn necessity_chain_holds(seed in 0u64..1000) {
        let g = Grid::unit(1, 4).unwrap();
        let e = |s: &str| -> Exponent { s.parse().unwrap() };
        let pr = ExponentProfile {
            n: 1,
            alpha: Some(e("1/2")),
            q1: Some(e("3")),
            q2: Some(e("3")),
            p: Some(e("2")),
            s: Some(e("4")),
            t: Some(e("3")),
            r: Some(e("4")),
            ..Default::default()
        };
        let ws = WeightSpec::Random { seed, index: 0, base_depth: 3 }.system(&g, false).unwrap();
        let r = necessity_check(&ws, &pr, &CubeFamily::dyadic(g.root())).unwrap();
        prop_assert!(r.holds && r.testing_ok && r.indicator_ok);
    }

    #[test]
    fn exponents_round_trip(num in -1000i64..1000, den in 1i64..1000) {
        let x = Exponent::ratio(num, den);
        let back: Exponent = x.to_string().parse().unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn run_config_round_trips(alpha in 1u32..99, seed in any::<u64>(), depth in 1u32..10, json in any::<bool>()) {
        let a = format!("0.{alpha:02}");
        let (s, d) = (seed.to_string(), depth.to_string());
        let mut args = vec!["morrey", "char", "--alpha", &a, "--seed", &s, "--depth", &d, "--weights", "random"];
        if json {
            args.push("--json");
        }
        let (cfg, _) = parse_args(args).unwrap();
        let text = cfg.to_canonical();
        let back = RunConfig::from_canonical(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_canonical(), text);
    }
}

#[test]
fn weak_embedding_constant_is_level_stable() {
    let (p, q) = (3.0, 1.5);
    let mut prev: Option<f64> = None;
    for level in 4..=8 {
        let g = Grid::unit(1, level).unwrap();
        let fam = CubeFamily::all_aligned(g.root());
        let c = (0..10u64)
            .map(|s| {
                let f = random(Grid::unit(1, 3).unwrap(), s).refine(level - 3).unwrap();
                morrey_norm(&f, p, q, &fam).unwrap().value / weak_quasinorm(&f, p).unwrap()
            })
            .fold(0.0, f64::max);
        if let Some(b) = prev {
            assert!(c <= 1.05 * b, "level {level}: {c} after {b}");
        }
        prev = Some(c);
    }
}

#[test]
fn quadrature_converges_for_bumps() {
    let bump = |g: Grid, c: f64| {
        GridFunction::from_fn(g, |x| {
            let u = (x[0] - c) / 0.3;
            if u.abs() < 1.0 {
                (-1.0 / (1.0 - u * u)).exp()
            } else {
                0.0
            }
        })
        .unwrap()
    };
    let k = KernelSpec::new(0.5, 1).unwrap();
    let at = |l: u32| {
        let g = Grid::unit(1, l).unwrap();
        b_alpha(&bump(g, 0.4), &bump(g, 0.6), &k).unwrap().value_at(&[0.5])
    };
    for l in 6..9 {
        let (a, b) = (at(l), at(l + 1));
        assert!((a - b).abs() < 0.01 * b, "L = {l}: {a} vs {b}");
    }
}
