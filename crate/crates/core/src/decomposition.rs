//! Stopping-time decomposition of a dyadic cube by thresholds on triple averages.
//!
//! `m(Q) = avg_{3Q} f · avg_{3Q} g` with triples extended by zero past the
//! grid. Generation `k` holds the maximal subcubes of `Q₀` with `m(Q) > a^k`,
//! and the carved sets `E_j^k = Q_j^k \ D_{k+1}`, `E₀ = Q₀ \ D₁` partition `Q₀`.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{enumerate_subcubes, AlignedBox, DyadicCube, Grid, GridFunction, PrefixTable};

#[derive(Clone, Debug, Serialize)]
pub struct SelectedCube {
    pub cube: DyadicCube,
    pub m3q: f64,
    /// Grid cell indices of `E_j^k`.
    pub e_cells: Vec<usize>,
    /// Cells of the cube that also lie in `D_{k+1}`.
    pub next_cells: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Generation {
    pub k: u32,
    pub cubes: Vec<SelectedCube>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StoppingFamily {
    pub q0: DyadicCube,
    pub a: f64,
    pub grid: Grid,
    pub generations: Vec<Generation>,
    pub e0_cells: Vec<usize>,
    /// `m(Q₀)`.
    pub m_root: f64,
}

/// `m(Q)` for every dyadic subcube of `Q₀` down to the cell level, coarse to fine.
fn triple_products(f: &GridFunction, g: &GridFunction, q0: &DyadicCube) -> Result<Vec<(DyadicCube, AlignedBox, f64)>> {
    let grid = *f.grid();
    let tf = PrefixTable::new(f);
    let tg = PrefixTable::new(g);
    enumerate_subcubes(*q0, grid.cell_level())?
        .into_iter()
        .map(|c| {
            let bx = grid.cube_box(&c)?;
            let b3 = bx.dilate_odd(3);
            Ok((c, bx, tf.zero_extended_average(&b3) * tg.zero_extended_average(&b3)))
        })
        .collect()
}

fn cells_of(grid: &Grid, bx: &AlignedBox) -> Vec<usize> {
    let mut v = Vec::with_capacity(bx.cell_count());
    for i0 in bx.range(0) {
        for i1 in bx.range(1) {
            v.push(grid.index([i0, i1]));
        }
    }
    v
}

/// Build the generations for threshold base `a > 1`.
pub fn cz_decompose(f: &GridFunction, g: &GridFunction, q0: &DyadicCube, a: f64) -> Result<StoppingFamily> {
    f.require_same_grid(g)?;
    f.require_nonneg("f")?;
    g.require_nonneg("g")?;
    if !(a > 1.0 && a.is_finite()) {
        return Err(Error::invalid(format!("threshold base a = {a} must exceed 1")));
    }
    let grid = *f.grid();
    let root_box = grid.cube_box(q0)?;
    if q0.level() <= grid.cell_level() {
        return Err(Error::Unresolvable(format!("{q0} is not split into finer cells")));
    }
    let cubes = triple_products(f, g, q0)?;
    let m_root = cubes[0].2;
    let m_max = cubes.iter().map(|c| c.2).fold(0.0, f64::max);

    // `sel[k-1]` lists the maximal cubes (by index into `cubes`) for threshold a^k.
    let index: std::collections::HashMap<DyadicCube, usize> =
        cubes.iter().enumerate().map(|(i, c)| (c.0, i)).collect();
    let mut selections: Vec<Vec<usize>> = Vec::new();
    let mut k = 1u32;
    loop {
        let thr = a.powi(k as i32);
        if !(thr < m_max) {
            break;
        }
        let mut covered = vec![false; cubes.len()];
        let mut sel = Vec::new();
        for (i, (c, _, m)) in cubes.iter().enumerate() {
            let parent_covered = c != q0 && covered[index[&c.parent()]];
            if parent_covered {
                covered[i] = true;
            } else if *m > thr {
                covered[i] = true;
                sel.push(i);
            }
        }
        selections.push(sel);
        k += 1;
    }

    // Deepest generation containing each cell; 0 means E₀.
    let mut depth = vec![0u32; grid.cell_count()];
    for (gi, sel) in selections.iter().enumerate() {
        for &i in sel {
            for c in cells_of(&grid, &cubes[i].1) {
                depth[c] = gi as u32 + 1;
            }
        }
    }
    let generations = selections
        .iter()
        .enumerate()
        .map(|(gi, sel)| {
            let k = gi as u32 + 1;
            let cubes = sel
                .iter()
                .map(|&i| {
                    let cells = cells_of(&grid, &cubes[i].1);
                    let next_cells = cells.iter().filter(|&&c| depth[c] > k).count();
                    let e_cells = cells.into_iter().filter(|&c| depth[c] == k).collect();
                    SelectedCube { cube: cubes[i].0, m3q: cubes[i].2, e_cells, next_cells }
                })
                .collect();
            Generation { k, cubes }
        })
        .collect();
    let e0_cells = cells_of(&grid, &root_box).into_iter().filter(|&c| depth[c] == 0).collect();
    Ok(StoppingFamily { q0: *q0, a, grid, generations, e0_cells, m_root })
}

impl StoppingFamily {
    pub fn cube_count(&self) -> usize {
        self.generations.iter().map(|g| g.cubes.len()).sum()
    }

    /// Write `k, level, coords, m3q, e_measure`; `k = 0` is the `E₀` row for `Q₀`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "level", "coords", "m3q", "e_measure"])?;
        let vol = self.grid.cell_volume();
        let coords = |c: &DyadicCube| c.coords().iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let e0 = self.e0_cells.len() as f64 * vol;
        w.write_record(["0".to_string(), self.q0.level().to_string(), coords(&self.q0), format!("{:e}", self.m_root), format!("{e0:e}")])?;
        for g in &self.generations {
            for c in &g.cubes {
                w.write_record([
                    g.k.to_string(),
                    c.cube.level().to_string(),
                    coords(&c.cube),
                    format!("{:e}", c.m3q),
                    format!("{:e}", c.e_cells.len() as f64 * vol),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HalvingReport {
    pub holds: bool,
    /// Largest `|Q ∩ D_{k+1}| / |Q|` over `Q₀` and all selected cubes.
    pub worst_ratio: f64,
    /// The cube with the worst ratio when the bound `1/2` fails.
    pub offending: Option<DyadicCube>,
}

/// Check `|D₁| ≤ |Q₀|/2` and `|Q_j^k ∩ D_{k+1}| ≤ |Q_j^k|/2`.
pub fn verify_halving(sf: &StoppingFamily) -> HalvingReport {
    let root_cells = sf.grid.cube_box(&sf.q0).map(|b| b.cell_count()).unwrap_or(1);
    let mut worst = (1.0 - sf.e0_cells.len() as f64 / root_cells as f64, sf.q0);
    for g in &sf.generations {
        for c in &g.cubes {
            let total = c.e_cells.len() + c.next_cells;
            let r = c.next_cells as f64 / total as f64;
            if r > worst.0 {
                worst = (r, c.cube);
            }
        }
    }
    let holds = worst.0 <= 0.5;
    HalvingReport { holds, worst_ratio: worst.0, offending: if holds { None } else { Some(worst.1) } }
}

/// Smallest `a` in `2, 4, 8, …` whose decomposition passes the halving check.
pub fn choose_a(f: &GridFunction, g: &GridFunction, q0: &DyadicCube) -> Result<f64> {
    let mut a = 2.0f64;
    loop {
        let sf = cz_decompose(f, g, q0, a)?;
        if verify_halving(&sf).holds {
            return Ok(a);
        }
        if sf.generations.is_empty() {
            return Err(Error::Numerical("halving fails without any generation".into()));
        }
        a *= 2.0;
    }
}

/// `LHS/RHS` of the packing estimate over all dyadic subcubes of `q` down to the cell level:
/// `Σ |Q′|^{(α/n+1)t}(∫_{Q′} v^{t/(1−t)})^{1−t}` against
/// `2^{αt}/(2^{αt}−1) · |Q|^{(α/n)t + 1}(avg_Q v^{t/(1−t)})^{1−t}`.
pub fn packing_sum(q: &DyadicCube, v: &GridFunction, t: f64, alpha: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::invalid(format!("packing exponent t = {t} outside (0,1)")));
    }
    let n = v.dim() as f64;
    if !(alpha > 0.0 && alpha <= n) {
        return Err(Error::invalid(format!("alpha = {alpha} outside (0, {n}]")));
    }
    v.require_positive("v")?;
    let grid = *v.grid();
    let table = PrefixTable::of_power(v, t / (1.0 - t))?;
    let mut lhs = 0.0;
    for c in enumerate_subcubes(*q, grid.cell_level())? {
        let bx = grid.cube_box(&c)?;
        let vol = grid.box_volume(&bx);
        lhs += vol.powf((alpha / n + 1.0) * t) * table.integral(&bx).powf(1.0 - t);
    }
    let qb = grid.cube_box(q)?;
    let vol = grid.box_volume(&qb);
    let geo = 2f64.powf(alpha * t) / (2f64.powf(alpha * t) - 1.0);
    let rhs = geo * vol.powf(alpha / n * t + 1.0) * table.average(&qb).powf(1.0 - t);
    Ok(lhs / rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::power_weight;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spike(grid: Grid, cell: usize, height: f64) -> GridFunction {
        let mut v = vec![0.0; grid.cell_count()];
        v[cell] = height;
        GridFunction::inferred(grid, v).unwrap()
    }

    #[test]
    fn constant_data_has_no_generations() {
        let g = Grid::unit(1, 5).unwrap();
        let one = GridFunction::constant(g, 1.0).unwrap();
        let sf = cz_decompose(&one, &one, &g.root(), 2.0).unwrap();
        assert!(sf.generations.is_empty());
        assert_eq!(sf.e0_cells.len(), 32);
        let h = verify_halving(&sf);
        assert!(h.holds && h.worst_ratio == 0.0);
        assert_eq!(choose_a(&one, &one, &g.root()).unwrap(), 2.0);
    }

    #[test]
    fn spike_generations_match_predicate_scan() {
        let g = Grid::unit(1, 6).unwrap();
        let f = spike(g, 37, 64.0);
        let a = 4.0 * 16.0;
        let sf = cz_decompose(&f, &f, &g.root(), a).unwrap();
        let t = PrefixTable::new(&f);
        let cubes = enumerate_subcubes(g.root(), g.cell_level()).unwrap();
        let m = |c: &DyadicCube| t.zero_extended_average(&g.cube_box(c).unwrap().dilate_odd(3)).powi(2);
        for gen in &sf.generations {
            let thr = a.powi(gen.k as i32);
            let want: Vec<DyadicCube> = cubes
                .iter()
                .filter(|c| m(c) > thr)
                .filter(|c| !cubes.iter().any(|p| p != *c && p.contains(c) && m(p) > thr))
                .copied()
                .collect();
            let got: Vec<DyadicCube> = gen.cubes.iter().map(|c| c.cube).collect();
            assert_eq!(got, want);
        }
        assert!(!sf.generations.is_empty());
        assert!(verify_halving(&sf).holds);
    }

    #[test]
    fn small_base_is_reported() {
        let g = Grid::unit(1, 6).unwrap();
        let f = spike(g, 10, 1.0).map(|v| v + 1.0).unwrap();
        let sf = cz_decompose(&f, &f, &g.root(), 1.01).unwrap();
        let h = verify_halving(&sf);
        assert!(!h.holds);
        assert!(h.offending.is_some() && h.worst_ratio > 0.5);
        let a = choose_a(&f, &f, &g.root()).unwrap();
        assert!(verify_halving(&cz_decompose(&f, &f, &g.root(), a).unwrap()).holds);
        assert!(cz_decompose(&f, &f, &g.root(), 1.0).is_err());
    }

    #[test]
    fn random_pairs_partition_and_sandwich() {
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = Grid::unit(1, 7).unwrap();
            let mk = |rng: &mut ChaCha8Rng| {
                GridFunction::inferred(g, (0..128).map(|_| rng.gen_range(-2.0f64..2.0).exp().powi(3)).collect()).unwrap()
            };
            let (f, h) = (mk(&mut rng), mk(&mut rng));
            let a = choose_a(&f, &h, &g.root()).unwrap();
            let sf = cz_decompose(&f, &h, &g.root(), a).unwrap();
            let mut seen = vec![0u32; 128];
            for c in sf.e0_cells.iter().chain(sf.generations.iter().flat_map(|g| g.cubes.iter().flat_map(|c| &c.e_cells))) {
                seen[*c] += 1;
            }
            assert!(seen.iter().all(|&c| c == 1), "seed {seed}");
            for gen in &sf.generations {
                let thr = a.powi(gen.k as i32);
                for (i, c) in gen.cubes.iter().enumerate() {
                    assert!(thr < c.m3q && c.m3q <= 4.0 * thr, "seed {seed}: {} {}", c.m3q, thr);
                    for d in &gen.cubes[i + 1..] {
                        assert!(!c.cube.intersects(&d.cube));
                    }
                }
            }
        }
    }

    #[test]
    fn packing_examples() {
        let g = Grid::unit(1, 6).unwrap();
        let one = GridFunction::constant(g, 1.0).unwrap();
        let r = packing_sum(&g.root(), &one, 0.5, 0.5).unwrap();
        // The level sums form a geometric series: 1 − 2^{−7αt} over seven levels.
        assert!((r - (1.0 - 2f64.powf(-7.0 * 0.25))).abs() < 1e-12);
        let sp = spike(g, 5, 100.0).map(|v| v + 1e-3).unwrap();
        let pw = power_weight(-0.5, &[0.0], g).unwrap();
        for t in [0.3, 0.5, 0.7] {
            for alpha in [0.25, 0.5, 0.75] {
                for v in [&one, &sp, &pw] {
                    let r = packing_sum(&g.root(), v, t, alpha).unwrap();
                    assert!(r <= 1.0, "t={t} alpha={alpha}: {r}");
                }
            }
        }
        assert!(packing_sum(&g.root(), &one, 1.0, 0.5).is_err());
    }
}
