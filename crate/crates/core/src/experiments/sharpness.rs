//! The lattice construction showing that the unweighted bilinear bound fails
//! when `t/s` exceeds `q₁/p₁`.
//!
//! For `δ = 2^{−k}` let `N = ⌊δ^{q₁/p₁−1}⌋`. Cubes `Q_j` of side `δ` sit at the
//! centres `(j+½)/N`, `j ∈ {0..N−1}^n`, snapped to the grid, and
//! `f = δ^{−n/p₁}`, `g = δ^{−n/p₂}` on `∪ 3Q_j`. Then `B_α(f,g) ≥ δ^{−n/s}`
//! on every `Q_j`, while `‖B_α(f,g)‖_{ℳ^s_t}` grows like `δ^{n(q₁/p₁−t/s)/t}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit_slope;
use crate::error::{Error, Result};
use crate::exponent::{rel_eq, rel_le, rel_lt, Exponent};
use crate::grid::{AlignedBox, Grid, GridFunction};
use crate::norms::{morrey_norm, CubeFamily, MorreyEvaluator};
use crate::operators::{b_alpha, KernelSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessConfig {
    pub n: usize,
    pub alpha: Exponent,
    pub p1: Exponent,
    pub q1: Exponent,
    pub p2: Exponent,
    pub q2: Exponent,
    pub s: Exponent,
    pub t: Exponent,
    /// Exponents `k` of the schedule `δ = 2^{−k}`, increasing.
    pub deltas: Vec<u32>,
    /// Cells per side of `Q_j` are `2^refine`.
    pub refine: u32,
    /// Relative slack on the pointwise floor.
    pub floor_tol: f64,
    /// Additive slack on the fitted slope.
    pub slope_tol: f64,
}

/// Whether the configuration sits strictly above the boundary `t/s = q₁/p₁` or on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    BlowUp,
    Boundary,
}

impl SharpnessConfig {
    /// Configuration with `s` from `1/s = 1/p₁ + 1/p₂ − α/n` and default schedule `δ = 2^{−4..−8}`.
    pub fn new(n: usize, alpha: Exponent, p1: Exponent, q1: Exponent, p2: Exponent, q2: Exponent, t: Exponent) -> Self {
        let nn = Exponent::integer(n as i64);
        let s = (p1.recip() + p2.recip() - alpha / nn).recip();
        SharpnessConfig {
            n,
            alpha,
            p1,
            q1,
            p2,
            q2,
            s,
            t,
            deltas: (4..=8).collect(),
            refine: 3,
            floor_tol: 0.05,
            slope_tol: 0.03,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n != 1 && self.n != 2 {
            return Err(Error::invalid(format!("dimension {} not in {{1,2}}", self.n)));
        }
        let one = Exponent::integer(1);
        let zero = Exponent::integer(0);
        let nn = Exponent::integer(self.n as i64);
        let mut bad = Vec::new();
        if !(rel_lt(zero, self.alpha) && rel_lt(self.alpha, nn)) {
            bad.push("0 < α < n");
        }
        if !(rel_lt(one, self.q1) && rel_le(self.q1, self.p1) && !self.p1.is_infinite()) {
            bad.push("1 < q₁ ≤ p₁ < ∞");
        }
        if !(rel_lt(one, self.q2) && rel_le(self.q2, self.p2) && !self.p2.is_infinite()) {
            bad.push("1 < q₂ ≤ p₂ < ∞");
        }
        if !(rel_lt(zero, self.t) && rel_le(self.t, self.s) && !self.s.is_infinite()) {
            bad.push("0 < t ≤ s < ∞");
        }
        if !rel_eq(self.s.recip(), self.p1.recip() + self.p2.recip() - self.alpha / nn) {
            bad.push("1/s = 1/p₁ + 1/p₂ − α/n");
        }
        if !bad.is_empty() {
            return Err(Error::hypothesis(format!("sharpness: {}", bad.join("; "))));
        }
        if self.deltas.is_empty() || self.deltas.contains(&0) {
            return Err(Error::invalid("delta schedule must be nonempty with δ = 2^{−k}, k ≥ 1"));
        }
        if self.deltas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("delta schedule must be strictly decreasing"));
        }
        Ok(())
    }

    /// The branch certified by the harness; `q₁/p₁` must be the larger ratio.
    pub fn branch(&self) -> Result<Branch> {
        let (r1, r2, ts) = (self.q1 / self.p1, self.q2 / self.p2, self.t / self.s);
        if rel_lt(r1, r2) {
            return Err(Error::hypothesis("sharpness: branch needs q₁/p₁ ≥ q₂/p₂ (swap the pair)"));
        }
        if rel_eq(ts, r1) {
            Ok(Branch::Boundary)
        } else if rel_lt(r1, ts) {
            Ok(Branch::BlowUp)
        } else {
            Err(Error::hypothesis("sharpness: branch needs t/s ≥ q₁/p₁"))
        }
    }

    /// `n(q₁/p₁ − t/s)/t`, the growth exponent of the norm in `δ`.
    pub fn predicted_slope(&self) -> f64 {
        self.n as f64 * (self.q1.value() / self.p1.value() - self.t.value() / self.s.value()) / self.t.value()
    }

    /// `N = ⌊δ^{q₁/p₁−1}⌋` for `δ = 2^{−k}`.
    pub fn lattice_count(&self, k: u32) -> u64 {
        let e = Exponent::integer(k as i64) * (Exponent::integer(1) - self.q1 / self.p1);
        match e.exact() {
            Some(q) if q.is_integer() => 1u64 << *q.numer(),
            _ => (2f64.powf(e.value()) * (1.0 + 1e-12)).floor() as u64,
        }
    }
}

/// The constructed pair with its lattice cubes.
#[derive(Clone, Debug)]
pub struct SharpnessPair {
    pub delta: f64,
    pub lattice: u64,
    pub f: GridFunction,
    pub g: GridFunction,
    pub cubes: Vec<AlignedBox>,
}

/// Build `(f, g)` for `δ = 2^{−k}` on the unit cube, `2^refine` cells per side of `Q_j`.
pub fn build_sharpness_pair(cfg: &SharpnessConfig, k: u32) -> Result<SharpnessPair> {
    cfg.validate()?;
    let grid = Grid::unit(cfg.n, k + cfg.refine)?;
    let side = 1i64 << cfg.refine;
    let cells = grid.side_cells() as i64;
    let lattice = cfg.lattice_count(k);
    if lattice == 0 {
        return Err(Error::Unresolvable(format!("δ = 2^-{k} gives an empty lattice")));
    }
    let lo_1d: Vec<i64> = (0..lattice)
        .map(|j| {
            let centre = (j as f64 + 0.5) / lattice as f64 * cells as f64;
            (centre - side as f64 / 2.0).round() as i64
        })
        .collect();
    if lo_1d.windows(2).any(|w| w[1] - w[0] < 3 * side) || lo_1d[0] < side || lo_1d[lo_1d.len() - 1] + 2 * side > cells {
        return Err(Error::Unresolvable(format!(
            "δ = 2^-{k}: the {lattice} triples overlap or leave the unit cube"
        )));
    }
    let mut cubes = Vec::new();
    if cfg.n == 1 {
        for &a in &lo_1d {
            cubes.push(AlignedBox::cube(1, [a, 0], side, cells));
        }
    } else {
        for &a in &lo_1d {
            for &b in &lo_1d {
                cubes.push(AlignedBox::cube(2, [a, b], side, cells));
            }
        }
    }
    let delta = 2f64.powi(-(k as i32));
    let n = cfg.n as f64;
    let mut mask = vec![false; grid.cell_count()];
    for c in &cubes {
        let t = c.dilate_odd(3);
        for i0 in t.range(0) {
            for i1 in t.range(1) {
                mask[grid.index([i0, i1])] = true;
            }
        }
    }
    let height = |p: f64| delta.powf(-n / p);
    let fill = |h: f64| GridFunction::inferred(grid, mask.iter().map(|&m| if m { h } else { 0.0 }).collect());
    Ok(SharpnessPair { delta, lattice, f: fill(height(cfg.p1.value()))?, g: fill(height(cfg.p2.value()))?, cubes })
}

#[derive(Clone, Debug, Serialize)]
pub struct SharpnessRow {
    pub k: u32,
    pub delta: f64,
    pub lattice: u64,
    pub support: f64,
    pub min_pointwise: f64,
    pub floor: f64,
    pub pointwise_ok: bool,
    pub norm_f: f64,
    pub bound_f: f64,
    pub norm_g: f64,
    pub bound_g: f64,
    pub norm: f64,
    pub slope_so_far: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SharpnessReport {
    pub branch: Branch,
    pub predicted_slope: f64,
    pub slope: f64,
    pub rows: Vec<SharpnessRow>,
    pub pointwise_ok: bool,
    pub norms_bounded: bool,
    pub slope_ok: bool,
}

/// Run the construction over the schedule and fit `log ‖B_α(f,g)‖_{ℳ^s_t}` against `log δ`.
pub fn run_sharpness(cfg: &SharpnessConfig) -> Result<SharpnessReport> {
    cfg.validate()?;
    let branch = cfg.branch()?;
    let n = cfg.n as f64;
    let (p1, q1, p2, q2, s, t) =
        (cfg.p1.value(), cfg.q1.value(), cfg.p2.value(), cfg.q2.value(), cfg.s.value(), cfg.t.value());
    let kernel = KernelSpec::new(cfg.alpha.value(), cfg.n)?;
    let mut rows = cfg
        .deltas
        .par_iter()
        .map(|&k| {
            let pair = build_sharpness_pair(cfg, k)?;
            let grid = *pair.f.grid();
            let family = CubeFamily::all_aligned(grid.root());
            let b = b_alpha(&pair.f, &pair.g, &kernel)?;
            let mut min_pointwise = f64::INFINITY;
            for c in &pair.cubes {
                for i0 in c.range(0) {
                    for i1 in c.range(1) {
                        min_pointwise = min_pointwise.min(b.values()[grid.index([i0, i1])]);
                    }
                }
            }
            let floor = pair.delta.powf(-n / s);
            let norm_f = morrey_norm(&pair.f, p1, q1, &family)?.value;
            let norm_g = morrey_norm(&pair.g, p2, q2, &family)?.value;
            let fam = family.resolve(&grid)?;
            let norm = MorreyEvaluator::new(b.function(), s, t)?.sup(&fam).value;
            Ok(SharpnessRow {
                k,
                delta: pair.delta,
                lattice: pair.lattice,
                support: (pair.lattice as f64 * pair.delta).powi(cfg.n as i32),
                min_pointwise,
                floor,
                pointwise_ok: min_pointwise >= (1.0 - cfg.floor_tol) * floor,
                norm_f,
                bound_f: 3f64.powf(n / p1),
                norm_g,
                bound_g: 3f64.powf(n / p2),
                norm,
                slope_so_far: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.delta.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.norm.ln()).collect();
    for i in 0..rows.len() {
        rows[i].slope_so_far = fit_slope(&xs[..=i], &ys[..=i]);
    }
    let slope = fit_slope(&xs, &ys).ok_or_else(|| Error::invalid("slope fit needs at least two deltas"))?;
    let predicted_slope = cfg.predicted_slope();
    let slope_ok = match branch {
        Branch::BlowUp => slope <= predicted_slope + cfg.slope_tol,
        Branch::Boundary => slope.abs() <= cfg.slope_tol,
    };
    Ok(SharpnessReport {
        branch,
        predicted_slope,
        slope,
        pointwise_ok: rows.iter().all(|r| r.pointwise_ok),
        norms_bounded: rows.iter().all(|r| r.norm_f <= r.bound_f && r.norm_g <= r.bound_g),
        rows,
        slope_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> Exponent {
        s.parse().unwrap()
    }

    fn base(t: &str) -> SharpnessConfig {
        SharpnessConfig::new(1, e("0.3"), e("4"), e("2"), e("4"), e("2"), e(t))
    }

    #[test]
    fn lattice_count_floors() {
        let c = base("5");
        assert_eq!(c.s, e("5"));
        let got: Vec<u64> = (4..=8).map(|k| c.lattice_count(k)).collect();
        assert_eq!(got, vec![4, 5, 8, 11, 16]);
    }

    #[test]
    fn pair_at_one_sixteenth() {
        let c = base("5");
        let p = build_sharpness_pair(&c, 4).unwrap();
        assert_eq!(p.lattice, 4);
        assert_eq!(p.cubes.len(), 4);
        let h = 2f64.powi(-7);
        for q in &p.cubes {
            assert_eq!(q.side_cells() as f64 * h, 1.0 / 16.0);
        }
        let height = 2f64; // (1/16)^{−1/4}
        let support = p.f.values().iter().filter(|&&v| v > 0.0).count() as f64 * h;
        assert!(p.f.values().iter().all(|&v| v == 0.0 || v == height));
        assert_eq!(support, 4.0 * 3.0 / 16.0);
    }

    #[test]
    fn support_tracks_lattice_scaling() {
        // N·δ against δ^{q₁/p₁}: equal up to the floor in N.
        let c = base("5");
        for k in 4..=10 {
            let delta = 2f64.powi(-(k as i32));
            let ratio = c.lattice_count(k) as f64 * delta / delta.sqrt();
            assert!(ratio <= 1.0 && ratio > 0.85, "k={k}: {ratio}");
        }
    }

    #[test]
    fn branch_detection() {
        assert_eq!(base("5").branch().unwrap(), Branch::BlowUp);
        assert_eq!(base("2.5").branch().unwrap(), Branch::Boundary);
        let err = base("2").branch().unwrap_err();
        assert!(err.to_string().contains("t/s ≥ q₁/p₁"));
        let mut c = base("5");
        c.s = e("4");
        assert!(c.validate().unwrap_err().to_string().contains("1/s = 1/p₁ + 1/p₂ − α/n"));
    }

    #[test]
    fn coarse_triples_are_unresolvable() {
        // δ = 1/2 gives N = 1 but the triple leaves the cube.
        let c = base("5");
        assert!(matches!(build_sharpness_pair(&c, 1), Err(Error::Unresolvable(_))));
    }

    #[test]
    fn pointwise_floor_holds_on_small_schedule() {
        let mut c = base("5");
        c.deltas = vec![4, 5];
        let r = run_sharpness(&c).unwrap();
        assert!(r.pointwise_ok);
        assert_eq!(r.rows.len(), 2);
        assert_eq!(r.rows[0].slope_so_far, None);
        assert!(r.rows[1].slope_so_far.is_some());
    }
}
