//! Power-weight dichotomy for the weighted bound of `B_{n−α}`.
//!
//! With `v = |x|^{−β}` and `wᵢ = |x|^{γᵢ}` the single-cube constant
//! `|Q|^{1/r}(avg_Q v^{as/(1−s)})^{(1−s)/(as)} Π(avg_Q wᵢ^{−(qᵢ/a)′})^{1/(qᵢ/a)′}`
//! is evaluated on the roots `[0, 2^K)^n` at a fixed cell size. Under the
//! power conditions it settles; when they fail it grows geometrically in `K`.

use serde::{Deserialize, Serialize};

use super::functions::{PairKind, PairSource};
use super::ratio::{ratio_harness, HarnessSpec, RatioSummary, WeightSpec};
use crate::error::{Error, Result};
use crate::exponent::{rel_eq, rel_le, rel_lt, Exponent, ExponentProfile, TheoremId};
use crate::grid::{DyadicCube, Grid};
use crate::norms::CubeFamily;
use crate::weights::{Characteristic, CharParams, PowerDescriptor, Variant, WeightSystem};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SteinWeissConfig {
    pub profile: ExponentProfile,
    pub beta: Exponent,
    pub gamma1: Exponent,
    pub gamma2: Exponent,
    /// Root levels `K`; the root is `[0, 2^K)^n`.
    pub roots: Vec<i32>,
    /// Level of the grid cells, shared by every root.
    pub cell_level: i32,
    /// Relative band separating settled from growing constants.
    pub growth_tol: f64,
    /// Levels of the unit-cube ratio harness on indicator pairs; empty skips it.
    pub harness_levels: Vec<u32>,
    pub seed: u64,
}

impl SteinWeissConfig {
    pub fn new(profile: ExponentProfile, beta: Exponent, gamma1: Exponent, gamma2: Exponent) -> Self {
        SteinWeissConfig {
            profile,
            beta,
            gamma1,
            gamma2,
            roots: (0..=4).collect(),
            cell_level: -3,
            growth_tol: 0.10,
            harness_levels: vec![4, 5, 6],
            seed: 0,
        }
    }

    fn descriptor(&self) -> PowerDescriptor {
        PowerDescriptor {
            beta: self.beta.value(),
            gamma1: self.gamma1.value(),
            gamma2: self.gamma2.value(),
            center: [0.0; 2],
        }
    }

    /// Each power condition with whether it holds.
    pub fn conditions(&self) -> Result<Vec<(String, bool)>> {
        let pr = &self.profile;
        let get = |e: Option<Exponent>, name: &str| e.ok_or_else(|| Error::invalid(format!("missing exponent {name}")));
        let (alpha, q1, q2, s, t) =
            (get(pr.alpha, "alpha")?, get(pr.q1, "q1")?, get(pr.q2, "q2")?, get(pr.s, "s")?, get(pr.t, "t")?);
        let one = Exponent::integer(1);
        let n = Exponent::integer(pr.n as i64);
        let (b, g1, g2) = (self.beta, self.gamma1, self.gamma2);
        Ok(vec![
            ("β < n(1/s − 1)".into(), rel_lt(b, n * (s.recip() - one))),
            ("γ₁ < n/q₁′".into(), rel_lt(g1, n / q1.conjugate())),
            ("γ₂ < n/q₂′".into(), rel_lt(g2, n / q2.conjugate())),
            (
                "α + β + γ₁ + γ₂ = n + n/t − n/q₁ − n/q₂".into(),
                rel_eq(alpha + b + g1 + g2, n + n / t - n / q1 - n / q2),
            ),
            ("β + γ₁ + γ₂ ≥ 0".into(), rel_le(Exponent::integer(0), b + g1 + g2)),
        ])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Finite,
    Divergent,
    Inconclusive,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Finite => "FINITE",
            Verdict::Divergent => "DIVERGENT",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SteinWeissRow {
    pub root_level: i32,
    pub value: f64,
    /// Ratio to the previous root's value.
    pub growth: Option<f64>,
    /// Far cubes (`|c_Q|_∞ ≥ l(Q)`) checked against the power bracket.
    pub far_cubes: usize,
    pub far_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SteinWeissReport {
    pub conditions: Vec<(String, bool)>,
    pub conditions_hold: bool,
    pub rows: Vec<SteinWeissRow>,
    pub spread: f64,
    pub verdict: Verdict,
    pub harness: Option<RatioSummary>,
}

/// Exponent of `|x|` carried by each weight factor: `−β`, `−γ₁`, `−γ₂`.
fn bracket(desc: &PowerDescriptor, n: usize) -> (f64, f64) {
    // For far cubes |x|/|c_Q|_∞ ∈ [1/2, 3√n/2]; every power mean stays within the bracket.
    let (lo, hi) = (0.5f64, 1.5 * (n as f64).sqrt());
    let mut bounds = (1.0, 1.0);
    for e in [-desc.beta, -desc.gamma1, -desc.gamma2] {
        let (a, b) = (lo.powf(e), hi.powf(e));
        bounds.0 *= a.min(b);
        bounds.1 *= a.max(b);
    }
    bounds
}

/// Evaluate the dichotomy; the exponent relations themselves must be consistent.
pub fn stein_weiss_check(cfg: &SteinWeissConfig) -> Result<SteinWeissReport> {
    cfg.profile.validate(TheoremId::SteinWeiss)?;
    if cfg.roots.len() < 2 {
        return Err(Error::invalid("the root sweep needs at least two levels"));
    }
    let conditions = cfg.conditions()?;
    let conditions_hold = conditions.iter().all(|c| c.1);
    let cp = CharParams::from_profile(&cfg.profile, Variant::Remark)?;
    let desc = cfg.descriptor();
    let n = cfg.profile.n;
    let (lo, hi) = bracket(&desc, n);
    let sum = desc.beta + desc.gamma1 + desc.gamma2;
    let mut rows: Vec<SteinWeissRow> = Vec::new();
    for &k in &cfg.roots {
        if k < cfg.cell_level {
            return Err(Error::invalid(format!("root level {k} is finer than the cells")));
        }
        let root = DyadicCube::new(k, &vec![0; n])?;
        let grid = Grid::new(root, (k - cfg.cell_level) as u32)?;
        let ws = WeightSystem::power(grid, desc)?;
        let ch = Characteristic::new(&ws, cp)?;
        let report = ch.sup(&CubeFamily::dyadic(root), u64::MAX)?;
        if report.overflow {
            return Err(Error::Numerical(format!("characteristic overflowed at root level {k}")));
        }
        let fam = CubeFamily::dyadic(root).resolve(&grid)?;
        let (mut far, mut far_ok) = (0usize, true);
        fam.for_each(|m| {
            let cube = m.cube.expect("dyadic member");
            let l = cube.side();
            let c = cube.center();
            let cinf = (0..n).map(|d| c[d].abs()).fold(0.0, f64::max);
            if cinf >= l {
                far += 1;
                let inv_r = if cp.r.is_infinite() { 0.0 } else { 1.0 / cp.r };
                let w = (ch.log_at(&m.bx, &m.bx) - inv_r * grid.box_volume(&m.bx).ln()).exp();
                let scaled = w * cinf.powf(sum);
                far_ok &= scaled >= lo * (1.0 - 1e-12) && scaled <= hi * (1.0 + 1e-12);
            }
        });
        let growth = rows.last().map(|r| report.value / r.value);
        rows.push(SteinWeissRow { root_level: k, value: report.value, growth, far_cubes: far, far_ok });
    }
    let (min, max) = rows.iter().fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(r.value), b.max(r.value)));
    let spread = max / min;
    let verdict = if spread < 1.0 + cfg.growth_tol {
        Verdict::Finite
    } else if rows.iter().filter_map(|r| r.growth).all(|g| g > 1.0 + cfg.growth_tol) {
        Verdict::Divergent
    } else {
        Verdict::Inconclusive
    };
    let harness = if cfg.harness_levels.is_empty() {
        None
    } else {
        Some(ratio_harness(&HarnessSpec {
            theorem: TheoremId::SteinWeiss,
            profile: cfg.profile.clone(),
            weights: WeightSpec::Power(desc),
            pairs: PairSource::new(PairKind::Indicator, cfg.seed, 6),
            levels: cfg.harness_levels.clone(),
        })?)
    };
    Ok(SteinWeissReport { conditions, conditions_hold, rows, spread, verdict, harness })
}
