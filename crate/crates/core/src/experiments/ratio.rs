//! Refinement-stability harness for the boundedness statements.
//!
//! For each test pair and refinement level the harness evaluates the left
//! and right sides of one estimate and records their ratio. A bounded
//! operator shows no growth of the worst ratio under refinement.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::functions::{random_step, PairSource, TestPair};
use crate::error::{Error, Result};
use crate::exponent::{ExponentProfile, TheoremId};
use crate::grid::{DyadicCube, Grid, GridFunction};
use crate::norms::{joint_morrey, morrey_norm, CubeFamily};
use crate::operators::{b_alpha, i_alpha, m_alpha_bilinear, KernelSpec};
use crate::rng;
use crate::weights::{
    char_one_weight, char_two_weight, fs_majorant, CharParams, PowerDescriptor, Variant, WeightSystem,
};

/// Allowed growth of the worst ratio from one level to the next.
pub const STABILITY_FACTOR: f64 = 1.05;

/// How the weights are produced on each grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightSpec {
    Unit,
    Power(PowerDescriptor),
    /// Log-uniform random step weights drawn at the base depth and refined.
    Random { seed: u64, index: u64, base_depth: u32 },
    /// `v = w₁w₂` with `wᵢ = |x−c|^{γᵢ}`, paired with the majorants
    /// `Wᵢ(x) = sup_{x∈Q} |Q|^{1/rᵢ}(avg_Q wᵢ^{sᵢ/(1−sᵢ)})^{(1−sᵢ)/sᵢ}`.
    Majorant { base: PowerDescriptor, r1: f64, s1: f64, r2: f64, s2: f64 },
}

impl WeightSpec {
    /// The weight system on `grid`. One-weight estimates use `v = w₁w₂`.
    pub fn system(&self, grid: &Grid, one_weight: bool) -> Result<WeightSystem> {
        let ws = match self {
            WeightSpec::Unit => WeightSystem::unit(*grid),
            WeightSpec::Power(d) => WeightSystem::power(*grid, *d)?,
            WeightSpec::Random { seed, index, base_depth } => {
                let base = Grid::new(grid.root(), (*base_depth).min(grid.depth()))?;
                let extra = grid.depth() - base.depth();
                let mut r = rng::stream(*seed, rng::key("weights", *index));
                let v = random_step(&base, &mut r)?.refine(extra)?;
                let w1 = random_step(&base, &mut r)?.refine(extra)?;
                let w2 = random_step(&base, &mut r)?.refine(extra)?;
                WeightSystem::new(v, w1, w2)?
            }
            WeightSpec::Majorant { base, r1, s1, r2, s2 } => {
                let ws = WeightSystem::power(*grid, *base)?;
                let family = CubeFamily::dyadic(grid.root());
                let big1 = fs_majorant(&ws.w1, *r1, *s1, &family)?;
                let big2 = fs_majorant(&ws.w2, *r2, *s2, &family)?;
                return WeightSystem::new(ws.w1.mul(&ws.w2)?, big1, big2);
            }
        };
        if one_weight {
            WeightSystem::product(ws.w1, ws.w2)
        } else {
            Ok(ws)
        }
    }
}

/// One harness run: an estimate, its exponents, weights, inputs and levels.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HarnessSpec {
    pub theorem: TheoremId,
    pub profile: ExponentProfile,
    pub weights: WeightSpec,
    pub pairs: PairSource,
    pub levels: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRecord {
    pub theorem: String,
    pub params: String,
    pub pair: String,
    pub level: u32,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

impl RatioRecord {
    /// `lhs/rhs`, with `0/0 = 0`; a positive left side over a zero right side is an error.
    pub fn new(theorem: &str, params: &str, pair: &str, level: u32, lhs: f64, rhs: f64) -> Result<Self> {
        let ratio = if lhs == 0.0 {
            0.0
        } else if rhs > 0.0 {
            lhs / rhs
        } else {
            return Err(Error::Numerical(format!("{theorem} on {pair}: lhs = {lhs} over rhs = {rhs}")));
        };
        Ok(RatioRecord {
            theorem: theorem.to_string(),
            params: params.to_string(),
            pair: pair.to_string(),
            level,
            lhs,
            rhs,
            ratio,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioSummary {
    pub records: Vec<RatioRecord>,
    /// `(level, max ratio over pairs)` in level order.
    pub max_by_level: Vec<(u32, f64)>,
    /// Largest `max(L+1)/max(L)` over consecutive levels.
    pub worst_growth: f64,
    pub stable: bool,
}

fn profile_label(p: &ExponentProfile) -> String {
    let mut parts = vec![format!("n={}", p.n)];
    let entries = [
        ("alpha", p.alpha),
        ("p1", p.p1),
        ("q1", p.q1),
        ("p2", p.p2),
        ("q2", p.q2),
        ("p", p.p),
        ("q", p.q),
        ("s", p.s),
        ("t", p.t),
        ("r", p.r),
        ("a", p.a),
    ];
    for (name, v) in entries {
        if let Some(v) = v {
            parts.push(format!("{name}={v}"));
        }
    }
    parts.join(" ")
}

fn value(p: &ExponentProfile, name: &str) -> Result<f64> {
    let v = match name {
        "alpha" => p.alpha,
        "p1" => p.p1,
        "q1" => p.q1,
        "p2" => p.p2,
        "q2" => p.q2,
        "p" => p.p,
        "s" => p.s,
        "t" => p.t,
        "r" => p.r,
        _ => None,
    };
    v.map(|x| x.value()).ok_or_else(|| Error::invalid(format!("missing exponent {name}")))
}

/// Both sides of the estimate for one pair on one grid.
fn sides(spec: &HarnessSpec, ws: Option<&WeightSystem>, pair: &TestPair, family: &CubeFamily) -> Result<(f64, f64)> {
    let pr = spec.profile.clone().with_combined();
    let n = pr.n;
    let v = |name: &str| value(&pr, name);
    let (f, g) = (&pair.f, &pair.g);
    let norm = |h: &GridFunction, p: f64, q: f64| morrey_norm(h, p, q, family).map(|r| r.value);
    let weighted_rhs = |ws: &WeightSystem| -> Result<f64> {
        Ok(joint_morrey(&f.mul(&ws.w1)?, &g.mul(&ws.w2)?, v("p")?, v("q1")?, v("q2")?, family)?.value)
    };
    match spec.theorem {
        TheoremId::Adams => {
            let i = i_alpha(f, &KernelSpec::new(v("alpha")?, n)?)?;
            Ok((norm(i.function(), v("s")?, v("t")?)?, norm(f, v("p")?, value(&pr, "q").or_else(|_| v("q1"))?)?))
        }
        TheoremId::Unweighted | TheoremId::UnweightedHarmonic => {
            let b = b_alpha(f, g, &KernelSpec::new(v("alpha")?, n)?)?;
            Ok((norm(b.function(), v("s")?, v("t")?)?, norm(f, v("p1")?, v("q1")?)? * norm(g, v("p2")?, v("q2")?)?))
        }
        TheoremId::Endpoint => {
            let b = b_alpha(f, g, &KernelSpec::new(v("alpha")?, n)?)?;
            Ok((norm(b.function(), v("p2")?, v("q2")?)?, norm(f, v("p1")?, v("q1")?)? * norm(g, v("p2")?, v("q2")?)?))
        }
        TheoremId::ProductEstimate => {
            let i = i_alpha(f, &KernelSpec::new(v("alpha")?, n)?)?;
            let gi = g.mul(i.function())?;
            Ok((norm(&gi, v("s")?, v("t")?)?, norm(f, v("p1")?, v("q1")?)? * norm(g, v("p2")?, v("q2")?)?))
        }
        TheoremId::TwoWeight | TheoremId::OneWeight => {
            let ws = ws.expect("weighted estimate has weights");
            let s = v("s")?;
            let (variant, one) = if spec.theorem == TheoremId::TwoWeight {
                (Variant::two_weight_for(s), false)
            } else {
                (Variant::one_weight_for(s), true)
            };
            let cp = CharParams::from_profile(&pr, variant)?;
            let ch = if one { char_one_weight(ws, &cp, family)? } else { char_two_weight(ws, &cp, family)? };
            if ch.overflow {
                return Err(Error::Numerical(format!("{} characteristic overflowed", spec.theorem)));
            }
            let b = b_alpha(f, g, &KernelSpec::new(v("alpha")?, n)?)?;
            let bv = b.function().mul(&ws.v)?;
            Ok((norm(&bv, s, v("t")?)?, ch.value * weighted_rhs(ws)?))
        }
        TheoremId::Olsen => {
            let ws = ws.expect("weighted estimate has weights");
            let t = v("t")?;
            let b = b_alpha(f, g, &KernelSpec::new(v("alpha")?, n)?)?;
            let bv = b.function().mul(&ws.v)?;
            let vn = norm(&ws.v, v("r")?, t / (1.0 - t))?;
            Ok((norm(&bv, v("s")?, t)?, vn * joint_morrey(f, g, v("p")?, v("q1")?, v("q2")?, family)?.value))
        }
        TheoremId::SteinWeiss => {
            let ws = ws.expect("weighted estimate has weights");
            let b = b_alpha(f, g, &KernelSpec::new(n as f64 - v("alpha")?, n)?)?;
            let bv = b.function().mul(&ws.v)?;
            let rhs = norm(&f.mul(&ws.w1)?, v("p1")?, v("q1")?)? * norm(&g.mul(&ws.w2)?, v("p2")?, v("q2")?)?;
            Ok((norm(&bv, v("s")?, v("t")?)?, rhs))
        }
        TheoremId::Necessity => {
            let ws = ws.expect("weighted estimate has weights");
            let m = m_alpha_bilinear(f, g, v("alpha")?, family)?;
            let mv = m.function().mul(&ws.v)?;
            Ok((norm(&mv, v("s")?, v("t")?)?, weighted_rhs(ws)?))
        }
    }
}

fn is_weighted(t: TheoremId) -> bool {
    matches!(
        t,
        TheoremId::TwoWeight | TheoremId::OneWeight | TheoremId::Olsen | TheoremId::SteinWeiss | TheoremId::Necessity
    )
}

/// Run the harness on the unit cube at each level; norms and characteristics use the dyadic family.
pub fn ratio_harness(spec: &HarnessSpec) -> Result<RatioSummary> {
    spec.profile.validate(spec.theorem)?;
    if spec.levels.is_empty() {
        return Err(Error::invalid("ratio harness needs at least one level"));
    }
    let mut levels = spec.levels.clone();
    levels.sort_unstable();
    levels.dedup();
    let params = profile_label(&spec.profile);
    let theorem = spec.theorem.name();
    let per_level: Vec<Vec<RatioRecord>> = levels
        .par_iter()
        .map(|&level| {
            let grid = Grid::new(DyadicCube::unit(spec.profile.n), level)?;
            let family = CubeFamily::dyadic(grid.root());
            let ws = if is_weighted(spec.theorem) {
                Some(spec.weights.system(&grid, spec.theorem == TheoremId::OneWeight)?)
            } else {
                None
            };
            spec.pairs
                .pairs(&grid)?
                .par_iter()
                .map(|pair| {
                    let (lhs, rhs) = sides(spec, ws.as_ref(), pair, &family)?;
                    RatioRecord::new(theorem, &params, &pair.id, level, lhs, rhs)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let max_by_level: Vec<(u32, f64)> = levels
        .iter()
        .zip(&per_level)
        .map(|(&l, recs)| (l, recs.iter().map(|r| r.ratio).fold(0.0, f64::max)))
        .collect();
    let worst_growth = max_by_level
        .windows(2)
        .map(|w| if w[0].1 > 0.0 { w[1].1 / w[0].1 } else if w[1].1 > 0.0 { f64::INFINITY } else { 1.0 })
        .fold(0.0, f64::max);
    Ok(RatioSummary {
        records: per_level.into_iter().flatten().collect(),
        stable: worst_growth <= STABILITY_FACTOR,
        max_by_level,
        worst_growth,
    })
}
