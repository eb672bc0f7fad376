//! Dual-weight check: `v = w₁w₂` against the majorants `Wᵢ` of `wᵢ`.

use serde::{Deserialize, Serialize};

use super::functions::{PairKind, PairSource};
use super::ratio::{ratio_harness, HarnessSpec, RatioSummary, WeightSpec};
use crate::error::{Error, Result};
use crate::exponent::{rel_eq, rel_lt, Exponent, ExponentProfile, TheoremId};
use crate::grid::{Grid, PrefixTable};
use crate::norms::CubeFamily;
use crate::weights::{PowerDescriptor, WeightSystem};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FsDualConfig {
    /// Two-weight exponents; `r`, `s` and `a` tie the majorant exponents together.
    pub profile: ExponentProfile,
    /// Source of `w₁`, `w₂` (its `beta` is ignored).
    pub base: PowerDescriptor,
    pub r1: Exponent,
    pub s1: Exponent,
    pub r2: Exponent,
    pub s2: Exponent,
    pub levels: Vec<u32>,
    pub pairs: PairSource,
}

impl FsDualConfig {
    pub fn new(profile: ExponentProfile, base: PowerDescriptor, r: [Exponent; 2], s: [Exponent; 2]) -> Self {
        FsDualConfig {
            profile,
            base,
            r1: r[0],
            s1: s[0],
            r2: r[1],
            s2: s[1],
            levels: vec![4, 5, 6],
            pairs: PairSource::new(PairKind::RandomStep, 0, 10),
        }
    }

    /// Each exponent relation with whether it holds.
    pub fn conditions(&self) -> Result<Vec<(String, bool)>> {
        let pr = &self.profile;
        let get = |e: Option<Exponent>, name: &str| e.ok_or_else(|| Error::invalid(format!("missing exponent {name}")));
        let (s, r, a) = (get(pr.s, "s")?, get(pr.r, "r")?, get(pr.a, "a")?);
        let (zero, one) = (Exponent::integer(0), Exponent::integer(1));
        let dual = |si: Exponent| (one - si) / si;
        let mut out = Vec::new();
        for (i, (ri, si)) in [(self.r1, self.s1), (self.r2, self.s2)].into_iter().enumerate() {
            let k = i + 1;
            let inside = rel_lt(zero, si) && rel_lt(si, one);
            out.push((format!("0 < s{k} < 1"), inside));
            out.push((format!("s{k}/(1 − s{k}) < r{k}"), inside && (ri.is_infinite() || rel_lt(si / (one - si), ri))));
        }
        out.push((
            "(1 − s)/(as) = (1 − s₁)/s₁ + (1 − s₂)/s₂".into(),
            rel_eq((one - s) / (a * s), dual(self.s1) + dual(self.s2)),
        ));
        out.push(("1/r = 1/r₁ + 1/r₂".into(), rel_eq(r.recip(), self.r1.recip() + self.r2.recip())));
        Ok(out)
    }

    fn weights(&self) -> WeightSpec {
        WeightSpec::Majorant {
            base: self.base,
            r1: self.r1.value(),
            s1: self.s1.value(),
            r2: self.r2.value(),
            s2: self.s2.value(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FsDualReport {
    pub conditions: Vec<(String, bool)>,
    /// Largest per-cube ratio of `|Q|^{1/r}(avg (w₁w₂)^{as/(1−s)})^{(1−s)/(as)}`
    /// to `Π|Q|^{1/rᵢ}(avg wᵢ^{sᵢ/(1−sᵢ)})^{(1−sᵢ)/sᵢ}`; at most 1 when the split holds.
    pub split_ratio: f64,
    pub split_ok: bool,
    pub harness: RatioSummary,
    pub stable: bool,
}

fn inv(e: Exponent) -> f64 {
    if e.is_infinite() {
        0.0
    } else {
        1.0 / e.value()
    }
}

/// Check the relations, the per-cube Hölder split on the finest level, then run the
/// two-weight harness with `v = w₁w₂` and majorant weights.
pub fn fs_dual_check(cfg: &FsDualConfig) -> Result<FsDualReport> {
    cfg.profile.validate(TheoremId::TwoWeight)?;
    let conditions = cfg.conditions()?;
    let bad: Vec<&str> = conditions.iter().filter(|c| !c.1).map(|c| c.0.as_str()).collect();
    if !bad.is_empty() {
        return Err(Error::hypothesis(bad.join(", ")));
    }
    let level = *cfg.levels.iter().max().ok_or_else(|| Error::invalid("dual check needs at least one level"))?;
    let grid = Grid::unit(cfg.profile.n, level)?;
    let ws = WeightSystem::power(grid, cfg.base)?;
    let (s, a) = (cfg.profile.s.expect("validated").value(), cfg.profile.a.expect("validated").value());
    let inv_r = inv(cfg.profile.r.expect("validated"));
    let e = a * s / (1.0 - s);
    let joint = PrefixTable::of_power(&ws.w1.mul(&ws.w2)?, e)?;
    let parts = [(&ws.w1, cfg.r1, cfg.s1), (&ws.w2, cfg.r2, cfg.s2)]
        .map(|(w, r, si)| {
            let si = si.value();
            let ei = si / (1.0 - si);
            PrefixTable::of_power(w, ei).map(|t| (t, inv(r), ei))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut split_ratio = 0.0f64;
    CubeFamily::dyadic(grid.root()).resolve(&grid)?.for_each(|m| {
        let vol = grid.box_volume(&m.bx);
        let lhs = vol.powf(inv_r) * joint.average(&m.bx).powf(1.0 / e);
        let rhs: f64 = parts.iter().map(|(t, ir, ei)| vol.powf(*ir) * t.average(&m.bx).powf(1.0 / ei)).product();
        split_ratio = split_ratio.max(lhs / rhs);
    });
    let harness = ratio_harness(&HarnessSpec {
        theorem: TheoremId::TwoWeight,
        profile: cfg.profile.clone(),
        weights: cfg.weights(),
        pairs: cfg.pairs.clone(),
        levels: cfg.levels.clone(),
    })?;
    let stable = harness.stable;
    Ok(FsDualReport { conditions, split_ratio, split_ok: split_ratio <= 1.0 + 1e-12, harness, stable })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> Exponent {
        s.parse().unwrap()
    }

    pub(crate) fn profile() -> ExponentProfile {
        // 1/s = 1/p + 1/r − α/n with p = 5/8, r = 10/3, α = 1/2; (1 − s)/(as) = 20/51.
        ExponentProfile {
            n: 1,
            alpha: Some(e("1/2")),
            q1: Some(e("6/5")),
            q2: Some(e("6/5")),
            p: Some(e("5/8")),
            s: Some(e("5/7")),
            t: Some(e("24/35")),
            r: Some(e("10/3")),
            a: Some(e("51/50")),
            ..Default::default()
        }
    }

    fn base() -> PowerDescriptor {
        PowerDescriptor { beta: 0.0, gamma1: 0.1, gamma2: 0.1, center: [0.0; 2] }
    }

    #[test]
    fn split_holds_for_power_weights() {
        let mut cfg = FsDualConfig::new(profile(), base(), [e("20/3"); 2], [e("51/61"); 2]);
        cfg.levels = vec![3, 4];
        cfg.pairs = PairSource::new(PairKind::RandomStep, 0, 2);
        let r = fs_dual_check(&cfg).unwrap();
        assert!(r.conditions.iter().all(|c| c.1));
        assert!(r.split_ok, "{}", r.split_ratio);
        assert_eq!(r.harness.max_by_level.len(), 2);
    }

    #[test]
    fn relation_failure_is_named() {
        let cfg = FsDualConfig::new(profile(), base(), [e("20/3"), e("10")], [e("51/61"); 2]);
        let msg = fs_dual_check(&cfg).unwrap_err().to_string();
        assert!(msg.contains("1/r = 1/r₁ + 1/r₂"), "{msg}");
        let cfg = FsDualConfig::new(profile(), base(), [e("20/3"); 2], [e("3/2"), e("51/61")]);
        let msg = fs_dual_check(&cfg).unwrap_err().to_string();
        assert!(msg.contains("0 < s1 < 1"), "{msg}");
    }
}
