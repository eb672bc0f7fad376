//! Characteristic constants as suprema over cubes or nested cube pairs.
//!
//! Every quantity is evaluated in log space as `A(Q) + B(Q′)`, where `A`
//! depends only on the inner cube and `B` only on the outer one. On dyadic
//! families the best inner cube under each outer cube is a subtree maximum,
//! so all nested pairs are covered in one bottom-up pass. Other families scan
//! pairs explicitly, coarsest outer cubes first, up to the pair budget.

use std::cmp::Ordering;
use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::system::WeightSystem;
use crate::error::{Error, Result};
use crate::exponent::{ExponentProfile, RELATION_TOL};
use crate::grid::{AlignedBox, DyadicCube, Grid, GridFunction};
use crate::means::PowerMean;
use crate::norms::{CubeFamily, Member};

/// Logarithms above this report `+∞` with the overflow flag set.
pub const LOG_OVERFLOW: f64 = 700.0;

/// Default cap on explicitly scanned nested pairs.
pub const DEFAULT_PAIR_BUDGET: u64 = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    TwoWeightSLt1,
    TwoWeightSGe1,
    Remark,
    OneWeightSLt1,
    OneWeightSGe1,
    Testing,
}

impl Variant {
    pub fn two_weight_for(s: f64) -> Variant {
        if s < 1.0 {
            Variant::TwoWeightSLt1
        } else {
            Variant::TwoWeightSGe1
        }
    }

    pub fn one_weight_for(s: f64) -> Variant {
        if s < 1.0 {
            Variant::OneWeightSLt1
        } else {
            Variant::OneWeightSGe1
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Variant::TwoWeightSLt1 => "two-weight-s-lt-1",
            Variant::TwoWeightSGe1 => "two-weight-s-ge-1",
            Variant::Remark => "remark",
            Variant::OneWeightSLt1 => "one-weight-s-lt-1",
            Variant::OneWeightSGe1 => "one-weight-s-ge-1",
            Variant::Testing => "testing",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Variant::TwoWeightSLt1,
            Variant::TwoWeightSGe1,
            Variant::Remark,
            Variant::OneWeightSLt1,
            Variant::OneWeightSGe1,
            Variant::Testing,
        ]
        .into_iter()
        .find(|v| v.name() == s)
        .ok_or_else(|| Error::invalid(format!("unknown characteristic variant {s:?}")))
    }
}

/// Exponents of one characteristic. `r = ∞` drops the `|Q′|^{1/r}` factor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharParams {
    pub variant: Variant,
    pub alpha: f64,
    pub n: usize,
    pub q1: f64,
    pub q2: f64,
    pub q: f64,
    pub p: f64,
    pub s: f64,
    pub t: f64,
    pub r: f64,
    pub a: f64,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= RELATION_TOL * a.abs().max(b.abs()).max(1.0)
}

/// `x′ = x/(x−1)`.
fn conj(x: f64) -> f64 {
    x / (x - 1.0)
}

impl CharParams {
    /// Parameters with `q` from `1/q = 1/q₁ + 1/q₂`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(variant: Variant, alpha: f64, n: usize, q1: f64, q2: f64, p: f64, s: f64, t: f64, r: f64, a: f64) -> Self {
        CharParams { variant, alpha, n, q1, q2, q: 1.0 / (1.0 / q1 + 1.0 / q2), p, s, t, r, a }
    }

    /// Read the entries of a profile; `r` defaults to `∞` and `a` to 1.
    pub fn from_profile(pr: &ExponentProfile, variant: Variant) -> Result<Self> {
        let get = |e: Option<crate::exponent::Exponent>, name: &str| {
            e.map(|x| x.value()).ok_or_else(|| Error::invalid(format!("missing exponent {name}")))
        };
        let pr = pr.clone().with_combined();
        Ok(CharParams {
            variant,
            alpha: pr.alpha.map_or(0.0, |x| x.value()),
            n: pr.n,
            q1: get(pr.q1, "q1")?,
            q2: get(pr.q2, "q2")?,
            q: get(pr.q, "q")?,
            p: pr.p.map_or(f64::INFINITY, |x| x.value()),
            s: pr.s.map_or(1.0, |x| x.value()),
            t: pr.t.map_or(1.0, |x| x.value()),
            r: pr.r.map_or(f64::INFINITY, |x| x.value()),
            a: pr.a.map_or(1.0, |x| x.value()),
        })
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    /// Check the relations of the variant; the error lists every failure.
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        let (q1, q2, s, t, r, a) = (self.q1, self.q2, self.s, self.t, self.r, self.a);
        if !(q1 > 1.0 && q1.is_finite() && q2 > 1.0 && q2.is_finite()) {
            bad.push("1 < q₁, q₂ < ∞".to_string());
        }
        if !close(1.0 / self.q, 1.0 / q1 + 1.0 / q2) {
            bad.push("1/q = 1/q₁ + 1/q₂".into());
        }
        if !(r > 0.0) {
            bad.push("r > 0".into());
        }
        let weighted = !matches!(self.variant, Variant::Testing | Variant::Remark);
        if weighted {
            if !close(t / s, self.q / self.p) {
                bad.push("t/s = q/p".into());
            }
            if !(t > 0.0 && t <= 1.0) {
                bad.push("0 < t ≤ 1".into());
            }
        }
        let a_cap = q1.min(q2);
        match self.variant {
            Variant::TwoWeightSLt1 | Variant::Remark => {
                if !(s > 0.0 && s < 1.0) {
                    bad.push("0 < s < 1".into());
                }
                if !(s / (1.0 - s) < r) {
                    bad.push("s/(1−s) < r".into());
                }
                if !(a > 1.0 && a < a_cap.min(r * (1.0 - s) / s)) {
                    bad.push("1 < a < min(r(1−s)/s, q₁, q₂)".into());
                }
            }
            Variant::TwoWeightSGe1 => {
                if !(s >= 1.0) {
                    bad.push("s ≥ 1".into());
                }
                if !(a > 1.0 && a < a_cap) {
                    bad.push("1 < a < min(q₁, q₂)".into());
                }
            }
            Variant::OneWeightSLt1 | Variant::OneWeightSGe1 => {
                let small = self.variant == Variant::OneWeightSLt1;
                if small && !(s > 0.0 && s < 1.0) {
                    bad.push("0 < s < 1".into());
                }
                if !small && !(s >= 1.0) {
                    bad.push("s ≥ 1".into());
                }
                if !(a > 1.0) {
                    bad.push("a > 1".into());
                }
            }
            Variant::Testing => {}
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::hypothesis(format!("{}: {}", self.variant.name(), bad.join("; "))))
        }
    }

    fn inv_r(&self) -> f64 {
        if self.r.is_infinite() {
            0.0
        } else {
            1.0 / self.r
        }
    }

    /// Exponent of `|Q|/|Q′|` in the pair variants.
    fn ratio_exponent(&self) -> f64 {
        let (a, s) = (self.a, self.s);
        match self.variant {
            Variant::TwoWeightSLt1 | Variant::OneWeightSLt1 => (1.0 - s) / (a * s),
            _ => (1.0 - a * s) / (a * s),
        }
    }
}

/// A supremum with its attaining pair (`inner == outer` for single-cube sups).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CharacteristicReport {
    pub value: f64,
    pub log_value: f64,
    pub overflow: bool,
    pub inner: Member,
    pub outer: Member,
    pub pairs: u64,
}

impl CharacteristicReport {
    fn from_log(log_value: f64, inner: Member, outer: Member, pairs: u64) -> Self {
        let overflow = log_value > LOG_OVERFLOW;
        let value = if overflow { f64::INFINITY } else { log_value.exp() };
        CharacteristicReport { value, log_value, overflow, inner, outer, pairs }
    }
}

/// `ln (avg w^{−b})^{1/b}` for `b > 0`.
struct NegMean(PowerMean);

impl NegMean {
    fn new(w: &GridFunction, b: f64) -> Result<Self> {
        // (avg w^{−b})^{1/b} = 1 / (avg w^{−b})^{−1/b}: the power mean of exponent −b, inverted.
        Ok(NegMean(PowerMean::new(w, -b)?))
    }

    fn log(&self, bx: &AlignedBox) -> f64 {
        -self.0.log_mean(bx)
    }
}

/// Separable log-space evaluator of one characteristic on one weight system.
pub struct Characteristic {
    cp: CharParams,
    grid: Grid,
    v: PowerMean,
    w1: NegMean,
    w2: NegMean,
    pair: bool,
}

impl Characteristic {
    pub fn new(ws: &WeightSystem, cp: CharParams) -> Result<Self> {
        cp.validate()?;
        if ws.grid().dim() != cp.n {
            return Err(Error::GridMismatch(format!("weights of dimension {} with n = {}", ws.grid().dim(), cp.n)));
        }
        let (b1, b2) = match cp.variant {
            Variant::TwoWeightSLt1 | Variant::TwoWeightSGe1 | Variant::Remark => {
                (conj(cp.q1 / cp.a), conj(cp.q2 / cp.a))
            }
            _ => (conj(cp.q1), conj(cp.q2)),
        };
        let v = match cp.variant {
            Variant::Remark => PowerMean::new(&ws.v, cp.a * cp.s / (1.0 - cp.s))?,
            Variant::Testing => PowerMean::min(&ws.v)?,
            _ => PowerMean::holder_dual(&ws.v, cp.t)?,
        };
        if matches!(cp.variant, Variant::OneWeightSLt1 | Variant::OneWeightSGe1) {
            for ((v, a), b) in ws.v.values().iter().zip(ws.w1.values()).zip(ws.w2.values()) {
                if !close(*v, a * b) {
                    return Err(Error::hypothesis("one-weight characteristic needs v = w₁w₂"));
                }
            }
        }
        let pair = matches!(
            cp.variant,
            Variant::TwoWeightSLt1 | Variant::TwoWeightSGe1 | Variant::OneWeightSLt1 | Variant::OneWeightSGe1
        );
        Ok(Characteristic {
            cp,
            grid: *ws.grid(),
            v,
            w1: NegMean::new(&ws.w1, b1)?,
            w2: NegMean::new(&ws.w2, b2)?,
            pair,
        })
    }

    pub fn params(&self) -> &CharParams {
        &self.cp
    }

    /// Whether the supremum runs over nested pairs rather than single cubes.
    pub fn is_pair(&self) -> bool {
        self.pair
    }

    fn log_vol(&self, bx: &AlignedBox) -> f64 {
        self.grid.box_volume(bx).ln()
    }

    /// Inner-cube part of the log quantity.
    pub fn inner_part(&self, bx: &AlignedBox) -> f64 {
        let lv = self.v.log_mean(bx);
        if self.pair {
            self.cp.ratio_exponent() * self.log_vol(bx) + lv
        } else {
            lv
        }
    }

    /// Outer-cube part of the log quantity.
    pub fn outer_part(&self, bx: &AlignedBox) -> f64 {
        let r_part = match self.cp.variant {
            Variant::OneWeightSLt1 | Variant::OneWeightSGe1 => 0.0,
            _ => self.cp.inv_r(),
        };
        let e = if self.pair { self.cp.ratio_exponent() } else { 0.0 };
        (r_part - e) * self.log_vol(bx) + self.w1.log(bx) + self.w2.log(bx)
    }

    /// The log quantity at one pair (`inner ⊆ outer`; equal for single-cube variants).
    pub fn log_at(&self, inner: &AlignedBox, outer: &AlignedBox) -> f64 {
        self.inner_part(inner) + self.outer_part(outer)
    }

    /// Supremum over the family; pair variants scan at most `budget` pairs
    /// unless the family is dyadic.
    pub fn sup(&self, family: &CubeFamily, budget: u64) -> Result<CharacteristicReport> {
        let fam = family.resolve(&self.grid)?;
        let members = fam.to_vec();
        if let Some(m) = members.iter().find(|m| m.bx.is_clipped()) {
            return Err(Error::ClippedCube(format!("{m}")));
        }
        if !self.pair {
            let best = fam.par_max_by(|m| self.log_at(&m.bx, &m.bx));
            return Ok(CharacteristicReport::from_log(best.value, best.member, best.member, fam.len()));
        }
        let inner: Vec<f64> = members.par_iter().map(|m| self.inner_part(&m.bx)).collect();
        let outer: Vec<f64> = members.par_iter().map(|m| self.outer_part(&m.bx)).collect();
        if fam.dyadic_members().is_some() {
            Ok(dyadic_pair_sup(&members, &inner, &outer))
        } else {
            Ok(scanned_pair_sup(&members, &inner, &outer, budget))
        }
    }
}

/// `(value, inner index, outer index)`, ordered so that the maximum wins and
/// ties go to the smaller outer member, then the smaller inner member.
#[derive(Clone, Copy)]
struct Cand {
    value: f64,
    inner: usize,
    outer: usize,
}

fn better(a: Cand, b: Cand, members: &[Member]) -> Cand {
    match b.value.total_cmp(&a.value) {
        Ordering::Greater => b,
        Ordering::Less => a,
        Ordering::Equal => {
            let ka = (members[a.outer], members[a.inner]);
            let kb = (members[b.outer], members[b.inner]);
            if kb < ka {
                b
            } else {
                a
            }
        }
    }
}

fn dyadic_pair_sup(members: &[Member], inner: &[f64], outer: &[f64]) -> CharacteristicReport {
    let index: HashMap<DyadicCube, usize> =
        members.iter().enumerate().map(|(i, m)| (m.cube.expect("dyadic member"), i)).collect();
    // Best inner index within each subtree; members run coarse to fine, so walk backwards.
    let mut best_sub: Vec<usize> = (0..members.len()).collect();
    let mut size: Vec<u64> = vec![1; members.len()];
    for i in (0..members.len()).rev() {
        let cube = members[i].cube.expect("dyadic member");
        for child in cube.children() {
            if let Some(&j) = index.get(&child) {
                let (a, b) = (best_sub[i], best_sub[j]);
                let pick = match inner[b].total_cmp(&inner[a]) {
                    Ordering::Greater => b,
                    Ordering::Less => a,
                    Ordering::Equal => {
                        if members[b] < members[a] {
                            b
                        } else {
                            a
                        }
                    }
                };
                best_sub[i] = pick;
                size[i] += size[j];
            }
        }
    }
    let mut best = Cand { value: f64::NEG_INFINITY, inner: 0, outer: 0 };
    let mut first = true;
    for o in 0..members.len() {
        let i = best_sub[o];
        let c = Cand { value: inner[i] + outer[o], inner: i, outer: o };
        best = if first { c } else { better(best, c, members) };
        first = false;
    }
    let pairs = size.iter().sum();
    CharacteristicReport::from_log(best.value, members[best.inner], members[best.outer], pairs)
}

fn scanned_pair_sup(members: &[Member], inner: &[f64], outer: &[f64], budget: u64) -> CharacteristicReport {
    let mut best: Option<Cand> = None;
    let mut pairs = 0u64;
    'outer: for (o, mo) in members.iter().enumerate() {
        for (i, mi) in members.iter().enumerate() {
            if !mo.bx.contains_box(&mi.bx) {
                continue;
            }
            if pairs == budget {
                break 'outer;
            }
            pairs += 1;
            let c = Cand { value: inner[i] + outer[o], inner: i, outer: o };
            best = Some(match best {
                None => c,
                Some(b) => better(b, c, members),
            });
        }
    }
    let b = best.expect("every cube contains itself");
    CharacteristicReport::from_log(b.value, members[b.inner], members[b.outer], pairs)
}

fn check_variant(cp: &CharParams, allowed: &[Variant], op: &str) -> Result<()> {
    if allowed.contains(&cp.variant) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{op} does not accept variant {}", cp.variant.name())))
    }
}

/// Nested-pair two-weight characteristic, with the `s < 1` or `s ≥ 1` ratio exponent.
pub fn char_two_weight(ws: &WeightSystem, cp: &CharParams, family: &CubeFamily) -> Result<CharacteristicReport> {
    check_variant(cp, &[Variant::TwoWeightSLt1, Variant::TwoWeightSGe1], "char_two_weight")?;
    Characteristic::new(ws, *cp)?.sup(family, DEFAULT_PAIR_BUDGET)
}

/// Single-cube constant with `v`-power `as/(1−s)`; dominates the `s < 1` pair form.
pub fn char_remark(ws: &WeightSystem, cp: &CharParams, family: &CubeFamily) -> Result<CharacteristicReport> {
    if cp.s >= 1.0 {
        return Err(Error::hypothesis(format!("remark: 0 < s < 1 (s = {})", cp.s)));
    }
    Characteristic::new(ws, cp.with_variant(Variant::Remark))?.sup(family, DEFAULT_PAIR_BUDGET)
}

/// One-weight pair characteristic (`v = w₁w₂`, dual exponents `qᵢ′`, no `r` factor).
pub fn char_one_weight(ws: &WeightSystem, cp: &CharParams, family: &CubeFamily) -> Result<CharacteristicReport> {
    check_variant(cp, &[Variant::OneWeightSLt1, Variant::OneWeightSGe1], "char_one_weight")?;
    Characteristic::new(ws, *cp)?.sup(family, DEFAULT_PAIR_BUDGET)
}

/// `sup_Q |Q|^{1/r} (inf_Q v) Π (avg_Q wᵢ^{−qᵢ′})^{1/qᵢ′}`.
pub fn char_testing(ws: &WeightSystem, cp: &CharParams, family: &CubeFamily) -> Result<CharacteristicReport> {
    Characteristic::new(ws, cp.with_variant(Variant::Testing))?.sup(family, DEFAULT_PAIR_BUDGET)
}

/// `sup_Q (avg_Q w)(avg_Q w^{1−p′})^{p−1}`.
pub fn ap_characteristic(w: &GridFunction, p: f64, family: &CubeFamily) -> Result<CharacteristicReport> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::invalid(format!("A_p needs 1 < p < ∞ (p = {p})")));
    }
    let m1 = PowerMean::new(w, 1.0)?;
    let md = PowerMean::new(w, 1.0 - conj(p))?;
    let fam = family.resolve(w.grid())?;
    // (p−1)·ln avg w^{1−p′} = (p−1)(1−p′)·ln M_{1−p′} = −ln M_{1−p′}.
    let best = fam.par_max_by(|m| m1.log_mean(&m.bx) - md.log_mean(&m.bx));
    Ok(CharacteristicReport::from_log(best.value, best.member, best.member, fam.len()))
}

/// `W(x) = sup_{x∈Q} |Q|^{1/r} (avg_Q w^{s/(1−s)})^{(1−s)/s}`.
pub fn fs_majorant(w: &GridFunction, r: f64, s: f64, family: &CubeFamily) -> Result<GridFunction> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::invalid(format!("majorant exponent s = {s} outside (0,1)")));
    }
    if !(r > 0.0) {
        return Err(Error::invalid(format!("majorant exponent r = {r} must be positive")));
    }
    let pm = PowerMean::new(w, s / (1.0 - s))?;
    let fam = family.resolve(w.grid())?;
    let inv_r = if r.is_infinite() { 0.0 } else { 1.0 / r };
    let grid = *w.grid();
    let out = crate::operators::sup_paint(&fam, |m| (inv_r * grid.box_volume(&m.bx).ln() + pm.log_mean(&m.bx)).exp());
    GridFunction::inferred(grid, out)
}
