//! Exponents with optional exact rational value, and per-theorem hypothesis checks.
//!
//! Exponents parsed from decimal or `a/b` strings keep an exact rational so
//! that relations such as `t/s = q/p` can be validated without rounding.
//! Arithmetic propagates exactness until an operation overflows `i64`.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when at least one side of a relation is inexact.
pub const RELATION_TOL: f64 = 1e-12;

type Q = Ratio<i64>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponent {
    value: f64,
    exact: Option<Q>,
}

impl Exponent {
    pub const INFINITY: Exponent = Exponent { value: f64::INFINITY, exact: None };

    pub fn from_f64(value: f64) -> Self {
        Exponent { value, exact: None }
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        let q = Q::new(num, den);
        Exponent { value: q_to_f64(q), exact: Some(q) }
    }

    pub fn integer(n: i64) -> Self {
        Exponent::ratio(n, 1)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact(&self) -> Option<Ratio<i64>> {
        self.exact
    }

    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }

    /// `1/x`, with `1/∞ = 0` exactly.
    pub fn recip(self) -> Self {
        if self.is_infinite() {
            return Exponent::integer(0);
        }
        match self.exact {
            Some(q) if !q.is_zero() => Exponent::from_q(q.recip()),
            _ => Exponent::from_f64(1.0 / self.value),
        }
    }

    /// Hölder conjugate `x/(x−1)`.
    pub fn conjugate(self) -> Self {
        if self.is_infinite() {
            return Exponent::integer(1);
        }
        self / (self - Exponent::integer(1))
    }

    fn from_q(q: Q) -> Self {
        Exponent { value: q_to_f64(q), exact: Some(q) }
    }

    fn combine(
        self,
        rhs: Self,
        f: fn(f64, f64) -> f64,
        g: fn(&Q, &Q) -> Option<Q>,
    ) -> Self {
        match (self.exact, rhs.exact) {
            (Some(a), Some(b)) => match g(&a, &b) {
                Some(q) => Exponent::from_q(q),
                None => Exponent::from_f64(f(self.value, rhs.value)),
            },
            _ => Exponent::from_f64(f(self.value, rhs.value)),
        }
    }
}

fn q_to_f64(q: Q) -> f64 {
    q.to_f64().unwrap_or_else(|| *q.numer() as f64 / *q.denom() as f64)
}

impl std::ops::Add for Exponent {
    type Output = Exponent;
    fn add(self, rhs: Self) -> Self {
        self.combine(rhs, |a, b| a + b, |a, b| a.checked_add(b))
    }
}

impl std::ops::Sub for Exponent {
    type Output = Exponent;
    fn sub(self, rhs: Self) -> Self {
        self.combine(rhs, |a, b| a - b, |a, b| a.checked_sub(b))
    }
}

impl std::ops::Mul for Exponent {
    type Output = Exponent;
    fn mul(self, rhs: Self) -> Self {
        self.combine(rhs, |a, b| a * b, |a, b| a.checked_mul(b))
    }
}

impl std::ops::Div for Exponent {
    type Output = Exponent;
    fn div(self, rhs: Self) -> Self {
        self.combine(rhs, |a, b| a / b, |a, b| if b.is_zero() { None } else { a.checked_div(b) })
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            return write!(f, "inf");
        }
        match self.exact {
            Some(q) if *q.denom() == 1 => write!(f, "{}", q.numer()),
            Some(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            None => write!(f, "{}", self.value),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    /// Accepts `inf`, `a/b`, and decimals with optional exponent (`0.3`, `-1.5e-2`).
    /// Decimal strings are converted to exact rationals when they fit in `i64`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::invalid(format!("cannot parse exponent {s:?}"));
        if s.eq_ignore_ascii_case("inf") || s == "∞" {
            return Ok(Exponent::INFINITY);
        }
        if let Some((n, d)) = s.split_once('/') {
            let n: Exponent = n.parse()?;
            let d: Exponent = d.parse()?;
            if d.value == 0.0 {
                return Err(bad());
            }
            return Ok(n / d);
        }
        let value: f64 = s.parse().map_err(|_| bad())?;
        if !value.is_finite() {
            return Err(bad());
        }
        Ok(Exponent { value, exact: parse_decimal(s) })
    }
}

fn parse_decimal(s: &str) -> Option<Q> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int}{frac}");
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mut num: i64 = digits.parse().ok()?;
    if neg {
        num = -num;
    }
    let scale = exp - frac.len() as i32;
    let pow = 10i64.checked_pow(scale.unsigned_abs())?;
    if scale >= 0 {
        Some(Q::from_integer(num.checked_mul(pow)?))
    } else {
        Some(Q::new(num, pow))
    }
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Equality of two exponent expressions: exact when both sides are exact.
pub fn rel_eq(a: Exponent, b: Exponent) -> bool {
    match (a.exact, b.exact) {
        (Some(x), Some(y)) => x == y,
        _ => {
            if a.is_infinite() || b.is_infinite() {
                return a.value == b.value;
            }
            (a.value - b.value).abs() <= RELATION_TOL * a.value.abs().max(b.value.abs()).max(1.0)
        }
    }
}

/// Strict `a < b`, exact when both sides are exact.
pub fn rel_lt(a: Exponent, b: Exponent) -> bool {
    match (a.exact, b.exact) {
        (Some(x), Some(y)) => x < y,
        _ => a.value < b.value,
    }
}

/// `a ≤ b`, treating near-equality of inexact values as equality.
pub fn rel_le(a: Exponent, b: Exponent) -> bool {
    rel_lt(a, b) || rel_eq(a, b)
}

fn is_nonneg(a: Exponent) -> bool {
    match a.exact {
        Some(q) => !q.is_negative(),
        None => a.value >= 0.0,
    }
}

/// Collects failed predicates with readable names.
struct Checker {
    failures: Vec<String>,
}

impl Checker {
    fn new() -> Self {
        Checker { failures: Vec::new() }
    }

    fn require(&mut self, ok: bool, relation: &str) {
        if !ok {
            self.failures.push(relation.to_string());
        }
    }

    fn finish(self, theorem: TheoremId) -> Result<()> {
        if self.failures.is_empty() {
            Ok(())
        } else {
            Err(Error::hypothesis(format!("{}: {}", theorem.name(), self.failures.join("; "))))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoremId {
    /// Fractional integral `I_α` on Morrey spaces.
    Adams,
    /// Unweighted `B_α` bound with `t/s = q₁/p₁ = q₂/p₂`.
    Unweighted,
    /// Unweighted `B_α` bound with `1/t = 1/q₁ + 1/q₂ − α/n`.
    UnweightedHarmonic,
    /// Endpoint bound with `p₁ = n/α`, output in `ℳ^{p₂}_{q₂}`.
    Endpoint,
    /// `‖g·I_α f‖` product estimate. Fields map as `f ∈ ℳ^{p1}_{q1}`, `g ∈ ℳ^{p2}_{q2}`, output `ℳ^s_t`.
    ProductEstimate,
    /// Two-weight bound for `0 < t ≤ 1`.
    TwoWeight,
    /// One-weight bound (`r = ∞`, `v = w₁w₂`).
    OneWeight,
    /// Two-weight bound with `w₁ = w₂ = 1` and a Morrey-normed `v`.
    Olsen,
    /// Stein–Weiss type bound for `B_{n−α}` with power weights.
    SteinWeiss,
    /// Testing condition necessary for the two-weight `ℳ_α` inequality.
    Necessity,
}

impl TheoremId {
    pub fn name(&self) -> &'static str {
        match self {
            TheoremId::Adams => "adams",
            TheoremId::Unweighted => "unweighted",
            TheoremId::UnweightedHarmonic => "unweighted-harmonic",
            TheoremId::Endpoint => "endpoint",
            TheoremId::ProductEstimate => "product-estimate",
            TheoremId::TwoWeight => "two-weight",
            TheoremId::OneWeight => "one-weight",
            TheoremId::Olsen => "olsen",
            TheoremId::SteinWeiss => "stein-weiss",
            TheoremId::Necessity => "necessity",
        }
    }
}

impl FromStr for TheoremId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let all = [
            TheoremId::Adams,
            TheoremId::Unweighted,
            TheoremId::UnweightedHarmonic,
            TheoremId::Endpoint,
            TheoremId::ProductEstimate,
            TheoremId::TwoWeight,
            TheoremId::OneWeight,
            TheoremId::Olsen,
            TheoremId::SteinWeiss,
            TheoremId::Necessity,
        ];
        all.into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown theorem {s:?}")))
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The exponent tuple shared by all theorems. Unused entries stay `None`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExponentProfile {
    pub n: usize,
    pub alpha: Option<Exponent>,
    pub p1: Option<Exponent>,
    pub q1: Option<Exponent>,
    pub p2: Option<Exponent>,
    pub q2: Option<Exponent>,
    pub p: Option<Exponent>,
    pub q: Option<Exponent>,
    pub s: Option<Exponent>,
    pub t: Option<Exponent>,
    pub r: Option<Exponent>,
    pub a: Option<Exponent>,
}

impl ExponentProfile {
    pub fn new(n: usize) -> Self {
        ExponentProfile { n, ..Default::default() }
    }

    fn get(&self, name: &str) -> Result<Exponent> {
        let v = match name {
            "alpha" => self.alpha,
            "p1" => self.p1,
            "q1" => self.q1,
            "p2" => self.p2,
            "q2" => self.q2,
            "p" => self.p,
            "q" => self.q,
            "s" => self.s,
            "t" => self.t,
            "r" => self.r,
            "a" => self.a,
            _ => None,
        };
        v.ok_or_else(|| Error::invalid(format!("missing exponent {name}")))
    }

    /// `1/q₁ + 1/q₂`, the Hölder-combined exponent's reciprocal.
    pub fn harmonic_q(&self) -> Result<Exponent> {
        Ok(self.get("q1")?.recip() + self.get("q2")?.recip())
    }

    /// Fill in `p` and `q` from the pairs when they are absent.
    pub fn with_combined(mut self) -> Self {
        if self.q.is_none() {
            if let (Some(a), Some(b)) = (self.q1, self.q2) {
                self.q = Some((a.recip() + b.recip()).recip());
            }
        }
        if self.p.is_none() {
            if let (Some(a), Some(b)) = (self.p1, self.p2) {
                self.p = Some((a.recip() + b.recip()).recip());
            }
        }
        self
    }

    /// Validate the hypotheses of `theorem`. The error names every violated relation.
    pub fn validate(&self, theorem: TheoremId) -> Result<()> {
        if self.n != 1 && self.n != 2 {
            return Err(Error::invalid(format!("dimension {} not in {{1,2}}", self.n)));
        }
        let one = Exponent::integer(1);
        let zero = Exponent::integer(0);
        let n = Exponent::integer(self.n as i64);
        let mut c = Checker::new();
        match theorem {
            TheoremId::Adams => {
                let (alpha, p, q, s, t) =
                    (self.get("alpha")?, self.get("p")?, self.get("q")?, self.get("s")?, self.get("t")?);
                let an = alpha / n;
                c.require(rel_lt(zero, alpha) && rel_lt(alpha, n), "0 < α < n");
                c.require(rel_lt(one, q) && rel_le(q, p) && !p.is_infinite(), "1 < q ≤ p < ∞");
                c.require(rel_lt(one, t) && rel_le(t, s) && !s.is_infinite(), "1 < t ≤ s < ∞");
                c.require(rel_eq(s.recip(), p.recip() - an), "1/s = 1/p − α/n");
                c.require(rel_eq(t / s, q / p), "t/s = q/p");
            }
            TheoremId::Unweighted | TheoremId::UnweightedHarmonic => {
                let (alpha, p1, q1, p2, q2, s, t) = (
                    self.get("alpha")?,
                    self.get("p1")?,
                    self.get("q1")?,
                    self.get("p2")?,
                    self.get("q2")?,
                    self.get("s")?,
                    self.get("t")?,
                );
                let an = alpha / n;
                c.require(rel_lt(one, q1) && rel_le(q1, p1) && !p1.is_infinite(), "1 < q₁ ≤ p₁ < ∞");
                c.require(rel_lt(one, q2) && rel_le(q2, p2) && !p2.is_infinite(), "1 < q₂ ≤ p₂ < ∞");
                c.require(rel_lt(q1.recip() + q2.recip(), one), "1/q₁ + 1/q₂ < 1");
                c.require(rel_lt(one, t) && rel_le(t, s) && !s.is_infinite(), "1 < t ≤ s < ∞");
                c.require(rel_lt(zero, alpha) && rel_lt(alpha, n), "0 < α < n");
                c.require(
                    rel_eq(s.recip(), p1.recip() + p2.recip() - an),
                    "1/s = 1/p₁ + 1/p₂ − α/n",
                );
                if theorem == TheoremId::Unweighted {
                    c.require(rel_eq(t / s, q1 / p1) && rel_eq(t / s, q2 / p2), "t/s = q₁/p₁ = q₂/p₂");
                } else {
                    c.require(
                        rel_eq(t.recip(), q1.recip() + q2.recip() - an),
                        "1/t = 1/q₁ + 1/q₂ − α/n",
                    );
                }
            }
            TheoremId::Endpoint => {
                let (alpha, p1, q1, p2, q2) =
                    (self.get("alpha")?, self.get("p1")?, self.get("q1")?, self.get("p2")?, self.get("q2")?);
                c.require(rel_lt(zero, alpha) && rel_lt(alpha, n), "0 < α < n");
                c.require(rel_eq(p1, n / alpha), "p₁ = n/α");
                c.require(rel_lt(one, q1) && rel_le(q1, p1), "1 < q₁ ≤ p₁");
                c.require(rel_lt(one, q2) && rel_le(q2, p2) && rel_lt(p2, q2 * n / alpha), "1 < q₂ ≤ p₂ < q₂n/α");
                c.require(rel_lt(q1.recip() + q2.recip(), one), "1/q₁ + 1/q₂ < 1");
            }
            TheoremId::ProductEstimate => {
                // f ∈ ℳ^{p1}_{q1}, g ∈ ℳ^{p2}_{q2}, output ℳ^s_t.
                let (alpha, p0, p, q0, q, r0, r) = (
                    self.get("alpha")?,
                    self.get("p1")?,
                    self.get("q1")?,
                    self.get("p2")?,
                    self.get("q2")?,
                    self.get("s")?,
                    self.get("t")?,
                );
                let an = alpha / n;
                c.require(rel_lt(zero, alpha) && rel_lt(alpha, n), "0 < α < n");
                c.require(rel_lt(one, p) && rel_le(p, p0) && !p0.is_infinite(), "1 < q₁ ≤ p₁ < ∞");
                c.require(rel_lt(one, q) && rel_le(q, q0) && !q0.is_infinite(), "1 < q₂ ≤ p₂ < ∞");
                c.require(rel_lt(one, r) && rel_le(r, r0) && !r0.is_infinite(), "1 < t ≤ s < ∞");
                c.require(rel_lt(r, q), "q₂ > t");
                c.require(rel_lt(an, p0.recip()), "1/p₁ > α/n");
                c.require(rel_le(q0.recip(), an), "1/p₂ ≤ α/n");
                c.require(rel_eq(r0.recip(), p0.recip() + q0.recip() - an), "1/s = 1/p₁ + 1/p₂ − α/n");
                c.require(rel_eq(r / r0, p / p0), "t/s = q₁/p₁");
            }
            TheoremId::TwoWeight | TheoremId::OneWeight | TheoremId::Olsen | TheoremId::Necessity => {
                let (alpha, q1, q2, s, t) =
                    (self.get("alpha")?, self.get("q1")?, self.get("q2")?, self.get("s")?, self.get("t")?);
                let p = self.get("p")?;
                let q = self.q.unwrap_or_else(|| (q1.recip() + q2.recip()).recip());
                let r = if theorem == TheoremId::OneWeight { Exponent::INFINITY } else { self.get("r")? };
                let an = alpha / n;
                if theorem == TheoremId::Necessity {
                    c.require(is_nonneg(alpha) && rel_lt(alpha, n), "0 ≤ α < n");
                } else {
                    c.require(rel_lt(zero, alpha) && rel_lt(alpha, n), "0 < α < n");
                }
                c.require(rel_lt(one, q1) && !q1.is_infinite(), "1 < q₁ < ∞");
                c.require(rel_lt(one, q2) && !q2.is_infinite(), "1 < q₂ < ∞");
                c.require(rel_eq(q.recip(), q1.recip() + q2.recip()), "1/q = 1/q₁ + 1/q₂");
                c.require(rel_lt(zero, q) && rel_le(q, p) && !p.is_infinite(), "0 < q ≤ p < ∞");
                c.require(rel_le(t, s) && !s.is_infinite(), "t ≤ s < ∞");
                c.require(rel_eq(t / s, q / p), "t/s = q/p");
                c.require(rel_eq(s.recip(), p.recip() + r.recip() - an), "1/s = 1/p + 1/r − α/n");
                match theorem {
                    TheoremId::TwoWeight => {
                        let a = self.get("a")?;
                        c.require(rel_lt(zero, t) && rel_le(t, one), "0 < t ≤ 1");
                        c.require(rel_lt(r.recip(), an), "α/n > 1/r");
                        if rel_lt(s, one) {
                            c.require(rel_lt(s / (one - s), r), "s/(1−s) < r");
                            let cap = r * (one - s) / s;
                            c.require(
                                rel_lt(one, a) && rel_lt(a, cap) && rel_lt(a, q1) && rel_lt(a, q2),
                                "1 < a < min(r(1−s)/s, q₁, q₂)",
                            );
                        } else {
                            c.require(
                                rel_lt(one, a) && rel_lt(a, q1) && rel_lt(a, q2),
                                "1 < a < min(q₁, q₂)",
                            );
                        }
                    }
                    TheoremId::OneWeight => {
                        let a = self.get("a")?;
                        c.require(rel_lt(zero, t) && rel_le(t, one), "0 < t ≤ 1");
                        c.require(rel_lt(one, a), "a > 1");
                    }
                    TheoremId::Olsen => {
                        let a = self.get("a")?;
                        c.require(rel_lt(zero, t) && rel_lt(s, one), "0 < t ≤ s < 1");
                        c.require(rel_lt(s / (one - s), r), "s/(1−s) < r");
                        c.require(rel_lt(r.recip(), an), "α/n > 1/r");
                        c.require(rel_lt(one, a), "a > 1");
                    }
                    _ => {
                        c.require(rel_le(one, t), "1 ≤ t");
                        c.require(rel_le(r.recip(), an) && is_nonneg(r.recip()), "α/n ≥ 1/r ≥ 0");
                    }
                }
            }
            TheoremId::SteinWeiss => {
                let (alpha, p1, q1, p2, q2, s, t, r, a) = (
                    self.get("alpha")?,
                    self.get("p1")?,
                    self.get("q1")?,
                    self.get("p2")?,
                    self.get("q2")?,
                    self.get("s")?,
                    self.get("t")?,
                    self.get("r")?,
                    self.get("a")?,
                );
                let p = (p1.recip() + p2.recip()).recip();
                let q = (q1.recip() + q2.recip()).recip();
                let kernel = (n - alpha) / n;
                c.require(rel_lt(zero, alpha) && rel_lt(alpha, n), "0 < α < n");
                c.require(rel_lt(one, q1) && rel_le(q1, p1) && !p1.is_infinite(), "1 < q₁ ≤ p₁ < ∞");
                c.require(rel_lt(one, q2) && rel_le(q2, p2) && !p2.is_infinite(), "1 < q₂ ≤ p₂ < ∞");
                c.require(rel_lt(zero, t) && rel_le(t, s) && rel_lt(s, one), "0 < t ≤ s < 1");
                c.require(rel_lt(n / (n - alpha), r), "n/(n−α) < r");
                c.require(rel_lt(one, a) && rel_lt(a, q1) && rel_lt(a, q2), "1 < a < min(q₁, q₂)");
                c.require(rel_eq(s.recip(), p.recip() + r.recip() - kernel), "1/s = 1/p + 1/r − (n−α)/n");
                c.require(rel_eq(t.recip(), q.recip() + r.recip() - kernel), "1/t = 1/q + 1/r − (n−α)/n");
            }
        }
        c.finish(theorem)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> Exponent {
        s.parse().unwrap()
    }

    #[test]
    fn decimals_parse_exactly() {
        assert_eq!(e("0.3").exact(), Some(Ratio::new(3, 10)));
        assert_eq!(e("-1.25e1").exact(), Some(Ratio::new(-25, 2)));
        assert_eq!(e("3/7").exact(), Some(Ratio::new(3, 7)));
        assert!(e("inf").is_infinite());
        assert!("x".parse::<Exponent>().is_err());
        assert!("1/0".parse::<Exponent>().is_err());
    }

    #[test]
    fn exact_relations_survive_decimal_input() {
        // 0.1 + 0.2 = 0.3 holds exactly on parsed rationals.
        assert!(rel_eq(e("0.1") + e("0.2"), e("0.3")));
        assert_eq!((e("0.1") + e("0.2")).exact(), Some(Ratio::new(3, 10)));
    }

    #[test]
    fn reciprocal_of_infinity_is_exact_zero() {
        assert_eq!(Exponent::INFINITY.recip().exact(), Some(Ratio::new(0, 1)));
        assert_eq!(e("3").conjugate().exact(), Some(Ratio::new(3, 2)));
    }

    #[test]
    fn display_roundtrips() {
        for s in ["5/7", "2", "inf", "-3/4"] {
            assert_eq!(e(s).to_string(), s);
            assert_eq!(e(&e(s).to_string()), e(s));
        }
    }

    fn unweighted(p: &str, q: &str, s: &str, t: &str) -> ExponentProfile {
        ExponentProfile {
            n: 1,
            alpha: Some(e("0.3")),
            p1: Some(e(p)),
            q1: Some(e(q)),
            p2: Some(e(p)),
            q2: Some(e(q)),
            s: Some(e(s)),
            t: Some(e(t)),
            ..Default::default()
        }
    }

    #[test]
    fn unweighted_requires_strict_holder_sum() {
        // q₁ = q₂ = 2 gives 1/q₁ + 1/q₂ = 1, which the hypothesis excludes.
        let err = unweighted("4", "2", "5", "2.5").validate(TheoremId::Unweighted).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("1/q₁ + 1/q₂ < 1"), "{msg}");
        assert_eq!(err.exit_code(), 2);
        // α = 0.2, p = 4, q = 2.5: 1/s = 1/2 − 1/5 = 3/10, t = s·q/p = 25/12.
        let mut ok = unweighted("4", "2.5", "10/3", "25/12");
        ok.alpha = Some(e("0.2"));
        ok.validate(TheoremId::Unweighted).unwrap();
    }

    #[test]
    fn violated_relation_is_named() {
        let mut p = unweighted("4", "2.5", "3", "25/12");
        p.alpha = Some(e("0.2"));
        let msg = p.validate(TheoremId::Unweighted).unwrap_err().to_string();
        assert!(msg.contains("1/s = 1/p₁ + 1/p₂ − α/n"), "{msg}");
    }

    #[test]
    fn two_weight_branches() {
        // s < 1 branch: α=1/2, 1/r=3/10, p=5/8, q=3/5, s=5/7, t = s·q/p.
        let prof = ExponentProfile {
            n: 1,
            alpha: Some(e("1/2")),
            q1: Some(e("1.2")),
            q2: Some(e("1.2")),
            p: Some(e("5/8")),
            s: Some(e("5/7")),
            t: Some(e("5/7") * e("3/5") / e("5/8")),
            r: Some(e("10/3")),
            a: Some(e("1.02")),
            ..Default::default()
        };
        prof.validate(TheoremId::TwoWeight).unwrap();
        let mut bad = prof.clone();
        bad.a = Some(e("1.5"));
        let msg = bad.validate(TheoremId::TwoWeight).unwrap_err().to_string();
        assert!(msg.contains("r(1−s)/s"), "{msg}");
    }

    #[test]
    fn stein_weiss_example_is_admissible() {
        let prof = ExponentProfile {
            n: 1,
            alpha: Some(e("0.5")),
            p1: Some(e("1.25")),
            q1: Some(e("1.2")),
            p2: Some(e("1.25")),
            q2: Some(e("1.2")),
            s: Some(e("1/1.4")),
            t: Some(e("1/1.4") * e("0.96")),
            r: Some(e("10/3")),
            a: Some(e("1.02")),
            ..Default::default()
        };
        // t must satisfy 1/t = 1/q + 1/r − (n−α)/n, which 0.96·s does not.
        assert!(prof.validate(TheoremId::SteinWeiss).is_err());
        let mut good = prof.clone();
        good.t = Some((e("5/3") + e("0.3") - e("0.5")).recip());
        good.validate(TheoremId::SteinWeiss).unwrap();
    }
}
