//! Lebesgue, weak-Lebesgue and Morrey quasi-norms on grid functions.
//!
//! Morrey suprema run over an explicit [`CubeFamily`]. On the dyadic family
//! this is the dyadic definition; on the all-aligned family it is the
//! all-cubes definition restricted to cubes with corners on grid points,
//! which attains the supremum over such cubes exactly for step functions.

mod family;

pub use family::{
    Best, CubeFamily, FamilyEntry, FamilyKind, Member, ResolvedFamily, DEFAULT_ALIGNED_BUDGET,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{AlignedBox, GridFunction, PrefixTable};

/// A supremum value together with the cube attaining it.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NormReport {
    pub value: f64,
    pub attaining: Member,
}

/// `(Σ_cells |f|^t · cell volume)^{1/t}` over the clipped box.
pub fn lebesgue_norm(f: &GridFunction, t: f64, b: &AlignedBox) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid(format!("Lebesgue exponent t = {t} must be positive")));
    }
    let g = f.grid();
    let mut sum = 0.0;
    for i0 in b.range(0) {
        for i1 in b.range(1) {
            sum += f.get([i0, i1]).abs().powf(t);
        }
    }
    Ok((sum * g.cell_volume()).powf(1.0 / t))
}

/// `max_λ λ·|{|f| ≥ λ}|^{1/p}` over the distinct values of `|f|`.
///
/// For step functions this equals `sup_λ λ·|{|f| > λ}|^{1/p}`: the supremum
/// is approached as `λ` rises to each attained value.
pub fn weak_quasinorm(f: &GridFunction, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::invalid(format!("weak exponent p = {p} must be positive")));
    }
    let mut vals: Vec<f64> = f.values().iter().map(|v| v.abs()).filter(|&v| v > 0.0).collect();
    vals.sort_unstable_by(|a, b| b.total_cmp(a));
    let vol = f.grid().cell_volume();
    let mut best = 0.0f64;
    let mut i = 0;
    while i < vals.len() {
        let lambda = vals[i];
        while i < vals.len() && vals[i] == lambda {
            i += 1;
        }
        best = best.max(lambda * (i as f64 * vol).powf(1.0 / p));
    }
    Ok(best)
}

/// Reusable evaluator of `|Q|^{1/p}(avg_Q |f|^q)^{1/q}` for one function.
pub struct MorreyEvaluator<'a> {
    f: &'a GridFunction,
    table: PrefixTable,
    inv_p: f64,
    inv_q: f64,
}

impl<'a> MorreyEvaluator<'a> {
    pub fn new(f: &'a GridFunction, p: f64, q: f64) -> Result<Self> {
        check_morrey_exponents(p, q)?;
        Ok(MorreyEvaluator { f, table: PrefixTable::of_power(f, q)?, inv_p: 1.0 / p, inv_q: 1.0 / q })
    }

    /// The per-cube quantity. Boxes leaving the grid average against zero.
    pub fn cube_value(&self, b: &AlignedBox) -> f64 {
        let g = self.f.grid();
        let vol = g.box_volume(b);
        let avg = self.table.zero_extended_average(b);
        if avg <= 0.0 {
            return 0.0;
        }
        vol.powf(self.inv_p) * avg.powf(self.inv_q)
    }

    pub fn sup(&self, family: &ResolvedFamily) -> NormReport {
        let best = family.par_max_by(|m| self.cube_value(&m.bx));
        NormReport { value: best.value, attaining: best.member }
    }
}

fn check_morrey_exponents(p: f64, q: f64) -> Result<()> {
    if !(q > 0.0) || !p.is_finite() {
        return Err(Error::invalid(format!("Morrey exponents need 0 < q ≤ p < ∞ (p = {p}, q = {q})")));
    }
    if q > p {
        return Err(Error::invalid(format!("Morrey exponent q = {q} exceeds p = {p}")));
    }
    Ok(())
}

/// `max_{Q ∈ family} |Q|^{1/p} (avg_Q |f|^q)^{1/q}`.
pub fn morrey_norm(f: &GridFunction, p: f64, q: f64, family: &CubeFamily) -> Result<NormReport> {
    let fam = family.resolve(f.grid())?;
    Ok(MorreyEvaluator::new(f, p, q)?.sup(&fam))
}

/// `max_Q |Q|^{1/p} (avg_Q |f|^{q₁})^{1/q₁} (avg_Q |g|^{q₂})^{1/q₂}`, the
/// right side of the bilinear weighted estimates (weights pre-multiplied).
pub fn joint_morrey(
    f: &GridFunction,
    g: &GridFunction,
    p: f64,
    q1: f64,
    q2: f64,
    family: &CubeFamily,
) -> Result<NormReport> {
    f.require_same_grid(g)?;
    if !(p > 0.0 && q1 > 0.0 && q2 > 0.0) || !p.is_finite() {
        return Err(Error::invalid("joint Morrey exponents must be positive and finite"));
    }
    let fam = family.resolve(f.grid())?;
    let tf = PrefixTable::of_power(f, q1)?;
    let tg = PrefixTable::of_power(g, q2)?;
    let grid = *f.grid();
    let best = fam.par_max_by(|m| {
        let af = tf.zero_extended_average(&m.bx);
        let ag = tg.zero_extended_average(&m.bx);
        if af <= 0.0 || ag <= 0.0 {
            return 0.0;
        }
        grid.box_volume(&m.bx).powf(1.0 / p) * af.powf(1.0 / q1) * ag.powf(1.0 / q2)
    });
    Ok(NormReport { value: best.value, attaining: best.member })
}
