use rayon::prelude::*;

use super::{b_truncated, OperatorField};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, PrefixTable};
use crate::means::PowerMean;
use crate::norms::{CubeFamily, Member, ResolvedFamily};

/// `out(x) = max { value(Q) : x ∈ Q ∈ family }`, zero where no cube covers `x`.
pub fn sup_paint<F>(family: &ResolvedFamily, value: F) -> Vec<f64>
where
    F: Fn(&Member) -> f64 + Sync,
{
    let grid = *family.grid();
    let members = family.to_vec();
    let vals: Vec<f64> = members.par_iter().map(&value).collect();
    let mut out = vec![0.0f64; grid.cell_count()];
    if let Some((lo, n)) = family.aligned_1d() {
        // Sliding-window maximum per side: cube [a, a+s) covers i for a ∈ (i−s, i].
        let mut k = 0;
        for side in (1..=n).rev() {
            let count = (n - side + 1) as usize;
            let row = &vals[k..k + count];
            k += count;
            let mut window = std::collections::VecDeque::<usize>::new();
            for i in 0..n as usize {
                if i < count {
                    while window.back().is_some_and(|&j| row[j] <= row[i]) {
                        window.pop_back();
                    }
                    window.push_back(i);
                }
                while window.front().is_some_and(|&j| j + (side as usize) <= i) {
                    window.pop_front();
                }
                if let Some(&j) = window.front() {
                    let cell = lo as usize + i;
                    out[cell] = out[cell].max(row[j]);
                }
            }
        }
        return out;
    }
    for (m, v) in members.iter().zip(&vals) {
        for i0 in m.bx.range(0) {
            for i1 in m.bx.range(1) {
                let i = grid.index([i0, i1]);
                out[i] = out[i].max(*v);
            }
        }
    }
    out
}

fn painted(f: &GridFunction, values: Vec<f64>) -> OperatorField {
    OperatorField::new(GridFunction::inferred(*f.grid(), values).expect("painted values are finite and nonnegative"))
}

/// `max_d (2d)^{α−n} B_d(|f|, |g|)(x)` over the half-sides `d` of the family's cubes.
pub fn m_alpha_bilinear(f: &GridFunction, g: &GridFunction, alpha: f64, family: &CubeFamily) -> Result<OperatorField> {
    f.require_same_grid(g)?;
    let n = f.dim() as f64;
    if !(alpha >= 0.0 && alpha < n) {
        return Err(Error::invalid(format!("alpha = {alpha} outside [0, {n})")));
    }
    let fam = family.resolve(f.grid())?;
    let h = f.grid().cell_side();
    let (fa, ga) = (f.abs(), g.abs());
    let mut out = vec![0.0f64; f.grid().cell_count()];
    for side in fam.side_lengths() {
        let d = side as f64 * h / 2.0;
        let b = b_truncated(&fa, &ga, d)?;
        let c = (2.0 * d).powf(alpha - n);
        for (o, v) in out.iter_mut().zip(b.values()) {
            *o = o.max(c * v);
        }
    }
    Ok(painted(f, out))
}

/// `sup_{x∈Q} |Q|^{α/n} (avg_Q |f|^{r₁})^{1/r₁} (avg_Q |g|^{r₂})^{1/r₂}`.
pub fn m_alpha_vector(
    f: &GridFunction,
    g: &GridFunction,
    alpha: f64,
    r1: f64,
    r2: f64,
    family: &CubeFamily,
) -> Result<OperatorField> {
    f.require_same_grid(g)?;
    if !(r1 > 0.0 && r2 > 0.0) {
        return Err(Error::invalid(format!("averaging exponents r1 = {r1}, r2 = {r2} must be positive")));
    }
    let fam = family.resolve(f.grid())?;
    let tf = PrefixTable::of_power(&f.abs(), r1)?;
    let tg = PrefixTable::of_power(&g.abs(), r2)?;
    let grid = *f.grid();
    let n = grid.dim() as f64;
    let out = sup_paint(&fam, |m| {
        let (af, ag) = (tf.average(&m.bx), tg.average(&m.bx));
        if af <= 0.0 || ag <= 0.0 {
            return 0.0;
        }
        grid.box_volume(&m.bx).powf(alpha / n) * af.powf(1.0 / r1) * ag.powf(1.0 / r2)
    });
    Ok(painted(f, out))
}

/// `sup_{x∈Q} |Q|^{α/n} (avg_Q |f|)(avg_Q |g|)(avg_Q v^{t/(1−t)})^{(1−t)/t}`,
/// with `max_Q v` as the last factor at `t = 1`.
pub fn m_tilde(
    f: &GridFunction,
    g: &GridFunction,
    v: &GridFunction,
    alpha: f64,
    t: f64,
    family: &CubeFamily,
) -> Result<OperatorField> {
    f.require_same_grid(g)?;
    f.require_same_grid(v)?;
    let vm = PowerMean::holder_dual(v, t)?;
    let fam = family.resolve(f.grid())?;
    let tf = PrefixTable::new(&f.abs());
    let tg = PrefixTable::new(&g.abs());
    let grid = *f.grid();
    let n = grid.dim() as f64;
    let out = sup_paint(&fam, |m| {
        let (af, ag) = (tf.average(&m.bx), tg.average(&m.bx));
        if af <= 0.0 || ag <= 0.0 {
            return 0.0;
        }
        grid.box_volume(&m.bx).powf(alpha / n) * af * ag * vm.mean(&m.bx)
    });
    Ok(painted(f, out))
}

/// `sup_{x∈Q} avg_{3Q} f · avg_{3Q} g`, triples extended by zero past the root.
pub fn m_triple_dyadic(f: &GridFunction, g: &GridFunction, family: &CubeFamily) -> Result<OperatorField> {
    f.require_same_grid(g)?;
    f.require_nonneg("f")?;
    g.require_nonneg("g")?;
    let fam = family.resolve(f.grid())?;
    let tf = PrefixTable::new(f);
    let tg = PrefixTable::new(g);
    let out = sup_paint(&fam, |m| {
        let b3 = m.bx.dilate_odd(3);
        tf.zero_extended_average(&b3) * tg.zero_extended_average(&b3)
    });
    Ok(painted(f, out))
}
