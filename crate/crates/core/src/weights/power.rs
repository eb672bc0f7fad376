use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, SignTag};

/// `∫_{u0}^{u1} u^β du` for `0 ≤ u0 < u1`, written to avoid cancellation far from zero.
fn radial_integral(u0: f64, u1: f64, beta: f64) -> f64 {
    let e = beta + 1.0;
    if u0 == 0.0 {
        return u1.powf(e) / e;
    }
    let growth = ((u1 - u0) / u0).ln_1p();
    if e == 0.0 {
        growth
    } else {
        u0.powf(e) * (e * growth).exp_m1() / e
    }
}

/// Average of `|x − c|^β` over `[a, b]`.
fn cell_average_1d(a: f64, b: f64, c: f64, beta: f64) -> f64 {
    let (lo, hi) = (a - c, b - c);
    let integral = if lo >= 0.0 {
        radial_integral(lo, hi, beta)
    } else if hi <= 0.0 {
        radial_integral(-hi, -lo, beta)
    } else {
        radial_integral(0.0, -lo, beta) + radial_integral(0.0, hi, beta)
    };
    integral / (b - a)
}

/// `|x − center|^β` sampled on `grid`: exact cell averages in one dimension,
/// midpoint values (Euclidean distance) in two.
pub fn power_weight(beta: f64, center: &[f64], grid: Grid) -> Result<GridFunction> {
    let dim = grid.dim();
    if center.len() != dim || !beta.is_finite() || center.iter().any(|c| !c.is_finite()) {
        return Err(Error::invalid(format!("power weight needs finite β and a {dim}-dimensional center")));
    }
    let h = grid.cell_side();
    let origin = grid.root().origin();
    let mut values = Vec::with_capacity(grid.cell_count());
    for idx in 0..grid.cell_count() {
        let c = grid.coords_of(idx);
        let lo: Vec<f64> = (0..dim).map(|d| origin[d] + c[d] as f64 * h).collect();
        let touches = (0..dim).all(|d| lo[d] <= center[d] && center[d] <= lo[d] + h);
        if touches && beta <= -(dim as f64) {
            return Err(Error::invalid(format!(
                "|x|^{beta} is not integrable on cell {} containing the center",
                grid.cell_cube(idx)
            )));
        }
        let v = if dim == 1 {
            cell_average_1d(lo[0], lo[0] + h, center[0], beta)
        } else {
            let m = grid.cell_center(idx);
            (m[0] - center[0]).hypot(m[1] - center[1]).powf(beta)
        };
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::NonPositive(format!(
                "power weight |x|^{beta} has value {v} on cell {}",
                grid.cell_cube(idx)
            )));
        }
        values.push(v);
    }
    GridFunction::new(grid, values, SignTag::Pos)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DyadicCube;

    #[test]
    fn examples() {
        let g = Grid::unit(1, 2).unwrap();
        let one = power_weight(0.0, &[0.0], g).unwrap();
        assert!(one.values().iter().all(|&v| v == 1.0));
        let lin = power_weight(1.0, &[0.0], g).unwrap();
        assert!((lin.values()[2] - 0.625).abs() < 1e-15);
        let inv = power_weight(-0.5, &[0.0], g).unwrap();
        // (1/0.25) ∫_0^{1/4} u^{-1/2} du = 4 · 2 · (1/4)^{1/2} = 4.
        assert!((inv.values()[0] - 4.0).abs() < 1e-14);
        assert!(power_weight(-1.0, &[0.0], g).is_err());
        assert!(power_weight(-1.5, &[0.3], g).is_err());
    }

    #[test]
    fn logarithmic_case_and_far_cells() {
        // Root [1, 2) on level 0: away from the origin.
        let g = Grid::new(DyadicCube::new(0, &[1]).unwrap(), 6).unwrap();
        let w = power_weight(-1.0, &[0.0], g).unwrap();
        let h = 1.0 / 64.0;
        for (i, v) in w.values().iter().enumerate() {
            let a = 1.0 + i as f64 * h;
            let want = ((a + h) / a).ln() / h;
            assert!((v - want).abs() < 1e-13 * want);
        }
        let w = power_weight(0.7, &[0.0], g).unwrap();
        for (i, v) in w.values().iter().enumerate() {
            let a = 1.0 + i as f64 * h;
            let want = ((a + h).powf(1.7) - a.powf(1.7)) / 1.7 / h;
            assert!((v - want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn center_inside_a_cell_splits_the_integral() {
        let g = Grid::unit(1, 1).unwrap();
        let w = power_weight(2.0, &[0.25], g).unwrap();
        // (1/0.5) ∫_0^{0.5} (x − 1/4)^2 dx = 2 · 2 · (1/4)^3/3.
        assert!((w.values()[0] - 4.0 / 192.0).abs() < 1e-16);
    }

    #[test]
    fn two_dimensional_midpoints() {
        let g = Grid::unit(2, 2).unwrap();
        let w = power_weight(-1.0, &[0.0, 0.0], g).unwrap();
        let m = g.cell_center(5);
        assert_eq!(w.values()[5], m[0].hypot(m[1]).powf(-1.0));
        assert!(power_weight(-2.0, &[0.0, 0.0], g).is_err());
    }
}
