//! Cumulative sum tables for constant-time box sums.
//!
//! Entry `(i, j)` of the table holds the sum of all cells `(a, b)` with
//! `a < i` and `b < j`, so a box sum is four lookups. Partial sums are kept in
//! double-double precision, which makes the inclusion–exclusion difference
//! accurate to roughly `1e-16` relative to the table's largest entry.

use super::aligned::AlignedBox;
use super::function::{Grid, GridFunction};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

impl Dd {
    #[inline]
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = two_sum(s, e);
        Dd { hi, lo }
    }

    #[inline]
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    #[inline]
    fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    #[inline]
    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// Summed-area table over the cells of one grid.
#[derive(Clone, Debug)]
pub struct PrefixTable {
    grid: Grid,
    /// Row stride `side + 1`; size `(side+1)^dim`.
    table: Vec<Dd>,
}

impl PrefixTable {
    /// Table of the raw cell values.
    pub fn new(f: &GridFunction) -> Self {
        PrefixTable::from_values(*f.grid(), f.values())
    }

    /// Table of `|f|^power`. Negative powers require `f ≠ 0` everywhere.
    pub fn of_power(f: &GridFunction, power: f64) -> Result<Self> {
        if power < 0.0 {
            if let Some(i) = f.values().iter().position(|&v| v == 0.0) {
                return Err(Error::NonPositive(format!("zero at cell {i} raised to power {power}")));
            }
        }
        let vals: Vec<f64> = if power == 1.0 {
            f.values().iter().map(|v| v.abs()).collect()
        } else {
            f.values().iter().map(|v| v.abs().powf(power)).collect()
        };
        Ok(PrefixTable::from_values(*f.grid(), &vals))
    }

    pub fn from_values(grid: Grid, values: &[f64]) -> Self {
        let n = grid.side_cells();
        let s = n + 1;
        if grid.dim() == 1 {
            let mut table = Vec::with_capacity(s);
            let mut acc = Dd::default();
            table.push(acc);
            for &v in values {
                acc = acc.add(Dd { hi: v, lo: 0.0 });
                table.push(acc);
            }
            return PrefixTable { grid, table };
        }
        let mut table = vec![Dd::default(); s * s];
        for i in 0..n {
            let mut row = Dd::default();
            for j in 0..n {
                row = row.add(Dd { hi: values[i * n + j], lo: 0.0 });
                table[(i + 1) * s + j + 1] = table[i * s + j + 1].add(row);
            }
        }
        PrefixTable { grid, table }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn at(&self, i: usize, j: usize) -> Dd {
        if self.grid.dim() == 1 {
            self.table[i]
        } else {
            self.table[i * (self.grid.side_cells() + 1) + j]
        }
    }

    /// Sum of cell values over the clipped box.
    pub fn box_sum(&self, b: &AlignedBox) -> f64 {
        let r0 = b.range(0);
        if r0.is_empty() {
            return 0.0;
        }
        if self.grid.dim() == 1 {
            return self.at(r0.end, 0).sub(self.at(r0.start, 0)).value();
        }
        let r1 = b.range(1);
        if r1.is_empty() {
            return 0.0;
        }
        self.at(r0.end, r1.end)
            .sub(self.at(r0.start, r1.end))
            .sub(self.at(r0.end, r1.start))
            .add(self.at(r0.start, r1.start))
            .value()
    }

    /// Mean over the clipped cells of the box.
    pub fn average(&self, b: &AlignedBox) -> f64 {
        let c = b.cell_count();
        if c == 0 {
            0.0
        } else {
            self.box_sum(b) / c as f64
        }
    }

    /// Mean over the nominal box with zero outside the grid.
    pub fn zero_extended_average(&self, b: &AlignedBox) -> f64 {
        self.box_sum(b) / b.nominal_cell_count() as f64
    }

    /// Integral over the clipped box (`sum · cell volume`).
    pub fn integral(&self, b: &AlignedBox) -> f64 {
        self.box_sum(b) * self.grid.cell_volume()
    }
}

/// Mean of `|f|^power` over a box inside the grid.
pub fn box_average(f: &GridFunction, b: &AlignedBox, power: f64) -> Result<f64> {
    if b.is_clipped() || b.extent() != f.grid().side_cells() as i64 {
        return Err(Error::invalid(format!("box {b} is not inside the grid")));
    }
    if power < 0.0 {
        for i0 in b.range(0) {
            for i1 in b.range(1) {
                if f.get([i0, i1]) == 0.0 {
                    return Err(Error::NonPositive(format!(
                        "zero at cell ({i0},{i1}) raised to power {power}"
                    )));
                }
            }
        }
    }
    let vals: Vec<f64> = f
        .values()
        .iter()
        .map(|&v| if v == 0.0 && power < 0.0 { 0.0 } else { v.abs().powf(power) })
        .collect();
    Ok(PrefixTable::from_values(*f.grid(), &vals).average(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DyadicCube;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn box_values(f: &GridFunction, b: &AlignedBox) -> Vec<f64> {
        let mut out = Vec::with_capacity(b.cell_count());
        for i0 in b.range(0) {
            for i1 in b.range(1) {
                out.push(f.get([i0, i1]));
            }
        }
        out
    }

    fn random_box(rng: &mut ChaCha8Rng, dim: usize, n: i64) -> AlignedBox {
        let mut lo = [0i64; 2];
        let mut hi = [1i64; 2];
        for d in 0..dim {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            lo[d] = a.min(b);
            hi[d] = a.max(b) + 1;
        }
        AlignedBox::new(dim, lo, hi, n)
    }

    #[test]
    fn box_sums_match_direct_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (dim, depth) in [(1usize, 9u32), (2, 5)] {
            let g = Grid::unit(dim, depth).unwrap();
            let vals: Vec<f64> = (0..g.cell_count()).map(|_| rng.gen_range(-1.0..1.0) * 1e3).collect();
            let f = GridFunction::new(g, vals, crate::grid::SignTag::None).unwrap();
            let t = PrefixTable::new(&f);
            for _ in 0..100 {
                let b = random_box(&mut rng, dim, g.side_cells() as i64);
                let direct: f64 = box_values(&f, &b).iter().sum();
                let scale: f64 = box_values(&f, &b).iter().map(|v| v.abs()).sum();
                assert!((t.box_sum(&b) - direct).abs() <= 1e-12 * scale.max(1e-300));
            }
        }
    }

    #[test]
    fn integer_data_sums_exactly() {
        let g = Grid::unit(2, 4).unwrap();
        let f = GridFunction::from_fn(g, |x| (x[0] * 16.0).floor() * 3.0 + (x[1] * 16.0).floor()).unwrap();
        let t = PrefixTable::new(&f);
        let b = AlignedBox::new(2, [3, 5], [11, 9], 16);
        let direct: f64 = box_values(&f, &b).iter().sum();
        assert_eq!(t.box_sum(&b), direct);
    }

    #[test]
    fn averages_of_simple_functions() {
        let g = Grid::unit(1, 3).unwrap();
        let c = GridFunction::constant(g, 2.5).unwrap();
        let b = AlignedBox::new(1, [2, 0], [7, 1], 8);
        assert_eq!(box_average(&c, &b, 1.0).unwrap(), 2.5);
        let half = GridFunction::indicator(g, &AlignedBox::new(1, [0, 0], [4, 1], 8), 1.0).unwrap();
        assert_eq!(box_average(&half, &g.root_box(), 1.0).unwrap(), 0.5);
        assert!(box_average(&half, &g.root_box(), -1.0).is_err());
        let clipped = g.triple(&DyadicCube::unit(1)).unwrap();
        assert!(box_average(&half, &clipped, 1.0).is_err());
    }
}
