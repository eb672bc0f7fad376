use std::fmt;

use serde::{Deserialize, Serialize};

use super::aligned::AlignedBox;
use super::cube::DyadicCube;
use crate::error::{Error, Result};

/// Deepest supported refinement per dimension (keeps cell counts addressable).
const MAX_DEPTH_1D: u32 = 24;
const MAX_DEPTH_2D: u32 = 12;

/// Sign guarantee attached to a [`GridFunction`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignTag {
    None,
    Nonneg,
    Pos,
}

impl SignTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            SignTag::None => "none",
            SignTag::Nonneg => "nonneg",
            SignTag::Pos => "pos",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(SignTag::None),
            "nonneg" => Ok(SignTag::Nonneg),
            "pos" => Ok(SignTag::Pos),
            _ => Err(Error::invalid(format!("unknown sign tag {s:?}"))),
        }
    }

    fn admits(&self, v: f64) -> bool {
        match self {
            SignTag::None => v.is_finite(),
            SignTag::Nonneg => v.is_finite() && v >= 0.0,
            SignTag::Pos => v.is_finite() && v > 0.0,
        }
    }
}

/// A root cube split into `2^depth` cells per axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    root: DyadicCube,
    depth: u32,
}

impl Grid {
    pub fn new(root: DyadicCube, depth: u32) -> Result<Self> {
        let cap = if root.dim() == 1 { MAX_DEPTH_1D } else { MAX_DEPTH_2D };
        if depth > cap {
            return Err(Error::LevelOutOfRange(format!("depth {depth} exceeds {cap} in dimension {}", root.dim())));
        }
        Ok(Grid { root, depth })
    }

    /// `[0,1)^dim` at the given depth.
    pub fn unit(dim: usize, depth: u32) -> Result<Self> {
        Grid::new(DyadicCube::unit(dim), depth)
    }

    pub fn root(&self) -> DyadicCube {
        self.root
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.root.dim()
    }

    /// Cells per axis.
    pub fn side_cells(&self) -> usize {
        1usize << self.depth
    }

    pub fn cell_count(&self) -> usize {
        1usize << (self.depth as usize * self.dim())
    }

    pub fn cell_level(&self) -> i32 {
        self.root.level() - self.depth as i32
    }

    pub fn cell_side(&self) -> f64 {
        2f64.powi(self.cell_level())
    }

    pub fn cell_volume(&self) -> f64 {
        2f64.powi(self.cell_level() * self.dim() as i32)
    }

    /// Row-major linear index of cell `(i0, i1)`.
    pub fn index(&self, c: [usize; 2]) -> usize {
        if self.dim() == 1 {
            c[0]
        } else {
            c[0] * self.side_cells() + c[1]
        }
    }

    pub fn coords_of(&self, idx: usize) -> [usize; 2] {
        if self.dim() == 1 {
            [idx, 0]
        } else {
            [idx / self.side_cells(), idx % self.side_cells()]
        }
    }

    pub fn cell_center(&self, idx: usize) -> [f64; 2] {
        let c = self.coords_of(idx);
        let h = self.cell_side();
        let o = self.root.origin();
        let mut x = [o[0] + (c[0] as f64 + 0.5) * h, o[1] + (c[1] as f64 + 0.5) * h];
        if self.dim() == 1 {
            x[1] = 0.0;
        }
        x
    }

    pub fn cell_cube(&self, idx: usize) -> DyadicCube {
        let c = self.coords_of(idx);
        let scale = 1i64 << self.depth;
        let rc = self.root.coords();
        let coords: Vec<i64> = (0..self.dim()).map(|d| rc[d] * scale + c[d] as i64).collect();
        DyadicCube::new(self.cell_level(), &coords).expect("dimension checked at construction")
    }

    /// Cell containing `x`, if inside the root.
    pub fn cell_of_point(&self, x: &[f64]) -> Option<usize> {
        if !self.root.contains_point(x) {
            return None;
        }
        let o = self.root.origin();
        let h = self.cell_side();
        let n = self.side_cells();
        let mut c = [0usize; 2];
        for d in 0..self.dim() {
            c[d] = (((x[d] - o[d]) / h).floor() as usize).min(n - 1);
        }
        Some(self.index(c))
    }

    pub fn root_box(&self) -> AlignedBox {
        AlignedBox::cube(self.dim(), [0, 0], self.side_cells() as i64, self.side_cells() as i64)
    }

    /// Cell box of a dyadic cube inside the root and no finer than a cell.
    pub fn cube_box(&self, q: &DyadicCube) -> Result<AlignedBox> {
        if q.dim() != self.dim() {
            return Err(Error::GridMismatch(format!("cube {q} has dimension {}", q.dim())));
        }
        if q.level() < self.cell_level() {
            return Err(Error::Unresolvable(format!(
                "cube {q} is finer than the cell level {}",
                self.cell_level()
            )));
        }
        if !self.root.contains(q) {
            return Err(Error::invalid(format!("cube {q} lies outside the root {}", self.root)));
        }
        let scale = 1i64 << (q.level() - self.cell_level());
        let rscale = 1i64 << self.depth;
        let rc = self.root.coords();
        let qc = q.coords();
        let mut lo = [0i64; 2];
        for d in 0..self.dim() {
            lo[d] = qc[d] * scale - rc[d] * rscale;
        }
        Ok(AlignedBox::cube(self.dim(), lo, scale, self.side_cells() as i64))
    }

    /// The concentric triple `3Q`, clipped to the grid; the box records the clip.
    pub fn triple(&self, q: &DyadicCube) -> Result<AlignedBox> {
        Ok(self.cube_box(q)?.dilate_odd(3))
    }

    /// Physical volume of a box's nominal (unclipped) extent.
    pub fn box_volume(&self, b: &AlignedBox) -> f64 {
        b.nominal_cell_count() as f64 * self.cell_volume()
    }

    /// Physical side of a cube-shaped box.
    pub fn box_side(&self, b: &AlignedBox) -> f64 {
        b.side_cells() as f64 * self.cell_side()
    }

    /// The same root refined by `extra` more levels.
    pub fn refined(&self, extra: u32) -> Result<Grid> {
        Grid::new(self.root, self.depth + extra)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} depth {}", self.root, self.depth)
    }
}

/// Piecewise-constant data on the cells of a [`Grid`], zero outside the root.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
    tag: SignTag,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>, tag: SignTag) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::invalid(format!(
                "expected {} values, got {}",
                grid.cell_count(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|&v| !tag.admits(v)) {
            return Err(Error::NonPositive(format!(
                "value {} at cell {i} violates tag {}",
                values[i],
                tag.as_str()
            )));
        }
        Ok(GridFunction { grid, values, tag })
    }

    pub fn zeros(grid: Grid) -> Self {
        GridFunction { grid, values: vec![0.0; grid.cell_count()], tag: SignTag::Nonneg }
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        let tag = if c > 0.0 { SignTag::Pos } else if c == 0.0 { SignTag::Nonneg } else { SignTag::None };
        GridFunction::new(grid, vec![c; grid.cell_count()], tag)
    }

    /// Sample `f` at cell centers; the tag is inferred from the values.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let values: Vec<f64> = (0..grid.cell_count()).map(|i| f(grid.cell_center(i))).collect();
        GridFunction::inferred(grid, values)
    }

    /// Build from values, choosing the strongest tag they satisfy.
    pub fn inferred(grid: Grid, values: Vec<f64>) -> Result<Self> {
        let tag = if values.iter().all(|&v| v > 0.0) {
            SignTag::Pos
        } else if values.iter().all(|&v| v >= 0.0) {
            SignTag::Nonneg
        } else {
            SignTag::None
        };
        GridFunction::new(grid, values, tag)
    }

    /// `c · χ_B` for a box of cells.
    pub fn indicator(grid: Grid, b: &AlignedBox, c: f64) -> Result<Self> {
        let mut values = vec![0.0; grid.cell_count()];
        for i0 in b.range(0) {
            for i1 in b.range(1) {
                values[grid.index([i0, i1])] = c;
            }
        }
        GridFunction::inferred(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn tag(&self) -> SignTag {
        self.tag
    }

    pub fn get(&self, c: [usize; 2]) -> f64 {
        self.values[self.grid.index(c)]
    }

    /// Value at a point, zero outside the root.
    pub fn value_at(&self, x: &[f64]) -> f64 {
        self.grid.cell_of_point(x).map_or(0.0, |i| self.values[i])
    }

    pub fn is_nonneg(&self) -> bool {
        self.tag != SignTag::None || self.values.iter().all(|&v| v >= 0.0)
    }

    pub fn is_positive(&self) -> bool {
        self.tag == SignTag::Pos || self.values.iter().all(|&v| v > 0.0)
    }

    pub fn require_nonneg(&self, what: &str) -> Result<()> {
        if self.is_nonneg() {
            Ok(())
        } else {
            Err(Error::invalid(format!("{what} must be nonnegative")))
        }
    }

    pub fn require_positive(&self, what: &str) -> Result<()> {
        if self.is_positive() {
            Ok(())
        } else {
            Err(Error::NonPositive(format!("{what} must be strictly positive")))
        }
    }

    pub fn require_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{} vs {}", self.grid, other.grid)))
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        GridFunction::inferred(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn abs(&self) -> Self {
        let values = self.values.iter().map(|v| v.abs()).collect();
        let tag = if self.tag == SignTag::Pos { SignTag::Pos } else { SignTag::Nonneg };
        GridFunction { grid: self.grid, values, tag }
    }

    /// `c · f`.
    pub fn scale(&self, c: f64) -> Self {
        let values = self.values.iter().map(|v| c * v).collect();
        let tag = match (self.tag, c) {
            (SignTag::Pos, c) if c > 0.0 => SignTag::Pos,
            (SignTag::Pos | SignTag::Nonneg, c) if c >= 0.0 => SignTag::Nonneg,
            _ => SignTag::None,
        };
        GridFunction { grid: self.grid, values, tag }
    }

    /// Pointwise product on a common grid.
    pub fn mul(&self, other: &GridFunction) -> Result<Self> {
        self.require_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        GridFunction::inferred(self.grid, values)
    }

    /// `f · χ_B`.
    pub fn restrict(&self, b: &AlignedBox) -> Self {
        let mut values = vec![0.0; self.values.len()];
        for i0 in b.range(0) {
            for i1 in b.range(1) {
                let i = self.grid.index([i0, i1]);
                values[i] = self.values[i];
            }
        }
        let tag = if self.tag == SignTag::None { SignTag::None } else { SignTag::Nonneg };
        GridFunction { grid: self.grid, values, tag }
    }

    /// The same step function on a grid `extra` levels finer.
    pub fn refine(&self, extra: u32) -> Result<Self> {
        let fine = self.grid.refined(extra)?;
        let k = 1usize << extra;
        let values = (0..fine.cell_count())
            .map(|i| {
                let c = fine.coords_of(i);
                self.get([c[0] / k, c[1] / k])
            })
            .collect();
        Ok(GridFunction { grid: fine, values, tag: self.tag })
    }

    /// Maximum of `|f|` over all cells.
    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triples_match_geometry() {
        let g = Grid::unit(1, 4).unwrap();
        let q = DyadicCube::new(-2, &[1]).unwrap();
        let t = g.triple(&q).unwrap();
        // [0.25,0.5) → [0,0.75)
        assert_eq!(t.range(0), 0..12);
        assert!(!t.is_clipped());

        let root = g.triple(&DyadicCube::unit(1)).unwrap();
        assert_eq!(root.range(0), 0..16);
        assert!(root.is_clipped());
        assert_eq!(root.nominal_cell_count(), 48);

        let g2 = Grid::unit(2, 3).unwrap();
        let q2 = DyadicCube::new(-2, &[2, 2]).unwrap();
        let t2 = g2.triple(&q2).unwrap();
        // [0.5,0.75)² → [0.25,1)²
        assert_eq!((t2.range(0), t2.range(1)), (2..8, 2..8));
        assert!(!t2.is_clipped());
    }

    #[test]
    fn cube_box_rejects_fine_or_outside_cubes() {
        let g = Grid::unit(1, 2).unwrap();
        assert!(g.cube_box(&DyadicCube::new(-3, &[0]).unwrap()).is_err());
        assert!(g.cube_box(&DyadicCube::new(-1, &[2]).unwrap()).is_err());
    }

    #[test]
    fn tags_are_enforced() {
        let g = Grid::unit(1, 1).unwrap();
        assert!(GridFunction::new(g, vec![1.0, 0.0], SignTag::Pos).is_err());
        assert!(GridFunction::new(g, vec![1.0, -1.0], SignTag::Nonneg).is_err());
        assert!(GridFunction::new(g, vec![1.0], SignTag::None).is_err());
        assert!(GridFunction::new(g, vec![1.0, f64::NAN], SignTag::None).is_err());
    }

    #[test]
    fn refine_preserves_values() {
        let g = Grid::unit(2, 1).unwrap();
        let f = GridFunction::new(g, vec![1.0, 2.0, 3.0, 4.0], SignTag::Pos).unwrap();
        let r = f.refine(1).unwrap();
        for i in 0..r.grid().cell_count() {
            let x = r.grid().cell_center(i);
            assert_eq!(r.values()[i], f.value_at(&x));
        }
    }

    #[test]
    fn cell_lookup_and_centers_agree() {
        let g = Grid::new(DyadicCube::new(1, &[-1, 0]).unwrap(), 3).unwrap();
        for i in 0..g.cell_count() {
            assert_eq!(g.cell_of_point(&g.cell_center(i)), Some(i));
            assert!(g.root().contains(&g.cell_cube(i)));
        }
        assert_eq!(g.cell_of_point(&[0.5, -0.5]), None);
    }
}
