//! Seeded test-function families for the ratio harnesses.
//!
//! Random families are drawn on a coarse base grid and refined, so the same
//! step function is seen at every refinement level.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DyadicCube, Grid, GridFunction};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairKind {
    /// Cell values i.i.d. log-uniform in `[e^{−2}, e^2]`.
    RandomStep,
    /// Indicators of random dyadic subcubes.
    Indicator,
    /// Smooth compactly supported bumps with random centre and width.
    Bump,
}

impl PairKind {
    pub fn name(&self) -> &'static str {
        match self {
            PairKind::RandomStep => "step",
            PairKind::Indicator => "indicator",
            PairKind::Bump => "bump",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairSource {
    pub kind: PairKind,
    pub seed: u64,
    pub count: usize,
    /// Depth at which random step data is drawn before refinement.
    pub base_depth: u32,
}

impl PairSource {
    pub fn new(kind: PairKind, seed: u64, count: usize) -> Self {
        PairSource { kind, seed, count, base_depth: 3 }
    }

    pub fn with_base_depth(mut self, depth: u32) -> Self {
        self.base_depth = depth;
        self
    }

    /// The pairs sampled on `grid`. Requires `grid.depth() ≥ base_depth`.
    pub fn pairs(&self, grid: &Grid) -> Result<Vec<TestPair>> {
        if grid.depth() < self.base_depth {
            return Err(Error::invalid(format!(
                "grid depth {} is coarser than the base depth {}",
                grid.depth(),
                self.base_depth
            )));
        }
        (0..self.count)
            .map(|i| {
                let mut r = rng::stream(self.seed, rng::key(self.kind.name(), i as u64));
                let (f, g) = match self.kind {
                    PairKind::RandomStep => {
                        let base = Grid::new(grid.root(), self.base_depth)?;
                        let extra = grid.depth() - self.base_depth;
                        (random_step(&base, &mut r)?.refine(extra)?, random_step(&base, &mut r)?.refine(extra)?)
                    }
                    PairKind::Indicator => (
                        random_indicator(grid, self.base_depth, &mut r)?,
                        random_indicator(grid, self.base_depth, &mut r)?,
                    ),
                    PairKind::Bump => (random_bump(grid, &mut r)?, random_bump(grid, &mut r)?),
                };
                Ok(TestPair { id: format!("{}-{i}", self.kind.name()), f, g })
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct TestPair {
    pub id: String,
    pub f: GridFunction,
    pub g: GridFunction,
}

/// Step function with i.i.d. log-uniform values in `[e^{−2}, e^2]`.
pub fn random_step(grid: &Grid, r: &mut impl Rng) -> Result<GridFunction> {
    let values = (0..grid.cell_count()).map(|_| r.gen_range(-2.0f64..2.0).exp()).collect();
    GridFunction::inferred(*grid, values)
}

/// `χ_Q` for a dyadic subcube `Q` of the root at most `max_depth` levels down.
pub fn random_indicator(grid: &Grid, max_depth: u32, r: &mut impl Rng) -> Result<GridFunction> {
    let root = grid.root();
    let down = r.gen_range(0..=max_depth.min(grid.depth()));
    let span = 1i64 << down;
    let coords: Vec<i64> = root.coords().iter().map(|&c| c * span + r.gen_range(0..span)).collect();
    let q = DyadicCube::new(root.level() - down as i32, &coords)?;
    GridFunction::indicator(*grid, &grid.cube_box(&q)?, 1.0)
}

/// `exp(1 − 1/(1 − |x−c|²/ρ²))` inside the ball of radius `ρ`, sampled at cell centres.
pub fn bump(grid: &Grid, center: [f64; 2], radius: f64) -> Result<GridFunction> {
    let dim = grid.dim();
    GridFunction::from_fn(*grid, |x| {
        let r2: f64 = (0..dim).map(|d| (x[d] - center[d]).powi(2)).sum::<f64>() / (radius * radius);
        if r2 < 1.0 {
            (1.0 - 1.0 / (1.0 - r2)).exp()
        } else {
            0.0
        }
    })
}

fn random_bump(grid: &Grid, r: &mut impl Rng) -> Result<GridFunction> {
    let o = grid.root().origin();
    let side = grid.root().side();
    let mut c = [0.0; 2];
    for d in 0..grid.dim() {
        c[d] = o[d] + side * r.gen_range(0.2..0.8);
    }
    bump(grid, c, side * r.gen_range(0.1..0.4))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_steps_are_refinement_consistent() {
        let src = PairSource::new(PairKind::RandomStep, 11, 3);
        let coarse = src.pairs(&Grid::unit(1, 4).unwrap()).unwrap();
        let fine = src.pairs(&Grid::unit(1, 6).unwrap()).unwrap();
        for (a, b) in coarse.iter().zip(&fine) {
            assert_eq!(a.f.refine(2).unwrap(), b.f);
            assert_eq!(a.g.refine(2).unwrap(), b.g);
            let (lo, hi) = (a.f.values().iter().cloned().fold(f64::MAX, f64::min), a.f.sup_abs());
            assert!(lo >= (-2.0f64).exp() && hi <= 2.0f64.exp());
        }
        assert!(src.pairs(&Grid::unit(1, 2).unwrap()).is_err());
    }

    #[test]
    fn indicators_are_dyadic_cubes() {
        let g = Grid::unit(2, 5).unwrap();
        for p in PairSource::new(PairKind::Indicator, 3, 10).pairs(&g).unwrap() {
            let ones = p.f.values().iter().filter(|&&v| v == 1.0).count();
            assert!(ones.is_power_of_two() && ones.trailing_zeros() % 2 == 0);
            assert!(p.f.values().iter().all(|&v| v == 0.0 || v == 1.0));
        }
    }

    #[test]
    fn bump_peaks_at_centre() {
        let g = Grid::unit(1, 6).unwrap();
        let b = bump(&g, [0.5, 0.0], 0.25).unwrap();
        assert!((b.sup_abs() - 1.0).abs() < 1e-2);
        assert_eq!(b.value_at(&[0.1]), 0.0);
    }
}
