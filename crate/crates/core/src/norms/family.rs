use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{AlignedBox, DyadicCube, Grid};

/// Default cap on the number of cubes in a two-dimensional all-aligned family.
pub const DEFAULT_ALIGNED_BUDGET: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    DyadicSubcubes,
    AllAlignedCubes,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FamilyEntry {
    Cube(DyadicCube),
    /// A cell box on a grid of the given depth over the family root.
    Box { depth: u32, bx: AlignedBox },
}

/// A finite family of cubes inside a common dyadic root.
///
/// Dyadic families run from the root down to `min_level` (the cell level of
/// the grid when unset). All-aligned families contain every cube of whole
/// cells inside the root; in two dimensions they are thinned once the count
/// exceeds the budget, keeping every side length but only positions on a
/// coarser dyadic stride.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeFamily {
    kind: FamilyKind,
    root: DyadicCube,
    min_level: Option<i32>,
    budget: u64,
    entries: Vec<FamilyEntry>,
}

impl CubeFamily {
    pub fn dyadic(root: DyadicCube) -> Self {
        CubeFamily { kind: FamilyKind::DyadicSubcubes, root, min_level: None, budget: DEFAULT_ALIGNED_BUDGET, entries: vec![] }
    }

    pub fn dyadic_to(root: DyadicCube, min_level: i32) -> Self {
        CubeFamily { min_level: Some(min_level), ..CubeFamily::dyadic(root) }
    }

    pub fn all_aligned(root: DyadicCube) -> Self {
        CubeFamily { kind: FamilyKind::AllAlignedCubes, ..CubeFamily::dyadic(root) }
    }

    pub fn custom(root: DyadicCube, entries: Vec<FamilyEntry>) -> Self {
        CubeFamily { kind: FamilyKind::Custom, entries, ..CubeFamily::dyadic(root) }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget.max(1);
        self
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn root(&self) -> DyadicCube {
        self.root
    }

    /// Bind the family to the cells of `grid`.
    pub fn resolve(&self, grid: &Grid) -> Result<ResolvedFamily> {
        let rbox = grid.cube_box(&self.root)?;
        let lo = rbox.nominal_lo();
        let n = rbox.side_cells();
        let extent = grid.side_cells() as i64;
        let dim = grid.dim();
        let kind = match self.kind {
            FamilyKind::DyadicSubcubes => {
                let min_level = self.min_level.unwrap_or(grid.cell_level());
                if min_level < grid.cell_level() {
                    return Err(Error::Unresolvable(format!(
                        "family level {min_level} is finer than the cell level {}",
                        grid.cell_level()
                    )));
                }
                let cubes = crate::grid::enumerate_subcubes(self.root, min_level)?;
                let members = cubes
                    .into_iter()
                    .map(|c| Ok(Member { bx: grid.cube_box(&c)?, cube: Some(c) }))
                    .collect::<Result<Vec<_>>>()?;
                Resolved::Listed(members)
            }
            FamilyKind::AllAlignedCubes => {
                let mut plan = AlignedPlan { dim, lo, n, extent, log_stride: 0 };
                if dim == 2 {
                    while plan.count() > self.budget && (1i64 << plan.log_stride) < n {
                        plan.log_stride += 1;
                    }
                }
                Resolved::Aligned(plan)
            }
            FamilyKind::Custom => {
                if self.entries.is_empty() {
                    return Err(Error::invalid("custom family is empty"));
                }
                let mut members = Vec::with_capacity(self.entries.len());
                for e in &self.entries {
                    match e {
                        FamilyEntry::Cube(c) => {
                            if !self.root.contains(c) {
                                return Err(Error::invalid(format!("cube {c} outside family root {}", self.root)));
                            }
                            members.push(Member { bx: grid.cube_box(c)?, cube: Some(*c) });
                        }
                        FamilyEntry::Box { depth, bx } => {
                            if *depth != grid.depth() || bx.extent() != extent || bx.dim() != dim {
                                return Err(Error::GridMismatch(format!("box {bx} was built for another grid")));
                            }
                            members.push(Member { bx: *bx, cube: None });
                        }
                    }
                }
                members.sort();
                members.dedup();
                Resolved::Listed(members)
            }
        };
        Ok(ResolvedFamily { grid: *grid, kind })
    }
}

/// One family cube, as a cell box plus its dyadic address when it has one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Member {
    pub bx: AlignedBox,
    pub cube: Option<DyadicCube>,
}

/// Larger cubes first, then by lower corner.
impl Ord for Member {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bx.cmp(&other.bx)
    }
}

impl PartialOrd for Member {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::fmt::Display for Member {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.cube {
            Some(c) => write!(f, "{c}"),
            None => write!(f, "{}", self.bx),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct AlignedPlan {
    dim: usize,
    lo: [i64; 2],
    n: i64,
    extent: i64,
    log_stride: u32,
}

impl AlignedPlan {
    fn stride(&self, side: i64) -> i64 {
        let cap = 1i64 << self.log_stride;
        let floor_pow2 = 1i64 << (63 - side.leading_zeros());
        cap.min(floor_pow2)
    }

    /// Lower corners along one axis for cubes of `side` cells.
    fn offsets(&self, side: i64) -> Vec<i64> {
        let last = self.n - side;
        let st = self.stride(side);
        let mut v: Vec<i64> = (0..=last).step_by(st as usize).collect();
        if *v.last().unwrap() != last {
            v.push(last);
        }
        v
    }

    fn count_side(&self, side: i64) -> u64 {
        let k = if self.dim == 1 { (self.n - side + 1) as u64 } else { self.offsets(side).len() as u64 };
        k.pow(self.dim as u32)
    }

    fn count(&self) -> u64 {
        (1..=self.n).map(|s| self.count_side(s)).sum()
    }

    fn for_side(&self, side: i64, mut f: impl FnMut(Member)) {
        let mk = |a: i64, b: i64| Member {
            bx: AlignedBox::cube(self.dim, [self.lo[0] + a, self.lo[1] + b], side, self.extent),
            cube: None,
        };
        if self.dim == 1 {
            for a in 0..=(self.n - side) {
                f(mk(a, 0));
            }
        } else {
            let offs = self.offsets(side);
            for &a in &offs {
                for &b in &offs {
                    f(mk(a, b));
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
enum Resolved {
    Listed(Vec<Member>),
    Aligned(AlignedPlan),
}

/// A family bound to a grid, ready for enumeration.
#[derive(Clone, Debug)]
pub struct ResolvedFamily {
    grid: Grid,
    kind: Resolved,
}

/// Running maximum with deterministic tie-breaking toward the smaller member.
#[derive(Clone, Copy, Debug)]
pub struct Best {
    pub value: f64,
    pub member: Member,
}

impl Best {
    fn better(a: Option<Best>, b: Option<Best>) -> Option<Best> {
        match (a, b) {
            (None, x) | (x, None) => x,
            (Some(x), Some(y)) => {
                let take_y = match y.value.total_cmp(&x.value) {
                    Ordering::Greater => true,
                    Ordering::Less => false,
                    Ordering::Equal => y.member < x.member,
                };
                Some(if take_y { y } else { x })
            }
        }
    }
}

impl ResolvedFamily {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> u64 {
        match &self.kind {
            Resolved::Listed(v) => v.len() as u64,
            Resolved::Aligned(p) => p.count(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Whether every member is a dyadic cube (enables tree-structured fast paths).
    pub fn dyadic_members(&self) -> Option<&[Member]> {
        match &self.kind {
            Resolved::Listed(v) if v.iter().all(|m| m.cube.is_some()) => Some(v),
            _ => None,
        }
    }

    /// For an all-aligned one-dimensional family: `(first cell, side count)`.
    pub fn aligned_1d(&self) -> Option<(i64, i64)> {
        match &self.kind {
            Resolved::Aligned(p) if p.dim == 1 => Some((p.lo[0], p.n)),
            _ => None,
        }
    }

    /// The first member in family order.
    pub fn first(&self) -> Member {
        match &self.kind {
            Resolved::Listed(v) => v[0],
            Resolved::Aligned(p) => {
                Member { bx: AlignedBox::cube(p.dim, p.lo, p.n, p.extent), cube: None }
            }
        }
    }

    /// Distinct cube sides, in cells, largest first.
    pub fn side_lengths(&self) -> Vec<i64> {
        let mut v: Vec<i64> = match &self.kind {
            Resolved::Listed(m) => m.iter().map(|m| m.bx.side_cells()).collect(),
            Resolved::Aligned(p) => (1..=p.n).collect(),
        };
        v.sort_unstable_by(|a, b| b.cmp(a));
        v.dedup();
        v
    }

    /// Visit every member sequentially in family order.
    pub fn for_each(&self, mut f: impl FnMut(Member)) {
        match &self.kind {
            Resolved::Listed(v) => v.iter().for_each(|m| f(*m)),
            Resolved::Aligned(p) => {
                for side in (1..=p.n).rev() {
                    p.for_side(side, &mut f);
                }
            }
        }
    }

    pub fn to_vec(&self) -> Vec<Member> {
        let mut out = Vec::with_capacity(self.len() as usize);
        self.for_each(|m| out.push(m));
        out
    }

    /// Maximum of `f` over the family; ties resolve to the smallest member.
    pub fn par_max_by<F>(&self, f: F) -> Best
    where
        F: Fn(&Member) -> f64 + Sync,
    {
        let best = match &self.kind {
            Resolved::Listed(v) => v
                .par_iter()
                .map(|m| Some(Best { value: f(m), member: *m }))
                .reduce(|| None, Best::better),
            Resolved::Aligned(p) => (1..=p.n)
                .into_par_iter()
                .map(|side| {
                    let mut acc = None;
                    p.for_side(side, |m| acc = Best::better(acc, Some(Best { value: f(&m), member: m })));
                    acc
                })
                .reduce(|| None, Best::better),
        };
        best.expect("resolved families are nonempty")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aligned_1d_is_exhaustive() {
        let g = Grid::unit(1, 3).unwrap();
        let fam = CubeFamily::all_aligned(DyadicCube::unit(1)).resolve(&g).unwrap();
        assert_eq!(fam.len(), 8 * 9 / 2);
        let v = fam.to_vec();
        assert_eq!(v.len() as u64, fam.len());
        assert_eq!(v[0], fam.first());
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn aligned_2d_budget_thins_positions_but_keeps_sides() {
        let g = Grid::unit(2, 5).unwrap();
        let full = CubeFamily::all_aligned(DyadicCube::unit(2)).resolve(&g).unwrap();
        let exhaustive: u64 = (1..=32u64).map(|s| (33 - s) * (33 - s)).sum();
        assert_eq!(full.len(), exhaustive);
        let thin = CubeFamily::all_aligned(DyadicCube::unit(2)).with_budget(2000).resolve(&g).unwrap();
        assert!(thin.len() <= 2000, "{}", thin.len());
        assert_eq!(thin.side_lengths(), (1..=32).rev().collect::<Vec<_>>());
        assert_eq!(thin.to_vec().len() as u64, thin.len());
    }

    #[test]
    fn dyadic_family_on_subroot() {
        let g = Grid::unit(1, 4).unwrap();
        let q = DyadicCube::new(-1, &[1]).unwrap();
        let fam = CubeFamily::dyadic(q).resolve(&g).unwrap();
        assert_eq!(fam.len(), 15);
        assert_eq!(fam.first().cube, Some(q));
        assert!(CubeFamily::dyadic_to(q, -5).resolve(&g).is_err());
    }

    #[test]
    fn ties_go_to_the_smallest_member() {
        let g = Grid::unit(1, 4).unwrap();
        let fam = CubeFamily::all_aligned(DyadicCube::unit(1)).resolve(&g).unwrap();
        let best = fam.par_max_by(|_| 1.0);
        assert_eq!(best.member, fam.first());
        let best = fam.par_max_by(|m| if m.bx.side_cells() == 1 { 2.0 } else { 0.0 });
        assert_eq!(best.member.bx.nominal_lo()[0], 0);
    }
}
