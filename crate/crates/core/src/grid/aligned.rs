use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A box of whole cells, given by half-open per-axis index ranges `[lo, hi)`.
///
/// The nominal ranges may leave the grid (as `3Q` does near the boundary);
/// `extent` records the grid side so clipped ranges and the clip flag are
/// available without the grid at hand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlignedBox {
    dim: u8,
    lo: [i64; 2],
    hi: [i64; 2],
    extent: i64,
}

impl AlignedBox {
    /// Box with nominal ranges; panics in debug builds on empty ranges.
    pub fn new(dim: usize, lo: [i64; 2], hi: [i64; 2], extent: i64) -> Self {
        let mut b = AlignedBox { dim: dim as u8, lo, hi, extent };
        if dim == 1 {
            b.lo[1] = 0;
            b.hi[1] = 1;
        }
        debug_assert!((0..dim).all(|d| b.lo[d] < b.hi[d]));
        b
    }

    /// Cube of `side` cells with lower corner `lo`.
    pub fn cube(dim: usize, lo: [i64; 2], side: i64, extent: i64) -> Self {
        AlignedBox::new(dim, lo, [lo[0] + side, lo[1] + side], extent)
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn extent(&self) -> i64 {
        self.extent
    }

    pub fn nominal_lo(&self) -> [i64; 2] {
        self.lo
    }

    pub fn nominal_hi(&self) -> [i64; 2] {
        self.hi
    }

    /// Side length in cells along axis 0.
    pub fn side_cells(&self) -> i64 {
        self.hi[0] - self.lo[0]
    }

    pub fn is_cube(&self) -> bool {
        self.dim == 1 || self.hi[0] - self.lo[0] == self.hi[1] - self.lo[1]
    }

    /// Clipped range along axis `d` as `usize` indices; may be empty.
    pub fn range(&self, d: usize) -> std::ops::Range<usize> {
        if d >= self.dim() {
            return 0..1;
        }
        let lo = self.lo[d].clamp(0, self.extent) as usize;
        let hi = self.hi[d].clamp(0, self.extent) as usize;
        lo..hi.max(lo)
    }

    pub fn is_clipped(&self) -> bool {
        (0..self.dim()).any(|d| self.lo[d] < 0 || self.hi[d] > self.extent)
    }

    /// Number of grid cells inside the clipped box.
    pub fn cell_count(&self) -> usize {
        (0..self.dim()).map(|d| self.range(d).len()).product()
    }

    /// Number of cells the unclipped box would cover.
    pub fn nominal_cell_count(&self) -> u64 {
        (0..self.dim()).map(|d| (self.hi[d] - self.lo[d]) as u64).product()
    }

    pub fn contains_cell(&self, idx: [usize; 2]) -> bool {
        (0..self.dim()).all(|d| (idx[d] as i64) >= self.lo[d] && (idx[d] as i64) < self.hi[d])
    }

    /// Whether `other` lies inside `self` (nominal ranges).
    pub fn contains_box(&self, other: &AlignedBox) -> bool {
        (0..self.dim()).all(|d| self.lo[d] <= other.lo[d] && other.hi[d] <= self.hi[d])
    }

    /// Concentric box with side multiplied by `factor`, which must be odd for
    /// the result to stay aligned.
    pub fn dilate_odd(&self, factor: i64) -> AlignedBox {
        debug_assert!(factor % 2 == 1);
        let mut lo = self.lo;
        let mut hi = self.hi;
        for d in 0..self.dim() {
            let w = self.hi[d] - self.lo[d];
            lo[d] -= w * (factor - 1) / 2;
            hi[d] += w * (factor - 1) / 2;
        }
        AlignedBox::new(self.dim(), lo, hi, self.extent)
    }

    fn key(&self) -> (std::cmp::Reverse<i64>, [i64; 2], [i64; 2]) {
        (std::cmp::Reverse(self.hi[0] - self.lo[0]), self.lo, self.hi)
    }
}

/// Larger boxes first, then by lower corner. Used for deterministic tie-breaking.
impl Ord for AlignedBox {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for AlignedBox {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for AlignedBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            (0..self.dim()).map(|d| format!("[{},{})", self.lo[d], self.hi[d])).collect();
        f.write_str(&parts.join("x"))?;
        if self.is_clipped() {
            f.write_str("*")?;
        }
        Ok(())
    }
}
