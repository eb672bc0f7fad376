use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of levels `enumerate_subcubes` will walk in one call.
const MAX_ENUMERATION_LEVELS: i32 = 24;

/// The dyadic cube `2^level · (coords + [0,1)^dim)`.
///
/// Only the first `dim` entries of `coords` are meaningful; the rest are zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicCube {
    dim: u8,
    level: i32,
    coords: [i64; 2],
}

impl DyadicCube {
    pub fn new(level: i32, coords: &[i64]) -> Result<Self> {
        if coords.is_empty() || coords.len() > 2 {
            return Err(Error::invalid(format!("dimension {} not in {{1,2}}", coords.len())));
        }
        let mut c = [0i64; 2];
        c[..coords.len()].copy_from_slice(coords);
        Ok(DyadicCube { dim: coords.len() as u8, level, coords: c })
    }

    /// `[0,1)^dim`.
    pub fn unit(dim: usize) -> Self {
        DyadicCube { dim: dim as u8, level: 0, coords: [0, 0] }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn level(&self) -> i32 {
        self.level
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords[..self.dim()]
    }

    pub fn side(&self) -> f64 {
        2f64.powi(self.level)
    }

    pub fn volume(&self) -> f64 {
        2f64.powi(self.level * self.dim as i32)
    }

    /// Lower corner.
    pub fn origin(&self) -> [f64; 2] {
        let h = self.side();
        [self.coords[0] as f64 * h, self.coords[1] as f64 * h]
    }

    pub fn center(&self) -> [f64; 2] {
        let o = self.origin();
        let h = self.side() / 2.0;
        let mut c = [o[0] + h, o[1] + h];
        if self.dim == 1 {
            c[1] = 0.0;
        }
        c
    }

    pub fn parent(&self) -> Self {
        DyadicCube {
            dim: self.dim,
            level: self.level + 1,
            coords: [self.coords[0] >> 1, if self.dim == 2 { self.coords[1] >> 1 } else { 0 }],
        }
    }

    /// Child number `index ∈ [0, 2^dim)`; bit `d` selects the upper half along axis `d`.
    pub fn child(&self, index: usize) -> Self {
        debug_assert!(index < (1 << self.dim));
        let mut coords = [0i64; 2];
        for (d, c) in coords.iter_mut().enumerate().take(self.dim()) {
            *c = 2 * self.coords[d] + ((index >> d) & 1) as i64;
        }
        DyadicCube { dim: self.dim, level: self.level - 1, coords }
    }

    pub fn children(&self) -> impl Iterator<Item = DyadicCube> + '_ {
        (0..1usize << self.dim).map(move |i| self.child(i))
    }

    /// Ancestor at `level ≥ self.level`.
    pub fn ancestor(&self, level: i32) -> Self {
        debug_assert!(level >= self.level);
        let shift = (level - self.level).min(63) as u32;
        let mut coords = [0i64; 2];
        for (d, c) in coords.iter_mut().enumerate().take(self.dim()) {
            *c = self.coords[d] >> shift;
        }
        DyadicCube { dim: self.dim, level, coords }
    }

    /// Whether `other ⊆ self`.
    pub fn contains(&self, other: &DyadicCube) -> bool {
        self.dim == other.dim && other.level <= self.level && other.ancestor(self.level) == *self
    }

    pub fn intersects(&self, other: &DyadicCube) -> bool {
        self.contains(other) || other.contains(self)
    }

    /// Whether the point lies in the half-open cube.
    pub fn contains_point(&self, x: &[f64]) -> bool {
        let o = self.origin();
        let h = self.side();
        (0..self.dim()).all(|d| x[d] >= o[d] && x[d] < o[d] + h)
    }
}

impl fmt::Display for DyadicCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}@", self.level)?;
        let parts: Vec<String> = self.coords().iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// Every dyadic cube inside `root` with level in `[min_level, root.level]`.
///
/// Ordered coarse to fine; within a level, row-major in the coordinates.
pub fn enumerate_subcubes(root: DyadicCube, min_level: i32) -> Result<Vec<DyadicCube>> {
    if min_level > root.level {
        return Err(Error::LevelOutOfRange(format!(
            "min_level {min_level} above root level {}",
            root.level
        )));
    }
    if root.level - min_level > MAX_ENUMERATION_LEVELS {
        return Err(Error::LevelOutOfRange(format!(
            "{} levels requested, at most {MAX_ENUMERATION_LEVELS}",
            root.level - min_level
        )));
    }
    let n = root.dim();
    let mut out = Vec::new();
    for j in 0..=(root.level - min_level) {
        let side = 1i64 << j;
        let level = root.level - j;
        let base: Vec<i64> = root.coords().iter().map(|c| c * side).collect();
        if n == 1 {
            for i in 0..side {
                out.push(DyadicCube::new(level, &[base[0] + i])?);
            }
        } else {
            for i in 0..side {
                for k in 0..side {
                    out.push(DyadicCube::new(level, &[base[0] + i, base[1] + k])?);
                }
            }
        }
    }
    Ok(out)
}
