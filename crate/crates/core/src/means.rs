//! Log-space power means and range extrema of positive grid functions.
//!
//! `log_mean(Q)` returns `ln (avg_Q w^e)^{1/e}`. Values `w^e` are stored
//! relative to the extreme of `e·ln w` so the table never overflows; boxes
//! whose share of the table total is too small for the cumulative sums to
//! resolve are recomputed directly with a log-sum-exp.

use crate::error::{Error, Result};
use crate::grid::{AlignedBox, Grid, GridFunction, PrefixTable};

/// Below this fraction of the table total a box sum is recomputed directly.
const RESOLUTION: f64 = 1e-20;

/// Sparse-table side limit for two-dimensional range extrema.
const SPARSE_2D_MAX_SIDE: usize = 256;

#[derive(Clone, Debug)]
pub struct PowerMean {
    grid: Grid,
    kind: Kind,
}

#[derive(Clone, Debug)]
enum Kind {
    Power { e: f64, logs: Vec<f64>, log_ref: f64, table: PrefixTable, total: f64 },
    Max(RangeMax),
    /// Stored as the maximum of `−w`.
    Min(RangeMax),
}

impl PowerMean {
    /// `(avg w^e)^{1/e}` for finite nonzero `e`; `w` must be strictly positive.
    pub fn new(w: &GridFunction, e: f64) -> Result<Self> {
        if !(e.is_finite() && e != 0.0) {
            return Err(Error::invalid(format!("power-mean exponent {e} must be finite and nonzero")));
        }
        w.require_positive("weight")?;
        let logs: Vec<f64> = w.values().iter().map(|v| v.ln()).collect();
        let log_ref = logs.iter().map(|l| e * l).fold(f64::NEG_INFINITY, f64::max);
        let scaled: Vec<f64> = logs.iter().map(|l| (e * l - log_ref).exp()).collect();
        let table = PrefixTable::from_values(*w.grid(), &scaled);
        let total = table.box_sum(&w.grid().root_box());
        Ok(PowerMean { grid: *w.grid(), kind: Kind::Power { e, logs, log_ref, table, total } })
    }

    /// Essential supremum over the box.
    pub fn max(w: &GridFunction) -> Result<Self> {
        w.require_positive("weight")?;
        Ok(PowerMean { grid: *w.grid(), kind: Kind::Max(RangeMax::new(*w.grid(), w.values().to_vec())) })
    }

    /// Essential infimum over the box.
    pub fn min(w: &GridFunction) -> Result<Self> {
        w.require_positive("weight")?;
        let neg: Vec<f64> = w.values().iter().map(|v| -v).collect();
        Ok(PowerMean { grid: *w.grid(), kind: Kind::Min(RangeMax::new(*w.grid(), neg)) })
    }

    /// `e = t/(1−t)` mean raised to `(1−t)/t`, with the maximum at `t = 1`.
    pub fn holder_dual(w: &GridFunction, t: f64) -> Result<Self> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::invalid(format!("t = {t} outside (0,1]")));
        }
        if t == 1.0 {
            PowerMean::max(w)
        } else {
            PowerMean::new(w, t / (1.0 - t))
        }
    }

    /// `ln` of the mean over a box inside the grid.
    pub fn log_mean(&self, b: &AlignedBox) -> f64 {
        match &self.kind {
            Kind::Max(rm) => rm.query(b).ln(),
            Kind::Min(rm) => (-rm.query(b)).ln(),
            Kind::Power { e, logs, log_ref, table, total } => {
                let count = b.cell_count() as f64;
                let sum = table.box_sum(b);
                let ln_avg = if sum > RESOLUTION * total {
                    log_ref + (sum / count).ln()
                } else {
                    self.direct_log_avg(logs, *e, b)
                };
                ln_avg / e
            }
        }
    }

    /// The mean itself; extrema are returned exactly.
    pub fn mean(&self, b: &AlignedBox) -> f64 {
        match &self.kind {
            Kind::Max(rm) => rm.query(b),
            Kind::Min(rm) => -rm.query(b),
            Kind::Power { .. } => self.log_mean(b).exp(),
        }
    }

    /// `ln avg_B exp(e·ln w)` by log-sum-exp over the box cells.
    fn direct_log_avg(&self, logs: &[f64], e: f64, b: &AlignedBox) -> f64 {
        let mut m = f64::NEG_INFINITY;
        for i0 in b.range(0) {
            for i1 in b.range(1) {
                m = m.max(e * logs[self.grid.index([i0, i1])]);
            }
        }
        let mut s = 0.0;
        for i0 in b.range(0) {
            for i1 in b.range(1) {
                s += (e * logs[self.grid.index([i0, i1])] - m).exp();
            }
        }
        m + (s / b.cell_count() as f64).ln()
    }
}

/// Range maximum over cell boxes: a sparse table when affordable, else a scan.
#[derive(Clone, Debug)]
pub struct RangeMax {
    grid: Grid,
    vals: Vec<f64>,
    /// `levels[k]` holds maxima over windows of side `2^k` (per axis in 2D).
    levels: Vec<Vec<f64>>,
}

impl RangeMax {
    pub fn new(grid: Grid, vals: Vec<f64>) -> Self {
        let n = grid.side_cells();
        let mut levels = Vec::new();
        if grid.dim() == 1 || n <= SPARSE_2D_MAX_SIDE {
            levels.push(vals.clone());
            let mut k = 1;
            while (1usize << k) <= n {
                let half = 1usize << (k - 1);
                let prev = &levels[k - 1];
                let cur: Vec<f64> = if grid.dim() == 1 {
                    (0..n).map(|i| if i + half < n { prev[i].max(prev[i + half]) } else { prev[i] }).collect()
                } else {
                    (0..n * n)
                        .map(|idx| {
                            let (i, j) = (idx / n, idx % n);
                            let mut m = prev[idx];
                            if i + half < n {
                                m = m.max(prev[(i + half) * n + j]);
                            }
                            if j + half < n {
                                m = m.max(prev[i * n + j + half]);
                            }
                            if i + half < n && j + half < n {
                                m = m.max(prev[(i + half) * n + j + half]);
                            }
                            m
                        })
                        .collect()
                };
                levels.push(cur);
                k += 1;
            }
        }
        RangeMax { grid, vals, levels }
    }

    pub fn query(&self, b: &AlignedBox) -> f64 {
        let r0 = b.range(0);
        let r1 = b.range(1);
        if self.levels.is_empty() {
            let mut m = f64::NEG_INFINITY;
            for i0 in r0 {
                for i1 in r1.clone() {
                    m = m.max(self.vals[self.grid.index([i0, i1])]);
                }
            }
            return m;
        }
        let n = self.grid.side_cells();
        if self.grid.dim() == 1 {
            let k = floor_log2(r0.len());
            let t = &self.levels[k];
            return t[r0.start].max(t[r0.end - (1 << k)]);
        }
        // Square windows of side 2^k cover rectangles when k fits the shorter side.
        let k = floor_log2(r0.len().min(r1.len()));
        let w = 1usize << k;
        let t = &self.levels[k];
        let mut m = f64::NEG_INFINITY;
        let mut i = r0.start;
        loop {
            let ii = i.min(r0.end - w);
            let mut j = r1.start;
            loop {
                let jj = j.min(r1.end - w);
                m = m.max(t[ii * n + jj]);
                if jj + w >= r1.end {
                    break;
                }
                j += w;
            }
            if ii + w >= r0.end {
                break;
            }
            i += w;
        }
        m
    }
}

fn floor_log2(x: usize) -> usize {
    (usize::BITS - 1 - x.leading_zeros()) as usize
}
