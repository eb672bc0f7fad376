//! Cell integrals of the kernel `|y|^{α−n}`.
//!
//! For the cell of side `h` centred at `d·h` (integer offset `d`) the weight is
//! `h^α · W(d)` with `W(d) = ∫_{d+[−½,½]^n} |u|^{α−n} du`, so one unit table
//! serves every grid. In one dimension `W` is an exact antiderivative
//! difference. In two dimensions regular cells use tensor Gauss–Legendre
//! rules, refined near the origin, and the singular cell uses the scaling
//! identity `W(0) = R + 2^{−α} W(0)`, where `R` is the integral over the ring
//! between the unit square and its concentric half.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingularRule {
    Exact1d,
    /// Number of dyadic rings around the singular cell evaluated explicitly;
    /// the remaining inner square is closed by the scaling identity.
    Subdivide2d { depth: u32 },
}

pub const DEFAULT_RING_DEPTH: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    alpha: f64,
    rule: SingularRule,
}

impl KernelSpec {
    /// Kernel `|y|^{α−n}` with the default singular rule for dimension `n`.
    pub fn new(alpha: f64, dim: usize) -> Result<Self> {
        let rule = match dim {
            1 => SingularRule::Exact1d,
            2 => SingularRule::Subdivide2d { depth: DEFAULT_RING_DEPTH },
            _ => return Err(Error::invalid(format!("dimension {dim} not in {{1,2}}"))),
        };
        KernelSpec::with_rule(alpha, rule)
    }

    pub fn with_rule(alpha: f64, rule: SingularRule) -> Result<Self> {
        let spec = KernelSpec { alpha, rule };
        let n = spec.dim() as f64;
        if !(alpha > 0.0 && alpha < n) {
            return Err(Error::invalid(format!("alpha = {alpha} outside (0, {n})")));
        }
        if let SingularRule::Subdivide2d { depth } = rule {
            if depth == 0 {
                return Err(Error::invalid("singular ring depth must be at least 1"));
            }
        }
        Ok(spec)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn rule(&self) -> SingularRule {
        self.rule
    }

    pub fn dim(&self) -> usize {
        match self.rule {
            SingularRule::Exact1d => 1,
            SingularRule::Subdivide2d { .. } => 2,
        }
    }

    /// Unit-cell weights `W(d)` for offsets `|d|_∞ ≤ radius`, row-major over `[−radius, radius]^n`.
    pub fn unit_table(&self, radius: usize) -> Vec<f64> {
        let r = radius as i64;
        let w = 2 * radius + 1;
        match self.rule {
            SingularRule::Exact1d => (-r..=r).map(|d| unit_weight_1d(self.alpha, d)).collect(),
            SingularRule::Subdivide2d { depth } => {
                let mut quadrant = vec![0.0; (radius + 1) * (radius + 1)];
                for a in 0..=radius {
                    for b in 0..=a {
                        let v = if a == 0 {
                            singular_2d(self.alpha, depth)
                        } else {
                            regular_2d(self.alpha, a as f64, b as f64)
                        };
                        quadrant[a * (radius + 1) + b] = v;
                        quadrant[b * (radius + 1) + a] = v;
                    }
                }
                let mut out = vec![0.0; w * w];
                for i in 0..w {
                    for j in 0..w {
                        let a = (i as i64 - r).unsigned_abs() as usize;
                        let b = (j as i64 - r).unsigned_abs() as usize;
                        out[i * w + j] = quadrant[a * (radius + 1) + b];
                    }
                }
                out
            }
        }
    }
}

/// `∫_{d−½}^{d+½} |u|^{α−1} du`.
pub fn unit_weight_1d(alpha: f64, d: i64) -> f64 {
    let anti = |u: f64| u.signum() * u.abs().powf(alpha) / alpha;
    if d == 0 {
        2.0 * 0.5f64.powf(alpha) / alpha
    } else {
        let x = d.unsigned_abs() as f64;
        anti(x + 0.5) - anti(x - 0.5)
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]` by Newton iteration.
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let p = if m == 0 { 1.0 } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn integrand(alpha: f64, x: f64, y: f64) -> f64 {
    (x * x + y * y).powf((alpha - 2.0) / 2.0)
}

/// Tensor rule over the square `[cx ± s/2] × [cy ± s/2]`, split into `sub²` pieces.
fn square(alpha: f64, cx: f64, cy: f64, s: f64, sub: usize, rule: &[(f64, f64)]) -> f64 {
    let hs = s / sub as f64;
    let mut total = 0.0;
    for a in 0..sub {
        let x0 = cx - s / 2.0 + (a as f64 + 0.5) * hs;
        for b in 0..sub {
            let y0 = cy - s / 2.0 + (b as f64 + 0.5) * hs;
            let mut acc = 0.0;
            for &(u, wu) in rule {
                for &(v, wv) in rule {
                    acc += wu * wv * integrand(alpha, x0 + u * hs / 2.0, y0 + v * hs / 2.0);
                }
            }
            total += acc * hs * hs / 4.0;
        }
    }
    total
}

fn regular_2d(alpha: f64, a: f64, b: f64) -> f64 {
    let dist = a.max(b);
    let (sub, order) = if dist <= 1.0 {
        (4, 8)
    } else if dist <= 3.0 {
        (2, 8)
    } else if dist <= 8.0 {
        (1, 8)
    } else {
        (1, 4)
    };
    square(alpha, a, b, 1.0, sub, &gauss_legendre(order))
}

/// `W(0)` for the unit square centred at the origin.
fn singular_2d(alpha: f64, depth: u32) -> f64 {
    let rule = gauss_legendre(8);
    let c: [f64; 4] = [-0.375, -0.125, 0.125, 0.375];
    let mut ring = 0.0;
    for &x in &c {
        for &y in &c {
            if x.abs() == 0.125 && y.abs() == 0.125 {
                continue;
            }
            ring += square(alpha, x, y, 0.25, 8, &rule);
        }
    }
    // Ring k (k = 0..depth) contributes 2^{−kα}·R; the innermost square is
    // 2^{−depth·α}·W(0), solved for W(0).
    let q = 2f64.powf(-alpha);
    let explicit: f64 = (0..depth).map(|k| q.powi(k as i32)).sum();
    ring * explicit / (1.0 - q.powi(depth as i32))
}
