//! Empirical checks built from the operators, norms and weights: the
//! sharpness construction, refinement-stability ratio harnesses, the power
//! weight dichotomy and the testing-condition necessity check.

pub mod fs_dual;
pub mod functions;
pub mod necessity;
pub mod ratio;
pub mod sharpness;
pub mod stein_weiss;

use std::io::Write;

use serde::Serialize;

use crate::error::Result;

pub use fs_dual::{fs_dual_check, FsDualConfig, FsDualReport};
pub use functions::{PairKind, PairSource, TestPair};
pub use necessity::{necessity_check, NecessityReport, NecessityRow};
pub use ratio::{ratio_harness, HarnessSpec, RatioRecord, RatioSummary, WeightSpec, STABILITY_FACTOR};
pub use sharpness::{build_sharpness_pair, run_sharpness, Branch, SharpnessConfig, SharpnessPair, SharpnessReport, SharpnessRow};
pub use stein_weiss::{stein_weiss_check, SteinWeissConfig, SteinWeissReport, Verdict};

/// Least-squares slope of `y` against `x`; `None` with fewer than two points.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || x.len() != y.len() {
        return None;
    }
    let m = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / m, y.iter().sum::<f64>() / m);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

/// Write rows as CSV with a header taken from the field names.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Write rows as JSON lines.
pub fn write_json_lines<T: Serialize, W: Write>(rows: &[T], mut out: W) -> Result<()> {
    for r in rows {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 0.5 - 2.0 * v).collect();
        assert!((fit_slope(&x, &y).unwrap() + 2.0).abs() < 1e-14);
        assert_eq!(fit_slope(&x[..1], &y[..1]), None);
        assert_eq!(fit_slope(&[1.0, 1.0], &[0.0, 1.0]), None);
    }

    #[derive(Serialize)]
    struct Row {
        a: u32,
        b: f64,
    }

    #[test]
    fn csv_and_json_lines() {
        let rows = [Row { a: 1, b: 0.5 }, Row { a: 2, b: -1.0 }];
        let mut csv = Vec::new();
        write_csv(&rows, &mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap(), "a,b\n1,0.5\n2,-1.0\n");
        let mut js = Vec::new();
        write_json_lines(&rows, &mut js).unwrap();
        assert_eq!(String::from_utf8(js).unwrap(), "{\"a\":1,\"b\":0.5}\n{\"a\":2,\"b\":-1.0}\n");
    }
}
