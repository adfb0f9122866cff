//! Helpers shared by the acceptance checks: configuration shortcuts, table
//! slicing and the comparison metrics.

use irsfso_cli::config::{ExperimentConfig, Settings};
use irsfso_cli::ResultTable;

/// Default configuration with `key=value` overrides applied.
pub fn config(overrides: &[&str]) -> ExperimentConfig {
    let mut s = Settings::defaults();
    for o in overrides {
        s.apply_override(o).unwrap_or_else(|e| panic!("{o}: {e}"));
    }
    ExperimentConfig::from_settings(s).expect("valid configuration")
}

/// Numeric column `col` of the rows whose text columns match every
/// `(name, value)` filter.
pub fn column(t: &ResultTable, col: &str, filters: &[(&str, &str)]) -> Vec<f64> {
    let c = t.column_index(col).expect("known column");
    let idx: Vec<(usize, &str)> = filters
        .iter()
        .map(|(n, v)| (t.column_index(n).expect("known column"), *v))
        .collect();
    t.rows
        .iter()
        .filter(|r| idx.iter().all(|(i, v)| r[*i].as_str() == Some(v)))
        .map(|r| r[c].as_f64().expect("numeric cell"))
        .collect()
}

/// Rows whose numeric column `name` equals `value`.
pub fn with_number(t: &ResultTable, name: &str, value: f64) -> ResultTable {
    let i = t.column_index(name).expect("known column");
    let mut out = t.clone();
    out.rows.retain(|r| r[i].as_f64() == Some(value));
    out
}

/// `sqrt(sum (a - b)^2 / sum b^2)` over the indices where `mask` holds.
pub fn relative_rms(a: &[f64], b: &[f64], mask: &[bool]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for ((x, y), &m) in a.iter().zip(b).zip(mask) {
        if m {
            num += (x - y) * (x - y);
            den += y * y;
        }
    }
    (num / den).sqrt()
}

/// Indices where `v` is at least half its maximum.
pub fn half_power_mask(v: &[f64]) -> Vec<bool> {
    let peak = v.iter().cloned().fold(0.0, f64::max);
    v.iter().map(|&x| x >= 0.5 * peak).collect()
}

/// Index of the largest grid point at which any of `curves` is still
/// nonzero, i.e. the highest point where the curves can be ordered.
pub fn highest_informative_point(curves: &[&[f64]]) -> Option<usize> {
    let n = curves.iter().map(|c| c.len()).min()?;
    (0..n).rev().find(|&i| curves.iter().any(|c| c[i] > 0.0))
}
