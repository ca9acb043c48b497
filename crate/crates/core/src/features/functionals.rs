use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::math;

/// Summary statistics collapsing one contour into six numbers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSummary {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub p20: f64,
    pub p50: f64,
    pub p80: f64,
    /// `p80 - p20`.
    pub pctl_range_20_80: f64,
}

/// Linear-interpolation percentile of an ascending slice, `q` in `[0, 1]`.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = q * (sorted.len() - 1) as f64;
    let lo = math::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, math::sqrt(var))
}

/// Summary of `values`, or `None` when there is nothing to summarize.
pub fn summarize(values: &[f64]) -> Option<FunctionalSummary> {
    if values.is_empty() {
        return None;
    }
    let (mean, std) = mean_std(values);
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let p20 = percentile_sorted(&sorted, 0.2);
    let p50 = percentile_sorted(&sorted, 0.5);
    let p80 = percentile_sorted(&sorted, 0.8);
    Some(FunctionalSummary {
        mean,
        std,
        p20,
        p50,
        p80,
        pctl_range_20_80: p80 - p20,
    })
}

/// Applies the functionals to `series`, restricted to positions where `mask`
/// is true. An empty selection yields the all-zero summary.
pub fn apply_functionals(series: &[f64], mask: Option<&[bool]>) -> FunctionalSummary {
    let selected: Vec<f64> = match mask {
        Some(m) => series
            .iter()
            .zip(m)
            .filter_map(|(&v, &keep)| keep.then_some(v))
            .collect(),
        None => series.to_vec(),
    };
    summarize(&selected).unwrap_or_else(|| {
        log::debug!("functionals over an empty selection, using zeros");
        FunctionalSummary::default()
    })
}
