//! Voicing segmentation and loudness contour dynamics.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::functionals::mean_std;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start_s: f64,
    pub len_s: f64,
    pub voiced: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoicingSummary {
    pub segments: Vec<Segment>,
    pub voiced_per_sec: f64,
    pub mean_voiced_len: f64,
    pub std_voiced_len: f64,
    pub mean_unvoiced_len: f64,
}

/// Splits the flag series into maximal runs. Empty classes report 0.
pub fn segment_voicing(voiced: &[bool], hop_s: f64) -> VoicingSummary {
    let mut segments = Vec::new();
    let mut start = 0;
    for i in 1..=voiced.len() {
        if i == voiced.len() || voiced[i] != voiced[start] {
            segments.push(Segment {
                start_s: start as f64 * hop_s,
                len_s: (i - start) as f64 * hop_s,
                voiced: voiced[start],
            });
            start = i;
        }
    }
    let duration = voiced.len() as f64 * hop_s;
    let lens = |kind: bool| -> Vec<f64> {
        segments
            .iter()
            .filter(|s| s.voiced == kind)
            .map(|s| s.len_s)
            .collect()
    };
    let voiced_lens = lens(true);
    let (mean_voiced_len, std_voiced_len) = mean_std(&voiced_lens);
    let (mean_unvoiced_len, _) = mean_std(&lens(false));
    let voiced_per_sec = if duration > 0.0 {
        voiced_lens.len() as f64 / duration
    } else {
        0.0
    };
    VoicingSummary {
        segments,
        voiced_per_sec,
        mean_voiced_len,
        std_voiced_len,
        mean_unvoiced_len,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LoudnessDynamics {
    /// Mean rise rate trough to peak, per second.
    pub rise_slope_mean: f64,
    pub rise_slope_std: f64,
    /// Mean fall rate peak to trough, per second; negative.
    pub fall_slope_mean: f64,
    pub fall_slope_std: f64,
    pub peaks_per_sec: f64,
}

/// Peaks are samples strictly above both neighbours and above
/// `min + 0.1 * (max - min)`. Each peak's rise starts at the lowest sample
/// since the previous peak (or the series start); its fall ends at the lowest
/// sample before the next peak (or the series end).
pub fn loudness_dynamics(loudness: &[f64], hop_s: f64) -> LoudnessDynamics {
    let n = loudness.len();
    if n < 3 {
        return LoudnessDynamics::default();
    }
    let min = loudness.iter().copied().fold(f64::INFINITY, f64::min);
    let max = loudness.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = min + 0.1 * (max - min);
    let peaks: Vec<usize> = (1..n - 1)
        .filter(|&i| {
            loudness[i] > loudness[i - 1] && loudness[i] > loudness[i + 1] && loudness[i] > floor
        })
        .collect();
    if peaks.is_empty() {
        return LoudnessDynamics::default();
    }
    let lowest = |lo: usize, hi: usize| -> usize {
        (lo..hi).fold(lo, |best, i| if loudness[i] < loudness[best] { i } else { best })
    };
    let mut rises = Vec::with_capacity(peaks.len());
    let mut falls = Vec::with_capacity(peaks.len());
    for (k, &p) in peaks.iter().enumerate() {
        let prev = if k == 0 { 0 } else { peaks[k - 1] };
        let next = peaks.get(k + 1).copied().unwrap_or(n - 1);
        let trough = lowest(prev, p);
        if trough < p {
            rises.push((loudness[p] - loudness[trough]) / ((p - trough) as f64 * hop_s));
        }
        let trough = lowest(p + 1, next + 1);
        if trough > p {
            falls.push((loudness[trough] - loudness[p]) / ((trough - p) as f64 * hop_s));
        }
    }
    let (rise_slope_mean, rise_slope_std) = mean_std(&rises);
    let (fall_slope_mean, fall_slope_std) = mean_std(&falls);
    LoudnessDynamics {
        rise_slope_mean,
        rise_slope_std,
        fall_slope_mean,
        fall_slope_std,
        peaks_per_sec: peaks.len() as f64 / (n as f64 * hop_s),
    }
}
