//! Cycle-to-cycle period (jitter) and amplitude (shimmer) perturbation.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Refined position and height of the local maximum at `i`.
fn parabolic_peak(x: &[f64], i: usize) -> (f64, f64) {
    if i == 0 || i + 1 >= x.len() {
        return (i as f64, x[i]);
    }
    let (a, b, c) = (x[i - 1], x[i], x[i + 1]);
    let curv = a - 2.0 * b + c;
    if curv >= 0.0 {
        return (i as f64, b);
    }
    let delta = (0.5 * (a - c) / curv).clamp(-0.5, 0.5);
    (i as f64 + delta, b - 0.25 * (a - c) * delta)
}

fn argmax(x: &[f64], lo: usize, hi: usize) -> usize {
    (lo..hi).fold(lo, |best, i| if x[i] > x[best] { i } else { best })
}

/// Positive-peak period markers within `region` for a period of `period`
/// samples: `(position, amplitude)` pairs.
pub fn period_markers(region: &[f64], period: f64) -> Vec<(f64, f64)> {
    let mut marks = Vec::new();
    if period < 2.0 || region.len() < period as usize + 2 {
        return marks;
    }
    let first = argmax(region, 0, (math::ceil(period) as usize).min(region.len()));
    let mut current = parabolic_peak(region, first);
    marks.push(current);
    loop {
        let lo = math::ceil(current.0 + 0.8 * period) as usize;
        let hi = math::floor(current.0 + 1.2 * period) as usize + 1;
        // Only search windows that lie fully inside the region.
        if hi + 1 > region.len() {
            break;
        }
        let i = argmax(region, lo, hi);
        current = parabolic_peak(region, i);
        marks.push(current);
    }
    marks
}

/// `(jitter, shimmer_db)` of one region given its period markers.
pub fn perturbation(marks: &[(f64, f64)]) -> (f64, f64) {
    let periods: Vec<f64> = marks.windows(2).map(|w| w[1].0 - w[0].0).collect();
    let jitter = if periods.len() >= 2 {
        let mean = periods.iter().sum::<f64>() / periods.len() as f64;
        let diff = periods.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>()
            / (periods.len() - 1) as f64;
        diff / mean
    } else {
        0.0
    };
    let ratios: Vec<f64> = marks
        .windows(2)
        .filter(|w| w[0].1 > 0.0 && w[1].1 > 0.0)
        .map(|w| (20.0 * math::log10(w[1].1 / w[0].1)).abs())
        .collect();
    let shimmer = if ratios.is_empty() {
        0.0
    } else {
        ratios.iter().sum::<f64>() / ratios.len() as f64
    };
    (jitter, shimmer)
}

/// Local jitter (ratio) and shimmer (dB) per frame. Frame `t` covers
/// samples `[t*hop, t*hop + frame_len)`; unvoiced frames get zeros.
pub fn compute_jitter_shimmer(
    samples: &[f64],
    sample_rate: u32,
    f0_hz: &[f64],
    voiced: &[bool],
    frame_len: usize,
    hop: usize,
) -> (Vec<f64>, Vec<f64>) {
    let n = f0_hz.len();
    let mut jitter = vec![0.0; n];
    let mut shimmer = vec![0.0; n];
    for t in 0..n {
        if !voiced[t] || f0_hz[t] <= 0.0 {
            continue;
        }
        let start = (t * hop).min(samples.len());
        let end = (start + frame_len).min(samples.len());
        let marks = period_markers(&samples[start..end], sample_rate as f64 / f0_hz[t]);
        let (j, s) = perturbation(&marks);
        jitter[t] = j;
        shimmer[t] = s;
    }
    (jitter, shimmer)
}
