//! Autocorrelation pitch tracker.

use alloc::vec;
use alloc::vec::Vec;

use crate::audio::FrameSequence;
use crate::dsp::{autocorrelation, Fft};
use crate::math;

use super::ExtractionConfig;

/// Reference frequency of the semitone scale (A0).
pub const SEMITONE_REF_HZ: f64 = 27.5;

#[derive(Debug, Clone, PartialEq)]
pub struct PitchTrack {
    /// 0 where unvoiced.
    pub f0_hz: Vec<f64>,
    /// Semitones above 27.5 Hz, 0 where unvoiced.
    pub f0_semitones: Vec<f64>,
    pub voiced: Vec<bool>,
    /// Normalized correlation at the selected lag.
    pub strength: Vec<f64>,
}

pub fn hz_to_semitones(hz: f64) -> f64 {
    12.0 * math::log2(hz / SEMITONE_REF_HZ)
}

/// Per frame: normalized cross-correlation over the lags for
/// `[f0_min, f0_max]`, shortest strong peak, parabolic refinement. A frame is
/// voiced when the peak exceeds the voicing threshold and the frame level is
/// above the silence floor.
pub fn compute_f0(frames: &FrameSequence, cfg: &ExtractionConfig) -> PitchTrack {
    let rate = frames.sample_rate() as f64;
    let len = frames.frame_len_samples();
    let lag_min = (math::floor(rate / cfg.f0_max_hz) as usize).max(2);
    let lag_max = (math::ceil(rate / cfg.f0_min_hz) as usize).min(len.saturating_sub(2));
    let fft = Fft::new((len + lag_max + 2).next_power_of_two());
    let floor_rms = math::pow(10.0, cfg.silence_floor_db / 20.0);

    let n = frames.len();
    let mut track = PitchTrack {
        f0_hz: vec![0.0; n],
        f0_semitones: vec![0.0; n],
        voiced: vec![false; n],
        strength: vec![0.0; n],
    };
    if lag_max <= lag_min {
        return track;
    }
    let mut prefix = vec![0.0; len + 1];
    let mut nccf = vec![0.0; lag_max + 2];
    for (t, frame) in frames.iter().enumerate() {
        for (i, &x) in frame.iter().enumerate() {
            prefix[i + 1] = prefix[i] + x * x;
        }
        let energy = prefix[len];
        let rms = math::sqrt(energy / len as f64);
        if rms <= floor_rms {
            continue;
        }
        let r = autocorrelation(&fft, frame, lag_max + 1);
        for lag in lag_min - 1..=lag_max + 1 {
            let e0 = prefix[len - lag];
            let e1 = energy - prefix[lag];
            let denom = math::sqrt(e0 * e1);
            nccf[lag] = if denom > 0.0 { r[lag] / denom } else { 0.0 };
        }
        let peaks: Vec<usize> = (lag_min..=lag_max)
            .filter(|&l| nccf[l] >= nccf[l - 1] && nccf[l] > nccf[l + 1])
            .collect();
        let Some(best) = peaks.iter().map(|&l| nccf[l]).reduce(f64::max) else {
            continue;
        };
        // Shortest lag within 10% of the best peak avoids period doubling.
        let lag = peaks
            .iter()
            .copied()
            .find(|&l| nccf[l] >= 0.9 * best)
            .unwrap_or(lag_min);
        let value = nccf[lag];
        track.strength[t] = value;
        if value <= cfg.voicing_threshold {
            continue;
        }
        let (a, b, c) = (nccf[lag - 1], nccf[lag], nccf[lag + 1]);
        let curv = a - 2.0 * b + c;
        let delta = if curv < 0.0 {
            (0.5 * (a - c) / curv).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        let f0 = rate / (lag as f64 + delta);
        track.f0_hz[t] = f0;
        track.f0_semitones[t] = hz_to_semitones(f0);
        track.voiced[t] = true;
    }
    track
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::{frame_signal, AudioBuffer, WindowKind};
    use core::f64::consts::PI;
    use rand::Rng;

    fn pitch_frames(samples: Vec<f64>) -> FrameSequence {
        let b = AudioBuffer::new(samples, 16_000).unwrap();
        frame_signal(&b, 60.0, 10.0, WindowKind::Rect).unwrap()
    }

    #[test]
    fn semitone_reference() {
        assert!((hz_to_semitones(220.0) - 36.0).abs() < 1e-12);
        assert!(hz_to_semitones(27.5).abs() < 1e-12);
    }

    #[test]
    fn pure_sine_220() {
        let s = (0..16_000)
            .map(|i| math::sin(2.0 * PI * 220.0 * i as f64 / 16_000.0))
            .collect();
        let track = compute_f0(&pitch_frames(s), &ExtractionConfig::default());
        assert!(track.voiced.iter().all(|&v| v));
        for (&hz, &st) in track.f0_hz.iter().zip(&track.f0_semitones) {
            assert!((hz - 220.0).abs() <= 2.0, "{hz}");
            assert!((st - 36.0).abs() <= 0.16, "{st}");
        }
    }

    #[test]
    fn white_noise_is_mostly_unvoiced() {
        let mut rng = crate::rng::rng_from(11);
        let s = (0..32_000).map(|_| rng.random_range(-0.5..0.5)).collect();
        let track = compute_f0(&pitch_frames(s), &ExtractionConfig::default());
        let frac = track.voiced.iter().filter(|&&v| v).count() as f64 / track.voiced.len() as f64;
        assert!(frac < 0.2, "voiced fraction {frac}");
        // Aperiodic: the best normalized correlation stays far below a periodic signal's.
        let mean_strength = track.strength.iter().sum::<f64>() / track.strength.len() as f64;
        assert!(mean_strength < 0.3, "{mean_strength}");
    }

    #[test]
    fn silence_is_unvoiced() {
        let track = compute_f0(&pitch_frames(vec![0.0; 8000]), &ExtractionConfig::default());
        assert!(track.voiced.iter().all(|&v| !v));
        assert!(track.f0_semitones.iter().all(|&v| v == 0.0));
        assert!(track.f0_hz.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn low_and_high_voices() {
        for &hz in &[80.0, 150.0, 400.0] {
            let s = (0..16_000)
                .map(|i| 0.5 * math::sin(2.0 * PI * hz * i as f64 / 16_000.0))
                .collect();
            let track = compute_f0(&pitch_frames(s), &ExtractionConfig::default());
            let inner = &track.f0_hz[5..90];
            assert!(inner.iter().all(|&f| (f - hz).abs() < 0.02 * hz), "{hz}: {:?}", &inner[..3]);
        }
    }
}
