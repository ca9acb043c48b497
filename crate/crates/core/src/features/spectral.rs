//! Loudness, spectral flux and MFCC contours from Hann-windowed frames.

use alloc::vec;
use alloc::vec::Vec;

use crate::audio::FrameSequence;
use crate::dsp::{dct2, magnitude_spectrum, Fft, MelFilterbank};
use crate::math;

use super::ExtractionConfig;

const LOG_FLOOR: f64 = 1e-12;

/// Magnitude spectra of every frame, scaled so a full-scale sinusoid peaks
/// near 1 regardless of window length.
#[derive(Debug, Clone)]
pub struct Spectrogram {
    pub n_fft: usize,
    pub sample_rate: u32,
    pub frames: Vec<Vec<f64>>,
}

impl Spectrogram {
    pub fn compute(frames: &FrameSequence) -> Self {
        let n_fft = frames.frame_len_samples().next_power_of_two();
        let fft = Fft::new(n_fft);
        let gain: f64 = frames
            .window_kind()
            .coefficients(frames.frame_len_samples())
            .iter()
            .sum::<f64>()
            / 2.0;
        let frames_out = frames
            .iter()
            .map(|f| {
                let mut m = magnitude_spectrum(&fft, f);
                m.iter_mut().for_each(|v| *v /= gain);
                m
            })
            .collect();
        Self {
            n_fft,
            sample_rate: frames.sample_rate(),
            frames: frames_out,
        }
    }

    pub fn bin_of(&self, hz: f64) -> usize {
        let k = math::round(hz * self.n_fft as f64 / self.sample_rate as f64) as usize;
        k.min(self.n_fft / 2)
    }

    fn filterbank(&self, cfg: &ExtractionConfig) -> MelFilterbank {
        MelFilterbank::new(
            cfg.mel_bands,
            self.n_fft,
            self.sample_rate,
            cfg.mel_low_hz,
            cfg.mel_high_hz.min(self.sample_rate as f64 / 2.0),
        )
    }

    /// Sum over mel bands of band power raised to the compression exponent.
    pub fn loudness(&self, cfg: &ExtractionConfig) -> Vec<f64> {
        let fb = self.filterbank(cfg);
        self.frames
            .iter()
            .map(|m| {
                fb.band_powers(m)
                    .iter()
                    .map(|&p| math::pow(p, cfg.loudness_exponent))
                    .sum()
            })
            .collect()
    }

    /// Euclidean distance between consecutive unit-norm spectra. Silent
    /// frames have the zero spectrum.
    pub fn flux(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.frames.len()];
        let mut prev: Option<Vec<f64>> = None;
        for (t, m) in self.frames.iter().enumerate() {
            let norm = math::sqrt(m.iter().map(|v| v * v).sum());
            let unit: Vec<f64> = if norm > 0.0 {
                m.iter().map(|v| v / norm).collect()
            } else {
                vec![0.0; m.len()]
            };
            if let Some(p) = &prev {
                let d: f64 = unit.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum();
                out[t] = math::sqrt(d);
            }
            prev = Some(unit);
        }
        out
    }

    /// Cepstral coefficients `1..=n` of the log mel band powers, one row per frame.
    pub fn mfcc(&self, cfg: &ExtractionConfig, n: usize) -> Vec<Vec<f64>> {
        let fb = self.filterbank(cfg);
        self.frames
            .iter()
            .map(|m| {
                let logs: Vec<f64> = fb
                    .band_powers(m)
                    .iter()
                    .map(|&p| math::ln(p.max(LOG_FLOOR)))
                    .collect();
                let mut c = dct2(&logs, n + 1);
                c.remove(0);
                c
            })
            .collect()
    }
}

/// Perceptual loudness proxy per frame; nonnegative.
pub fn compute_loudness(frames: &FrameSequence, cfg: &ExtractionConfig) -> Vec<f64> {
    Spectrogram::compute(frames).loudness(cfg)
}

/// Spectral flux per frame; `flux[0] == 0`.
pub fn compute_flux(frames: &FrameSequence) -> Vec<f64> {
    Spectrogram::compute(frames).flux()
}

/// Frame RMS level in dB of the raw signal under each analysis frame, floored at -120 dB.
pub fn rms_db(samples: &[f64], n_frames: usize, frame_len: usize, hop: usize) -> Vec<f64> {
    (0..n_frames)
        .map(|t| {
            let start = (t * hop).min(samples.len());
            let end = (start + frame_len).min(samples.len());
            let energy: f64 = samples[start..end].iter().map(|v| v * v).sum();
            let rms = math::sqrt(energy / frame_len as f64);
            20.0 * math::log10(rms.max(1e-6))
        })
        .collect()
}
