//! Mono audio buffers, linear resampling and short-time framing.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;

/// Decoded mono PCM samples in `[-1.0, 1.0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AudioBuffer {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioBuffer {
    /// Validates that the buffer is nonempty and every sample lies in `[-1, 1]`.
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidSampleRate);
        }
        if samples.is_empty() {
            return Err(Error::EmptyBuffer);
        }
        if let Some((index, &value)) = samples
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || v.abs() > 1.0)
        {
            return Err(Error::SampleOutOfRange { index, value });
        }
        Ok(Self { samples, sample_rate })
    }

    /// Like [`AudioBuffer::new`] but clamps out-of-range samples instead of
    /// rejecting them. Non-finite samples become 0.
    pub fn new_clamped(mut samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        for s in samples.iter_mut() {
            *s = if s.is_finite() { s.clamp(-1.0, 1.0) } else { 0.0 };
        }
        Self::new(samples, sample_rate)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// Resamples by linear interpolation between neighbouring input samples.
///
/// No anti-aliasing filter is applied. Returns the input unchanged when the
/// rates already match.
pub fn resample(buf: &AudioBuffer, target_rate: u32) -> Result<AudioBuffer> {
    if target_rate == 0 {
        return Err(Error::InvalidSampleRate);
    }
    if target_rate == buf.sample_rate {
        return Ok(buf.clone());
    }
    let src = buf.samples();
    let ratio = buf.sample_rate as f64 / target_rate as f64;
    let n_out = (math::round(src.len() as f64 / ratio) as usize).max(1);
    let last = src.len() - 1;
    let out = (0..n_out)
        .map(|j| {
            let pos = j as f64 * ratio;
            let i = math::floor(pos) as usize;
            if i >= last {
                src[last]
            } else {
                let frac = pos - i as f64;
                src[i] + (src[i + 1] - src[i]) * frac
            }
        })
        .collect();
    AudioBuffer::new_clamped(out, target_rate)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Hann,
    Hamming,
    Rect,
}

impl WindowKind {
    /// Symmetric window coefficients of length `n`.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        if n <= 1 {
            return vec![1.0; n];
        }
        let denom = (n - 1) as f64;
        (0..n)
            .map(|i| {
                let phase = 2.0 * PI * i as f64 / denom;
                match self {
                    WindowKind::Hann => 0.5 - 0.5 * math::cos(phase),
                    WindowKind::Hamming => 0.54 - 0.46 * math::cos(phase),
                    WindowKind::Rect => 1.0,
                }
            })
            .collect()
    }
}

/// Fixed-length windowed analysis frames, stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    data: Vec<f64>,
    frame_len: usize,
    hop: usize,
    sample_rate: u32,
    window_kind: WindowKind,
}

impl FrameSequence {
    pub fn len(&self) -> usize {
        self.data.len() / self.frame_len
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn frame(&self, i: usize) -> &[f64] {
        &self.data[i * self.frame_len..(i + 1) * self.frame_len]
    }

    pub fn iter(&self) -> core::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.frame_len)
    }

    pub fn frame_len_samples(&self) -> usize {
        self.frame_len
    }

    pub fn hop_samples(&self) -> usize {
        self.hop
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn window_kind(&self) -> WindowKind {
        self.window_kind
    }

    /// Frame hop in seconds.
    pub fn hop_s(&self) -> f64 {
        self.hop as f64 / self.sample_rate as f64
    }
}

pub(crate) fn ms_to_samples(ms: f64, sample_rate: u32) -> usize {
    math::round(ms * sample_rate as f64 / 1000.0) as usize
}

/// Cuts `buf` into `ceil(len / hop)` frames; frame `i` starts at sample
/// `i * hop` and the tail is zero-padded.
pub fn frame_signal(
    buf: &AudioBuffer,
    frame_ms: f64,
    hop_ms: f64,
    window_kind: WindowKind,
) -> Result<FrameSequence> {
    if !(hop_ms > 0.0 && frame_ms >= hop_ms) {
        return Err(Error::InvalidFraming { frame_ms, hop_ms });
    }
    let frame_len = ms_to_samples(frame_ms, buf.sample_rate);
    let hop = ms_to_samples(hop_ms, buf.sample_rate);
    if hop == 0 || frame_len < hop {
        return Err(Error::InvalidFraming { frame_ms, hop_ms });
    }
    let samples = buf.samples();
    if samples.len() < frame_len {
        return Err(Error::SignalTooShort {
            samples: samples.len(),
            frame_len,
        });
    }
    let n_frames = samples.len().div_ceil(hop);
    let window = window_kind.coefficients(frame_len);
    let mut data = vec![0.0; n_frames * frame_len];
    for (i, frame) in data.chunks_exact_mut(frame_len).enumerate() {
        let start = i * hop;
        let end = (start + frame_len).min(samples.len());
        for (k, (dst, &src)) in frame.iter_mut().zip(&samples[start..end]).enumerate() {
            *dst = src * window[k];
        }
    }
    Ok(FrameSequence {
        data,
        frame_len,
        hop,
        sample_rate: buf.sample_rate,
        window_kind,
    })
}
