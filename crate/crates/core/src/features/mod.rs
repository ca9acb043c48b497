//! Low-level descriptor contours and the fixed 54-dimension feature vector.
//!
//! The pipeline runs two framings of the same 16 kHz signal with a common
//! 10 ms hop, so every contour has one value per hop:
//!
//! * 60 ms rectangular frames for pitch, voicing, jitter and shimmer;
//! * 25 ms Hann frames for loudness, flux, MFCC, formants and RMS level.

pub mod formants;
pub mod functionals;
pub mod perturbation;
pub mod pitch;
pub mod spectral;
pub mod temporal;


use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::audio::{frame_signal, resample, AudioBuffer, WindowKind};
use crate::error::{Error, Result};
use crate::CANONICAL_RATE;

pub use formants::{compute_formants, Formant};
pub use functionals::{apply_functionals, FunctionalSummary};
pub use perturbation::compute_jitter_shimmer;
pub use pitch::{compute_f0, PitchTrack};
pub use spectral::{compute_flux, compute_loudness};
pub use temporal::{loudness_dynamics, segment_voicing, LoudnessDynamics, Segment, VoicingSummary};

pub const FEATURE_COUNT: usize = 54;

/// Canonical feature order. Never reorder: stores, models and reports index
/// by position.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "f0_semitone_mean",
    "f0_semitone_std",
    "f0_semitone_p20",
    "f0_semitone_p50",
    "f0_semitone_p80",
    "f0_semitone_pctlrange_20_80",
    "loudness_mean",
    "loudness_std",
    "loudness_p20",
    "loudness_p50",
    "loudness_p80",
    "loudness_pctlrange_20_80",
    "flux_mean",
    "flux_std",
    "flux_p20",
    "flux_p50",
    "flux_p80",
    "flux_pctlrange_20_80",
    "jitter_mean",
    "jitter_std",
    "shimmer_db_mean",
    "shimmer_db_std",
    "f1_freq_mean",
    "f1_freq_std",
    "f2_freq_mean",
    "f2_freq_std",
    "f3_freq_mean",
    "f3_freq_std",
    "f1_amp_rel_mean",
    "f1_amp_rel_std",
    "f2_amp_rel_mean",
    "f2_amp_rel_std",
    "f3_amp_rel_mean",
    "f3_amp_rel_std",
    "mfcc1_mean",
    "mfcc1_std",
    "mfcc2_mean",
    "mfcc2_std",
    "mfcc3_mean",
    "mfcc3_std",
    "mfcc4_mean",
    "mfcc4_std",
    "flux_voiced_mean",
    "flux_unvoiced_mean",
    "loudness_rise_slope_mean",
    "loudness_rise_slope_std",
    "loudness_fall_slope_mean",
    "loudness_fall_slope_std",
    "loudness_peaks_per_sec",
    "voiced_segments_per_sec",
    "voiced_segment_len_mean",
    "voiced_segment_len_std",
    "unvoiced_segment_len_mean",
    "rms_db_mean",
];

/// The eighteen features that separate abusive from non-abusive speech in
/// every language of the reference corpus.
pub const KEY_FEATURES: [&str; 18] = [
    "loudness_mean",
    "loudness_p50",
    "loudness_p80",
    "loudness_pctlrange_20_80",
    "loudness_rise_slope_mean",
    "loudness_rise_slope_std",
    "loudness_fall_slope_mean",
    "loudness_fall_slope_std",
    "f1_amp_rel_mean",
    "f2_amp_rel_mean",
    "f3_amp_rel_mean",
    "flux_mean",
    "flux_voiced_mean",
    "flux_unvoiced_mean",
    "loudness_peaks_per_sec",
    "voiced_segments_per_sec",
    "voiced_segment_len_mean",
    "rms_db_mean",
];

/// Position of `name` in [`FEATURE_NAMES`].
pub fn feature_index(name: &str) -> Option<usize> {
    FEATURE_NAMES.iter().position(|n| *n == name)
}

/// Analysis parameters. Defaults are the canonical operating point; the
/// feature store's schema sidecar records them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionConfig {
    pub spectral_frame_ms: f64,
    pub pitch_frame_ms: f64,
    pub hop_ms: f64,
    pub f0_min_hz: f64,
    pub f0_max_hz: f64,
    pub voicing_threshold: f64,
    pub silence_floor_db: f64,
    pub mel_bands: usize,
    pub mel_low_hz: f64,
    pub mel_high_hz: f64,
    pub loudness_exponent: f64,
    pub mfcc_count: usize,
    pub pre_emphasis: f64,
    pub lpc_order: usize,
    pub max_formant_bandwidth_hz: f64,
    pub formant_min_hz: f64,
    pub formant_max_hz: f64,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            spectral_frame_ms: 25.0,
            pitch_frame_ms: 60.0,
            hop_ms: 10.0,
            f0_min_hz: 55.0,
            f0_max_hz: 1000.0,
            voicing_threshold: 0.45,
            silence_floor_db: -60.0,
            mel_bands: 26,
            mel_low_hz: 20.0,
            mel_high_hz: 8000.0,
            loudness_exponent: 0.33,
            mfcc_count: 4,
            pre_emphasis: 0.97,
            lpc_order: 18,
            max_formant_bandwidth_hz: 400.0,
            formant_min_hz: 90.0,
            formant_max_hz: 5500.0,
        }
    }
}

/// Per-frame descriptor series, all of length `len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourSet {
    pub f0_semitones: Vec<f64>,
    pub voiced: Vec<bool>,
    pub loudness: Vec<f64>,
    pub flux: Vec<f64>,
    pub jitter_local: Vec<f64>,
    pub shimmer_local_db: Vec<f64>,
    /// `None` for unvoiced frames and frames without three formants.
    pub formants: Vec<Option<[Formant; 3]>>,
    /// Coefficients 1..=4 per frame.
    pub mfcc: Vec<Vec<f64>>,
    pub rms_db: Vec<f64>,
    pub frame_hop_s: f64,
}

impl ContourSet {
    pub fn len(&self) -> usize {
        self.voiced.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voiced.is_empty()
    }
}

/// The 54 named summary values of one recording, in [`FEATURE_NAMES`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() != FEATURE_COUNT {
            return Err(Error::DimensionMismatch {
                expected: FEATURE_COUNT,
                got: values.len(),
            });
        }
        if let Some(column) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: 0, column });
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn names(&self) -> &'static [&'static str] {
        &FEATURE_NAMES
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        feature_index(name).map(|i| self.values[i])
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Result of the full pipeline: the vector plus its contours and the names
/// of any functionals that fell back to zeros.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub features: FeatureVector,
    pub contours: ContourSet,
    pub fallbacks: Vec<&'static str>,
}

/// Runs every descriptor over `buf` and returns the contours.
pub fn compute_contours(buf: &AudioBuffer, cfg: &ExtractionConfig) -> Result<ContourSet> {
    let buf = resample(buf, CANONICAL_RATE)?;
    let pitch_len = crate::audio::ms_to_samples(cfg.pitch_frame_ms, CANONICAL_RATE);
    let buf = if buf.len() < pitch_len {
        log::warn!("recording shorter than one pitch frame; zero-padding");
        let mut s = buf.into_samples();
        s.resize(pitch_len, 0.0);
        AudioBuffer::new(s, CANONICAL_RATE)?
    } else {
        buf
    };
    let pitch_frames = frame_signal(&buf, cfg.pitch_frame_ms, cfg.hop_ms, WindowKind::Rect)?;
    let spec_frames = frame_signal(&buf, cfg.spectral_frame_ms, cfg.hop_ms, WindowKind::Hann)?;
    debug_assert_eq!(pitch_frames.len(), spec_frames.len());

    let track = compute_f0(&pitch_frames, cfg);
    let spectrogram = spectral::Spectrogram::compute(&spec_frames);
    let loudness = spectrogram.loudness(cfg);
    let flux = spectrogram.flux();
    let mfcc = spectrogram.mfcc(cfg, cfg.mfcc_count);
    let rms_db = spectral::rms_db(
        buf.samples(),
        spec_frames.len(),
        spec_frames.frame_len_samples(),
        spec_frames.hop_samples(),
    );
    let (jitter_local, shimmer_local_db) = compute_jitter_shimmer(
        buf.samples(),
        CANONICAL_RATE,
        &track.f0_hz,
        &track.voiced,
        pitch_frames.frame_len_samples(),
        pitch_frames.hop_samples(),
    );
    let formants = (0..spec_frames.len())
        .map(|t| {
            let f0 = track.voiced[t].then_some(track.f0_hz[t]);
            compute_formants(spec_frames.frame(t), f0, CANONICAL_RATE, cfg)
        })
        .collect();

    Ok(ContourSet {
        f0_semitones: track.f0_semitones,
        voiced: track.voiced,
        loudness,
        flux,
        jitter_local,
        shimmer_local_db,
        formants,
        mfcc,
        rms_db,
        frame_hop_s: spec_frames.hop_s(),
    })
}

fn push_summary(out: &mut Vec<f64>, s: &FunctionalSummary) {
    out.extend_from_slice(&[s.mean, s.std, s.p20, s.p50, s.p80, s.pctl_range_20_80]);
}

/// Collapses contours into the canonical vector.
pub fn summarize_contours(c: &ContourSet) -> (FeatureVector, Vec<&'static str>) {
    let mut fallbacks = Vec::new();
    let voiced = &c.voiced;
    let any_voiced = voiced.iter().any(|&v| v);
    let unvoiced: Vec<bool> = voiced.iter().map(|v| !v).collect();
    let has_formants: Vec<bool> = c.formants.iter().map(Option::is_some).collect();
    if !any_voiced {
        fallbacks.extend_from_slice(&["f0", "jitter", "shimmer", "flux_voiced"]);
    }
    if !has_formants.iter().any(|&v| v) {
        fallbacks.push("formants");
    }
    if voiced.iter().all(|&v| v) {
        fallbacks.push("flux_unvoiced");
    }

    let mut out = Vec::with_capacity(FEATURE_COUNT);
    push_summary(&mut out, &apply_functionals(&c.f0_semitones, Some(voiced)));
    push_summary(&mut out, &apply_functionals(&c.loudness, None));
    push_summary(&mut out, &apply_functionals(&c.flux, None));
    for series in [&c.jitter_local, &c.shimmer_local_db] {
        let s = apply_functionals(series, Some(voiced));
        out.extend_from_slice(&[s.mean, s.std]);
    }
    let formant_series = |f: &dyn Fn(&Formant) -> f64, i: usize| -> Vec<f64> {
        c.formants
            .iter()
            .map(|fr| fr.as_ref().map_or(0.0, |fr| f(&fr[i])))
            .collect()
    };
    for getter in [
        (&|f: &Formant| f.freq_hz) as &dyn Fn(&Formant) -> f64,
        &|f: &Formant| f.amp_rel_db,
    ] {
        for i in 0..3 {
            let s = apply_functionals(&formant_series(getter, i), Some(&has_formants));
            out.extend_from_slice(&[s.mean, s.std]);
        }
    }
    for k in 0..4 {
        let series: Vec<f64> = c.mfcc.iter().map(|row| row.get(k).copied().unwrap_or(0.0)).collect();
        let s = apply_functionals(&series, None);
        out.extend_from_slice(&[s.mean, s.std]);
    }
    out.push(apply_functionals(&c.flux, Some(voiced)).mean);
    out.push(apply_functionals(&c.flux, Some(&unvoiced)).mean);
    let d = loudness_dynamics(&c.loudness, c.frame_hop_s);
    if d.peaks_per_sec == 0.0 {
        fallbacks.push("loudness_dynamics");
    }
    out.extend_from_slice(&[
        d.rise_slope_mean,
        d.rise_slope_std,
        d.fall_slope_mean,
        d.fall_slope_std,
        d.peaks_per_sec,
    ]);
    let v = segment_voicing(voiced, c.frame_hop_s);
    out.extend_from_slice(&[
        v.voiced_per_sec,
        v.mean_voiced_len,
        v.std_voiced_len,
        v.mean_unvoiced_len,
    ]);
    out.push(apply_functionals(&c.rms_db, None).mean);

    for v in out.iter_mut() {
        if !v.is_finite() {
            *v = 0.0;
        }
    }
    let fv = FeatureVector::new(out).expect("canonical layout has 54 finite entries");
    (fv, fallbacks)
}

/// Full pipeline with explicit parameters.
pub fn extract_with(buf: &AudioBuffer, cfg: &ExtractionConfig) -> Result<Extraction> {
    if buf.duration_s() < 1.0 {
        log::info!("recording of {:.3} s is shorter than 1 s", buf.duration_s());
    }
    let contours = compute_contours(buf, cfg)?;
    let (features, fallbacks) = summarize_contours(&contours);
    for f in &fallbacks {
        log::debug!("fallback: {f}");
    }
    Ok(Extraction {
        features,
        contours,
        fallbacks,
    })
}

/// Extracts the canonical 54-feature vector with default parameters.
pub fn extract_features(buf: &AudioBuffer) -> Result<FeatureVector> {
    extract_with(buf, &ExtractionConfig::default()).map(|e| e.features)
}
