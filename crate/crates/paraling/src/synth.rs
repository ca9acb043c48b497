//! Seeded synthetic speech-like corpus for desk-scale runs.
//!
//! Each clip is 2.5 to 3.5 s at 16 kHz: a noise floor near -55 dBFS with
//! voiced bursts laid on top. A burst is a harmonic series on a gliding F0,
//! shaped by three resonances and a raised-cosine envelope, 90 to 210 ms
//! long, with its own level drawn within +-5 dB of the clip level.
//!
//! Per language (index `l`): F0 base `105 + 12 l` Hz, resonances scaled by
//! `0.94 + 0.013 l`, burst rate base `1.3 + 0.02 l` per second, level base
//! `-28 + 0.2 l` dB RMS.
//!
//! Per clip, with `s ~ N(0, 0.25)`: log burst rate = log base + `s` +
//! N(0, 0.05), and level = base - 13.2 `s` dB + N(0, 1). The two move in
//! opposite directions so that mean loudness (level^0.66 times voiced
//! fraction) stays near the class value while level and burst rate alone
//! spread widely. Abusive clips add 6 dB and multiply the burst rate by 1.45.
//! F0, durations and resonances are drawn the same way for both classes.
//! Within each language and class the first 70 % of clips are `train`.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use paraling_core::rng::{derive_seed, rng_from};
use paraling_core::table::{Label, Split};
use paraling_core::{AudioBuffer, CANONICAL_RATE};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::manifest::{write_manifest, ManifestRecord};
use crate::wav::{write_wav, WavEncoding};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub languages: usize,
    pub clips_per_language: usize,
    pub seed: u64,
    /// Added to the abusive clip level.
    pub abusive_gain_db: f64,
    /// Multiplies the abusive burst rate.
    pub abusive_rate_factor: f64,
    /// Spread of the level / burst-rate trade-off, in log rate units.
    pub split_log_sd: f64,
    pub level_sd_db: f64,
    pub rate_log_sd: f64,
}

/// Level change that offsets one unit of log burst rate in mean loudness.
const LEVEL_PER_LOG_RATE: f64 = 13.2;

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            languages: 10,
            clips_per_language: 100,
            seed: crate::config::DEFAULT_SEED,
            abusive_gain_db: 6.0,
            abusive_rate_factor: 1.45,
            split_log_sd: 0.25,
            level_sd_db: 1.0,
            rate_log_sd: 0.05,
        }
    }
}

pub fn language_name(index: usize) -> String {
    format!("lang{index:02}")
}

#[derive(Debug, Clone, Copy)]
struct ClipParams {
    language: usize,
    abusive: bool,
}

const BASE_FORMANTS: [(f64, f64); 3] = [(650.0, 90.0), (1250.0, 110.0), (2600.0, 160.0)];

fn db_to_amp(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

fn synth_clip(cfg: &SynthConfig, p: ClipParams, seed: u64) -> AudioBuffer {
    let rate = f64::from(CANONICAL_RATE);
    let mut rng = rng_from(seed);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let l = p.language as f64;
    let duration = rng.random_range(2.5..3.5);
    let n = (duration * rate) as usize;

    let noise_amp = db_to_amp(-55.0 + 3.0 * std_normal.sample(&mut rng));
    let mut x: Vec<f64> = (0..n).map(|_| noise_amp * std_normal.sample(&mut rng)).collect();

    let split = cfg.split_log_sd * std_normal.sample(&mut rng);
    let mut level_db = -28.0 + 0.2 * l - LEVEL_PER_LOG_RATE * split + cfg.level_sd_db * std_normal.sample(&mut rng);
    let mut burst_rate = (1.3 + 0.02 * l) * (split + cfg.rate_log_sd * std_normal.sample(&mut rng)).exp();
    if p.abusive {
        level_db += cfg.abusive_gain_db;
        burst_rate *= cfg.abusive_rate_factor;
    }
    let f0_base = 105.0 + 12.0 * l;
    let formant_scale = 0.94 + 0.013 * l;

    let mean_burst = 0.15;
    let mean_gap = (1.0 / burst_rate - mean_burst).max(0.1);
    let mut t = rng.random_range(0.05..0.3);
    loop {
        let len = rng.random_range(0.09..0.21);
        if t + len > duration - 0.05 {
            break;
        }
        let f0_start = f0_base * rng.random_range(0.85..1.15);
        let glide = rng.random_range(-0.08..0.08);
        let vowel = rng.random_range(0.9..1.1);
        let gain_db = level_db + rng.random_range(-5.0..5.0);
        // Harmonic sum has RMS ~ sqrt(sum a_k^2 / 2); scale to the target.
        let start = (t * rate) as usize;
        let count = (len * rate) as usize;
        let kmax = (4000.0 / (f0_start * 1.1)).floor().max(1.0) as usize;
        let weights: Vec<f64> = (1..=kmax)
            .map(|k| {
                let f = k as f64 * f0_start;
                let env: f64 = BASE_FORMANTS
                    .iter()
                    .map(|&(fc, bw)| {
                        let fc = fc * formant_scale * vowel;
                        1.0 / (1.0 + ((f - fc) / bw).powi(2))
                    })
                    .sum();
                (env + 0.05) / k as f64
            })
            .collect();
        let norm = (weights.iter().map(|w| w * w).sum::<f64>() / 2.0).sqrt();
        let amp = db_to_amp(gain_db) / norm;
        let ramp = (0.02 * rate) as usize;
        let mut phase = 0.0;
        for i in 0..count {
            let idx = start + i;
            if idx >= n {
                break;
            }
            let frac = i as f64 / count as f64;
            let f0 = f0_start * (1.0 + glide * frac);
            phase += 2.0 * PI * f0 / rate;
            let env = if i < ramp {
                0.5 - 0.5 * (PI * i as f64 / ramp as f64).cos()
            } else if count - i < ramp {
                0.5 - 0.5 * (PI * (count - i) as f64 / ramp as f64).cos()
            } else {
                1.0
            };
            let s: f64 = weights
                .iter()
                .enumerate()
                .map(|(k, w)| w * ((k + 1) as f64 * phase).sin())
                .sum();
            x[idx] += amp * env * s;
        }
        t += len + mean_gap * rng.random_range(0.7..1.3);
    }
    AudioBuffer::new_clamped(x, CANONICAL_RATE).expect("nonempty clip")
}

/// The corpus layout without audio: ids, relative paths, labels, splits.
pub fn plan_corpus(cfg: &SynthConfig) -> Vec<ManifestRecord> {
    let mut out = Vec::with_capacity(cfg.languages * cfg.clips_per_language);
    for l in 0..cfg.languages {
        let lang = language_name(l);
        let per_class = [cfg.clips_per_language / 2, cfg.clips_per_language - cfg.clips_per_language / 2];
        let mut k = 0;
        for (c, &count) in per_class.iter().enumerate() {
            let train = (count * 7 + 5) / 10;
            for i in 0..count {
                let id = format!("{lang}_{k:04}");
                out.push(ManifestRecord {
                    path: PathBuf::from("wav").join(&lang).join(format!("{id}.wav")),
                    id,
                    language: lang.clone(),
                    label: if c == 0 { Label::NonAbusive } else { Label::Abusive },
                    split: if i < train { Split::Train } else { Split::Test },
                });
                k += 1;
            }
        }
    }
    out
}

/// Audio for one planned record; depends only on the config and the
/// record's position in the plan.
pub fn synthesize(cfg: &SynthConfig, records: &[ManifestRecord], index: usize) -> AudioBuffer {
    let r = &records[index];
    let language = r.language.trim_start_matches("lang").parse().unwrap_or(0);
    synth_clip(
        cfg,
        ClipParams {
            language,
            abusive: r.label == Label::Abusive,
        },
        derive_seed(cfg.seed, index as u64),
    )
}

/// Writes every clip as PCM16 under `out/wav/` and the manifest to
/// `out/manifest.csv`. Returns the manifest path.
pub fn write_corpus(cfg: &SynthConfig, out: &Path) -> anyhow::Result<PathBuf> {
    let records = plan_corpus(cfg);
    for l in 0..cfg.languages {
        std::fs::create_dir_all(out.join("wav").join(language_name(l)))?;
    }
    (0..records.len()).into_par_iter().try_for_each(|i| {
        let buf = synthesize(cfg, &records, i);
        write_wav(&out.join(&records[i].path), &buf, WavEncoding::Pcm16)
    })?;
    let manifest = out.join("manifest.csv");
    write_manifest(&manifest, &records)?;
    Ok(manifest)
}
