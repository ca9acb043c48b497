//! Run configuration. A plain-text file of `key = value` lines (`#` starts a
//! comment) sets any field; command-line flags override the file.
//!
//! Keys: `manifest`, `out`, `store`, `model`, `classifier`, `reps`, `seed`,
//! `mode` (`strict`/`lenient`), `workers`, `shuffles`, `report_format`
//! (`csv`), `synth_languages`, `synth_clips`, and every extraction
//! parameter by name (`hop_ms`, `f0_min_hz`, ...).

use std::path::{Path, PathBuf};

use paraling_core::features::ExtractionConfig;
use paraling_core::harness::{DEFAULT_REPETITIONS, DEFAULT_SHUFFLES};
use paraling_core::ClassifierKind;
use serde::{Deserialize, Serialize};

use crate::manifest::Strictness;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20230820;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("invalid value for `{key}`: {message}")]
    Value { key: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub manifest: Option<PathBuf>,
    pub out: PathBuf,
    /// Feature store; `<out>/features.csv` when unset.
    pub store: Option<PathBuf>,
    /// Model for attribution; `<out>/model_all.json` when unset.
    pub model: Option<PathBuf>,
    pub classifier: ClassifierKind,
    pub reps: usize,
    pub seed: u64,
    pub mode: Strictness,
    /// Worker threads; 0 means one per processor.
    pub workers: usize,
    pub shuffles: usize,
    pub report_format: String,
    pub synth_languages: usize,
    pub synth_clips: usize,
    pub extraction: ExtractionConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            manifest: None,
            out: PathBuf::from("out"),
            store: None,
            model: None,
            classifier: ClassifierKind::Forest,
            reps: DEFAULT_REPETITIONS,
            seed: DEFAULT_SEED,
            mode: Strictness::Strict,
            workers: 0,
            shuffles: DEFAULT_SHUFFLES,
            report_format: "csv".into(),
            synth_languages: 10,
            synth_clips: 100,
            extraction: ExtractionConfig::default(),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| ConfigError::Value {
        key: key.into(),
        message: e.to_string(),
    })
}

impl RunConfig {
    pub fn store_path(&self) -> PathBuf {
        self.store.clone().unwrap_or_else(|| self.out.join("features.csv"))
    }

    pub fn model_path(&self) -> PathBuf {
        self.model.clone().unwrap_or_else(|| self.out.join("model_all.json"))
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "manifest" => self.manifest = Some(PathBuf::from(value)),
            "out" => self.out = PathBuf::from(value),
            "store" => self.store = Some(PathBuf::from(value)),
            "model" => self.model = Some(PathBuf::from(value)),
            "classifier" => self.classifier = parse(key, value)?,
            "reps" => self.reps = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "mode" => {
                self.mode = match value.to_ascii_lowercase().as_str() {
                    "strict" => Strictness::Strict,
                    "lenient" => Strictness::Lenient,
                    _ => {
                        return Err(ConfigError::Value {
                            key: key.into(),
                            message: format!("expected strict or lenient, got `{value}`"),
                        })
                    }
                }
            }
            "workers" => self.workers = parse(key, value)?,
            "shuffles" => self.shuffles = parse(key, value)?,
            "report_format" => self.report_format = value.to_ascii_lowercase(),
            "synth_languages" => self.synth_languages = parse(key, value)?,
            "synth_clips" => self.synth_clips = parse(key, value)?,
            _ => return self.set_extraction(key, value),
        }
        Ok(())
    }

    fn set_extraction(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let unknown = || ConfigError::Value {
            key: key.into(),
            message: "unknown key".into(),
        };
        let mut map = match serde_json::to_value(&self.extraction) {
            Ok(serde_json::Value::Object(m)) => m,
            _ => return Err(unknown()),
        };
        let slot = map.get_mut(key).ok_or_else(unknown)?;
        *slot = if slot.is_u64() {
            serde_json::Value::from(parse::<u64>(key, value)?)
        } else {
            serde_json::Value::from(parse::<f64>(key, value)?)
        };
        self.extraction = serde_json::from_value(serde_json::Value::Object(map)).map_err(|e| ConfigError::Value {
            key: key.into(),
            message: e.to_string(),
        })?;
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Line {
                line: i + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            self.set(key.trim(), value.trim()).map_err(|e| ConfigError::Line {
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        self.apply_text(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, message: &str| {
            Err(ConfigError::Value {
                key: key.into(),
                message: message.into(),
            })
        };
        if self.reps == 0 {
            return bad("reps", "must be at least 1");
        }
        if self.shuffles == 0 {
            return bad("shuffles", "must be at least 1");
        }
        if self.report_format != "csv" {
            return bad("report_format", "only csv is supported");
        }
        Ok(())
    }

    /// Renders the config in the file format it is read from.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut push = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        if let Some(m) = &self.manifest {
            push("manifest", m.display().to_string());
        }
        push("out", self.out.display().to_string());
        if let Some(s) = &self.store {
            push("store", s.display().to_string());
        }
        if let Some(m) = &self.model {
            push("model", m.display().to_string());
        }
        push("classifier", self.classifier.as_str().into());
        push("reps", self.reps.to_string());
        push("seed", self.seed.to_string());
        push(
            "mode",
            match self.mode {
                Strictness::Strict => "strict",
                Strictness::Lenient => "lenient",
            }
            .into(),
        );
        push("workers", self.workers.to_string());
        push("shuffles", self.shuffles.to_string());
        push("report_format", self.report_format.clone());
        push("synth_languages", self.synth_languages.to_string());
        push("synth_clips", self.synth_clips.to_string());
        if let Ok(serde_json::Value::Object(m)) = serde_json::to_value(&self.extraction) {
            for (k, v) in m {
                push(&k, v.to_string());
            }
        }
        out
    }
}
