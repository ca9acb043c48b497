//! The subcommands as library functions. Each one writes only under
//! `config.out` and finishes with a `<command>_summary.json`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use paraling_core::features::{extract_with, ExtractionConfig};
use paraling_core::harness::{
    assemble_heatmap, build_conditions, permutation_importance, repetition_seed, run_model, sort_results,
    train_on, ExperimentResult, TrainingSet,
};
use paraling_core::audio::resample;
use paraling_core::stats::{analyze_features, summarize_important, FeatureAnalysis, MeaningfulRule};
use paraling_core::table::{FeatureRow, FeatureTable, Split};
use paraling_core::{CANONICAL_RATE, FEATURE_NAMES};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::manifest::{read_manifest, resolve, ManifestRecord};
use crate::model_io::{self, ModelFile};
use crate::reports;
use crate::store::{read_store, schema_path, store_to_bytes, StoreSchema};
use crate::synth::{write_corpus, SynthConfig};
use crate::wav::read_wav;

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub command: String,
    pub config: RunConfig,
    pub seed: u64,
    pub wall_time_s: f64,
    /// Path relative to the output directory -> SHA-256 (hex).
    pub artifacts: BTreeMap<String, String>,
    pub notes: Vec<String>,
}

/// Collects artifacts as they are written.
struct Outputs {
    root: PathBuf,
    hashes: BTreeMap<String, String>,
}

impl Outputs {
    fn new(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            hashes: BTreeMap::new(),
        })
    }

    fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.record(path, bytes);
        Ok(())
    }

    fn record(&mut self, path: &Path, bytes: &[u8]) {
        let key = path
            .strip_prefix(&self.root)
            .unwrap_or(path)
            .to_string_lossy()
            .replace('\\', "/");
        self.hashes.insert(key, hex::encode(Sha256::digest(bytes)));
    }

    fn finish(self, command: &str, cfg: &RunConfig, started: Instant, notes: Vec<String>) -> Result<RunSummary> {
        let summary = RunSummary {
            command: command.into(),
            config: cfg.clone(),
            seed: cfg.seed,
            wall_time_s: started.elapsed().as_secs_f64(),
            artifacts: self.hashes,
            notes,
        };
        let path = self.root.join(format!("{command}_summary.json"));
        std::fs::write(&path, serde_json::to_vec_pretty(&summary)?)?;
        Ok(summary)
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(workers).build()?)
}

pub fn cmd_synth(cfg: &RunConfig) -> Result<RunSummary> {
    let started = Instant::now();
    let mut out = Outputs::new(&cfg.out)?;
    let synth = SynthConfig {
        languages: cfg.synth_languages,
        clips_per_language: cfg.synth_clips,
        seed: cfg.seed,
        ..SynthConfig::default()
    };
    let manifest = pool(cfg.workers)?.install(|| write_corpus(&synth, &cfg.out))?;
    for rec in crate::synth::plan_corpus(&synth) {
        let p = cfg.out.join(&rec.path);
        out.record(&p, &std::fs::read(&p)?);
    }
    out.record(&manifest, &std::fs::read(&manifest)?);
    let notes = vec![format!(
        "{} languages x {} clips, manifest at {}",
        synth.languages,
        synth.clips_per_language,
        manifest.display()
    )];
    out.finish("synth", cfg, started, notes)
}

/// Loads, resamples and analyzes one recording.
pub fn extract_record(path: &Path, extraction: &ExtractionConfig) -> Result<Vec<f64>> {
    let buf = read_wav(path).with_context(|| format!("reading {}", path.display()))?;
    let buf = resample(&buf, CANONICAL_RATE)?;
    let e = extract_with(&buf, extraction)?;
    Ok(e.features.into_values())
}

#[derive(Debug, Clone)]
pub struct ExtractFailure {
    pub id: String,
    pub error: String,
}

/// Extracts every manifest record in parallel; rows keep manifest order.
pub fn extract_table(
    manifest_path: &Path,
    records: &[ManifestRecord],
    extraction: &ExtractionConfig,
    workers: usize,
) -> Result<(FeatureTable, Vec<ExtractFailure>)> {
    let outcomes: Vec<Result<Vec<f64>>> = pool(workers)?.install(|| {
        records
            .par_iter()
            .map(|r| extract_record(&resolve(manifest_path, r), extraction))
            .collect()
    });
    let mut rows = Vec::with_capacity(records.len());
    let mut failures = Vec::new();
    for (r, o) in records.iter().zip(outcomes) {
        match o {
            Ok(values) => rows.push(FeatureRow {
                id: r.id.clone(),
                language: r.language.clone(),
                label: r.label,
                split: r.split,
                values,
            }),
            Err(e) => {
                log::error!("extraction failed for `{}`: {e:#}", r.id);
                failures.push(ExtractFailure {
                    id: r.id.clone(),
                    error: format!("{e:#}"),
                });
            }
        }
    }
    let names = FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
    Ok((FeatureTable::new(names, rows)?, failures))
}

pub fn cmd_extract(cfg: &RunConfig) -> Result<RunSummary> {
    let started = Instant::now();
    let manifest_path = cfg.manifest.clone().context("extract needs --manifest")?;
    let manifest = read_manifest(&manifest_path, cfg.mode)?;
    let (table, failures) = extract_table(&manifest_path, &manifest.records, &cfg.extraction, cfg.workers)?;
    if !failures.is_empty() && cfg.mode == crate::manifest::Strictness::Strict {
        let ids: Vec<&str> = failures.iter().map(|f| f.id.as_str()).collect();
        bail!("extraction failed for {} record(s): {}", failures.len(), ids.join(", "));
    }
    let mut out = Outputs::new(&cfg.out)?;
    let store = cfg.store_path();
    out.write(&store, &store_to_bytes(&table)?)?;
    let schema = StoreSchema::new(table.names.clone(), Some(cfg.extraction.clone()));
    out.write(&schema_path(&store), &serde_json::to_vec_pretty(&schema)?)?;
    let mut notes: Vec<String> = manifest.skipped.iter().map(|i| format!("skipped manifest {i}")).collect();
    notes.extend(failures.iter().map(|f| format!("skipped `{}`: {}", f.id, f.error)));
    notes.push(format!("{} rows", table.rows.len()));
    out.finish("extract", cfg, started, notes)
}

#[derive(Debug)]
pub struct ExperimentOutput {
    pub summary: RunSummary,
    pub results: Vec<ExperimentResult>,
}

/// Runs the full protocol over a feature table.
pub fn run_protocol(table: &FeatureTable, cfg: &RunConfig) -> Result<Vec<ExperimentResult>> {
    let plan = build_conditions(&table.languages())?;
    let batches: Vec<Result<Vec<ExperimentResult>>> = pool(cfg.workers)?.install(|| {
        plan.models
            .par_iter()
            .map(|m| {
                run_model(m, cfg.classifier, cfg.reps, cfg.seed, table)
                    .with_context(|| format!("training set {}", m.training.label()))
            })
            .collect()
    });
    let mut results = Vec::with_capacity(plan.cell_count());
    for b in batches {
        results.extend(b?);
    }
    Ok(sort_results(results))
}

pub fn cmd_experiment(cfg: &RunConfig) -> Result<ExperimentOutput> {
    let started = Instant::now();
    let store = cfg.store_path();
    let table = read_store(&store).with_context(|| format!("reading {}", store.display()))?;
    let results = run_protocol(&table, cfg)?;
    let heat = assemble_heatmap(&table.languages(), &results)?;
    let mut out = Outputs::new(&cfg.out)?;
    out.write(&cfg.out.join("conditions.csv"), &reports::conditions_csv(&results)?)?;
    out.write(&cfg.out.join("repetitions.csv"), &reports::repetitions_csv(&results)?)?;
    out.write(&cfg.out.join("heatmap.csv"), &reports::heatmap_csv(&heat)?)?;
    out.write(&cfg.out.join("scores.csv"), &reports::scores_csv(&results)?)?;
    out.write(&cfg.out.join("schema.txt"), reports::SCHEMA_TEXT.as_bytes())?;
    let seed = repetition_seed(cfg.seed, 0);
    let model = train_on(&table, &TrainingSet::All, cfg.classifier, seed).context("training set all")?;
    let file = ModelFile::new(model, table.names.clone(), TrainingSet::All.label(), seed);
    out.write(&cfg.out.join("model_all.json"), &model_io::to_bytes(&file)?)?;
    let mut notes = vec![format!("classifier {}", cfg.classifier.as_str())];
    for kind in ["multi_train", "multi_test", "all"] {
        if let Some((u, f)) = reports::condition_mean(&results, kind) {
            notes.push(format!("{kind}: mean UAR {u:.4}, mean F1 {f:.4}"));
        }
    }
    let summary = out.finish("experiment", cfg, started, notes)?;
    Ok(ExperimentOutput { summary, results })
}

#[derive(Debug)]
pub struct StatsOutput {
    pub summary: RunSummary,
    pub analysis: FeatureAnalysis,
}

pub fn cmd_stats(cfg: &RunConfig) -> Result<StatsOutput> {
    let started = Instant::now();
    let store = cfg.store_path();
    let table = read_store(&store).with_context(|| format!("reading {}", store.display()))?;
    let analysis = analyze_features(&table, &MeaningfulRule::default())?;
    let mut out = Outputs::new(&cfg.out)?;
    out.write(&cfg.out.join("stats.csv"), &reports::stats_csv(&analysis)?)?;
    out.write(&cfg.out.join("verdicts.csv"), &reports::verdicts_csv(&analysis)?)?;
    out.write(&cfg.out.join("skipped_languages.csv"), &reports::skipped_csv(&analysis)?)?;
    let rows = summarize_important(&table, &analysis);
    out.write(&cfg.out.join("important.csv"), &reports::important_csv(&rows)?)?;
    out.write(&cfg.out.join("schema.txt"), reports::SCHEMA_TEXT.as_bytes())?;
    let mut notes: Vec<String> = analysis
        .skipped
        .iter()
        .map(|(l, why)| format!("language {l} skipped: {why}"))
        .collect();
    notes.push(format!("important: {}", analysis.important_features().join(", ")));
    let summary = out.finish("stats", cfg, started, notes)?;
    Ok(StatsOutput { summary, analysis })
}

#[derive(Debug)]
pub struct AttributionOutput {
    pub summary: RunSummary,
    /// (feature name, importance), best first.
    pub ranking: Vec<(String, f64)>,
}

/// Permutation importance of the saved model on the store's test split.
pub fn cmd_attribution(cfg: &RunConfig) -> Result<AttributionOutput> {
    let started = Instant::now();
    let store = cfg.store_path();
    let table = read_store(&store).with_context(|| format!("reading {}", store.display()))?;
    let model_path = cfg.model_path();
    let file = model_io::load(&model_path).with_context(|| format!("reading {}", model_path.display()))?;
    file.check_columns(&table.names)?;
    let test = table.select(Some(Split::Test), |_| true)?;
    let ranked = permutation_importance(&file.model, test.data.x(), test.data.y(), cfg.shuffles, cfg.seed)?;
    let mut out = Outputs::new(&cfg.out)?;
    out.write(&cfg.out.join("importance.csv"), &reports::importance_csv(&ranked, &table.names)?)?;
    let ranking: Vec<(String, f64)> = ranked
        .iter()
        .map(|f| (table.names[f.feature].clone(), f.importance))
        .collect();
    let notes = ranking
        .iter()
        .take(5)
        .enumerate()
        .map(|(i, (n, v))| format!("#{} {n}: {v:.4}", i + 1))
        .collect();
    let summary = out.finish("attribution", cfg, started, notes)?;
    Ok(AttributionOutput { summary, ranking })
}
