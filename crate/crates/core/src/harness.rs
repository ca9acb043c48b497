//! Train/test protocol over languages: single-language, multi-test,
//! multi-train and all-language conditions, UAR/F1 scoring, repetition
//! averaging, heatmap assembly and permutation importance.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ClassifierKind, Matrix, Model};
use crate::rng::{derive_seed, rng_from};
use crate::table::{FeatureTable, Selection, Split};

pub const DEFAULT_REPETITIONS: usize = 5;
pub const DEFAULT_SHUFFLES: usize = 10;
/// Probability cut for turning scores into labels.
pub const DECISION_THRESHOLD: f64 = 0.5;

/// Languages whose training split feeds one model.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TrainingSet {
    Single { language: String },
    AllBut { excluded: String },
    All,
}

impl TrainingSet {
    fn includes(&self, language: &str) -> bool {
        match self {
            TrainingSet::Single { language: l } => l == language,
            TrainingSet::AllBut { excluded } => excluded != language,
            TrainingSet::All => true,
        }
    }

    pub fn label(&self) -> String {
        match self {
            TrainingSet::Single { language } => language.clone(),
            TrainingSet::AllBut { excluded } => format!("all-but-{excluded}"),
            TrainingSet::All => String::from("all"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Condition {
    /// Train on one language, test on one language (possibly the same).
    Single { train: String, test: String },
    /// Train on one language, test on every other language pooled.
    MultiTest { train: String },
    /// Train on every language but one, test on the one left out.
    MultiTrain { excluded: String },
    All,
}

impl Condition {
    pub fn training_set(&self) -> TrainingSet {
        match self {
            Condition::Single { train, .. } | Condition::MultiTest { train } => {
                TrainingSet::Single { language: train.clone() }
            }
            Condition::MultiTrain { excluded } => TrainingSet::AllBut {
                excluded: excluded.clone(),
            },
            Condition::All => TrainingSet::All,
        }
    }

    fn tests_on(&self, language: &str) -> bool {
        match self {
            Condition::Single { test, .. } => test == language,
            Condition::MultiTest { train } => train != language,
            Condition::MultiTrain { excluded } => excluded == language,
            Condition::All => true,
        }
    }

    /// Short tag used in reports, e.g. `single`, `multi_test`.
    pub fn kind_str(&self) -> &'static str {
        match self {
            Condition::Single { .. } => "single",
            Condition::MultiTest { .. } => "multi_test",
            Condition::MultiTrain { .. } => "multi_train",
            Condition::All => "all",
        }
    }

    /// (train label, test label) as they appear in heatmap headers.
    pub fn cell_labels(&self) -> (String, String) {
        match self {
            Condition::Single { train, test } => (train.clone(), test.clone()),
            Condition::MultiTest { train } => (train.clone(), String::from(ALL_BUT_TRAIN)),
            Condition::MultiTrain { excluded } => (String::from(ALL_BUT_TEST), excluded.clone()),
            Condition::All => (String::from(ALL_BUT_TEST), String::from(ALL_BUT_TRAIN)),
        }
    }

    fn languages(&self) -> Vec<&str> {
        match self {
            Condition::Single { train, test } => vec![train, test],
            Condition::MultiTest { train } => vec![train],
            Condition::MultiTrain { excluded } => vec![excluded],
            Condition::All => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub condition: Condition,
    pub classifier: ClassifierKind,
    pub repetitions: usize,
    pub seed: u64,
}

/// One trained model and every condition it is scored on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub training: TrainingSet,
    pub evaluations: Vec<Condition>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionPlan {
    pub languages: Vec<String>,
    pub models: Vec<ModelSpec>,
    pub warnings: Vec<String>,
}

impl ConditionPlan {
    pub fn cell_count(&self) -> usize {
        self.models.iter().map(|m| m.evaluations.len()).sum()
    }

    pub fn conditions(&self) -> impl Iterator<Item = &Condition> {
        self.models.iter().flat_map(|m| m.evaluations.iter())
    }

    pub fn specs(&self, classifier: ClassifierKind, repetitions: usize, seed: u64) -> Vec<ExperimentSpec> {
        self.conditions()
            .map(|c| ExperimentSpec {
                condition: c.clone(),
                classifier,
                repetitions,
                seed,
            })
            .collect()
    }
}

/// Lays out the protocol for `languages`: each language trains one model
/// scored on every language's test split and on the pooled others, each
/// language is left out once, and one model sees everything.
pub fn build_conditions(languages: &[String]) -> Result<ConditionPlan> {
    let mut warnings = Vec::new();
    let mut set = BTreeSet::new();
    for l in languages {
        if !set.insert(l.clone()) {
            let msg = format!("duplicate language `{l}` ignored");
            log::warn!("{msg}");
            warnings.push(msg);
        }
    }
    let languages: Vec<String> = set.into_iter().collect();
    if languages.len() < 2 {
        return Err(Error::TooFewLanguages {
            needed: 2,
            got: languages.len(),
        });
    }
    let mut models = Vec::with_capacity(2 * languages.len() + 1);
    for train in &languages {
        let mut evaluations: Vec<Condition> = languages
            .iter()
            .map(|test| Condition::Single {
                train: train.clone(),
                test: test.clone(),
            })
            .collect();
        evaluations.push(Condition::MultiTest { train: train.clone() });
        models.push(ModelSpec {
            training: TrainingSet::Single { language: train.clone() },
            evaluations,
        });
    }
    for excluded in &languages {
        models.push(ModelSpec {
            training: TrainingSet::AllBut {
                excluded: excluded.clone(),
            },
            evaluations: vec![Condition::MultiTrain {
                excluded: excluded.clone(),
            }],
        });
    }
    models.push(ModelSpec {
        training: TrainingSet::All,
        evaluations: vec![Condition::All],
    });
    Ok(ConditionPlan {
        languages,
        models,
        warnings,
    })
}

fn check_lengths(y_true: &[u8], y_pred: &[u8]) -> Result<()> {
    if y_true.is_empty() {
        return Err(Error::EmptyInput);
    }
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    Ok(())
}

/// Unweighted average recall over the classes present in `y_true`.
pub fn uar(y_true: &[u8], y_pred: &[u8]) -> Result<f64> {
    check_lengths(y_true, y_pred)?;
    let mut hit = [0usize; 2];
    let mut total = [0usize; 2];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        let c = usize::from(t != 0);
        total[c] += 1;
        if (p != 0) == (t != 0) {
            hit[c] += 1;
        }
    }
    let recalls: Vec<f64> = (0..2)
        .filter(|&c| total[c] > 0)
        .map(|c| hit[c] as f64 / total[c] as f64)
        .collect();
    Ok(recalls.iter().sum::<f64>() / recalls.len() as f64)
}

/// F1 of class 1; zero when there are no true positives.
pub fn f1(y_true: &[u8], y_pred: &[u8]) -> Result<f64> {
    check_lengths(y_true, y_pred)?;
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t != 0, p != 0) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => {}
        }
    }
    if tp == 0 {
        return Ok(0.0);
    }
    let precision = tp as f64 / (tp + fp) as f64;
    let recall = tp as f64 / (tp + fn_) as f64;
    Ok(2.0 * precision * recall / (precision + recall))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepetitionScore {
    pub uar: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub scores: Vec<RepetitionScore>,
    pub mean_uar: f64,
    pub mean_f1: f64,
}

impl ExperimentResult {
    pub fn from_scores(spec: ExperimentSpec, scores: Vec<RepetitionScore>) -> Self {
        let n = scores.len() as f64;
        let mean_uar = scores.iter().map(|s| s.uar).sum::<f64>() / n;
        let mean_f1 = scores.iter().map(|s| s.f1).sum::<f64>() / n;
        Self {
            spec,
            scores,
            mean_uar,
            mean_f1,
        }
    }
}

/// Seed for repetition `r` of an experiment seeded with `seed`.
pub fn repetition_seed(seed: u64, r: usize) -> u64 {
    derive_seed(seed, r as u64)
}

fn check_languages<'a>(table_langs: &[String], wanted: impl IntoIterator<Item = &'a str>) -> Result<()> {
    for l in wanted {
        if table_langs.binary_search_by(|x| x.as_str().cmp(l)).is_err() {
            return Err(Error::UnknownLanguage(String::from(l)));
        }
    }
    Ok(())
}

fn training_selection(table: &FeatureTable, training: &TrainingSet) -> Result<Selection> {
    table
        .select(Some(Split::Train), |l| training.includes(l))
        .map_err(|e| match e {
            Error::EmptyInput => Error::MissingSplit {
                split: "train",
                what: training.label(),
            },
            other => other,
        })
}

fn test_selection(table: &FeatureTable, condition: &Condition) -> Result<Selection> {
    table
        .select(Some(Split::Test), |l| condition.tests_on(l))
        .map_err(|e| match e {
            Error::EmptyInput => {
                let (train, test) = condition.cell_labels();
                Error::MissingSplit {
                    split: "test",
                    what: format!("{train} -> {test}"),
                }
            }
            other => other,
        })
}

/// Fails if any row id occurs in both selections.
pub fn check_leakage(train_ids: &[String], test_ids: &[String]) -> Result<()> {
    let train: BTreeSet<&str> = train_ids.iter().map(String::as_str).collect();
    match test_ids.iter().find(|id| train.contains(id.as_str())) {
        Some(id) => Err(Error::Leakage(id.clone())),
        None => Ok(()),
    }
}

/// Training and test rows of one condition, leakage-checked.
pub fn condition_split(table: &FeatureTable, condition: &Condition) -> Result<(Selection, Selection)> {
    check_languages(&table.languages(), condition.languages())?;
    let train = training_selection(table, &condition.training_set())?;
    let test = test_selection(table, condition)?;
    check_leakage(&train.ids, &test.ids)?;
    Ok((train, test))
}

/// Trains the model of `model` once per repetition and scores it on each of
/// its conditions. Returns results in the order of `model.evaluations`.
pub fn run_model(
    model: &ModelSpec,
    classifier: ClassifierKind,
    repetitions: usize,
    seed: u64,
    table: &FeatureTable,
) -> Result<Vec<ExperimentResult>> {
    if repetitions == 0 {
        return Err(Error::NoRepetitions);
    }
    let langs = table.languages();
    for c in &model.evaluations {
        if c.training_set() != model.training {
            return Err(Error::InconsistentData(format!(
                "condition {c:?} does not train on {}",
                model.training.label()
            )));
        }
        check_languages(&langs, c.languages())?;
    }
    let train = training_selection(table, &model.training)?;
    let tests = model
        .evaluations
        .iter()
        .map(|c| {
            let t = test_selection(table, c)?;
            check_leakage(&train.ids, &t.ids)?;
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut scores = vec![Vec::with_capacity(repetitions); tests.len()];
    for r in 0..repetitions {
        let trained = Model::train(classifier, &train.data, repetition_seed(seed, r))?;
        for (t, s) in tests.iter().zip(scores.iter_mut()) {
            let pred = trained.predict(t.data.x(), DECISION_THRESHOLD)?;
            s.push(RepetitionScore {
                uar: uar(t.data.y(), &pred)?,
                f1: f1(t.data.y(), &pred)?,
            });
        }
    }
    Ok(model
        .evaluations
        .iter()
        .zip(scores)
        .map(|(c, s)| {
            ExperimentResult::from_scores(
                ExperimentSpec {
                    condition: c.clone(),
                    classifier,
                    repetitions,
                    seed,
                },
                s,
            )
        })
        .collect())
}

/// Runs a single condition. Gives the same numbers as the matching entry of
/// [`run_model`] since training data and seeds coincide.
pub fn run_experiment(spec: &ExperimentSpec, table: &FeatureTable) -> Result<ExperimentResult> {
    let model = ModelSpec {
        training: spec.condition.training_set(),
        evaluations: vec![spec.condition.clone()],
    };
    let mut out = run_model(&model, spec.classifier, spec.repetitions, spec.seed, table)?;
    Ok(out.remove(0))
}

/// Trains a single model on the training split of `training`.
pub fn train_on(
    table: &FeatureTable,
    training: &TrainingSet,
    classifier: ClassifierKind,
    seed: u64,
) -> Result<Model> {
    let train = training_selection(table, training)?;
    Model::train(classifier, &train.data, seed)
}

pub const ALL_BUT_TEST: &str = "all-but-test";
pub const ALL_BUT_TRAIN: &str = "all-but-train";

/// Mean UAR grid. Rows are training languages followed by `all-but-test`,
/// columns are test languages followed by `all-but-train`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapTable {
    pub languages: Vec<String>,
    pub cells: Vec<Vec<f64>>,
}

impl HeatmapTable {
    pub fn row_labels(&self) -> Vec<String> {
        let mut v = self.languages.clone();
        v.push(String::from(ALL_BUT_TEST));
        v
    }

    pub fn column_labels(&self) -> Vec<String> {
        let mut v = self.languages.clone();
        v.push(String::from(ALL_BUT_TRAIN));
        v
    }

    pub fn get(&self, train: &str, test: &str) -> Option<f64> {
        let i = self.row_labels().iter().position(|l| l == train)?;
        let j = self.column_labels().iter().position(|l| l == test)?;
        Some(self.cells[i][j])
    }
}

fn cell_position(languages: &[String], c: &Condition) -> Option<(usize, usize)> {
    let n = languages.len();
    let idx = |l: &str| languages.iter().position(|x| x == l);
    Some(match c {
        Condition::Single { train, test } => (idx(train)?, idx(test)?),
        Condition::MultiTest { train } => (idx(train)?, n),
        Condition::MultiTrain { excluded } => (n, idx(excluded)?),
        Condition::All => (n, n),
    })
}

/// Places each result's mean UAR; results may arrive in any order.
pub fn assemble_heatmap(languages: &[String], results: &[ExperimentResult]) -> Result<HeatmapTable> {
    let languages: Vec<String> = languages.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let n = languages.len() + 1;
    let mut grid: Vec<Vec<Option<f64>>> = vec![vec![None; n]; n];
    for r in results {
        let (i, j) = cell_position(&languages, &r.spec.condition)
            .ok_or_else(|| Error::InconsistentData(format!("result outside heatmap: {:?}", r.spec.condition)))?;
        if grid[i][j].replace(r.mean_uar).is_some() {
            let (a, b) = r.spec.condition.cell_labels();
            return Err(Error::InconsistentData(format!("two results for cell {a} -> {b}")));
        }
    }
    let rows: Vec<String> = languages.iter().cloned().chain([String::from(ALL_BUT_TEST)]).collect();
    let cols: Vec<String> = languages.iter().cloned().chain([String::from(ALL_BUT_TRAIN)]).collect();
    let mut missing = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if grid[i][j].is_none() {
                missing.push(format!("{} -> {}", rows[i], cols[j]));
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::IncompleteResults(missing));
    }
    Ok(HeatmapTable {
        languages,
        cells: grid
            .into_iter()
            .map(|row| row.into_iter().map(|c| c.unwrap_or(0.0)).collect())
            .collect(),
    })
}

/// Collects results by condition, sorted, for deterministic reporting.
pub fn sort_results(results: Vec<ExperimentResult>) -> Vec<ExperimentResult> {
    let mut map: BTreeMap<Condition, ExperimentResult> = BTreeMap::new();
    for r in results {
        map.insert(r.spec.condition.clone(), r);
    }
    map.into_values().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub feature: usize,
    /// Baseline UAR minus mean UAR with the column shuffled.
    pub importance: f64,
}

/// Permutation importance on (`x`, `y`), sorted by decreasing importance,
/// ties in column order. Column j is shuffled with a stream derived from
/// (`seed`, j) so each feature's value does not depend on the others.
pub fn permutation_importance(
    model: &Model,
    x: &Matrix,
    y: &[u8],
    n_shuffles: usize,
    seed: u64,
) -> Result<Vec<FeatureImportance>> {
    if x.rows() == 0 || n_shuffles == 0 {
        return Err(Error::EmptyInput);
    }
    let baseline = uar(y, &model.predict(x, DECISION_THRESHOLD)?)?;
    let mut out = Vec::with_capacity(x.cols());
    let mut work = x.clone();
    for j in 0..x.cols() {
        let original = x.column(j);
        let mut rng = rng_from(derive_seed(seed, j as u64));
        let mut column = original.clone();
        let mut total = 0.0;
        for _ in 0..n_shuffles {
            column.shuffle(&mut rng);
            for (i, &v) in column.iter().enumerate() {
                work.set(i, j, v);
            }
            total += baseline - uar(y, &model.predict(&work, DECISION_THRESHOLD)?)?;
        }
        for (i, &v) in original.iter().enumerate() {
            work.set(i, j, v);
        }
        out.push(FeatureImportance {
            feature: j,
            importance: total / n_shuffles as f64,
        });
    }
    out.sort_by(|a, b| b.importance.total_cmp(&a.importance).then(a.feature.cmp(&b.feature)));
    Ok(out)
}
