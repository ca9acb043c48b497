//! CSV report emitters. Every function returns the file bytes so callers
//! can hash what they write.

use paraling_core::harness::{Condition, ExperimentResult, FeatureImportance, HeatmapTable};
use paraling_core::stats::{FeatureAnalysis, FeatureSummaryRow};

type Result<T> = std::result::Result<T, csv::Error>;

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner().map_err(|e| csv::Error::from(e.into_error()))
}

fn num(v: f64) -> String {
    v.to_string()
}

/// Rows are training sets, columns test sets; the top-left header cell is
/// `train\test`.
pub fn heatmap_csv(h: &HeatmapTable) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![String::from("train\\test")];
    header.extend(h.column_labels());
    w.write_record(&header)?;
    for (label, row) in h.row_labels().into_iter().zip(&h.cells) {
        let mut rec = vec![label];
        rec.extend(row.iter().map(|&v| num(v)));
        w.write_record(&rec)?;
    }
    finish(w)
}

pub fn conditions_csv(results: &[ExperimentResult]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["condition", "train", "test", "classifier", "repetitions", "seed", "mean_uar", "mean_f1"])?;
    for r in results {
        let (train, test) = r.spec.condition.cell_labels();
        w.write_record([
            r.spec.condition.kind_str().to_string(),
            train,
            test,
            r.spec.classifier.as_str().to_string(),
            r.spec.repetitions.to_string(),
            r.spec.seed.to_string(),
            num(r.mean_uar),
            num(r.mean_f1),
        ])?;
    }
    finish(w)
}

pub fn repetitions_csv(results: &[ExperimentResult]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["condition", "train", "test", "repetition", "uar", "f1"])?;
    for r in results {
        let (train, test) = r.spec.condition.cell_labels();
        for (i, s) in r.scores.iter().enumerate() {
            w.write_record([
                r.spec.condition.kind_str().to_string(),
                train.clone(),
                test.clone(),
                i.to_string(),
                num(s.uar),
                num(s.f1),
            ])?;
        }
    }
    finish(w)
}

/// Mean of the per-cell means for one condition kind.
pub fn condition_mean(results: &[ExperimentResult], kind: &str) -> Option<(f64, f64)> {
    let picked: Vec<&ExperimentResult> = results.iter().filter(|r| r.spec.condition.kind_str() == kind).collect();
    if picked.is_empty() {
        return None;
    }
    let n = picked.len() as f64;
    Some((
        picked.iter().map(|r| r.mean_uar).sum::<f64>() / n,
        picked.iter().map(|r| r.mean_f1).sum::<f64>() / n,
    ))
}

/// Classifier-level summary: multi-train, multi-test and all-condition means.
pub fn scores_csv(results: &[ExperimentResult]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["classifier", "condition", "uar", "f1"])?;
    let classifier = results.first().map_or("", |r| r.spec.classifier.as_str());
    for kind in ["multi_train", "multi_test", "all"] {
        if let Some((u, f)) = condition_mean(results, kind) {
            w.write_record([classifier, kind, &num(u), &num(f)])?;
        }
    }
    finish(w)
}

pub fn stats_csv(a: &FeatureAnalysis) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["feature", "language", "u", "p_value", "p_adjusted", "cles", "meaningful"])?;
    for r in &a.results {
        w.write_record([
            r.feature_name.clone(),
            r.language.clone(),
            num(r.u_statistic),
            num(r.p_value),
            num(r.p_adjusted),
            num(r.cles),
            r.meaningful.to_string(),
        ])?;
    }
    finish(w)
}

pub fn verdicts_csv(a: &FeatureAnalysis) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["feature", "meaningful_languages", "analyzed_languages", "important", "meaningful_in"])?;
    for v in &a.verdicts {
        w.write_record([
            v.feature_name.clone(),
            v.meaningful_in.len().to_string(),
            a.languages.len().to_string(),
            v.important.to_string(),
            v.meaningful_in.join(";"),
        ])?;
    }
    finish(w)
}

pub fn skipped_csv(a: &FeatureAnalysis) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["language", "reason"])?;
    for (l, reason) in &a.skipped {
        w.write_record([l, reason])?;
    }
    finish(w)
}

/// Important features with per-class mean and quartiles and the mean CLES.
pub fn important_csv(rows: &[FeatureSummaryRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "feature",
        "non_abusive_mean",
        "non_abusive_q1",
        "non_abusive_median",
        "non_abusive_q3",
        "abusive_mean",
        "abusive_q1",
        "abusive_median",
        "abusive_q3",
        "mean_cles",
    ])?;
    for r in rows {
        let (n, a) = (&r.non_abusive, &r.abusive);
        let mut rec = vec![r.feature_name.clone()];
        rec.extend([n.mean, n.q1, n.median, n.q3, a.mean, a.q1, a.median, a.q3, r.mean_cles].map(num));
        w.write_record(&rec)?;
    }
    finish(w)
}

pub fn importance_csv(ranked: &[FeatureImportance], names: &[String]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["rank", "feature", "importance"])?;
    for (i, f) in ranked.iter().enumerate() {
        w.write_record([(i + 1).to_string(), names[f.feature].clone(), num(f.importance)])?;
    }
    finish(w)
}

/// Human-readable description of every report column.
pub const SCHEMA_TEXT: &str = "\
features.csv: id, language, label (abusive|non_abusive), split (train|test), then one column per feature in canonical order.
features.schema.json: feature names and the extraction parameters that produced the store.
heatmap.csv: mean UAR. First column = training set (language, or all-but-test for the model trained on every language except the column's). Header = test set (language, or all-but-train for the pooled other languages). Bottom-right = all languages.
conditions.csv: condition (single|multi_test|multi_train|all), train, test (heatmap labels), classifier, repetitions, seed, mean_uar, mean_f1.
repetitions.csv: condition, train, test, repetition (0-based), uar, f1.
scores.csv: classifier, condition (multi_train|multi_test|all), uar and f1 averaged over the condition's cells.
model_all.json: classifier trained on every language's training split (repetition 0 seed), with feature names.
stats.csv: feature, language, u (Mann-Whitney U of abusive vs non-abusive), p_value (two-sided), p_adjusted (Holm within language), cles (P(abusive > non-abusive), ties half), meaningful.
verdicts.csv: feature, meaningful_languages, analyzed_languages, important (meaningful in every analyzed language), meaningful_in (semicolon-separated).
skipped_languages.csv: language, reason (too few recordings per class).
important.csv: important features with non-abusive and abusive mean, Q1, median, Q3 over all recordings, and mean CLES across languages.
importance.csv: rank, feature, importance (baseline UAR minus mean UAR with the feature's column shuffled).
*_summary.json: command, config echo, seed, wall time, SHA-256 of every artifact written.
";

pub fn condition_label(c: &Condition) -> String {
    let (train, test) = c.cell_labels();
    format!("{} {train} -> {test}", c.kind_str())
}
