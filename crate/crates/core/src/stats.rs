//! Nonparametric feature analysis: Mann-Whitney U, Bonferroni-Holm, common
//! language effect size, and the meaningful / important feature rules.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::functionals::percentile_sorted;
use crate::math;
use crate::table::{FeatureTable, Label};

/// Largest `n_a * n_b` for which tie-free samples use the exact null distribution.
pub const EXACT_CELL_LIMIT: usize = 400;
pub const ALPHA: f64 = 0.05;
/// Medium effect on the common-language scale.
pub const CLES_THRESHOLD: f64 = 0.672;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MwuMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MwuResult {
    /// U for the first sample: pairs where it is larger, ties counting half.
    pub u: f64,
    /// Two-sided.
    pub p_value: f64,
    pub method: MwuMethod,
    /// Every pooled value identical; `p_value` is 1.
    pub degenerate: bool,
}

/// Average ranks (1-based) of `values`, plus the sizes of tie groups.
pub fn midranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = avg;
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    (ranks, ties)
}

/// Number of arrangements giving each value of U, for samples of sizes
/// `n_a` and `n_b` without ties. Index k holds the count for U = k.
pub fn exact_u_counts(n_a: usize, n_b: usize) -> Vec<f64> {
    let max_u = n_a * n_b;
    // f[j][k] for the current number of a-elements i.
    let mut prev = vec![vec![0.0; max_u + 1]; n_b + 1];
    for row in prev.iter_mut() {
        row[0] = 1.0;
    }
    for _i in 1..=n_a {
        let mut cur = vec![vec![0.0; max_u + 1]; n_b + 1];
        cur[0][0] = 1.0;
        for j in 1..=n_b {
            for k in 0..=max_u {
                // Largest element from a beats all j b's; from b adds nothing.
                let from_a = if k >= j { prev[j][k - j] } else { 0.0 };
                cur[j][k] = from_a + cur[j - 1][k];
            }
        }
        prev = cur;
    }
    prev.swap_remove(n_b)
}

fn normal_two_sided(z: f64) -> f64 {
    math::erfc(z / SQRT_2)
}

/// Mann-Whitney U test choosing the method automatically: exact when the
/// samples are tie-free and `n_a * n_b <= 400`, normal approximation with tie
/// correction and continuity correction otherwise.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MwuResult> {
    mann_whitney_u_with(a, b, None)
}

/// As [`mann_whitney_u`], optionally forcing the method. Forcing `Exact`
/// on tied samples falls back to the normal approximation.
pub fn mann_whitney_u_with(a: &[f64], b: &[f64], force: Option<MwuMethod>) -> Result<MwuResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (n_a, n_b) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let rank_sum_a: f64 = ranks[..n_a].iter().sum();
    let u = rank_sum_a - (n_a * (n_a + 1)) as f64 / 2.0;
    let cells = (n_a * n_b) as f64;

    if ties.first() == Some(&(n_a + n_b)) {
        return Ok(MwuResult {
            u,
            p_value: 1.0,
            method: MwuMethod::Normal,
            degenerate: true,
        });
    }
    let exact_ok = ties.is_empty();
    let method = match force {
        Some(MwuMethod::Exact) if exact_ok => MwuMethod::Exact,
        Some(_) => MwuMethod::Normal,
        None if exact_ok && n_a * n_b <= EXACT_CELL_LIMIT => MwuMethod::Exact,
        None => MwuMethod::Normal,
    };
    let p_value = match method {
        MwuMethod::Exact => {
            let counts = exact_u_counts(n_a, n_b);
            let total: f64 = counts.iter().sum();
            let k = math::round(u) as usize;
            let lower: f64 = counts[..=k].iter().sum();
            let upper: f64 = counts[k..].iter().sum();
            (2.0 * lower.min(upper) / total).min(1.0)
        }
        MwuMethod::Normal => {
            let n = (n_a + n_b) as f64;
            let tie_term: f64 = ties
                .iter()
                .map(|&t| {
                    let t = t as f64;
                    t * t * t - t
                })
                .sum();
            let var = cells / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
            let dev = (u - cells / 2.0).abs() - 0.5;
            if dev <= 0.0 || var <= 0.0 {
                1.0
            } else {
                normal_two_sided(dev / math::sqrt(var)).min(1.0)
            }
        }
    };
    Ok(MwuResult {
        u,
        p_value,
        method,
        degenerate: false,
    })
}

/// Bonferroni-Holm step-down adjustment, returned in input order.
pub fn holm_correction(p_values: &[f64]) -> Result<Vec<f64>> {
    if let Some(&bad) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidProbability(bad));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| p_values[i].total_cmp(&p_values[j]).then(i.cmp(&j)));
    let mut adjusted = vec![0.0; m];
    let mut running: f64 = 0.0;
    for (rank, &i) in order.iter().enumerate() {
        let scaled = ((m - rank) as f64 * p_values[i]).min(1.0);
        running = running.max(scaled);
        adjusted[i] = running;
    }
    Ok(adjusted)
}

/// Probability that a random draw from `a` exceeds one from `b`, ties half.
pub fn cles(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut score = 0.0;
    for &x in a {
        for &y in b {
            if x > y {
                score += 1.0;
            } else if x == y {
                score += 0.5;
            }
        }
    }
    Ok(score / (a.len() * b.len()) as f64)
}

/// Significance and effect-size thresholds for calling a difference meaningful.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeaningfulRule {
    pub alpha: f64,
    pub cles_threshold: f64,
}

impl Default for MeaningfulRule {
    fn default() -> Self {
        Self {
            alpha: ALPHA,
            cles_threshold: CLES_THRESHOLD,
        }
    }
}

impl MeaningfulRule {
    /// Either direction counts: `max(cles, 1 - cles)` must clear the threshold.
    pub fn is_meaningful(&self, p_adjusted: f64, cles: f64) -> bool {
        p_adjusted < self.alpha && cles.max(1.0 - cles) > self.cles_threshold
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTestResult {
    pub feature_name: String,
    pub language: String,
    pub u_statistic: f64,
    pub p_value: f64,
    pub p_adjusted: f64,
    /// P(abusive > non-abusive).
    pub cles: f64,
    pub meaningful: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceVerdict {
    pub feature_name: String,
    pub meaningful_in: Vec<String>,
    pub important: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureAnalysis {
    /// Languages that had enough data, ascending.
    pub languages: Vec<String>,
    /// Languages skipped for lack of data, with a reason.
    pub skipped: Vec<(String, String)>,
    /// Language-major, features in table order.
    pub results: Vec<FeatureTestResult>,
    pub verdicts: Vec<ImportanceVerdict>,
}

impl FeatureAnalysis {
    pub fn important_features(&self) -> Vec<&str> {
        self.verdicts
            .iter()
            .filter(|v| v.important)
            .map(|v| v.feature_name.as_str())
            .collect()
    }
}

/// Runs MWU per feature within each language, Holm-corrects across the
/// features of that language, and marks a feature important when it is
/// meaningful in every analyzed language. Languages with fewer than two
/// recordings per class are skipped and reported.
pub fn analyze_features(table: &FeatureTable, rule: &MeaningfulRule) -> Result<FeatureAnalysis> {
    let mut languages = Vec::new();
    let mut skipped = Vec::new();
    let mut results = Vec::new();
    for lang in table.languages() {
        let rows: Vec<_> = table.rows.iter().filter(|r| r.language == lang).collect();
        let abusive: Vec<_> = rows.iter().filter(|r| r.label == Label::Abusive).collect();
        let calm: Vec<_> = rows.iter().filter(|r| r.label == Label::NonAbusive).collect();
        if abusive.len() < 2 || calm.len() < 2 {
            log::warn!("skipping {lang}: {} abusive / {} non-abusive", abusive.len(), calm.len());
            skipped.push((
                lang.clone(),
                alloc::format!(
                    "insufficient data: {} abusive, {} non-abusive",
                    abusive.len(),
                    calm.len()
                ),
            ));
            continue;
        }
        let mut tests = Vec::with_capacity(table.names.len());
        for j in 0..table.names.len() {
            let a: Vec<f64> = abusive.iter().map(|r| r.values[j]).collect();
            let b: Vec<f64> = calm.iter().map(|r| r.values[j]).collect();
            let mwu = mann_whitney_u(&a, &b)?;
            tests.push((mwu, cles(&a, &b)?));
        }
        let p: Vec<f64> = tests.iter().map(|t| t.0.p_value).collect();
        let adjusted = holm_correction(&p)?;
        for (j, ((mwu, c), p_adj)) in tests.into_iter().zip(adjusted).enumerate() {
            results.push(FeatureTestResult {
                feature_name: table.names[j].clone(),
                language: lang.clone(),
                u_statistic: mwu.u,
                p_value: mwu.p_value,
                p_adjusted: p_adj,
                cles: c,
                meaningful: rule.is_meaningful(p_adj, c),
            });
        }
        languages.push(lang);
    }
    let verdicts = table
        .names
        .iter()
        .map(|name| {
            let meaningful_in: Vec<String> = results
                .iter()
                .filter(|r| &r.feature_name == name && r.meaningful)
                .map(|r| r.language.clone())
                .collect();
            ImportanceVerdict {
                feature_name: name.clone(),
                important: !languages.is_empty() && meaningful_in.len() == languages.len(),
                meaningful_in,
            }
        })
        .collect();
    Ok(FeatureAnalysis {
        languages,
        skipped,
        results,
        verdicts,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub mean: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

impl ClassSummary {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self {
            mean: values.iter().sum::<f64>() / values.len() as f64,
            q1: percentile_sorted(&sorted, 0.25),
            median: percentile_sorted(&sorted, 0.5),
            q3: percentile_sorted(&sorted, 0.75),
        }
    }
}

/// One line of the important-feature summary: per-class location over the
/// whole store and the mean CLES across languages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSummaryRow {
    pub feature_name: String,
    pub non_abusive: ClassSummary,
    pub abusive: ClassSummary,
    pub mean_cles: f64,
}

pub fn summarize_important(table: &FeatureTable, analysis: &FeatureAnalysis) -> Vec<FeatureSummaryRow> {
    analysis
        .important_features()
        .into_iter()
        .filter_map(|name| {
            let j = table.column_index(name)?;
            let pick = |label: Label| -> Vec<f64> {
                table
                    .rows
                    .iter()
                    .filter(|r| r.label == label)
                    .map(|r| r.values[j])
                    .collect()
            };
            let cles: Vec<f64> = analysis
                .results
                .iter()
                .filter(|r| r.feature_name == name)
                .map(|r| r.cles)
                .collect();
            Some(FeatureSummaryRow {
                feature_name: String::from(name),
                non_abusive: ClassSummary::of(&pick(Label::NonAbusive)),
                abusive: ClassSummary::of(&pick(Label::Abusive)),
                mean_cles: cles.iter().sum::<f64>() / cles.len().max(1) as f64,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests;
