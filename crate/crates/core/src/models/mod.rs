//! The two native classifiers: a CART random forest and L2-regularized
//! logistic regression. Label 1 is the positive (abusive) class.

mod forest;
mod logistic;

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use forest::{ForestConfig, ForestModel, Node, Tree};
pub use logistic::{LogisticConfig, LogisticModel, LogisticObjective};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    data: Vec<f64>,
    cols: usize,
}

impl Matrix {
    pub fn new(data: Vec<f64>, cols: usize) -> Result<Self> {
        if cols == 0 || data.len() % cols != 0 {
            return Err(Error::InconsistentData(alloc::format!(
                "{} values do not fill rows of {cols}",
                data.len()
            )));
        }
        Ok(Self { data, cols })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        if cols == 0 {
            return Err(Error::EmptyInput);
        }
        Ok(Self { data, cols })
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.cols
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn iter_rows(&self) -> core::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.cols)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.iter_rows().map(|r| r[j]).collect()
    }

    /// Rows at `indices`, in that order.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix { data, cols: self.cols }
    }
}

/// Feature matrix with binary labels and a language tag per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Matrix,
    y: Vec<u8>,
    groups: Vec<String>,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vec<u8>, groups: Vec<String>) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.rows(),
                right: y.len(),
            });
        }
        if groups.len() != y.len() {
            return Err(Error::LengthMismatch {
                left: y.len(),
                right: groups.len(),
            });
        }
        if let Some(i) = x.data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: i / x.cols,
                column: i % x.cols,
            });
        }
        if let Some(&bad) = y.iter().find(|&&l| l > 1) {
            return Err(Error::InconsistentData(alloc::format!("label {bad} is not 0 or 1")));
        }
        Ok(Self { x, y, groups })
    }

    /// Dataset whose rows all share one group tag.
    pub fn ungrouped(x: Matrix, y: Vec<u8>) -> Result<Self> {
        let groups = alloc::vec![String::new(); y.len()];
        Self::new(x, y, groups)
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &[u8] {
        &self.y
    }

    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.x.cols
    }

    pub(crate) fn require_both_classes(&self) -> Result<()> {
        let positives = self.y.iter().filter(|&&l| l == 1).count();
        if positives == 0 || positives == self.y.len() {
            return Err(Error::SingleClassData);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Forest,
    Logistic,
}

impl ClassifierKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Forest => "forest",
            ClassifierKind::Logistic => "logistic",
        }
    }
}

impl core::str::FromStr for ClassifierKind {
    type Err = String;
    fn from_str(s: &str) -> core::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "forest" | "rf" => Ok(ClassifierKind::Forest),
            "logistic" | "lr" => Ok(ClassifierKind::Logistic),
            other => Err(alloc::format!("unknown classifier `{other}`")),
        }
    }
}

/// A trained classifier of either kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Model {
    Forest(ForestModel),
    Logistic(LogisticModel),
}

impl Model {
    /// Trains `kind` with its default hyperparameters and the given seed.
    pub fn train(kind: ClassifierKind, data: &Dataset, seed: u64) -> Result<Model> {
        Ok(match kind {
            ClassifierKind::Forest => Model::Forest(ForestModel::train(
                data,
                &ForestConfig {
                    seed,
                    ..ForestConfig::default()
                },
            )?),
            ClassifierKind::Logistic => Model::Logistic(LogisticModel::train(
                data,
                &LogisticConfig {
                    seed,
                    ..LogisticConfig::default()
                },
            )?),
        })
    }

    pub fn kind(&self) -> ClassifierKind {
        match self {
            Model::Forest(_) => ClassifierKind::Forest,
            Model::Logistic(_) => ClassifierKind::Logistic,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Model::Forest(m) => m.n_features(),
            Model::Logistic(m) => m.n_features(),
        }
    }

    /// Probability of class 1 per row.
    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>> {
        match self {
            Model::Forest(m) => m.predict_proba(x),
            Model::Logistic(m) => m.predict_proba(x),
        }
    }

    /// Label 1 iff the probability is at least `threshold`.
    pub fn predict(&self, x: &Matrix, threshold: f64) -> Result<Vec<u8>> {
        Ok(self
            .predict_proba(x)?
            .into_iter()
            .map(|p| u8::from(p >= threshold))
            .collect())
    }
}

pub(crate) fn check_columns(expected: usize, x: &Matrix) -> Result<()> {
    if x.cols() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: x.cols(),
        });
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod testdata;
#[cfg(test)]
mod tests;
