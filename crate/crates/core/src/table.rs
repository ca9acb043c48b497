//! In-memory feature store: one row of features plus metadata per recording.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Dataset, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    NonAbusive,
    Abusive,
}

impl Label {
    pub fn as_u8(self) -> u8 {
        match self {
            Label::NonAbusive => 0,
            Label::Abusive => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::NonAbusive => "non_abusive",
            Label::Abusive => "abusive",
        }
    }

    /// Case-insensitive; accepts `-`, `_` or nothing between "non" and "abusive".
    pub fn parse(s: &str) -> Option<Label> {
        let folded: String = s
            .trim()
            .chars()
            .filter(|c| *c != '_' && *c != '-' && *c != ' ')
            .flat_map(char::to_lowercase)
            .collect();
        match folded.as_str() {
            "abusive" | "1" => Some(Label::Abusive),
            "nonabusive" | "0" => Some(Label::NonAbusive),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Option<Split> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Some(Split::Train),
            "test" => Some(Split::Test),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub id: String,
    pub language: String,
    pub label: Label,
    pub split: Split,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub names: Vec<String>,
    pub rows: Vec<FeatureRow>,
}

/// Rows picked out of a table for one training or evaluation set.
#[derive(Debug, Clone)]
pub struct Selection {
    pub ids: Vec<String>,
    pub data: Dataset,
}

impl FeatureTable {
    pub fn new(names: Vec<String>, rows: Vec<FeatureRow>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (i, r) in rows.iter().enumerate() {
            if r.values.len() != names.len() {
                return Err(Error::DimensionMismatch {
                    expected: names.len(),
                    got: r.values.len(),
                });
            }
            if let Some(column) = r.values.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row: i, column });
            }
            if !seen.insert(r.id.as_str()) {
                return Err(Error::InconsistentData(alloc::format!("duplicate id `{}`", r.id)));
            }
        }
        Ok(Self { names, rows })
    }

    /// Distinct languages in ascending order.
    pub fn languages(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.rows.iter().map(|r| r.language.as_str()).collect();
        set.into_iter().map(String::from).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Rows of `split` whose language satisfies `keep`, in table order.
    pub fn select(&self, split: Option<Split>, keep: impl Fn(&str) -> bool) -> Result<Selection> {
        let picked: Vec<&FeatureRow> = self
            .rows
            .iter()
            .filter(|r| split.is_none_or(|s| r.split == s) && keep(&r.language))
            .collect();
        if picked.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut data = Vec::with_capacity(picked.len() * self.names.len());
        for r in &picked {
            data.extend_from_slice(&r.values);
        }
        let x = Matrix::new(data, self.names.len())?;
        let y = picked.iter().map(|r| r.label.as_u8()).collect();
        let groups = picked.iter().map(|r| r.language.clone()).collect();
        Ok(Selection {
            ids: picked.iter().map(|r| r.id.clone()).collect(),
            data: Dataset::new(x, y, groups)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn label_parsing_folds_case() {
        assert_eq!(Label::parse("Abusive"), Some(Label::Abusive));
        assert_eq!(Label::parse("NON_ABUSIVE"), Some(Label::NonAbusive));
        assert_eq!(Label::parse("non-abusive"), Some(Label::NonAbusive));
        assert_eq!(Label::parse("maybe"), None);
        assert_eq!(Split::parse(" Test "), Some(Split::Test));
    }

    #[test]
    fn table_rejects_duplicates_and_bad_widths() {
        let row = |id: &str, n: usize| FeatureRow {
            id: id.into(),
            language: "a".into(),
            label: Label::Abusive,
            split: Split::Train,
            values: vec![0.0; n],
        };
        let names: Vec<String> = vec!["x".into(), "y".into()];
        assert!(FeatureTable::new(names.clone(), vec![row("1", 2), row("1", 2)]).is_err());
        assert!(FeatureTable::new(names.clone(), vec![row("1", 3)]).is_err());
        let t = FeatureTable::new(names, vec![row("1", 2), row("2", 2)]).unwrap();
        assert_eq!(t.select(Some(Split::Train), |_| true).unwrap().ids, vec!["1", "2"]);
        assert!(t.select(Some(Split::Test), |_| true).is_err());
    }
}
