//! Dataset manifest: a CSV with header `id,path,language,label,split`.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use paraling_core::table::{Label, Split};
use serde::{Deserialize, Serialize};

pub const MANIFEST_COLUMNS: [&str; 5] = ["id", "path", "language", "label", "split"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub id: String,
    pub path: PathBuf,
    pub language: String,
    pub label: Label,
    pub split: Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strictness {
    #[default]
    Strict,
    Lenient,
}

/// A problem with one data row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowIssue {
    pub line: u64,
    pub message: String,
}

impl fmt::Display for RowIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("manifest header must be `id,path,language,label,split`, found `{0}`")]
    Header(String),
    #[error("invalid manifest rows:\n{}", .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("\n"))]
    Rows(Vec<RowIssue>),
    #[error("manifest has no records")]
    Empty,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Default)]
pub struct Manifest {
    pub records: Vec<ManifestRecord>,
    /// Rows dropped in lenient mode.
    pub skipped: Vec<RowIssue>,
}

fn parse_row(fields: &csv::StringRecord) -> Result<ManifestRecord, String> {
    if fields.len() != MANIFEST_COLUMNS.len() {
        return Err(format!("expected 5 fields, found {}", fields.len()));
    }
    let get = |i: usize| fields.get(i).unwrap_or("").trim();
    let (id, path, language) = (get(0), get(1), get(2));
    if id.is_empty() {
        return Err("empty id".into());
    }
    if path.is_empty() {
        return Err(format!("empty path for `{id}`"));
    }
    if language.is_empty() {
        return Err(format!("empty language for `{id}`"));
    }
    let label = Label::parse(get(3)).ok_or_else(|| format!("unknown label `{}` for `{id}`", get(3)))?;
    let split = Split::parse(get(4)).ok_or_else(|| format!("unknown split `{}` for `{id}`", get(4)))?;
    Ok(ManifestRecord {
        id: id.to_string(),
        path: PathBuf::from(path),
        language: language.to_string(),
        label,
        split,
    })
}

/// Parses and validates manifest CSV. Strict mode fails on the first pass
/// with every bad row listed; lenient mode drops bad rows and reports them.
pub fn parse_manifest(bytes: &[u8], mode: Strictness) -> Result<Manifest, ManifestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(bytes);
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
    if header != MANIFEST_COLUMNS {
        return Err(ManifestError::Header(header.join(",")));
    }
    let mut records = Vec::new();
    let mut issues = Vec::new();
    let mut first_line: HashMap<String, u64> = HashMap::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        match parse_row(&row) {
            Ok(rec) => {
                if let Some(prev) = first_line.get(&rec.id) {
                    issues.push(RowIssue {
                        line,
                        message: format!("duplicate id `{}` (first on line {prev}, again on line {line})", rec.id),
                    });
                } else {
                    first_line.insert(rec.id.clone(), line);
                    records.push(rec);
                }
            }
            Err(message) => issues.push(RowIssue { line, message }),
        }
    }
    if !issues.is_empty() && mode == Strictness::Strict {
        return Err(ManifestError::Rows(issues));
    }
    for i in &issues {
        log::warn!("skipping manifest {i}");
    }
    if records.is_empty() {
        return Err(ManifestError::Empty);
    }
    Ok(Manifest {
        records,
        skipped: issues,
    })
}

pub fn read_manifest(path: &Path, mode: Strictness) -> Result<Manifest, ManifestError> {
    parse_manifest(&std::fs::read(path)?, mode)
}

/// Writes records with the canonical header.
pub fn write_manifest(path: &Path, records: &[ManifestRecord]) -> Result<(), ManifestError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(MANIFEST_COLUMNS)?;
    for r in records {
        w.write_record([
            r.id.as_str(),
            &r.path.to_string_lossy(),
            r.language.as_str(),
            r.label.as_str(),
            r.split.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Resolves a record path against the manifest's directory.
pub fn resolve(manifest_path: &Path, record: &ManifestRecord) -> PathBuf {
    if record.path.is_absolute() {
        record.path.clone()
    } else {
        manifest_path
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join(&record.path)
    }
}
