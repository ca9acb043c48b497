//! Feature store on disk: CSV with `id,language,label,split` followed by one
//! column per feature, plus a JSON schema sidecar.

use std::path::{Path, PathBuf};

use paraling_core::features::ExtractionConfig;
use paraling_core::table::{FeatureRow, FeatureTable, Label, Split};
use serde::{Deserialize, Serialize};

pub const METADATA_COLUMNS: [&str; 4] = ["id", "language", "label", "split"];
pub const STORE_FORMAT: &str = "paraling-feature-store";
pub const STORE_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("feature store header must start with `{}`", METADATA_COLUMNS.join(","))]
    Header,
    #[error("feature store line {line}: {message}")]
    Row { line: u64, message: String },
    #[error(transparent)]
    Table(#[from] paraling_core::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreSchema {
    pub format: String,
    pub version: u32,
    pub metadata_columns: Vec<String>,
    pub feature_names: Vec<String>,
    pub extraction: Option<ExtractionConfig>,
}

impl StoreSchema {
    pub fn new(feature_names: Vec<String>, extraction: Option<ExtractionConfig>) -> Self {
        Self {
            format: STORE_FORMAT.into(),
            version: STORE_VERSION,
            metadata_columns: METADATA_COLUMNS.iter().map(|s| s.to_string()).collect(),
            feature_names,
            extraction,
        }
    }
}

/// `features.csv` -> `features.schema.json`.
pub fn schema_path(store: &Path) -> PathBuf {
    store.with_extension("schema.json")
}

/// Serializes the table. Floats use the shortest round-trip form, so
/// reading the file back gives bit-identical values.
pub fn store_to_bytes(table: &FeatureTable) -> Result<Vec<u8>, StoreError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<&str> = METADATA_COLUMNS
        .iter()
        .copied()
        .chain(table.names.iter().map(String::as_str))
        .collect();
    w.write_record(&header)?;
    for r in &table.rows {
        let mut rec = vec![
            r.id.clone(),
            r.language.clone(),
            r.label.as_str().to_string(),
            r.split.as_str().to_string(),
        ];
        rec.extend(r.values.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.into_inner().map_err(|e| StoreError::Io(e.into_error()))
}

pub fn write_store(path: &Path, table: &FeatureTable, extraction: Option<&ExtractionConfig>) -> Result<(), StoreError> {
    std::fs::write(path, store_to_bytes(table)?)?;
    let schema = StoreSchema::new(table.names.clone(), extraction.cloned());
    std::fs::write(schema_path(path), serde_json::to_vec_pretty(&schema)?)?;
    Ok(())
}

pub fn store_from_bytes(bytes: &[u8]) -> Result<FeatureTable, StoreError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.len() <= METADATA_COLUMNS.len() || header[..METADATA_COLUMNS.len()] != METADATA_COLUMNS {
        return Err(StoreError::Header);
    }
    let names = header[METADATA_COLUMNS.len()..].to_vec();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |message: String| StoreError::Row { line, message };
        let label = Label::parse(&rec[2]).ok_or_else(|| bad(format!("unknown label `{}`", &rec[2])))?;
        let split = Split::parse(&rec[3]).ok_or_else(|| bad(format!("unknown split `{}`", &rec[3])))?;
        let values = rec
            .iter()
            .skip(METADATA_COLUMNS.len())
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad(format!("not a number: `{s}`"))))
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(FeatureRow {
            id: rec[0].to_string(),
            language: rec[1].to_string(),
            label,
            split,
            values,
        });
    }
    Ok(FeatureTable::new(names, rows)?)
}

pub fn read_store(path: &Path) -> Result<FeatureTable, StoreError> {
    store_from_bytes(&std::fs::read(path)?)
}
