use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("audio buffer is empty")]
    EmptyBuffer,
    #[error("sample {index} is out of range: {value}")]
    SampleOutOfRange { index: usize, value: f64 },
    #[error("sample rate must be positive")]
    InvalidSampleRate,
    #[error("invalid framing: frame {frame_ms} ms, hop {hop_ms} ms")]
    InvalidFraming { frame_ms: f64, hop_ms: f64 },
    #[error("signal of {samples} samples is shorter than one frame of {frame_len}")]
    SignalTooShort { samples: usize, frame_len: usize },
    #[error("training data contains a single class")]
    SingleClassData,
    #[error("dataset needs at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("expected {expected} feature columns, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },
    #[error("inconsistent dataset: {0}")]
    InconsistentData(String),
    #[error("empty input")]
    EmptyInput,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {needed} languages, got {got}")]
    TooFewLanguages { needed: usize, got: usize },
    #[error("unknown language `{0}`")]
    UnknownLanguage(String),
    #[error("no {split} rows for {what}")]
    MissingSplit { split: &'static str, what: String },
    #[error("row `{0}` appears in both the training and the test set")]
    Leakage(String),
    #[error("heatmap is missing cells: {}", .0.join(", "))]
    IncompleteResults(Vec<String>),
    #[error("repetitions must be at least 1")]
    NoRepetitions,
    #[error("probability out of range: {0}")]
    InvalidProbability(f64),
}
