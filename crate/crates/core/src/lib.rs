//! Paralinguistic analysis core.
//!
//! Everything in this crate is a pure function of its inputs: audio framing and
//! resampling, low-level descriptor extraction and functionals, the two native
//! classifiers (CART random forest and L2 logistic regression), the
//! nonparametric feature statistics, and the multilingual experiment protocol.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command line
//! and concurrency live in the `paraling` companion crate.

#![no_std]
#![allow(clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod audio;
pub mod dsp;
pub mod error;
pub mod features;
pub mod harness;
mod math;
pub mod models;
pub mod rng;

pub mod stats;
pub mod table;

pub use audio::{AudioBuffer, FrameSequence, WindowKind};
pub use error::{Error, Result};
pub use features::{extract_features, FeatureVector, FEATURE_COUNT, FEATURE_NAMES};
pub use models::{ClassifierKind, Dataset, ForestModel, LogisticModel, Matrix, Model};


/// Canonical analysis rate. Every descriptor is computed at this rate.
pub const CANONICAL_RATE: u32 = 16_000;
