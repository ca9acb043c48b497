//! File formats, corpus tooling and the experiment runner around
//! `paraling-core`.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod model_io;
pub mod reports;
pub mod store;
pub mod synth;
pub mod wav;

pub use config::RunConfig;
