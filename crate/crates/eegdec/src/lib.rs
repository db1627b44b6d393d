//! Imagined-speech EEG decoding pipelines, end to end: signal preprocessing,
//! paradigm-driven synthetic data, Welch/CSP feature extraction, linear SVM
//! and LDA baselines, an EEGNet-style CNN with a pre-layer-norm multi-head
//! attention head trained by a built-in reverse-mode autodiff engine, and a
//! cross-validated evaluation harness with the statistical test battery used
//! for method comparison.

pub mod adnn;
pub mod error;
pub mod eval;
pub mod features;
pub mod fixtures;
pub mod io;
pub mod linalg;
pub mod nn;
pub mod shallow;
pub mod signal;
pub mod stats;
pub mod synth;

pub(crate) mod rng;

pub use error::{EegError, Result};
pub use signal::{EpochSet, RawRecording};
