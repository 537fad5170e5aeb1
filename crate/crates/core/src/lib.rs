//! Deterministic FMCW radar simulation and contactless vital-sign extraction.
//!
//! The crate covers the whole measurement chain of a single-channel FMCW
//! radar watching a chest or a mechanical phantom:
//!
//! - [`profiles`]: the 24/60/120 GHz radar configurations and chirp constants.
//! - [`motion`]: ground-truth displacement (servo phantom, parametric chest).
//! - [`synth`]: raw IF chirps from a scene, with calibrated noise.
//! - [`pipeline`]: range FFT, clutter removal, phase extraction, displacement.
//! - [`vitals`]: band-pass filtering, spectral rate estimation, beat detection.
//! - [`bench`]: the range, baseline-noise, displacement and vital-sign experiments.
//! - [`io`]: recording files, scenario configuration, CSV and report output.

// Negated float comparisons (`!(x > 0.0)`) deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod io;
pub mod motion;
pub mod pipeline;
pub mod profiles;
pub mod reference;
pub mod synth;
pub mod vitals;

use thiserror::Error;

/// Any failure the toolkit reports, for callers that do not care which stage failed.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Profile(#[from] profiles::InvalidProfile),
    #[error(transparent)]
    Motion(#[from] motion::MotionError),
    #[error(transparent)]
    Synth(#[from] synth::SynthError),
    #[error(transparent)]
    Pipeline(#[from] pipeline::PipelineError),
    #[error(transparent)]
    Vitals(#[from] vitals::VitalsError),
    #[error(transparent)]
    Bench(#[from] bench::BenchError),
    #[error(transparent)]
    Io(#[from] io::IoError),
}
