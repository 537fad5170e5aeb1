//! The four characterization experiments, run on simulated recordings.
//!
//! Every experiment derives one random stream per job from the noise seed,
//! so results are bit-reproducible and independent of thread scheduling.

mod experiments;
mod report;

use thiserror::Error;

pub use experiments::{
    baseline_noise_experiment, baseline_noise_table, displacement_experiment, displacement_report,
    displacement_runs, measure_baseline, noise_calibrate, range_experiment, vitals_experiment,
    vitals_report, vitals_run, DisplacementConfig, DisplacementRun, RangeConfig, VitalsConfig,
    VitalsRun, BASELINE_DURATION_S, BASELINE_RANGE_M, CALIBRATION_SEED,
};
pub use report::{ExperimentKind, ExperimentReport, ReportRow, RowValue};

use crate::motion::MotionError;
use crate::pipeline::PipelineError;
use crate::synth::SynthError;
use crate::vitals::VitalsError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchError {
    #[error("series lengths differ: {estimates} estimates vs {truth} truth values")]
    LengthMismatch { estimates: usize, truth: usize },
    #[error("empty series")]
    EmptySeries,
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Motion(#[from] MotionError),
    #[error(transparent)]
    Vitals(#[from] VitalsError),
}

/// Mean absolute error between two equally long series.
pub fn mae(estimates: &[f64], truth: &[f64]) -> Result<f64, BenchError> {
    if estimates.len() != truth.len() {
        return Err(BenchError::LengthMismatch {
            estimates: estimates.len(),
            truth: truth.len(),
        });
    }
    if estimates.is_empty() {
        return Err(BenchError::EmptySeries);
    }
    let total: f64 = estimates
        .iter()
        .zip(truth)
        .map(|(e, t)| (e - t).abs())
        .sum();
    Ok(total / estimates.len() as f64)
}

/// Seed of job `job` within an experiment seeded with `seed`.
pub(crate) fn job_seed(seed: u64, job: u64) -> u64 {
    // splitmix64 step: neighbouring jobs get unrelated streams.
    let mut z = seed.wrapping_add(job.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
