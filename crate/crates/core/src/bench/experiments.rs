use rayon::prelude::*;

use super::report::{ExperimentKind, ExperimentReport, ReportRow, RowValue};
use super::{job_seed, mae, BenchError};
use crate::motion::BeatTimes;
use crate::motion::{chest_motion, peak_to_peak, sinusoid_motion, ChestParams, DisplacementTrace};
use crate::pipeline::{
    fft_len, padded_peak_bins, run_pipeline, PadPolicy, PipelineOptions, RangeWindow,
    REFERENCE_PAD_BIN_M,
};
use crate::profiles::RadarProfile;
use crate::reference;
use crate::synth::{synthesize_recording, NoiseModel, PhantomKind, Scene, SynthError, Target};
use crate::vitals::{
    bandpass, detect_beats, lowpass, match_beats, sliding_estimates, Band, BeatMatch, RateOptions,
    VitalsEstimate, BEAT_TOLERANCE_S,
};

/// Length of a baseline-noise recording.
pub const BASELINE_DURATION_S: f64 = 20.0;
/// Distance of the static target in baseline-noise recordings.
pub const BASELINE_RANGE_M: f64 = 0.5;
/// Noise seed used while searching for a noise level.
pub const CALIBRATION_SEED: u64 = 0xCA1B;

fn with_seed(noise: &NoiseModel, seed: u64) -> NoiseModel {
    NoiseModel { seed, ..*noise }
}

fn population_std(values: &[f64]) -> f64 {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeConfig {
    pub distances_m: Vec<f64>,
    pub phantom: PhantomKind,
    pub duration_s: f64,
    pub sub_intervals: usize,
    pub pad_bin_m: f64,
}

impl Default for RangeConfig {
    fn default() -> Self {
        Self {
            distances_m: reference::RANGE_DISTANCES_M.to_vec(),
            phantom: PhantomKind::Metal,
            duration_s: 60.0,
            sub_intervals: 12,
            pad_bin_m: REFERENCE_PAD_BIN_M,
        }
    }
}

/// Range error per distance, as mean ± std over sub-intervals, in cm.
///
/// Each sub-interval is processed on its own, without clutter removal; its
/// range is the mean of the per-chirp peak ranges on the padded spectrum.
pub fn range_experiment(
    profile: &RadarProfile,
    config: &RangeConfig,
    noise: &NoiseModel,
) -> Result<ExperimentReport, BenchError> {
    if config.sub_intervals == 0 || config.distances_m.is_empty() {
        return Err(BenchError::InvalidConfig(
            "need at least one distance and one sub-interval".into(),
        ));
    }
    let derived = profile.derived().map_err(SynthError::from)?;
    if let Some(&d) = config
        .distances_m
        .iter()
        .find(|&&d| !(d > 0.0 && d < derived.usable_range_m))
    {
        return Err(SynthError::OutOfRange {
            range_m: d,
            max_m: derived.usable_range_m,
        }
        .into());
    }
    let pad = PadPolicy::TargetBin {
        bin_m: config.pad_bin_m,
    };
    let bin_m = derived.range_bin_m * profile.samples_per_chirp as f64
        / fft_len(profile.samples_per_chirp, derived.range_bin_m, pad) as f64;

    let rows = config
        .distances_m
        .par_iter()
        .enumerate()
        .map(|(job, &distance)| {
            let scene = Scene::single(Target::fixed(distance)).with_phantom(config.phantom, 0.0);
            let rec = synthesize_recording(
                profile,
                &scene,
                &with_seed(noise, job_seed(noise.seed, job as u64)),
                config.duration_s,
            )?;
            let per = rec.chirps / config.sub_intervals;
            if per == 0 {
                return Err(BenchError::InvalidConfig(
                    "sub-intervals shorter than one chirp".into(),
                ));
            }
            let errors = (0..config.sub_intervals)
                .map(|k| {
                    let (bins, _) =
                        padded_peak_bins(&rec.sub_recording(k * per, per), pad, RangeWindow::Hann)?;
                    let mean_bin = bins.iter().sum::<usize>() as f64 / bins.len() as f64;
                    Ok(mean_bin * bin_m - distance)
                })
                .collect::<Result<Vec<f64>, BenchError>>()?;
            let mean = errors.iter().sum::<f64>() / errors.len() as f64;
            let label = format!(
                "{} {} {:.0} cm",
                profile.id,
                config.phantom.name(),
                distance * 100.0
            );
            let hardware = reference::range_error_m(profile.id, config.phantom, distance)
                .map(|(m, _)| m * 100.0);
            Ok(ReportRow::new(
                label,
                RowValue::MeanStd {
                    mean: mean * 100.0,
                    std: population_std(&errors) * 100.0,
                },
                "cm",
            )
            .with_reference(hardware))
        })
        .collect::<Result<Vec<_>, BenchError>>()?;

    let mut report = ExperimentReport::new(ExperimentKind::Range, noise.seed);
    report.rows = rows;
    Ok(report)
}

/// Standard deviation of the displacement measured on a static scene, in meters.
///
/// Clutter removal stays off: on a static scene it would remove the target itself.
pub fn measure_baseline(
    profile: &RadarProfile,
    scene: &Scene,
    noise: &NoiseModel,
) -> Result<f64, BenchError> {
    let rec = synthesize_recording(profile, scene, noise, BASELINE_DURATION_S)?;
    let options = PipelineOptions::for_profile(profile.id).with_dc_removal(false);
    Ok(run_pipeline(&rec, &options)?.displacement.std_dev())
}

/// Baseline noise of a static phantom at 50 cm, in meters.
pub fn baseline_noise_experiment(
    profile: &RadarProfile,
    phantom: PhantomKind,
    angle_deg: f64,
    noise: &NoiseModel,
) -> Result<f64, BenchError> {
    let scene = Scene::single(Target::fixed(BASELINE_RANGE_M)).with_phantom(phantom, angle_deg);
    measure_baseline(profile, &scene, noise)
}

/// Baseline noise at several angles, as a report in mm.
pub fn baseline_noise_table(
    profile: &RadarProfile,
    phantom: PhantomKind,
    angles_deg: &[f64],
    noise: &NoiseModel,
) -> Result<ExperimentReport, BenchError> {
    let rows = angles_deg
        .par_iter()
        .enumerate()
        .map(|(job, &angle)| {
            let std = baseline_noise_experiment(
                profile,
                phantom,
                angle,
                &with_seed(noise, job_seed(noise.seed, job as u64)),
            )?;
            let label = format!("{} {} {angle:.0}°", profile.id, phantom.name());
            let hardware = reference::baseline_noise_m(profile.id, phantom, angle).map(|m| m * 1e3);
            Ok(ReportRow::new(label, RowValue::Scalar(std * 1e3), "mm").with_reference(hardware))
        })
        .collect::<Result<Vec<_>, BenchError>>()?;
    let mut report = ExperimentReport::new(ExperimentKind::BaselineNoise, noise.seed);
    report.rows = rows;
    Ok(report)
}

/// Relative tolerance the calibration search stops at.
const CALIBRATION_TOLERANCE: f64 = 0.02;

/// White IF noise level at which a static `scene` shows `target_m` of
/// baseline displacement noise.
///
/// The baseline grows monotonically with the noise level; the search first
/// brackets the target, then bisects on a log scale. The returned model
/// carries [`CALIBRATION_SEED`]; use a different seed for a fresh run.
pub fn noise_calibrate(
    profile: &RadarProfile,
    scene: &Scene,
    target_m: f64,
) -> Result<NoiseModel, BenchError> {
    let floor = measure_baseline(profile, scene, &NoiseModel::noiseless())?;
    if !(target_m > 2.0 * floor) || !target_m.is_finite() {
        return Err(SynthError::Unreachable {
            target_m,
            floor_m: floor,
        }
        .into());
    }
    let measure =
        |sigma: f64| measure_baseline(profile, scene, &NoiseModel::white(sigma, CALIBRATION_SEED));

    // Small noise maps linearly to displacement; start from that guess.
    let probe = 1e-3;
    let guess = probe * target_m / measure(probe)?.max(f64::MIN_POSITIVE);
    let (mut lo, mut hi) = (guess / 2.0, guess * 2.0);
    for _ in 0..40 {
        if measure(lo)? < target_m {
            break;
        }
        lo /= 4.0;
    }
    for _ in 0..40 {
        if measure(hi)? > target_m {
            break;
        }
        hi *= 4.0;
    }

    let mut sigma = guess;
    for _ in 0..60 {
        let got = measure(sigma)?;
        if (got / target_m - 1.0).abs() <= CALIBRATION_TOLERANCE {
            return Ok(NoiseModel::white(sigma, CALIBRATION_SEED));
        }
        if got < target_m {
            lo = sigma;
        } else {
            hi = sigma;
        }
        sigma = (lo * hi).sqrt();
    }
    Err(SynthError::Unreachable {
        target_m,
        floor_m: floor,
    }
    .into())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementConfig {
    pub amplitudes_m: Vec<f64>,
    pub phantom: PhantomKind,
    pub freq_hz: f64,
    pub duration_s: f64,
    pub step_m: f64,
    pub base_range_m: f64,
    /// Zero-phase low-pass applied before reading peak-to-peak; `None` reads the raw trace.
    pub smoothing_hz: Option<f64>,
}

impl Default for DisplacementConfig {
    fn default() -> Self {
        Self {
            amplitudes_m: reference::DISPLACEMENT_AMPLITUDES_M.to_vec(),
            phantom: PhantomKind::Metal,
            freq_hz: reference::PHANTOM_FREQ_HZ,
            duration_s: 20.0,
            step_m: reference::PHANTOM_STEP_M,
            base_range_m: 0.5,
            smoothing_hz: Some(4.0 * reference::PHANTOM_FREQ_HZ),
        }
    }
}

/// One phantom oscillation: ground truth and what the pipeline measured.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementRun {
    pub label: String,
    pub amplitude_m: f64,
    pub truth: DisplacementTrace,
    pub measured: DisplacementTrace,
    pub p2p_error_m: f64,
}

pub fn displacement_runs(
    profile: &RadarProfile,
    config: &DisplacementConfig,
    noise: &NoiseModel,
) -> Result<Vec<DisplacementRun>, BenchError> {
    if config.amplitudes_m.iter().any(|&a| !(a >= 0.0)) {
        return Err(BenchError::InvalidConfig(
            "amplitudes must be non-negative".into(),
        ));
    }
    let rate = 1.0 / profile.chirp_interval_s;
    let options = PipelineOptions::for_profile(profile.id);
    config
        .amplitudes_m
        .par_iter()
        .enumerate()
        .map(|(job, &amplitude)| {
            let truth = sinusoid_motion(
                amplitude,
                config.freq_hz,
                config.duration_s,
                rate,
                config.step_m,
            )?;
            let scene = Scene::single(Target::moving(config.base_range_m, truth.clone()))
                .with_phantom(config.phantom, 0.0);
            let rec = synthesize_recording(
                profile,
                &scene,
                &with_seed(noise, job_seed(noise.seed, job as u64)),
                config.duration_s,
            )?;
            let mut measured = run_pipeline(&rec, &options)?.displacement;
            if let Some(cutoff) = config.smoothing_hz {
                measured = lowpass(&measured, cutoff)?;
            }
            let p2p_error_m = (peak_to_peak(&measured)? - peak_to_peak(&truth)?).abs();
            Ok(DisplacementRun {
                label: format!(
                    "{} {} {} mm",
                    profile.id,
                    config.phantom.name(),
                    amplitude * 1e3
                ),
                amplitude_m: amplitude,
                truth,
                measured,
                p2p_error_m,
            })
        })
        .collect()
}

/// Absolute peak-to-peak error per amplitude, in mm.
pub fn displacement_experiment(
    profile: &RadarProfile,
    config: &DisplacementConfig,
    noise: &NoiseModel,
) -> Result<ExperimentReport, BenchError> {
    let runs = displacement_runs(profile, config, noise)?;
    Ok(displacement_report(
        profile,
        config.phantom,
        &runs,
        noise.seed,
    ))
}

pub fn displacement_report(
    profile: &RadarProfile,
    phantom: PhantomKind,
    runs: &[DisplacementRun],
    seed: u64,
) -> ExperimentReport {
    let mut report = ExperimentReport::new(ExperimentKind::Displacement, seed);
    report.rows = runs
        .iter()
        .map(|run| {
            let hardware = reference::displacement_error_m(profile.id, phantom, run.amplitude_m)
                .map(|m| m * 1e3);
            let row = ReportRow::new(
                run.label.clone(),
                RowValue::Scalar(run.p2p_error_m * 1e3),
                "mm",
            )
            .with_reference(hardware);
            if run.amplitude_m == 0.0 {
                row.with_note("zero amplitude: error is the noise peak-to-peak")
            } else {
                row
            }
        })
        .collect();
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct VitalsConfig {
    pub chest: ChestParams,
    pub duration_s: f64,
    pub base_range_m: f64,
    pub window_s: f64,
    pub step_s: f64,
    pub rate: RateOptions,
}

impl Default for VitalsConfig {
    fn default() -> Self {
        Self {
            chest: ChestParams::default(),
            duration_s: 120.0,
            base_range_m: 0.5,
            window_s: 60.0,
            step_s: 1.0,
            rate: RateOptions::default(),
        }
    }
}

/// A simulated two-minute recording of a chest and everything measured on it.
#[derive(Debug, Clone, PartialEq)]
pub struct VitalsRun {
    pub truth: DisplacementTrace,
    pub truth_beats: BeatTimes,
    pub measured: DisplacementTrace,
    pub estimates: Vec<VitalsEstimate>,
    pub detected_beats: BeatTimes,
    pub beats: BeatMatch,
    pub hr_mae_bpm: f64,
    pub rr_mae_brpm: f64,
}

pub fn vitals_run(
    profile: &RadarProfile,
    config: &VitalsConfig,
    noise: &NoiseModel,
) -> Result<VitalsRun, BenchError> {
    if config.duration_s < config.window_s || config.window_s < 60.0 - 1e-9 {
        return Err(BenchError::InvalidConfig(format!(
            "need a window of at least 60 s and a recording at least that long, got {} s / {} s",
            config.window_s, config.duration_s
        )));
    }
    let rate = 1.0 / profile.chirp_interval_s;
    let (truth, truth_beats) = chest_motion(&config.chest, config.duration_s, rate)?;
    let scene = Scene::single(Target::moving(config.base_range_m, truth.clone()));
    let rec = synthesize_recording(profile, &scene, noise, config.duration_s)?;
    let measured = run_pipeline(&rec, &PipelineOptions::for_profile(profile.id))?.displacement;

    let estimates = sliding_estimates(&measured, config.window_s, config.step_s, config.rate)?;
    let hr: Vec<f64> = estimates.iter().map(|e| e.hr_bpm).collect();
    let rr: Vec<f64> = estimates.iter().map(|e| e.rr_brpm).collect();
    let hr_mae_bpm = mae(&hr, &vec![config.chest.hr_hz * 60.0; hr.len()])?;
    let rr_mae_brpm = mae(&rr, &vec![config.chest.rr_hz * 60.0; rr.len()])?;

    let detected_beats = detect_beats(&bandpass(&measured, &Band::heart())?);
    let beats = match_beats(&detected_beats, &truth_beats, BEAT_TOLERANCE_S);
    Ok(VitalsRun {
        truth,
        truth_beats,
        measured,
        estimates,
        detected_beats,
        beats,
        hr_mae_bpm,
        rr_mae_brpm,
    })
}

/// Rate errors against the simulated truth and beat-matching quality.
pub fn vitals_experiment(
    profile: &RadarProfile,
    config: &VitalsConfig,
    noise: &NoiseModel,
) -> Result<ExperimentReport, BenchError> {
    let run = vitals_run(profile, config, noise)?;
    Ok(vitals_report(profile, &run, noise.seed))
}

pub fn vitals_report(profile: &RadarProfile, run: &VitalsRun, seed: u64) -> ExperimentReport {
    let id = profile.id;
    let mut report = ExperimentReport::new(ExperimentKind::Vitals, seed);
    report.rows = vec![
        ReportRow::new(
            format!("{id} HR MAE"),
            RowValue::Scalar(run.hr_mae_bpm),
            "bpm",
        )
        .with_reference(reference::heart_rate_mae_bpm(id)),
        ReportRow::new(
            format!("{id} RR MAE"),
            RowValue::Scalar(run.rr_mae_brpm),
            "brpm",
        ),
        ReportRow::new(
            format!("{id} beat sensitivity"),
            RowValue::Scalar(run.beats.sensitivity()),
            "ratio",
        ),
        ReportRow::new(
            format!("{id} beat precision"),
            RowValue::Scalar(run.beats.precision()),
            "ratio",
        ),
    ];
    report
}
