//! From raw chirps to a displacement trace.
//!
//! Stages, in order: range FFT, optional static-clutter removal, target-bin
//! selection, phase extraction, unwrapping and phase-to-displacement
//! conversion. Each stage is a free function so tests and experiments can
//! stop anywhere along the chain; [`run_pipeline`] composes all of them.

mod phase;
mod range;

use num_complex::Complex64;
use thiserror::Error;

pub use phase::{extract_phase, phase_to_displacement, unwrap_phase, wrap_phase, PhaseSeries};
pub use range::{
    bin_to_range, dc_offset_removal, fft_len, padded_peak_bins, range_fft, range_fft_windowed,
    select_target_bin, BinPolicy, BinSelection, PadPolicy, RangeSpectrumSeries, RangeWindow,
};

use crate::motion::DisplacementTrace;
use crate::profiles::{InvalidProfile, ProfileId};
use crate::synth::ChirpRecording;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("invalid recording: {0}")]
    InvalidRecording(String),
    #[error("invalid pipeline options: {0}")]
    InvalidOptions(String),
    #[error("clutter removal needs at least 2 chirps, got {0}")]
    TooFewChirps(usize),
    #[error("range spectrum series is empty")]
    EmptySeries,
    #[error("bin {bin} is at or above Nyquist for a {n_fft}-point FFT")]
    BinOutOfRange { bin: usize, n_fft: usize },
    #[error("bin {bin} has no signal in chirp {chirp}")]
    ZeroMagnitude { bin: usize, chirp: usize },
    #[error(transparent)]
    Profile(#[from] InvalidProfile),
}

/// Range-bin width the range experiment pads to, in meters.
pub const REFERENCE_PAD_BIN_M: f64 = 0.157e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    pub pad: PadPolicy,
    pub window: RangeWindow,
    pub dc_removal: bool,
    pub bin_policy: BinPolicy,
}

impl PipelineOptions {
    /// Defaults for a radar: no padding, Hann taper, per-window bin, and clutter removal
    /// everywhere except on the 24 GHz radar, whose 12.5 mm wavelength makes
    /// vital-sign motion too small a fraction of a phase turn.
    pub fn for_profile(id: ProfileId) -> Self {
        Self {
            pad: PadPolicy::None,
            window: RangeWindow::Hann,
            dc_removal: !matches!(id, ProfileId::Bgt24),
            bin_policy: BinPolicy::PerWindow,
        }
    }

    pub fn with_pad(mut self, pad: PadPolicy) -> Self {
        self.pad = pad;
        self
    }

    pub fn with_window(mut self, window: RangeWindow) -> Self {
        self.window = window;
        self
    }

    pub fn with_dc_removal(mut self, on: bool) -> Self {
        self.dc_removal = on;
        self
    }

    pub fn with_bin_policy(mut self, policy: BinPolicy) -> Self {
        self.bin_policy = policy;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub range_m: f64,
    pub bin: usize,
    pub displacement: DisplacementTrace,
}

/// Clutter-removed spectra whose strongest bin carries less than this
/// fraction of the raw peak are treated as a scene without motion.
const MOTION_FLOOR: f64 = 1e-6;

/// Runs every stage on `recording`.
///
/// With clutter removal on, the moving target is located in the
/// clutter-removed spectra and its phase is measured about the centre of
/// the arc it traces in the complex plane. A scene with no measurable
/// motion falls back to the raw spectra.
pub fn run_pipeline(
    recording: &ChirpRecording,
    options: &PipelineOptions,
) -> Result<PipelineOutput, PipelineError> {
    let derived = recording.profile.derived()?;
    let raw = range_fft_windowed(recording, options.pad, options.window)?;

    let cleaned = if options.dc_removal {
        let cleaned = dc_offset_removal(&raw)?;
        let peak = |s: &RangeSpectrumSeries| s.spectra.iter().map(|z| z.norm()).fold(0.0, f64::max);
        (peak(&cleaned) > MOTION_FLOOR * peak(&raw)).then_some(cleaned)
    } else {
        None
    };
    let working = cleaned.as_ref().unwrap_or(&raw);

    let selection = select_target_bin(working, options.bin_policy)?;
    let bin = selection.dominant();
    let range_m = match &selection {
        BinSelection::Window(b) => bin_to_range(*b, working)?,
        BinSelection::PerChirp(bins) => {
            let total = bins
                .iter()
                .map(|&b| bin_to_range(b, working))
                .sum::<Result<f64, _>>()?;
            total / bins.len() as f64
        }
    };

    let wrapped = match cleaned {
        Some(_) => arc_phase(recording, options.window, working.n_fft, bin)?,
        None => extract_phase(&raw, bin)?,
    };
    let unwrapped = unwrap_phase(&wrapped);
    let displacement =
        phase_to_displacement(&unwrapped, derived.wavelength_m).with_base_range(range_m);
    Ok(PipelineOutput {
        range_m,
        bin,
        displacement,
    })
}

/// Standard errors a fitted arc centre must lie from the origin to be used.
const SIGNIFICANT_CENTRE: f64 = 3.0;

/// Sub-bins per bin when locating the moving target's spectral peak.
const ZOOM: usize = 16;

/// Phase of the moving target measured about the centre of its arc.
///
/// The peak is located to `1/ZOOM` of a bin around `bin` (by direct DFT,
/// using the clutter-removed magnitude), so the target's amplitude barely
/// changes as it moves and the samples lie on a circle.
fn arc_phase(
    recording: &ChirpRecording,
    window: RangeWindow,
    n_fft: usize,
    bin: usize,
) -> Result<PhaseSeries, PipelineError> {
    let fine_n = n_fft * ZOOM;
    let lo = (bin * ZOOM).saturating_sub(ZOOM);
    let hi = ((bin + 1) * ZOOM).min(fine_n / 2 - 1);
    let columns = zoom_dft(recording, window, fine_n, lo..=hi);

    let moving_magnitude = |col: &[Complex64]| {
        let mean = col.iter().sum::<Complex64>() / col.len() as f64;
        col.iter().map(|z| (z - mean).norm()).sum::<f64>()
    };
    let (best, _) = columns
        .iter()
        .map(|c| moving_magnitude(c))
        .enumerate()
        .fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, v)| if v > acc.1 { (i, v) } else { acc },
        );
    let column = &columns[best];

    // A short or noisy arc pins its centre down poorly. Only recentre on a
    // centre that is clearly away from the origin, i.e. on real static clutter.
    let centre = match arc_fit(column) {
        Some((c, se)) if c.norm() > SIGNIFICANT_CENTRE * se => c,
        _ => Complex64::default(),
    };
    let peak = column.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let values = column
        .iter()
        .enumerate()
        .map(|(chirp, z)| {
            let v = z - centre;
            if v.norm() <= 1e-9 * peak {
                Err(PipelineError::ZeroMagnitude { bin, chirp })
            } else {
                Ok(v.arg())
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PhaseSeries {
        rate_hz: 1.0 / recording.profile.chirp_interval_s,
        values,
        bin,
        wrapped: true,
    })
}

/// Windowed DFT of every chirp at bins `bins` of an `n_fft`-point grid.
/// Returns one column (all chirps) per requested bin.
fn zoom_dft(
    recording: &ChirpRecording,
    window: RangeWindow,
    n_fft: usize,
    bins: std::ops::RangeInclusive<usize>,
) -> Vec<Vec<Complex64>> {
    let n = recording.samples_per_chirp();
    let taper = window.coefficients(n);
    bins.map(|k| {
        let kernel: Vec<Complex64> = (0..n)
            .map(|i| {
                let angle = -std::f64::consts::TAU * ((k * i) % n_fft) as f64 / n_fft as f64;
                Complex64::from_polar(taper[i], angle)
            })
            .collect();
        (0..recording.chirps)
            .map(|m| {
                recording
                    .chirp(m)
                    .iter()
                    .zip(&kernel)
                    .map(|(&x, w)| w * x)
                    .sum()
            })
            .collect()
    })
    .collect()
}

/// Centre of the circle best fitting `points` (Taubin's algebraic fit,
/// which unlike the simpler Kåsa fit does not shrink short, noisy arcs).
/// `None` when the points are (numerically) collinear or coincident.
pub fn arc_centre(points: &[Complex64]) -> Option<Complex64> {
    arc_fit(points).map(|(centre, _)| centre)
}

/// [`arc_centre`] plus the standard error of the centre, from the
/// linearised covariance of the geometric (orthogonal-distance) residuals.
fn arc_fit(points: &[Complex64]) -> Option<(Complex64, f64)> {
    let n = points.len();
    if n < 4 {
        return None;
    }
    // Moments of the centred data.
    let mean = points.iter().sum::<Complex64>() / n as f64;
    let (mut mxx, mut myy, mut mxy, mut mxz, mut myz, mut mzz) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for p in points {
        let (x, y) = (p.re - mean.re, p.im - mean.im);
        let z = x * x + y * y;
        mxx += x * x;
        myy += y * y;
        mxy += x * y;
        mxz += x * z;
        myz += y * z;
        mzz += z * z;
    }
    let inv = 1.0 / n as f64;
    let (mxx, myy, mxy, mxz, myz, mzz) = (
        mxx * inv,
        myy * inv,
        mxy * inv,
        mxz * inv,
        myz * inv,
        mzz * inv,
    );
    let mz = mxx + myy;
    if !(mz > 0.0) {
        return None;
    }
    let cov_xy = mxx * myy - mxy * mxy;
    let var_z = mzz - mz * mz;

    // Smallest root of the characteristic cubic, by Newton from zero.
    let a3 = 4.0 * mz;
    let a2 = -3.0 * mz * mz - mzz;
    let a1 = var_z * mz + 4.0 * cov_xy * mz - mxz * mxz - myz * myz;
    let a0 = mxz * (mxz * myy - myz * mxy) + myz * (myz * mxx - mxz * mxy) - var_z * cov_xy;
    let (mut x, mut y) = (0.0, a0);
    for _ in 0..100 {
        let dy = a1 + x * (2.0 * a2 + 3.0 * a3 * x);
        let next = x - y / dy;
        if next == x || !next.is_finite() {
            break;
        }
        let next_y = a0 + next * (a1 + next * (a2 + next * a3));
        if next_y.abs() >= y.abs() {
            break;
        }
        x = next;
        y = next_y;
    }
    let det = x * x - x * mz + cov_xy;
    if !(det.abs() > 1e-12 * mz * mz) {
        return None;
    }
    let cx = (mxz * (myy - x) - myz * mxy) / det / 2.0;
    let cy = (myz * (mxx - x) - mxz * mxy) / det / 2.0;
    let centre = mean + Complex64::new(cx, cy);
    let radius = (cx * cx + cy * cy + mz).sqrt();

    // Gauss-Newton normal matrix of the distances |p - c| - r in (cx, cy, r).
    let mut jtj = [[0.0; 3]; 3];
    let mut sse = 0.0;
    for p in points {
        let d = p - centre;
        let dist = d.norm();
        if dist == 0.0 {
            continue;
        }
        let row = [-d.re / dist, -d.im / dist, -1.0];
        for i in 0..3 {
            for j in 0..3 {
                jtj[i][j] += row[i] * row[j];
            }
        }
        sse += (dist - radius).powi(2);
    }
    let sigma2 = sse / (n - 3) as f64;
    let [[a, b, c], [_, e, f], [_, _, i]] = jtj;
    let minor_a = e * i - f * f;
    let minor_e = a * i - c * c;
    let det3 = a * minor_a - b * (b * i - f * c) + c * (b * f - e * c);
    let se = if det3 > 0.0 {
        (sigma2 * (minor_a + minor_e) / det3).sqrt()
    } else {
        f64::INFINITY
    };
    Some((centre, se))
}
