use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::{bandpass, Band, VitalsError, VitalsEstimate};
use crate::motion::DisplacementTrace;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateOptions {
    /// FFT length as a multiple of the trace length (1 = no padding).
    /// Above 1 the peak is also refined by parabolic interpolation.
    pub zero_pad: usize,
}

impl Default for RateOptions {
    fn default() -> Self {
        Self { zero_pad: 8 }
    }
}

impl RateOptions {
    /// Plain FFT grid: rates are multiples of `60 / duration` per minute.
    pub fn unpadded() -> Self {
        Self { zero_pad: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePeak {
    pub per_minute: f64,
    /// Peak magnitude over the mean in-band magnitude.
    pub peak_ratio: f64,
}

/// In-band peaks at or below this fraction of the trace's L1 norm count as no signal.
const PEAK_FLOOR: f64 = 1e-9;

pub fn estimate_rate(trace: &DisplacementTrace, band: &Band) -> Result<f64, VitalsError> {
    Ok(estimate_rate_with(trace, band, RateOptions::default())?.per_minute)
}

/// Strongest frequency of the band-passed trace within `[low, high]`, per minute.
pub fn estimate_rate_with(
    trace: &DisplacementTrace,
    band: &Band,
    options: RateOptions,
) -> Result<RatePeak, VitalsError> {
    let need_s = 2.0 / band.low_hz;
    if trace.duration_s() < need_s - 1e-9 {
        return Err(VitalsError::TraceTooShort {
            have_s: trace.duration_s(),
            need_s,
        });
    }
    if options.zero_pad == 0 {
        return Err(VitalsError::InvalidParams(
            "zero_pad must be at least 1".into(),
        ));
    }
    let filtered = bandpass(trace, band)?;

    let n = trace.len();
    let n_fft = n * options.zero_pad;
    let mut buf: Vec<Complex64> = filtered
        .samples
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    buf.resize(n_fft, Complex64::default());
    FftPlanner::new().plan_fft_forward(n_fft).process(&mut buf);

    let df = trace.rate_hz / n_fft as f64;
    let lo = (band.low_hz / df).ceil() as usize;
    let hi = ((band.high_hz / df).floor() as usize).min(n_fft / 2);
    let mags: Vec<f64> = buf[..=n_fft / 2].iter().map(|z| z.norm()).collect();
    let (k, peak) = (lo..=hi).fold((lo, f64::NEG_INFINITY), |best, k| {
        if mags[k] > best.1 {
            (k, mags[k])
        } else {
            best
        }
    });

    let scale: f64 = trace.samples.iter().map(|x| x.abs()).sum();
    if !(peak > PEAK_FLOOR * scale) {
        return Err(VitalsError::NoPeak {
            low_hz: band.low_hz,
            high_hz: band.high_hz,
        });
    }

    let mut bin = k as f64;
    if options.zero_pad > 1 && k > lo && k < hi {
        let (a, b, c) = (mags[k - 1], mags[k], mags[k + 1]);
        let denom = a - 2.0 * b + c;
        if denom < 0.0 {
            bin += 0.5 * (a - c) / denom;
        }
    }
    let mean = mags[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64;
    Ok(RatePeak {
        per_minute: 60.0 * bin * df,
        peak_ratio: peak / mean,
    })
}

/// Heart and respiration rates over a rolling window.
///
/// Produces `floor((duration - window) / step) + 1` estimates; each window
/// is filtered and analysed on its own.
pub fn sliding_estimates(
    trace: &DisplacementTrace,
    window_s: f64,
    step_s: f64,
    options: RateOptions,
) -> Result<Vec<VitalsEstimate>, VitalsError> {
    if !(window_s > 0.0 && step_s > 0.0) {
        return Err(VitalsError::InvalidParams(
            "window and step must be positive".into(),
        ));
    }
    let duration = trace.duration_s();
    if duration < window_s - 1e-9 {
        return Err(VitalsError::TraceTooShort {
            have_s: duration,
            need_s: window_s,
        });
    }
    let window = (window_s * trace.rate_hz).round() as usize;
    let step = (step_s * trace.rate_hz).round() as usize;
    if window == 0 || step == 0 {
        return Err(VitalsError::InvalidParams(
            "window or step shorter than one sample".into(),
        ));
    }
    let count = ((duration - window_s) / step_s + 1e-9).floor() as usize + 1;

    (0..count)
        .into_par_iter()
        .map(|i| {
            let start = i * step;
            let segment = trace.slice(start, window);
            let hr = estimate_rate_with(&segment, &Band::heart(), options)?;
            let rr = estimate_rate_with(&segment, &Band::respiration(), options)?;
            Ok(VitalsEstimate {
                window_start_s: trace.time_of(start),
                hr_bpm: hr.per_minute,
                rr_brpm: rr.per_minute,
                hr_peak_mag: hr.peak_ratio,
                rr_peak_mag: rr.peak_ratio,
            })
        })
        .collect()
}
