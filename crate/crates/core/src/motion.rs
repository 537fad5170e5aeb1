//! Ground-truth target motion: the servo phantom and a parametric chest.
//!
//! Displacements are signed offsets from the target's base range, in
//! meters. Positive values move the target away from the radar.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MotionError {
    #[error("motion at {freq_hz} Hz aliases at a sampling rate of {rate_hz} Hz")]
    AliasedMotion { freq_hz: f64, rate_hz: f64 },
    #[error("trace needs at least 2 samples")]
    EmptyTrace,
    #[error("invalid motion parameter: {0}")]
    InvalidParams(String),
}

/// A uniformly sampled displacement time series.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementTrace {
    pub rate_hz: f64,
    pub samples: Vec<f64>,
    /// Range the displacement is relative to, once the trace is placed in a
    /// scene or measured by the pipeline.
    pub base_range_m: Option<f64>,
}

impl DisplacementTrace {
    pub fn new(rate_hz: f64, samples: Vec<f64>) -> Self {
        Self {
            rate_hz,
            samples,
            base_range_m: None,
        }
    }

    pub fn with_base_range(mut self, base_range_m: f64) -> Self {
        self.base_range_m = Some(base_range_m);
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.rate_hz
    }

    pub fn time_of(&self, index: usize) -> f64 {
        index as f64 / self.rate_hz
    }

    /// Linear interpolation at time `t`; clamps outside the sampled span.
    pub fn at(&self, t: f64) -> f64 {
        match self.samples.len() {
            0 => 0.0,
            1 => self.samples[0],
            len => {
                let x = (t * self.rate_hz).clamp(0.0, (len - 1) as f64);
                let i = (x.floor() as usize).min(len - 2);
                let frac = x - i as f64;
                self.samples[i] * (1.0 - frac) + self.samples[i + 1] * frac
            }
        }
    }

    /// Copy of samples `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> DisplacementTrace {
        DisplacementTrace {
            rate_hz: self.rate_hz,
            samples: self.samples[start..start + len].to_vec(),
            base_range_m: self.base_range_m,
        }
    }

    pub fn mean(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Population standard deviation.
    pub fn std_dev(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let m = self.mean();
        let var =
            self.samples.iter().map(|x| (x - m).powi(2)).sum::<f64>() / self.samples.len() as f64;
        var.sqrt()
    }
}

/// Ground-truth heartbeat instants, strictly increasing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BeatTimes {
    pub times: Vec<f64>,
}

impl BeatTimes {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.times.windows(2).all(|w| w[1] > w[0])
    }
}

/// Parameters of the synthetic chest wall.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChestParams {
    pub rr_hz: f64,
    pub hr_hz: f64,
    pub breath_amplitude_m: f64,
    pub heart_amplitude_m: f64,
    /// Breathing overtones as `(order, amplitude relative to the fundamental)`.
    pub breath_harmonics: Vec<(u32, f64)>,
    pub heart_pulse_width_s: f64,
    pub breath_phase_rad: f64,
    /// Phase of the first beat within one heart period, in `[0, 2π)`.
    pub heart_phase_rad: f64,
}

impl Default for ChestParams {
    fn default() -> Self {
        Self {
            rr_hz: 0.25,
            hr_hz: 1.2,
            breath_amplitude_m: 1.2e-3,
            heart_amplitude_m: 0.3e-3,
            breath_harmonics: Vec::new(),
            heart_pulse_width_s: 0.120,
            breath_phase_rad: 0.0,
            heart_phase_rad: PI,
        }
    }
}

impl ChestParams {
    pub const RR_RANGE_HZ: (f64, f64) = (0.1, 0.5);
    pub const HR_RANGE_HZ: (f64, f64) = (0.7, 2.0);

    pub fn validate(&self) -> Result<(), MotionError> {
        let bad = |msg: String| Err(MotionError::InvalidParams(msg));
        let (rr_lo, rr_hi) = Self::RR_RANGE_HZ;
        let (hr_lo, hr_hi) = Self::HR_RANGE_HZ;
        if !(rr_lo..=rr_hi).contains(&self.rr_hz) {
            return bad(format!(
                "respiration rate {} Hz outside [{rr_lo}, {rr_hi}]",
                self.rr_hz
            ));
        }
        if !(hr_lo..=hr_hi).contains(&self.hr_hz) {
            return bad(format!(
                "heart rate {} Hz outside [{hr_lo}, {hr_hi}]",
                self.hr_hz
            ));
        }
        if !(self.breath_amplitude_m >= 0.0 && self.heart_amplitude_m >= 0.0) {
            return bad("amplitudes must be non-negative".into());
        }
        if !(self.heart_pulse_width_s > 0.0 && self.heart_pulse_width_s <= 1.0 / self.hr_hz) {
            return bad(format!(
                "heart pulse width {} s must be positive and at most one beat period",
                self.heart_pulse_width_s
            ));
        }
        if self
            .breath_harmonics
            .iter()
            .any(|&(order, rel)| order < 2 || !(rel >= 0.0))
        {
            return bad("breath harmonics need order >= 2 and non-negative amplitude".into());
        }
        Ok(())
    }

    /// Highest frequency the chest waveform carries with appreciable energy.
    fn highest_frequency_hz(&self) -> f64 {
        let top_harmonic = self
            .breath_harmonics
            .iter()
            .map(|&(order, _)| order as f64 * self.rr_hz)
            .fold(self.rr_hz, f64::max);
        // A raised-cosine pulse of width w has its first spectral null at 2/w.
        let pulse = if self.heart_amplitude_m > 0.0 {
            2.0 / self.heart_pulse_width_s
        } else {
            0.0
        };
        top_harmonic.max(self.hr_hz).max(pulse)
    }

    fn breath_at(&self, t: f64) -> f64 {
        let w = TAU * self.rr_hz;
        let fundamental = (w * t + self.breath_phase_rad).sin();
        let overtones: f64 = self
            .breath_harmonics
            .iter()
            .map(|&(order, rel)| rel * (order as f64 * (w * t + self.breath_phase_rad)).sin())
            .sum();
        self.breath_amplitude_m * (fundamental + overtones)
    }

    fn first_beat_s(&self) -> f64 {
        self.heart_phase_rad.rem_euclid(TAU) / TAU / self.hr_hz
    }

    fn heart_at(&self, t: f64) -> f64 {
        if self.heart_amplitude_m == 0.0 {
            return 0.0;
        }
        let period = 1.0 / self.hr_hz;
        let half = 0.5 * self.heart_pulse_width_s;
        // Nearest beat centre, including the partial pulse before t = 0.
        let k = ((t - self.first_beat_s()) / period).round();
        let offset = t - (self.first_beat_s() + k * period);
        if offset.abs() > half {
            return 0.0;
        }
        self.heart_amplitude_m * 0.5 * (1.0 + (PI * offset / half).cos())
    }

    fn beat_times(&self, duration_s: f64) -> BeatTimes {
        let period = 1.0 / self.hr_hz;
        let first = self.first_beat_s();
        let times = (0..)
            .map(|k| first + k as f64 * period)
            .take_while(|&t| t < duration_s)
            .collect();
        BeatTimes { times }
    }
}

fn sample_count(duration_s: f64, rate_hz: f64) -> Result<usize, MotionError> {
    if !(rate_hz > 0.0) || !(duration_s > 0.0) {
        return Err(MotionError::InvalidParams(format!(
            "duration {duration_s} s and rate {rate_hz} Hz must be positive"
        )));
    }
    Ok(((duration_s * rate_hz).round() as usize).max(1))
}

/// Rounds to the nearest multiple of `step`; `step == 0` disables rounding.
pub fn quantize(value: f64, step: f64) -> f64 {
    if step > 0.0 {
        (value / step).round() * step
    } else {
        value
    }
}

/// Servo-phantom motion: a sinusoid realised in discrete position steps.
pub fn sinusoid_motion(
    amplitude_m: f64,
    freq_hz: f64,
    duration_s: f64,
    rate_hz: f64,
    step_m: f64,
) -> Result<DisplacementTrace, MotionError> {
    if !(amplitude_m >= 0.0) || !(step_m >= 0.0) || !(freq_hz >= 0.0) {
        return Err(MotionError::InvalidParams(
            "amplitude, frequency and step must be non-negative".into(),
        ));
    }
    let len = sample_count(duration_s, rate_hz)?;
    if freq_hz >= rate_hz / 2.0 {
        return Err(MotionError::AliasedMotion { freq_hz, rate_hz });
    }
    let samples = (0..len)
        .map(|i| {
            let t = i as f64 / rate_hz;
            quantize(amplitude_m * (TAU * freq_hz * t).sin(), step_m)
        })
        .collect();
    Ok(DisplacementTrace::new(rate_hz, samples))
}

/// Which parts of the chest waveform to render.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChestComponents {
    Both,
    BreathOnly,
    HeartOnly,
}

/// Chest wall displacement and the instants of each heartbeat.
///
/// Breathing is a sinusoid plus the declared overtones. The heart adds a
/// raised-cosine pulse of `heart_pulse_width_s` every `1 / hr` seconds; the
/// returned beat times are the pulse centres.
pub fn chest_motion(
    params: &ChestParams,
    duration_s: f64,
    rate_hz: f64,
) -> Result<(DisplacementTrace, BeatTimes), MotionError> {
    chest_motion_components(params, duration_s, rate_hz, ChestComponents::Both)
}

pub fn chest_motion_components(
    params: &ChestParams,
    duration_s: f64,
    rate_hz: f64,
    components: ChestComponents,
) -> Result<(DisplacementTrace, BeatTimes), MotionError> {
    params.validate()?;
    let len = sample_count(duration_s, rate_hz)?;
    let top = params.highest_frequency_hz();
    if top >= rate_hz / 2.0 {
        return Err(MotionError::AliasedMotion {
            freq_hz: top,
            rate_hz,
        });
    }
    let samples = (0..len)
        .map(|i| {
            let t = i as f64 / rate_hz;
            match components {
                ChestComponents::Both => params.breath_at(t) + params.heart_at(t),
                ChestComponents::BreathOnly => params.breath_at(t),
                ChestComponents::HeartOnly => params.heart_at(t),
            }
        })
        .collect();
    Ok((
        DisplacementTrace::new(rate_hz, samples),
        params.beat_times(duration_s),
    ))
}

pub fn peak_to_peak(trace: &DisplacementTrace) -> Result<f64, MotionError> {
    if trace.samples.len() < 2 {
        return Err(MotionError::EmptyTrace);
    }
    let (lo, hi) = trace
        .samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    Ok(hi - lo)
}
