use std::f64::consts::{PI, TAU};

use super::{PipelineError, RangeSpectrumSeries};
use crate::motion::DisplacementTrace;

/// Phase of one range bin across chirps.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSeries {
    pub rate_hz: f64,
    pub values: Vec<f64>,
    pub bin: usize,
    /// `true` while values are confined to `(-π, π]`.
    pub wrapped: bool,
}

/// Magnitudes at or below this fraction of the series peak count as empty.
const MAGNITUDE_FLOOR: f64 = 1e-9;

pub fn extract_phase(
    series: &RangeSpectrumSeries,
    bin: usize,
) -> Result<PhaseSeries, PipelineError> {
    if bin >= series.bins() {
        return Err(PipelineError::BinOutOfRange {
            bin,
            n_fft: series.n_fft,
        });
    }
    let peak = series
        .spectra
        .iter()
        .map(|z| z.norm_sqr())
        .fold(0.0, f64::max);
    let floor = MAGNITUDE_FLOOR * peak.sqrt();
    let values = series
        .bin_series(bin)
        .enumerate()
        .map(|(chirp, z)| {
            if z.norm() <= floor {
                Err(PipelineError::ZeroMagnitude { bin, chirp })
            } else {
                Ok(z.arg())
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PhaseSeries {
        rate_hz: series.slow_time_rate_hz(),
        values,
        bin,
        wrapped: true,
    })
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let w = x - TAU * ((x + PI) / TAU).floor();
    // floor maps exactly π to -π; keep the closed end of the interval.
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Adds multiples of 2π so that successive samples differ by at most π.
pub fn unwrap_phase(series: &PhaseSeries) -> PhaseSeries {
    let mut values = Vec::with_capacity(series.values.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for &x in &series.values {
        if let Some(p) = prev {
            let delta = x - p;
            offset -= TAU * ((delta + PI) / TAU).floor();
        }
        values.push(x + offset);
        prev = Some(x);
    }
    PhaseSeries {
        values,
        wrapped: false,
        ..series.clone()
    }
}

/// `Δd = λ Δφ / 4π`, relative to the first sample.
pub fn phase_to_displacement(series: &PhaseSeries, wavelength_m: f64) -> DisplacementTrace {
    let first = series.values.first().copied().unwrap_or(0.0);
    let scale = wavelength_m / (4.0 * PI);
    DisplacementTrace::new(
        series.rate_hz,
        series.values.iter().map(|&p| (p - first) * scale).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{range_fft, PadPolicy};
    use crate::profiles::{make_profile, ProfileId};
    use crate::synth::{synthesize_recording, NoiseModel, Scene, Target};
    use num_complex::Complex64;

    fn phases(values: Vec<f64>) -> PhaseSeries {
        PhaseSeries {
            rate_hz: 100.0,
            values,
            bin: 0,
            wrapped: true,
        }
    }

    #[test]
    fn wrap_interval() {
        assert_eq!(wrap_phase(PI), PI);
        assert_eq!(wrap_phase(-PI), PI);
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_phase(-0.5) + 0.5).abs() < 1e-15);
        assert!((wrap_phase(7.0) - (7.0 - TAU)).abs() < 1e-12);
    }

    #[test]
    fn unwrap_crosses_pi_the_short_way() {
        let u = unwrap_phase(&phases(vec![3.0, -3.0]));
        assert!(!u.wrapped);
        assert_eq!(u.values[0], 3.0);
        assert!((u.values[1] - (TAU - 3.0)).abs() < 1e-12);
        assert!((u.values[1] - 3.2832).abs() < 1e-4);
    }

    #[test]
    fn unwrap_leaves_constants_alone() {
        let u = unwrap_phase(&phases(vec![1.25; 50]));
        assert!(u.values.iter().all(|&v| v == 1.25));
    }

    #[test]
    fn unwrapped_steps_are_at_most_pi() {
        let raw: Vec<f64> = (0..500)
            .map(|i| wrap_phase(0.37 * i as f64 * i as f64 % 17.0))
            .collect();
        let u = unwrap_phase(&phases(raw.clone()));
        for w in u.values.windows(2) {
            assert!((w[1] - w[0]).abs() <= PI + 1e-12);
        }
        for (a, b) in raw.iter().zip(&u.values) {
            assert!(wrap_phase(b - a).abs() < 1e-9);
        }
    }

    #[test]
    fn displacement_conversion() {
        let zero = phase_to_displacement(&phases(vec![0.4, 0.4]), 5e-3);
        assert_eq!(zero.samples, vec![0.0, 0.0]);

        let lambda = make_profile(ProfileId::Bgt60)
            .derived()
            .unwrap()
            .wavelength_m;
        let d = phase_to_displacement(&phases(vec![0.0, 0.7607]), lambda);
        assert!((d.samples[1] - 0.300e-3).abs() < 0.5e-6, "{}", d.samples[1]);

        let d = phase_to_displacement(&phases(vec![1.0, 1.0 + 4.0 * PI]), 2.5e-3);
        assert!((d.samples[1] - 2.5e-3).abs() < 1e-15);
    }

    #[test]
    fn static_tone_phase_is_constant() {
        let p = make_profile(ProfileId::Bgt120);
        let rec = synthesize_recording(
            &p,
            &Scene::single(Target::fixed(0.495)),
            &NoiseModel::noiseless(),
            0.2,
        )
        .unwrap();
        let s = range_fft(&rec, PadPolicy::None).unwrap();
        let ph = extract_phase(&s, 33).unwrap();
        assert!(ph.wrapped);
        assert!(ph.values.iter().all(|&v| (v - ph.values[0]).abs() < 1e-12));
    }

    #[test]
    fn eighth_wavelength_step_is_quarter_turn() {
        for id in ProfileId::BUILT_IN {
            let p = make_profile(id);
            let lambda = p.derived().unwrap().wavelength_m;
            let trace = DisplacementTrace::new(100.0, vec![0.0, lambda / 8.0]);
            let rec = synthesize_recording(
                &p,
                &Scene::single(Target::moving(0.45, trace)),
                &NoiseModel::noiseless(),
                0.02,
            )
            .unwrap();
            let s = range_fft(&rec, PadPolicy::None).unwrap();
            let bin = (0.45 / s.bin_size_m).round() as usize;
            let ph = extract_phase(&s, bin).unwrap();
            let step = wrap_phase(ph.values[1] - ph.values[0]);
            assert!((step - PI / 2.0).abs() < 2e-3, "{id}: {step}");
        }
    }

    #[test]
    fn empty_bin_has_no_phase() {
        let p = make_profile(ProfileId::Bgt120);
        let rec = synthesize_recording(
            &p,
            &Scene::single(Target::fixed(0.495)),
            &NoiseModel::noiseless(),
            0.05,
        )
        .unwrap();
        let mut s = range_fft(&rec, PadPolicy::None).unwrap();
        let bins = s.bins();
        for m in 0..s.chirps {
            s.spectra[m * bins + 50] = Complex64::default();
        }
        assert!(matches!(
            extract_phase(&s, 50),
            Err(PipelineError::ZeroMagnitude { bin: 50, .. })
        ));
    }
}
