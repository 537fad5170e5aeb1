use std::f64::consts::PI;

use super::{Band, VitalsError};
use crate::motion::DisplacementTrace;

/// Order of each Butterworth edge (high-pass and low-pass).
const EDGE_ORDER: usize = 4;

/// Second-order section, normalised so `a0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Biquad {
    b: [f64; 3],
    a: [f64; 2],
}

impl Biquad {
    fn lowpass(fc: f64, fs: f64, q: f64) -> Self {
        let w0 = 2.0 * PI * fc / fs;
        let (sin, cos) = w0.sin_cos();
        let alpha = sin / (2.0 * q);
        let a0 = 1.0 + alpha;
        let b1 = (1.0 - cos) / a0;
        Self {
            b: [b1 / 2.0, b1, b1 / 2.0],
            a: [-2.0 * cos / a0, (1.0 - alpha) / a0],
        }
    }

    fn highpass(fc: f64, fs: f64, q: f64) -> Self {
        let w0 = 2.0 * PI * fc / fs;
        let (sin, cos) = w0.sin_cos();
        let alpha = sin / (2.0 * q);
        let a0 = 1.0 + alpha;
        let b1 = -(1.0 + cos) / a0;
        Self {
            b: [-b1 / 2.0, b1, -b1 / 2.0],
            a: [-2.0 * cos / a0, (1.0 - alpha) / a0],
        }
    }

    fn dc_gain(&self) -> f64 {
        self.b.iter().sum::<f64>() / (1.0 + self.a[0] + self.a[1])
    }

    /// State (transposed direct form II) after an infinitely long constant input `x`.
    fn steady_state(&self, x: f64) -> [f64; 2] {
        let y = self.dc_gain() * x;
        let z2 = self.b[2] * x - self.a[1] * y;
        let z1 = self.b[1] * x - self.a[0] * y + z2;
        [z1, z2]
    }

    fn run(&self, data: &mut [f64], mut z: [f64; 2]) {
        for x in data.iter_mut() {
            let input = *x;
            let y = self.b[0] * input + z[0];
            z[0] = self.b[1] * input - self.a[0] * y + z[1];
            z[1] = self.b[2] * input - self.a[1] * y;
            *x = y;
        }
    }

    /// Magnitude response at `f` Hz.
    #[cfg(test)]
    pub(crate) fn gain_at(&self, f: f64, fs: f64) -> f64 {
        let w = 2.0 * PI * f / fs;
        let z1 = num_complex::Complex64::from_polar(1.0, -w);
        let z2 = z1 * z1;
        let num = self.b[0] + self.b[1] * z1 + self.b[2] * z2;
        let den = 1.0 + self.a[0] * z1 + self.a[1] * z2;
        (num / den).norm()
    }
}

/// Section quality factors of an `EDGE_ORDER` Butterworth response.
fn butterworth_qs() -> impl Iterator<Item = f64> {
    (0..EDGE_ORDER / 2)
        .map(|k| 1.0 / (2.0 * (PI * (2 * k + 1) as f64 / (2 * EDGE_ORDER) as f64).cos()))
}

/// Butterworth high-pass at `band.low_hz` cascaded with a Butterworth
/// low-pass at `band.high_hz`, as second-order sections.
pub(crate) fn design(band: &Band, fs: f64) -> Vec<Biquad> {
    let qs: Vec<f64> = butterworth_qs().collect();
    let mut sections: Vec<Biquad> = qs
        .iter()
        .map(|&q| Biquad::highpass(band.low_hz, fs, q))
        .collect();
    sections.extend(qs.iter().map(|&q| Biquad::lowpass(band.high_hz, fs, q)));
    sections
}

fn filter_once(sections: &[Biquad], data: &mut [f64]) {
    let Some(&first) = data.first() else { return };
    let mut level = first;
    for s in sections {
        s.run(data, s.steady_state(level));
        level *= s.dc_gain();
    }
}

/// Zero-phase band-pass: the cascade is run forward, then backward.
///
/// The ends are extended by odd reflection (up to three periods of the
/// low cut-off) and each pass starts from the steady state of its first
/// sample, which keeps start-up transients out of the returned span.
pub fn bandpass(trace: &DisplacementTrace, band: &Band) -> Result<DisplacementTrace, VitalsError> {
    band.check_for_rate(trace.rate_hz)?;
    Ok(zero_phase(trace, &design(band, trace.rate_hz), band.low_hz))
}

/// Zero-phase Butterworth low-pass, built like [`bandpass`].
pub fn lowpass(
    trace: &DisplacementTrace,
    cutoff_hz: f64,
) -> Result<DisplacementTrace, VitalsError> {
    if !(cutoff_hz > 0.0 && cutoff_hz < trace.rate_hz / 2.0) {
        return Err(VitalsError::BandInvalid(format!(
            "cut-off {cutoff_hz} Hz does not fit below Nyquist of a {} Hz trace",
            trace.rate_hz
        )));
    }
    let sections: Vec<Biquad> = butterworth_qs()
        .map(|q| Biquad::lowpass(cutoff_hz, trace.rate_hz, q))
        .collect();
    Ok(zero_phase(trace, &sections, cutoff_hz))
}

fn zero_phase(
    trace: &DisplacementTrace,
    sections: &[Biquad],
    slowest_hz: f64,
) -> DisplacementTrace {
    let x = &trace.samples;
    let n = x.len();
    if n < 2 {
        return trace.clone();
    }
    let pad = ((3.0 * trace.rate_hz / slowest_hz).ceil() as usize).min(n - 1);

    let mut ext = Vec::with_capacity(n + 2 * pad);
    ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
    ext.extend_from_slice(x);
    ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));

    filter_once(sections, &mut ext);
    ext.reverse();
    filter_once(sections, &mut ext);
    ext.reverse();

    DisplacementTrace {
        samples: ext[pad..pad + n].to_vec(),
        ..trace.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn tone(freq: f64, rate: f64, seconds: f64) -> DisplacementTrace {
        let n = (rate * seconds) as usize;
        DisplacementTrace::new(
            rate,
            (0..n)
                .map(|i| (TAU * freq * i as f64 / rate).sin())
                .collect(),
        )
    }

    /// Amplitude of the middle half, away from the ends.
    fn mid_amplitude(t: &DisplacementTrace) -> f64 {
        let n = t.len();
        t.samples[n / 4..3 * n / 4]
            .iter()
            .fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    #[test]
    fn sections_are_butterworth() {
        let band = Band::heart();
        let sections = design(&band, 100.0);
        assert_eq!(sections.len(), 4);
        let response = |f: f64| {
            sections
                .iter()
                .map(|s| s.gain_at(f, 100.0))
                .product::<f64>()
        };
        // Each edge is 3 dB down at its own cut-off; the other edge is far away.
        let hp_only: f64 = sections[..2]
            .iter()
            .map(|s| s.gain_at(0.7, 100.0))
            .product();
        assert!(
            (hp_only - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9,
            "{hp_only}"
        );
        let lp_only: f64 = sections[2..]
            .iter()
            .map(|s| s.gain_at(2.0, 100.0))
            .product();
        assert!(
            (lp_only - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9,
            "{lp_only}"
        );
        assert!(response(0.0) < 1e-12);
        assert!(response(49.9) < 1e-6);
    }

    #[test]
    fn heart_band_tone_gains() {
        let band = Band::heart();
        let pass = mid_amplitude(&bandpass(&tone(1.2, 100.0, 30.0), &band).unwrap());
        assert!((0.89..=1.12).contains(&pass), "{pass}");
        let stop = mid_amplitude(&bandpass(&tone(3.0, 100.0, 30.0), &band).unwrap());
        assert!(stop <= 0.1, "{stop}");
    }

    #[test]
    fn zero_in_zero_out() {
        let z = DisplacementTrace::new(100.0, vec![0.0; 500]);
        assert_eq!(
            bandpass(&z, &Band::respiration()).unwrap().samples,
            vec![0.0; 500]
        );
    }

    #[test]
    fn output_is_not_delayed() {
        // A zero-phase filter leaves an in-band tone's zero crossings in place.
        let t = tone(1.0, 100.0, 20.0);
        let y = bandpass(&t, &Band::heart()).unwrap();
        let i = 1000;
        assert!(y.samples[i].abs() < 0.01, "{}", y.samples[i]);
        assert!(y.samples[i + 25] > 0.9);
    }

    #[test]
    fn lowpass_keeps_slow_motion() {
        let slow = mid_amplitude(&lowpass(&tone(0.5, 100.0, 20.0), 2.0).unwrap());
        assert!((slow - 1.0).abs() < 1e-3, "{slow}");
        let fast = mid_amplitude(&lowpass(&tone(8.0, 100.0, 20.0), 2.0).unwrap());
        assert!(fast < 1e-4, "{fast}");
        assert!(lowpass(&tone(0.5, 100.0, 20.0), 60.0).is_err());
    }

    #[test]
    fn band_must_fit_rate() {
        let t = tone(1.0, 3.0, 20.0);
        assert!(matches!(
            bandpass(&t, &Band::heart()),
            Err(VitalsError::BandInvalid(_))
        ));
    }
}
