use crate::motion::{BeatTimes, DisplacementTrace};

/// Detected beats within this distance of a true beat count as hits.
pub const BEAT_TOLERANCE_S: f64 = 0.150;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeatOptions {
    /// Threshold is `median + k * MAD` of the surrounding samples.
    pub k: f64,
    /// Span of the rolling median, centred on the candidate peak.
    pub window_s: f64,
    /// Minimum distance between two beats (one period at 120 bpm).
    pub min_spacing_s: f64,
}

impl Default for BeatOptions {
    fn default() -> Self {
        // The median absolute deviation of a sinusoid is 0.71 of its amplitude,
        // so k must stay below ~1.4 for band-passed beats to clear it at all.
        Self {
            k: 0.5,
            window_s: 5.0,
            min_spacing_s: 0.5,
        }
    }
}

pub fn detect_beats(trace: &DisplacementTrace) -> BeatTimes {
    detect_beats_with(trace, &BeatOptions::default())
}

/// Local maxima above an adaptive threshold, strongest first, keeping only
/// peaks at least `min_spacing_s` from an already accepted one.
pub fn detect_beats_with(trace: &DisplacementTrace, options: &BeatOptions) -> BeatTimes {
    let x = &trace.samples;
    let half = ((options.window_s * trace.rate_hz) / 2.0).round() as usize;
    let mut candidates: Vec<usize> = (1..x.len().saturating_sub(1))
        .filter(|&i| x[i] > x[i - 1] && x[i] >= x[i + 1])
        .filter(|&i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(x.len());
            let (median, mad) = median_mad(&x[lo..hi]);
            x[i] > median + options.k * mad
        })
        .collect();
    candidates.sort_by(|&a, &b| x[b].total_cmp(&x[a]).then(a.cmp(&b)));

    let spacing = options.min_spacing_s * trace.rate_hz;
    let mut accepted: Vec<usize> = Vec::new();
    for i in candidates {
        if accepted
            .iter()
            .all(|&j| (i as f64 - j as f64).abs() >= spacing)
        {
            accepted.push(i);
        }
    }
    accepted.sort_unstable();
    BeatTimes {
        times: accepted.into_iter().map(|i| trace.time_of(i)).collect(),
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn median_mad(window: &[f64]) -> (f64, f64) {
    let mut v = window.to_vec();
    let m = median(&mut v);
    let mut dev: Vec<f64> = window.iter().map(|x| (x - m).abs()).collect();
    (m, median(&mut dev))
}

/// Outcome of pairing detected beats with true beats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BeatMatch {
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
}

impl BeatMatch {
    pub fn sensitivity(&self) -> f64 {
        ratio(self.true_pos, self.true_pos + self.false_neg)
    }

    pub fn precision(&self) -> f64 {
        ratio(self.true_pos, self.true_pos + self.false_pos)
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

/// Greedy one-to-one matching: closest pairs within `tol_s` are taken first.
pub fn match_beats(detected: &BeatTimes, truth: &BeatTimes, tol_s: f64) -> BeatMatch {
    let mut pairs = Vec::new();
    for (i, &d) in detected.times.iter().enumerate() {
        // Both lists are sorted, so only truths near d need checking.
        let start = truth.times.partition_point(|&t| t < d - tol_s);
        for (j, &t) in truth.times.iter().enumerate().skip(start) {
            if t > d + tol_s {
                break;
            }
            pairs.push(((d - t).abs(), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut used_d = vec![false; detected.len()];
    let mut used_t = vec![false; truth.len()];
    let mut true_pos = 0;
    for (_, i, j) in pairs {
        if !used_d[i] && !used_t[j] {
            used_d[i] = true;
            used_t[j] = true;
            true_pos += 1;
        }
    }
    BeatMatch {
        true_pos,
        false_pos: detected.len() - true_pos,
        false_neg: truth.len() - true_pos,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motion::{chest_motion_components, ChestComponents, ChestParams};
    use crate::vitals::{bandpass, Band};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn beats(times: &[f64]) -> BeatTimes {
        BeatTimes {
            times: times.to_vec(),
        }
    }

    fn pulse_train(seconds: f64) -> (DisplacementTrace, BeatTimes) {
        let p = ChestParams {
            hr_hz: 1.0,
            heart_phase_rad: 1.0,
            ..ChestParams::default()
        };
        chest_motion_components(&p, seconds, 100.0, ChestComponents::HeartOnly).unwrap()
    }

    #[test]
    fn matching_examples() {
        let truth = beats(&[1.0, 2.0, 3.0, 4.0]);
        let m = match_beats(&truth, &truth, BEAT_TOLERANCE_S);
        assert_eq!(
            m,
            BeatMatch {
                true_pos: 4,
                false_pos: 0,
                false_neg: 0
            }
        );

        let shifted = beats(&[1.1, 2.1, 3.1, 4.1]);
        assert_eq!(match_beats(&shifted, &truth, BEAT_TOLERANCE_S).true_pos, 4);

        let late = beats(&[1.2, 2.2, 3.2, 4.2]);
        let m = match_beats(&late, &truth, BEAT_TOLERANCE_S);
        assert_eq!(
            m,
            BeatMatch {
                true_pos: 0,
                false_pos: 4,
                false_neg: 4
            }
        );
    }

    #[test]
    fn matching_is_one_to_one() {
        let truth = beats(&[1.0]);
        let m = match_beats(&beats(&[0.95, 1.02]), &truth, BEAT_TOLERANCE_S);
        assert_eq!(
            m,
            BeatMatch {
                true_pos: 1,
                false_pos: 1,
                false_neg: 0
            }
        );
        assert_eq!(m.sensitivity(), 1.0);
        assert_eq!(m.precision(), 0.5);
    }

    #[test]
    fn clean_pulse_train() {
        let (trace, truth) = pulse_train(20.0);
        for input in [trace.clone(), bandpass(&trace, &Band::heart()).unwrap()] {
            let found = detect_beats(&input);
            assert!((19..=21).contains(&found.len()), "{}", found.len());
            assert!(found.is_strictly_increasing());
            let m = match_beats(&found, &truth, BEAT_TOLERANCE_S);
            assert!(m.sensitivity() >= 0.95, "{m:?}");
        }
    }

    #[test]
    fn zero_trace_has_no_beats() {
        assert!(detect_beats(&DisplacementTrace::new(100.0, vec![0.0; 2000])).is_empty());
    }

    #[test]
    fn noisy_pulse_train() {
        // In-band noise at 10 dB below the filtered pulse power, fixed seed.
        let (trace, truth) = pulse_train(60.0);
        let clean = bandpass(&trace, &Band::heart()).unwrap();
        let power = clean.samples.iter().map(|x| x * x).sum::<f64>() / clean.len() as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let white = Normal::new(0.0, 1.0).unwrap();
        let raw_noise = DisplacementTrace::new(
            100.0,
            (0..trace.len()).map(|_| white.sample(&mut rng)).collect(),
        );
        let noise = bandpass(&raw_noise, &Band::heart()).unwrap();
        let noise_power = noise.samples.iter().map(|x| x * x).sum::<f64>() / noise.len() as f64;
        let scale = (power / noise_power / 10.0).sqrt();
        let noisy = DisplacementTrace::new(
            100.0,
            clean
                .samples
                .iter()
                .zip(&noise.samples)
                .map(|(c, n)| c + scale * n)
                .collect(),
        );
        let m = match_beats(&detect_beats(&noisy), &truth, BEAT_TOLERANCE_S);
        assert!(m.sensitivity() >= 0.9, "{m:?}");
    }
}
