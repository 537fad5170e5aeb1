use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::PipelineError;
use crate::profiles::RadarProfile;
use crate::synth::ChirpRecording;

/// How far to zero-pad the range FFT.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PadPolicy {
    None,
    /// Smallest power-of-two length whose bin is no wider than this.
    TargetBin {
        bin_m: f64,
    },
}

/// Taper applied to each chirp before the range FFT.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RangeWindow {
    Rectangular,
    /// Symmetric Hann taper. Keeps the bin phase linear in range while
    /// pushing the leakage of the real signal's mirror image far down.
    #[default]
    Hann,
}

impl RangeWindow {
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            RangeWindow::Rectangular => vec![1.0; n],
            RangeWindow::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / (n - 1) as f64).cos())
                .collect(),
        }
    }
}

/// Positive-frequency half of the per-chirp range spectra.
///
/// Row `m` holds bins `0..=n_fft/2` of chirp `m`; the remaining bins are the
/// complex conjugates of these because the IF signal is real.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeSpectrumSeries {
    pub spectra: Vec<Complex64>,
    pub chirps: usize,
    pub n_fft: usize,
    pub bin_size_m: f64,
    pub profile: RadarProfile,
    pub t0_s: f64,
}

impl RangeSpectrumSeries {
    /// Number of stored bins per chirp (`n_fft / 2 + 1`).
    pub fn bins(&self) -> usize {
        self.n_fft / 2 + 1
    }

    pub fn chirp(&self, m: usize) -> &[Complex64] {
        let b = self.bins();
        &self.spectra[m * b..(m + 1) * b]
    }

    pub fn bin_series(&self, bin: usize) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.chirps).map(move |m| self.spectra[m * self.bins() + bin])
    }

    pub fn slow_time_rate_hz(&self) -> f64 {
        1.0 / self.profile.chirp_interval_s
    }

    /// Sum of `|X_k|^2` over all `n_fft` bins, reconstructing the mirrored half.
    pub fn chirp_energy(&self, m: usize) -> f64 {
        let row = self.chirp(m);
        let last = row.len() - 1;
        row.iter()
            .enumerate()
            .map(|(k, z)| {
                let w = if k == 0 || k == last { 1.0 } else { 2.0 };
                w * z.norm_sqr()
            })
            .sum()
    }

    /// Lowest bin outside the DC main lobe: anything below one unpadded
    /// range bin cannot hold a physical target.
    pub fn first_target_bin(&self) -> usize {
        (self.n_fft / self.profile.samples_per_chirp).max(1)
    }
}

pub fn fft_len(samples_per_chirp: usize, range_bin_m: f64, pad: PadPolicy) -> usize {
    match pad {
        PadPolicy::None => samples_per_chirp,
        PadPolicy::TargetBin { bin_m } => {
            let mut len = samples_per_chirp.next_power_of_two();
            while range_bin_m * samples_per_chirp as f64 / len as f64 > bin_m * (1.0 + 1e-12) {
                len *= 2;
            }
            len
        }
    }
}

/// Windowless FFT of every chirp, zero-padded per `pad`.
pub fn range_fft(
    recording: &ChirpRecording,
    pad: PadPolicy,
) -> Result<RangeSpectrumSeries, PipelineError> {
    range_fft_windowed(recording, pad, RangeWindow::Rectangular)
}

/// FFT of every chirp after applying `window`, zero-padded per `pad`.
pub fn range_fft_windowed(
    recording: &ChirpRecording,
    pad: PadPolicy,
    window: RangeWindow,
) -> Result<RangeSpectrumSeries, PipelineError> {
    recording
        .validate()
        .map_err(PipelineError::InvalidRecording)?;
    let derived = recording.profile.derived()?;
    let n = recording.samples_per_chirp();
    if let PadPolicy::TargetBin { bin_m } = pad {
        if !(bin_m > 0.0) {
            return Err(PipelineError::InvalidOptions(format!(
                "padding target {bin_m} m must be positive"
            )));
        }
    }
    let n_fft = fft_len(n, derived.range_bin_m, pad);
    let bins = n_fft / 2 + 1;
    let fft = FftPlanner::new().plan_fft_forward(n_fft);
    let taper = window.coefficients(n);

    let mut spectra = vec![Complex64::default(); recording.chirps * bins];
    spectra.par_chunks_mut(bins).enumerate().for_each_init(
        || {
            (
                vec![Complex64::default(); n_fft],
                vec![Complex64::default(); fft.get_inplace_scratch_len()],
            )
        },
        |(buf, scratch), (m, out)| {
            buf.fill(Complex64::default());
            for ((z, &x), &w) in buf.iter_mut().zip(recording.chirp(m)).zip(&taper) {
                z.re = x * w;
            }
            fft.process_with_scratch(buf, scratch);
            out.copy_from_slice(&buf[..bins]);
        },
    );

    Ok(RangeSpectrumSeries {
        spectra,
        chirps: recording.chirps,
        n_fft,
        bin_size_m: derived.range_bin_m * n as f64 / n_fft as f64,
        profile: recording.profile,
        t0_s: recording.t0_s,
    })
}

/// Subtracts each bin's complex mean over slow time, removing static returns.
pub fn dc_offset_removal(
    series: &RangeSpectrumSeries,
) -> Result<RangeSpectrumSeries, PipelineError> {
    if series.chirps < 2 {
        return Err(PipelineError::TooFewChirps(series.chirps));
    }
    let bins = series.bins();
    let mut mean = vec![Complex64::default(); bins];
    for row in series.spectra.chunks(bins) {
        for (acc, z) in mean.iter_mut().zip(row) {
            *acc += z;
        }
    }
    let scale = 1.0 / series.chirps as f64;
    mean.iter_mut().for_each(|z| *z *= scale);

    let mut out = series.clone();
    for row in out.spectra.chunks_mut(bins) {
        for (z, mu) in row.iter_mut().zip(&mean) {
            *z -= mu;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinPolicy {
    /// One bin for the whole series: argmax of the mean magnitude.
    PerWindow,
    /// Independent argmax in every chirp.
    PerChirp,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BinSelection {
    Window(usize),
    PerChirp(Vec<usize>),
}

impl BinSelection {
    /// The single bin, or the most frequent per-chirp bin (lowest on ties).
    pub fn dominant(&self) -> usize {
        match self {
            BinSelection::Window(b) => *b,
            BinSelection::PerChirp(bins) => {
                let mut sorted = bins.clone();
                sorted.sort_unstable();
                let mut best = (0usize, sorted.first().copied().unwrap_or(0));
                let mut i = 0;
                while i < sorted.len() {
                    let j = i + sorted[i..].iter().take_while(|&&b| b == sorted[i]).count();
                    if j - i > best.0 {
                        best = (j - i, sorted[i]);
                    }
                    i = j;
                }
                best.1
            }
        }
    }
}

/// First index of the maximum; ties resolve to the lowest index.
fn argmax(values: impl Iterator<Item = f64>) -> Option<(usize, f64)> {
    values.enumerate().fold(None, |best, (i, v)| match best {
        Some((_, bv)) if v <= bv => best,
        _ => Some((i, v)),
    })
}

/// Picks the strongest reflector, skipping the DC main lobe and the Nyquist bin.
pub fn select_target_bin(
    series: &RangeSpectrumSeries,
    policy: BinPolicy,
) -> Result<BinSelection, PipelineError> {
    if series.chirps == 0 {
        return Err(PipelineError::EmptySeries);
    }
    let lo = series.first_target_bin();
    let hi = series.n_fft / 2;
    if lo >= hi {
        return Err(PipelineError::EmptySeries);
    }
    match policy {
        BinPolicy::PerWindow => {
            let bins = series.bins();
            let mut mean_mag = vec![0.0; bins];
            for row in series.spectra.chunks(bins) {
                for (acc, z) in mean_mag.iter_mut().zip(row) {
                    *acc += z.norm();
                }
            }
            let (i, _) =
                argmax(mean_mag[lo..hi].iter().copied()).ok_or(PipelineError::EmptySeries)?;
            Ok(BinSelection::Window(lo + i))
        }
        BinPolicy::PerChirp => {
            let picks = (0..series.chirps)
                .map(|m| {
                    let row = series.chirp(m);
                    argmax(row[lo..hi].iter().map(|z| z.norm_sqr())).map(|(i, _)| lo + i)
                })
                .collect::<Option<Vec<_>>>()
                .ok_or(PipelineError::EmptySeries)?;
            Ok(BinSelection::PerChirp(picks))
        }
    }
}

/// Per-chirp peak bins on the padded grid, without forming padded spectra.
///
/// Each chirp's peak is first located on the unpadded spectrum; the padded
/// spectrum (the same DTFT samples [`range_fft_windowed`] would produce) is
/// then evaluated by direct DFT only within one coarse bin of it. Agrees with
/// `select_target_bin(PerChirp)` on the padded spectra whenever the padded
/// maximum lies within a coarse bin of the coarse one, as it does for a single
/// dominant reflector. Returns the picks and the padded FFT length.
pub fn padded_peak_bins(
    recording: &ChirpRecording,
    pad: PadPolicy,
    window: RangeWindow,
) -> Result<(Vec<usize>, usize), PipelineError> {
    let coarse = range_fft_windowed(recording, PadPolicy::None, window)?;
    let BinSelection::PerChirp(coarse_bins) = select_target_bin(&coarse, BinPolicy::PerChirp)?
    else {
        unreachable!("per-chirp policy yields per-chirp picks")
    };
    let n = recording.samples_per_chirp();
    let derived = recording.profile.derived()?;
    let n_fft = fft_len(n, derived.range_bin_m, pad);
    let zoom = n_fft / coarse.n_fft;
    if zoom == 1 {
        return Ok((coarse_bins, n_fft));
    }
    let (lo, hi) = (n_fft / n, n_fft / 2);
    let taper = window.coefficients(n);

    // Kernels depend only on the coarse bin, which rarely changes between chirps.
    let mut kernels: Vec<Option<(usize, Vec<Complex64>)>> = vec![None; coarse.bins()];
    let mut picks = Vec::with_capacity(recording.chirps);
    for (m, &c) in coarse_bins.iter().enumerate() {
        let first = (zoom * c).saturating_sub(zoom).max(lo);
        let last = (zoom * (c + 1)).min(hi - 1);
        let (start, kernel) = kernels[c].get_or_insert_with(|| {
            let kernel = (first..=last)
                .flat_map(|k| {
                    let taper = &taper;
                    (0..n).map(move |i| {
                        let angle =
                            -std::f64::consts::TAU * ((k * i) % n_fft) as f64 / n_fft as f64;
                        Complex64::from_polar(taper[i], angle)
                    })
                })
                .collect();
            (first, kernel)
        });
        let chirp = recording.chirp(m);
        let powers = kernel.chunks(n).map(|row| {
            row.iter()
                .zip(chirp)
                .fold(Complex64::default(), |acc, (w, &x)| acc + w * x)
                .norm_sqr()
        });
        let (i, _) = argmax(powers).ok_or(PipelineError::EmptySeries)?;
        picks.push(*start + i);
    }
    Ok((picks, n_fft))
}

pub fn bin_to_range(bin: usize, series: &RangeSpectrumSeries) -> Result<f64, PipelineError> {
    if bin >= series.n_fft / 2 {
        return Err(PipelineError::BinOutOfRange {
            bin,
            n_fft: series.n_fft,
        });
    }
    Ok(bin as f64 * series.bin_size_m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motion::sinusoid_motion;
    use crate::profiles::{make_profile, ProfileId};
    use crate::synth::{synthesize_recording, Clutter, NoiseModel, Scene, Target};

    fn series_from_rows(
        profile: RadarProfile,
        n_fft: usize,
        rows: Vec<Vec<Complex64>>,
    ) -> RangeSpectrumSeries {
        let chirps = rows.len();
        RangeSpectrumSeries {
            spectra: rows.into_iter().flatten().collect(),
            chirps,
            n_fft,
            bin_size_m: profile.derived().unwrap().range_bin_m * profile.samples_per_chirp as f64
                / n_fft as f64,
            profile,
            t0_s: 0.0,
        }
    }

    #[test]
    fn padding_lengths() {
        let p24 = make_profile(ProfileId::Bgt24);
        let r = p24.derived().unwrap().range_bin_m;
        let n = fft_len(128, r, PadPolicy::TargetBin { bin_m: 0.00157 });
        assert_eq!(n, 8192);
        assert!((r * 128.0 / n as f64 - 0.001171875).abs() < 1e-15);
        let p60 = make_profile(ProfileId::Bgt60);
        assert_eq!(
            fft_len(128, p60.derived().unwrap().range_bin_m, PadPolicy::None),
            128
        );
        for id in ProfileId::BUILT_IN {
            let r = make_profile(id).derived().unwrap().range_bin_m;
            let n = fft_len(128, r, PadPolicy::TargetBin { bin_m: 0.00157 });
            assert!(r * 128.0 / n as f64 <= 0.00157);
            assert!(r * 128.0 / (n / 2) as f64 > 0.00157);
        }
    }

    #[test]
    fn unpadded_bgt60_bin_is_3_cm() {
        let p = make_profile(ProfileId::Bgt60);
        let rec = synthesize_recording(
            &p,
            &Scene::single(Target::fixed(0.5)),
            &NoiseModel::noiseless(),
            0.02,
        )
        .unwrap();
        let s = range_fft(&rec, PadPolicy::None).unwrap();
        assert_eq!(s.n_fft, 128);
        assert!((s.bin_size_m - 0.03).abs() < 1e-15);
    }

    #[test]
    fn zero_frames_give_zero_spectra() {
        let p = make_profile(ProfileId::Bgt120);
        let rec = ChirpRecording {
            profile: p,
            frames: vec![0.0; 128 * 3],
            chirps: 3,
            t0_s: 0.0,
            scene_digest: [0; 32],
        };
        let s = range_fft(&rec, PadPolicy::TargetBin { bin_m: 0.00157 }).unwrap();
        assert!(s.spectra.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn bin_aligned_tone_peaks_at_its_bin() {
        for id in ProfileId::BUILT_IN {
            let p = make_profile(id);
            let r = p.derived().unwrap().range_bin_m;
            let rec = synthesize_recording(
                &p,
                &Scene::single(Target::fixed(10.0 * r)),
                &NoiseModel::noiseless(),
                0.02,
            )
            .unwrap();
            let s = range_fft(&rec, PadPolicy::None).unwrap();
            assert_eq!(
                select_target_bin(&s, BinPolicy::PerWindow).unwrap(),
                BinSelection::Window(10)
            );
            // Energy at the tone bin is n/2 in amplitude; elsewhere only the image leaks, and
            // for an aligned tone that leakage vanishes at every integer bin.
            let row = s.chirp(0);
            assert!((row[10].norm() - 64.0).abs() < 1e-9);
            assert!(row
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != 10)
                .all(|(_, z)| z.norm() < 1e-9));
        }
    }

    #[test]
    fn selection_rules() {
        let p = make_profile(ProfileId::Bgt120);
        let mut row = vec![Complex64::default(); 65];
        row[33] = Complex64::new(5.0, 0.0);
        let s = series_from_rows(p, 128, vec![row.clone(), row.clone()]);
        assert_eq!(
            select_target_bin(&s, BinPolicy::PerWindow).unwrap(),
            BinSelection::Window(33)
        );
        assert_eq!(
            select_target_bin(&s, BinPolicy::PerChirp).unwrap(),
            BinSelection::PerChirp(vec![33, 33])
        );

        let mut tie = vec![Complex64::default(); 65];
        tie[20] = Complex64::new(0.0, 2.0);
        tie[40] = Complex64::new(2.0, 0.0);
        let s = series_from_rows(p, 128, vec![tie]);
        assert_eq!(
            select_target_bin(&s, BinPolicy::PerWindow).unwrap(),
            BinSelection::Window(20)
        );

        // The DC lobe is ignored even when it dominates.
        let mut dc = vec![Complex64::default(); 65];
        dc[0] = Complex64::new(100.0, 0.0);
        dc[9] = Complex64::new(1.0, 0.0);
        let s = series_from_rows(p, 128, vec![dc]);
        assert_eq!(
            select_target_bin(&s, BinPolicy::PerWindow).unwrap(),
            BinSelection::Window(9)
        );
    }

    #[test]
    fn stronger_target_wins() {
        let p = make_profile(ProfileId::Bgt120);
        let scene = Scene {
            targets: vec![
                Target::fixed(0.30),
                Target {
                    reflect_amplitude: 0.3,
                    ..Target::fixed(0.60)
                },
            ],
            ..Scene::single(Target::fixed(0.3))
        };
        let rec = synthesize_recording(&p, &scene, &NoiseModel::noiseless(), 0.05).unwrap();
        let s = range_fft(&rec, PadPolicy::None).unwrap();
        assert_eq!(
            select_target_bin(&s, BinPolicy::PerWindow).unwrap(),
            BinSelection::Window(20)
        );
    }

    #[test]
    fn bin_to_range_examples() {
        let p60 = make_profile(ProfileId::Bgt60);
        let s = series_from_rows(p60, 4096, vec![vec![Complex64::default(); 2049]]);
        assert_eq!(bin_to_range(0, &s).unwrap(), 0.0);
        assert!((bin_to_range(683, &s).unwrap() - 0.6403125).abs() < 1e-12);
        assert!(matches!(
            bin_to_range(2048, &s),
            Err(PipelineError::BinOutOfRange { .. })
        ));

        let p120 = make_profile(ProfileId::Bgt120);
        let s = series_from_rows(p120, 128, vec![vec![Complex64::default(); 65]]);
        assert!((bin_to_range(33, &s).unwrap() - 0.495).abs() < 1e-12);
    }

    #[test]
    fn dc_removal_on_static_scene() {
        let p = make_profile(ProfileId::Bgt60);
        let rec = synthesize_recording(
            &p,
            &Scene::single(Target::fixed(0.47)),
            &NoiseModel::noiseless(),
            0.5,
        )
        .unwrap();
        let s = range_fft(&rec, PadPolicy::None).unwrap();
        let peak = s.spectra.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let r = dc_offset_removal(&s).unwrap();
        assert!(r.spectra.iter().all(|z| z.norm() <= 1e-9 * peak));
    }

    #[test]
    fn dc_removal_is_idempotent_and_needs_two_chirps() {
        let p = make_profile(ProfileId::Bgt120);
        let trace = sinusoid_motion(0.3e-3, 0.5, 3.0, 100.0, 0.0).unwrap();
        let rec = synthesize_recording(
            &p,
            &Scene::single(Target::moving(0.5, trace)),
            &NoiseModel::white(0.1, 3),
            3.0,
        )
        .unwrap();
        let s = range_fft(&rec, PadPolicy::None).unwrap();
        let once = dc_offset_removal(&s).unwrap();
        let twice = dc_offset_removal(&once).unwrap();
        for (a, b) in once.spectra.iter().zip(&twice.spectra) {
            assert!((a - b).norm() <= 1e-12);
        }
        let single = rec.sub_recording(0, 1);
        let s1 = range_fft(&single, PadPolicy::None).unwrap();
        assert_eq!(dc_offset_removal(&s1), Err(PipelineError::TooFewChirps(1)));
    }

    #[test]
    fn dc_removal_suppresses_clutter_keeps_motion() {
        let p = make_profile(ProfileId::Bgt120);
        // 1.2 mm motion at 0.5 Hz, 4 s: two full periods.
        let trace = sinusoid_motion(1.2e-3, 0.5, 4.0, 100.0, 0.0).unwrap();
        let target = Target::moving(0.495, trace);
        let clutter = Clutter {
            range_m: 0.300,
            amplitude: 1.0,
        };
        let noise = NoiseModel::noiseless();
        let both = synthesize_recording(
            &p,
            &Scene::single(target.clone()).with_clutter(clutter),
            &noise,
            4.0,
        )
        .unwrap();
        let alone = synthesize_recording(&p, &Scene::single(target), &noise, 4.0).unwrap();

        let s = range_fft(&both, PadPolicy::None).unwrap();
        let r = dc_offset_removal(&s).unwrap();
        let clutter_bin = 20;
        let before: f64 = s.bin_series(clutter_bin).map(|z| z.norm_sqr()).sum();
        let after: f64 = r.bin_series(clutter_bin).map(|z| z.norm_sqr()).sum();
        assert!(
            10.0 * (before / after).log10() >= 40.0,
            "{} dB",
            10.0 * (before / after).log10()
        );

        // The oscillating part of the target bin (its value minus its own mean) is untouched.
        let target_bin = 33;
        let reference = dc_offset_removal(&range_fft(&alone, PadPolicy::None).unwrap()).unwrap();
        let err: f64 = r
            .bin_series(target_bin)
            .zip(reference.bin_series(target_bin))
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let energy: f64 = reference.bin_series(target_bin).map(|z| z.norm_sqr()).sum();
        assert!((err / energy).sqrt() <= 0.01, "{}", (err / energy).sqrt());
    }

    #[test]
    fn zoomed_peaks_match_full_padded_spectrum() {
        for id in ProfileId::BUILT_IN {
            let p = make_profile(id);
            for (d, sigma) in [(0.3, 0.0), (0.413, 0.0), (0.55, 0.05)] {
                let scene = Scene::single(Target::fixed(d));
                let rec =
                    synthesize_recording(&p, &scene, &NoiseModel::white(sigma, 4), 0.3).unwrap();
                let pad = PadPolicy::TargetBin { bin_m: 0.157e-2 };
                let full = range_fft_windowed(&rec, pad, RangeWindow::Hann).unwrap();
                let BinSelection::PerChirp(expected) =
                    select_target_bin(&full, BinPolicy::PerChirp).unwrap()
                else {
                    unreachable!()
                };
                let (picks, n_fft) = padded_peak_bins(&rec, pad, RangeWindow::Hann).unwrap();
                assert_eq!(n_fft, full.n_fft);
                assert_eq!(picks, expected, "{id} at {d} m");
            }
        }
    }
}
