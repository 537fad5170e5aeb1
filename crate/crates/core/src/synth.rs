//! IF signal synthesis: turns a scene into the raw chirps a radar would sample.
//!
//! Each reflector at instantaneous range `d` contributes a real cosine at
//! the beat frequency `2 S d / c`. Its phase is referenced to the centre of
//! the sampled sweep, where the instantaneous carrier equals the mid-band
//! frequency, so the range-FFT phase of the target advances by `4π Δd / λ`.

use std::f64::consts::{PI, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::motion::DisplacementTrace;
use crate::profiles::{ChirpDerived, InvalidProfile, RadarProfile, SPEED_OF_LIGHT};
use crate::reference;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("range {range_m} m outside (0, {max_m}) m")]
    OutOfRange { range_m: f64, max_m: f64 },
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("baseline {target_m} m is unreachable (pipeline floor {floor_m} m)")]
    Unreachable { target_m: f64, floor_m: f64 },
    #[error(transparent)]
    Profile(#[from] InvalidProfile),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PhantomKind {
    #[default]
    Metal,
    Gelatin,
}

impl PhantomKind {
    pub fn name(self) -> &'static str {
        match self {
            PhantomKind::Metal => "metal",
            PhantomKind::Gelatin => "gelatin",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TargetMotion {
    Static,
    Trace(DisplacementTrace),
}

impl TargetMotion {
    fn at(&self, t: f64) -> f64 {
        match self {
            TargetMotion::Static => 0.0,
            TargetMotion::Trace(trace) => trace.at(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Target {
    pub base_range_m: f64,
    pub motion: TargetMotion,
    /// Reflection amplitude in `(0, 1]`.
    pub reflect_amplitude: f64,
}

impl Target {
    pub fn fixed(base_range_m: f64) -> Self {
        Self {
            base_range_m,
            motion: TargetMotion::Static,
            reflect_amplitude: 1.0,
        }
    }

    pub fn moving(base_range_m: f64, trace: DisplacementTrace) -> Self {
        Self {
            base_range_m,
            motion: TargetMotion::Trace(trace),
            reflect_amplitude: 1.0,
        }
    }
}

/// A static reflector that is not the object of interest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Clutter {
    pub range_m: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub targets: Vec<Target>,
    pub clutter: Vec<Clutter>,
    pub phantom: PhantomKind,
    pub incidence_angle_deg: f64,
}

impl Scene {
    pub fn single(target: Target) -> Self {
        Self {
            targets: vec![target],
            clutter: Vec::new(),
            phantom: PhantomKind::Metal,
            incidence_angle_deg: 0.0,
        }
    }

    pub fn with_phantom(mut self, phantom: PhantomKind, incidence_angle_deg: f64) -> Self {
        self.phantom = phantom;
        self.incidence_angle_deg = incidence_angle_deg;
        self
    }

    pub fn with_clutter(mut self, clutter: Clutter) -> Self {
        self.clutter.push(clutter);
        self
    }

    pub fn validate(&self, derived: &ChirpDerived) -> Result<(), SynthError> {
        if self.targets.is_empty() {
            return Err(SynthError::InvalidScene(
                "at least one target is required".into(),
            ));
        }
        if !(0.0..90.0).contains(&self.incidence_angle_deg) {
            return Err(SynthError::InvalidScene(format!(
                "incidence angle {}° outside [0, 90)",
                self.incidence_angle_deg
            )));
        }
        for t in &self.targets {
            if !(t.reflect_amplitude > 0.0 && t.reflect_amplitude <= 1.0) {
                return Err(SynthError::InvalidScene(format!(
                    "reflect amplitude {} outside (0, 1]",
                    t.reflect_amplitude
                )));
            }
            check_range(t.base_range_m, derived)?;
        }
        for c in &self.clutter {
            check_range(c.range_m, derived)?;
        }
        Ok(())
    }
}

fn check_range(range_m: f64, derived: &ChirpDerived) -> Result<(), SynthError> {
    if range_m > 0.0 && range_m < derived.max_range_m {
        Ok(())
    } else {
        Err(SynthError::OutOfRange {
            range_m,
            max_m: derived.max_range_m,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Standard deviation of white Gaussian noise on every IF sample.
    pub if_noise_sigma: f64,
    /// Constant level added to every sample of every chirp.
    pub dc_offset: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self {
            if_noise_sigma: 0.0,
            dc_offset: 0.0,
            seed: 0,
        }
    }

    pub fn white(if_noise_sigma: f64, seed: u64) -> Self {
        Self {
            if_noise_sigma,
            dc_offset: 0.0,
            seed,
        }
    }
}

/// Raw IF samples, chirp-major: `frames[m * n + i]` is sample `i` of chirp `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChirpRecording {
    pub profile: RadarProfile,
    pub frames: Vec<f64>,
    pub chirps: usize,
    pub t0_s: f64,
    pub scene_digest: [u8; 32],
}

impl ChirpRecording {
    pub fn samples_per_chirp(&self) -> usize {
        self.profile.samples_per_chirp
    }

    pub fn chirp(&self, m: usize) -> &[f64] {
        let n = self.samples_per_chirp();
        &self.frames[m * n..(m + 1) * n]
    }

    pub fn chirp_time(&self, m: usize) -> f64 {
        self.t0_s + m as f64 * self.profile.chirp_interval_s
    }

    pub fn duration_s(&self) -> f64 {
        self.chirps as f64 * self.profile.chirp_interval_s
    }

    /// Chirps `[start, start + count)` as a recording of their own.
    pub fn sub_recording(&self, start: usize, count: usize) -> ChirpRecording {
        let n = self.samples_per_chirp();
        ChirpRecording {
            profile: self.profile,
            frames: self.frames[start * n..(start + count) * n].to_vec(),
            chirps: count,
            t0_s: self.chirp_time(start),
            scene_digest: self.scene_digest,
        }
    }

    pub fn digest_hex(&self) -> String {
        self.scene_digest
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn validate(&self) -> Result<(), String> {
        let n = self.samples_per_chirp();
        if self.chirps == 0 {
            return Err("recording holds no chirps".into());
        }
        if self.frames.len() != self.chirps * n {
            return Err(format!(
                "{} samples do not form {} chirps of {n}",
                self.frames.len(),
                self.chirps
            ));
        }
        if self.frames.iter().any(|v| !v.is_finite()) {
            return Err("non-finite IF sample".into());
        }
        Ok(())
    }
}

/// Beat frequency of a static reflector at `range_m`.
pub fn if_tone(profile: &RadarProfile, range_m: f64) -> Result<f64, SynthError> {
    let derived = profile.derived()?;
    if !(0.0..=derived.max_range_m).contains(&range_m) {
        return Err(SynthError::OutOfRange {
            range_m,
            max_m: derived.max_range_m,
        });
    }
    Ok(beat_frequency(&derived, range_m))
}

fn beat_frequency(derived: &ChirpDerived, range_m: f64) -> f64 {
    2.0 * derived.slope_hz_per_s * range_m / SPEED_OF_LIGHT
}

/// Amplitude gain of the phantom surface at an incidence angle.
///
/// Piecewise log-linear through the gains at 0°, 30° and 60° implied by
/// the measured baseline noise, extrapolated to 90° with the last slope.
/// Angles are clamped to `[0, 90)`.
pub fn angle_gain(phantom: PhantomKind, incidence_angle_deg: f64) -> f64 {
    let points = reference::reflection_gain_points(phantom);
    let angle = incidence_angle_deg.clamp(0.0, 90.0);
    let logs = points.map(f64::ln);
    let (seg, frac) = if angle <= 30.0 {
        (0, angle / 30.0)
    } else {
        (1, (angle - 30.0) / 30.0)
    };
    (logs[seg] + frac * (logs[seg + 1] - logs[seg])).exp()
}

/// Synthesizes `duration_s` worth of chirps, starting at slow time 0.
pub fn synthesize_recording(
    profile: &RadarProfile,
    scene: &Scene,
    noise: &NoiseModel,
    duration_s: f64,
) -> Result<ChirpRecording, SynthError> {
    let derived = profile.derived()?;
    scene.validate(&derived)?;
    if !(duration_s >= profile.chirp_interval_s) {
        return Err(SynthError::InvalidScene(format!(
            "duration {duration_s} s shorter than one chirp interval"
        )));
    }
    if !(noise.if_noise_sigma >= 0.0) {
        return Err(SynthError::InvalidScene(
            "noise sigma must be non-negative".into(),
        ));
    }

    let n = profile.samples_per_chirp;
    let chirps = (duration_s / profile.chirp_interval_s + 1e-9).floor() as usize;
    let gain = angle_gain(scene.phantom, scene.incidence_angle_deg);
    let t_ref = (n as f64 - 1.0) / (2.0 * profile.sample_rate_hz);
    let fast_times: Vec<f64> = (0..n)
        .map(|i| i as f64 / profile.sample_rate_hz - t_ref)
        .collect();

    let mut frames = vec![noise.dc_offset; chirps * n];
    let add_reflector = |frame: &mut [f64], range_m: f64, amplitude: f64| {
        let f_if = beat_frequency(&derived, range_m);
        let phase0 = 4.0 * PI * range_m / derived.wavelength_m;
        for (x, &t) in frame.iter_mut().zip(&fast_times) {
            *x += amplitude * (TAU * f_if * t + phase0).cos();
        }
    };

    for m in 0..chirps {
        let t_slow = m as f64 * profile.chirp_interval_s;
        let frame = &mut frames[m * n..(m + 1) * n];
        for target in &scene.targets {
            let range_m = target.base_range_m + target.motion.at(t_slow);
            check_range(range_m, &derived)?;
            add_reflector(frame, range_m, target.reflect_amplitude * gain);
        }
        for c in &scene.clutter {
            add_reflector(frame, c.range_m, c.amplitude);
        }
    }

    if noise.if_noise_sigma > 0.0 {
        let normal = Normal::new(0.0, noise.if_noise_sigma)
            .map_err(|e| SynthError::InvalidScene(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
        for x in frames.iter_mut() {
            *x += normal.sample(&mut rng);
        }
    }

    Ok(ChirpRecording {
        profile: *profile,
        frames,
        chirps,
        t0_s: 0.0,
        scene_digest: scene_digest(profile, scene, noise, duration_s),
    })
}

/// SHA-256 over every input that determines the synthesized samples.
pub fn scene_digest(
    profile: &RadarProfile,
    scene: &Scene,
    noise: &NoiseModel,
    duration_s: f64,
) -> [u8; 32] {
    let mut h = Sha256::new();
    let mut f = |v: f64| h.update(v.to_le_bytes());
    f(profile.f_start_hz);
    f(profile.f_end_hz);
    f(profile.sample_rate_hz);
    f(profile.samples_per_chirp as f64);
    f(profile.chirp_interval_s);
    f(duration_s);
    f(noise.if_noise_sigma);
    f(noise.dc_offset);
    f(noise.seed as f64);
    f(match scene.phantom {
        PhantomKind::Metal => 0.0,
        PhantomKind::Gelatin => 1.0,
    });
    f(scene.incidence_angle_deg);
    for t in &scene.targets {
        f(t.base_range_m);
        f(t.reflect_amplitude);
        match &t.motion {
            TargetMotion::Static => f(-1.0),
            TargetMotion::Trace(trace) => {
                f(trace.rate_hz);
                f(trace.samples.len() as f64);
                trace.samples.iter().for_each(|&x| f(x));
            }
        }
    }
    for c in &scene.clutter {
        f(c.range_m);
        f(c.amplitude);
    }
    h.finalize().into()
}
