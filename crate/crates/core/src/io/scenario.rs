//! Scenario files: TOML with one section per experiment.
//!
//! Every physical quantity carries its unit in the key name
//! (`distance_cm`, `amplitude_mm`, `step_um`, ...). A key that matches a
//! known one apart from its unit is reported as a unit violation rather
//! than as an unknown key, so `amplitude = 1.2` points at `amplitude_mm`.
//!
//! ```toml
//! seed = 42
//!
//! [radars]
//! profiles = ["BGT24", "BGT60", "BGT120"]
//!
//! [range]
//! distances_cm = [30, 40, 50, 60]
//! ```

use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::IoError;
use crate::bench::{
    noise_calibrate, BenchError, DisplacementConfig, RangeConfig, VitalsConfig, BASELINE_RANGE_M,
};
use crate::motion::{chest_motion, sinusoid_motion, ChestParams};
use crate::profiles::{make_profile, validate_profile, ProfileId, RadarProfile};
use crate::reference;
use crate::synth::{NoiseModel, PhantomKind, Scene, Target};
use crate::vitals::RateOptions;

const TOP_KEYS: &[&str] = &["seed"];

const SECTIONS: &[(&str, &[&str])] = &[
    ("radars", &["profiles"]),
    (
        "custom_radar",
        &[
            "f_start_ghz",
            "f_end_ghz",
            "sample_rate_mhz",
            "samples_per_chirp",
            "chirp_interval_ms",
        ],
    ),
    ("scene", &["phantom", "angle_deg", "distance_cm"]),
    (
        "noise",
        &[
            "if_sigma",
            "dc_offset",
            "baseline_mm",
            "baseline_from_hardware",
        ],
    ),
    (
        "range",
        &["distances_cm", "duration_s", "sub_intervals", "pad_bin_cm"],
    ),
    ("baseline", &["angles_deg"]),
    (
        "displacement",
        &[
            "amplitudes_mm",
            "freq_hz",
            "duration_s",
            "step_um",
            "smoothing_hz",
        ],
    ),
    (
        "vitals",
        &[
            "duration_s",
            "hr_bpm",
            "rr_brpm",
            "heart_amplitude_mm",
            "breath_amplitude_mm",
            "breath_harmonics",
            "heart_pulse_width_ms",
            "window_s",
            "step_s",
            "rate_zero_pad",
        ],
    ),
    (
        "simulate",
        &[
            "profile",
            "motion",
            "duration_s",
            "amplitude_mm",
            "freq_hz",
            "step_um",
        ],
    ),
];

const UNIT_SUFFIXES: &[&str] = &[
    "_ghz", "_mhz", "_hz", "_brpm", "_bpm", "_deg", "_mm", "_cm", "_um", "_ms", "_m", "_s",
];

fn unit_suffix(key: &str) -> Option<&'static str> {
    UNIT_SUFFIXES.iter().copied().find(|s| key.ends_with(s))
}

/// Key with its unit suffix and plural `s` removed.
fn stem(key: &str) -> &str {
    let bare = unit_suffix(key).map_or(key, |s| &key[..key.len() - s.len()]);
    bare.strip_suffix('s').unwrap_or(bare)
}

/// 1-based line of `key` inside `[section]` (or the top level), or of the
/// section header when `key` is `None`.
fn locate(src: &str, section: Option<&str>, key: Option<&str>) -> usize {
    let mut current: Option<String> = None;
    for (i, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[') {
            let name = name.split(']').next().unwrap_or("").trim().to_string();
            if key.is_none() && Some(name.as_str()) == section {
                return i + 1;
            }
            current = Some(name);
            continue;
        }
        if let Some(key) = key {
            if current.as_deref() == section {
                let lhs = line.split('=').next().unwrap_or("").trim();
                if line.contains('=') && lhs.trim_matches('"') == key {
                    return i + 1;
                }
            }
        }
    }
    0
}

fn line_of_offset(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

fn check_key(src: &str, section: Option<&str>, key: &str, known: &[&str]) -> Result<(), IoError> {
    if known.contains(&key) {
        return Ok(());
    }
    let line = locate(src, section, Some(key));
    let same_quantity = known
        .iter()
        .find(|k| unit_suffix(k).is_some() && stem(k) == stem(key));
    Err(match same_quantity {
        Some(expected) => IoError::UnitViolation {
            line,
            key: key.to_string(),
            expected: expected.to_string(),
        },
        None => IoError::UnknownKey {
            line,
            key: key.to_string(),
        },
    })
}

/// Rejects unknown sections and keys before any value is interpreted.
fn check_keys(src: &str, table: &toml::Table) -> Result<(), IoError> {
    for (name, value) in table {
        match (value, SECTIONS.iter().find(|(s, _)| s == name)) {
            (toml::Value::Table(body), Some((_, keys))) => {
                for key in body.keys() {
                    check_key(src, Some(name), key, keys)?;
                }
            }
            (_, Some(_)) => {
                return Err(IoError::ParseError {
                    line: locate(src, None, Some(name)),
                    message: format!("`{name}` must be a section"),
                })
            }
            (toml::Value::Table(_), None) => {
                return Err(IoError::UnknownKey {
                    line: locate(src, Some(name), None),
                    key: format!("[{name}]"),
                })
            }
            (_, None) => check_key(src, None, name, TOP_KEYS)?,
        }
    }
    Ok(())
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    seed: Option<u64>,
    radars: Option<RawRadars>,
    custom_radar: Option<RawCustomRadar>,
    scene: Option<RawScene>,
    noise: Option<RawNoise>,
    range: Option<RawRange>,
    baseline: Option<RawBaseline>,
    displacement: Option<RawDisplacement>,
    vitals: Option<RawVitals>,
    simulate: Option<RawSimulate>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRadars {
    profiles: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCustomRadar {
    f_start_ghz: f64,
    f_end_ghz: f64,
    sample_rate_mhz: Option<f64>,
    samples_per_chirp: Option<u32>,
    chirp_interval_ms: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScene {
    phantom: Option<PhantomKind>,
    angle_deg: Option<f64>,
    distance_cm: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    if_sigma: Option<f64>,
    dc_offset: Option<f64>,
    baseline_mm: Option<f64>,
    baseline_from_hardware: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRange {
    distances_cm: Option<Vec<f64>>,
    duration_s: Option<f64>,
    sub_intervals: Option<usize>,
    pad_bin_cm: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBaseline {
    angles_deg: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDisplacement {
    amplitudes_mm: Option<Vec<f64>>,
    freq_hz: Option<f64>,
    duration_s: Option<f64>,
    step_um: Option<f64>,
    smoothing_hz: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVitals {
    duration_s: Option<f64>,
    hr_bpm: Option<f64>,
    rr_brpm: Option<f64>,
    heart_amplitude_mm: Option<f64>,
    breath_amplitude_mm: Option<f64>,
    breath_harmonics: Option<Vec<(u32, f64)>>,
    heart_pulse_width_ms: Option<f64>,
    window_s: Option<f64>,
    step_s: Option<f64>,
    rate_zero_pad: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimulate {
    profile: Option<String>,
    motion: Option<MotionKind>,
    duration_s: Option<f64>,
    amplitude_mm: Option<f64>,
    freq_hz: Option<f64>,
    step_um: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MotionKind {
    #[default]
    Static,
    Sinusoid,
    Chest,
}

/// Where the IF noise level comes from.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum NoiseSection {
    #[default]
    Noiseless,
    Sigma {
        if_sigma: f64,
        dc_offset: f64,
    },
    /// Calibrate to this baseline standard deviation, in meters.
    Baseline {
        target_m: f64,
    },
    /// Calibrate to the hardware baseline of each radar at the scene angle.
    Hardware,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateSection {
    pub profile: RadarProfile,
    pub motion: MotionKind,
    pub duration_s: f64,
    pub amplitude_m: f64,
    pub freq_hz: f64,
    pub step_m: f64,
}

/// A fully validated scenario, in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub radars: Vec<RadarProfile>,
    pub phantom: PhantomKind,
    pub angle_deg: f64,
    pub distance_m: f64,
    pub noise: NoiseSection,
    pub range: RangeConfig,
    pub baseline_angles_deg: Vec<f64>,
    pub displacement: DisplacementConfig,
    pub vitals: VitalsConfig,
    pub simulate: SimulateSection,
}

impl ScenarioConfig {
    /// Noise for `profile` watching the configured phantom, seeded with the scenario seed.
    pub fn noise_for(&self, profile: &RadarProfile) -> Result<NoiseModel, BenchError> {
        self.noise_at(profile, self.angle_deg)
    }

    pub fn noise_at(
        &self,
        profile: &RadarProfile,
        angle_deg: f64,
    ) -> Result<NoiseModel, BenchError> {
        let calibrate = |target_m: f64| {
            let scene = Scene::single(Target::fixed(BASELINE_RANGE_M))
                .with_phantom(self.phantom, angle_deg);
            noise_calibrate(profile, &scene, target_m)
        };
        let model = match self.noise {
            NoiseSection::Noiseless => NoiseModel::noiseless(),
            NoiseSection::Sigma {
                if_sigma,
                dc_offset,
            } => NoiseModel {
                if_noise_sigma: if_sigma,
                dc_offset,
                seed: 0,
            },
            NoiseSection::Baseline { target_m } => calibrate(target_m)?,
            NoiseSection::Hardware => {
                let target = reference::baseline_noise_m(profile.id, self.phantom, angle_deg)
                    .ok_or_else(|| {
                        BenchError::InvalidConfig(format!(
                            "no hardware baseline for {} {} at {angle_deg}°",
                            profile.id,
                            self.phantom.name()
                        ))
                    })?;
                calibrate(target)?
            }
        };
        Ok(NoiseModel {
            seed: self.seed,
            ..model
        })
    }

    /// Scene and duration of the `[simulate]` section.
    pub fn simulate_scene(&self) -> Result<(Scene, f64), BenchError> {
        let s = &self.simulate;
        let rate = 1.0 / s.profile.chirp_interval_s;
        let target = match s.motion {
            MotionKind::Static => Target::fixed(self.distance_m),
            MotionKind::Sinusoid => Target::moving(
                self.distance_m,
                sinusoid_motion(s.amplitude_m, s.freq_hz, s.duration_s, rate, s.step_m)?,
            ),
            MotionKind::Chest => Target::moving(
                self.distance_m,
                chest_motion(&self.vitals.chest, s.duration_s, rate)?.0,
            ),
        };
        Ok((
            Scene::single(target).with_phantom(self.phantom, self.angle_deg),
            s.duration_s,
        ))
    }
}

pub fn load_scenario(path: &Path) -> Result<ScenarioConfig, IoError> {
    let src = fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    parse_scenario(&src)
}

pub fn parse_scenario(src: &str) -> Result<ScenarioConfig, IoError> {
    let syntax = |e: toml::de::Error| IoError::ParseError {
        line: e.span().map_or(0, |s| line_of_offset(src, s.start)),
        message: e.message().trim().to_string(),
    };
    let table: toml::Table = toml::from_str(src).map_err(syntax)?;
    if table.is_empty() {
        return Err(IoError::ParseError {
            line: 1,
            message: "scenario is empty".into(),
        });
    }
    check_keys(src, &table)?;
    let raw: RawScenario = toml::from_str(src).map_err(syntax)?;
    resolve(src, raw)
}

struct Checker<'a> {
    src: &'a str,
}

impl Checker<'_> {
    fn fail(&self, section: &str, key: &str, message: impl Into<String>) -> IoError {
        IoError::InvalidValue {
            line: locate(self.src, Some(section), Some(key)),
            key: key.to_string(),
            message: message.into(),
        }
    }

    fn positive(
        &self,
        section: &str,
        key: &str,
        v: Option<f64>,
        default: f64,
    ) -> Result<f64, IoError> {
        let v = v.unwrap_or(default);
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(self.fail(section, key, format!("{v} must be positive")))
        }
    }

    fn non_negative(
        &self,
        section: &str,
        key: &str,
        v: Option<f64>,
        default: f64,
    ) -> Result<f64, IoError> {
        let v = v.unwrap_or(default);
        if v >= 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(self.fail(section, key, format!("{v} must be non-negative")))
        }
    }

    fn profile(
        &self,
        section: &str,
        key: &str,
        name: &str,
        custom: Option<RadarProfile>,
    ) -> Result<RadarProfile, IoError> {
        if name.eq_ignore_ascii_case("custom") {
            return custom
                .ok_or_else(|| self.fail(section, key, "`custom` needs a [custom_radar] section"));
        }
        name.parse::<ProfileId>()
            .map(make_profile)
            .map_err(|e| self.fail(section, key, e.to_string()))
    }
}

fn resolve(src: &str, raw: RawScenario) -> Result<ScenarioConfig, IoError> {
    let c = Checker { src };

    let custom = match raw.custom_radar {
        None => None,
        Some(r) => {
            let base = make_profile(ProfileId::Custom);
            let profile = RadarProfile {
                id: ProfileId::Custom,
                f_start_hz: r.f_start_ghz * 1e9,
                f_end_hz: r.f_end_ghz * 1e9,
                sample_rate_hz: r.sample_rate_mhz.map_or(base.sample_rate_hz, |v| v * 1e6),
                samples_per_chirp: r
                    .samples_per_chirp
                    .map_or(base.samples_per_chirp, |v| v as usize),
                chirp_interval_s: r
                    .chirp_interval_ms
                    .map_or(base.chirp_interval_s, |v| v * 1e-3),
            };
            let violations = validate_profile(&profile);
            if let Some(v) = violations.first() {
                return Err(IoError::InvalidValue {
                    line: locate(src, Some("custom_radar"), None),
                    key: "[custom_radar]".into(),
                    message: v.to_string(),
                });
            }
            Some(profile)
        }
    };

    let mut radars = match &raw.radars {
        Some(r) => r
            .profiles
            .iter()
            .map(|name| c.profile("radars", "profiles", name, custom))
            .collect::<Result<Vec<_>, _>>()?,
        None => ProfileId::BUILT_IN.map(make_profile).to_vec(),
    };
    if let Some(p) = custom {
        if !radars.contains(&p) {
            radars.push(p);
        }
    }
    if radars.is_empty() {
        return Err(c.fail("radars", "profiles", "at least one radar is required"));
    }

    let scene = raw.scene.unwrap_or_default();
    let phantom = scene.phantom.unwrap_or_default();
    let angle_deg = scene.angle_deg.unwrap_or(0.0);
    if !(0.0..90.0).contains(&angle_deg) {
        return Err(c.fail("scene", "angle_deg", format!("{angle_deg} outside [0, 90)")));
    }
    let distance_m = c.positive("scene", "distance_cm", scene.distance_cm, 50.0)? * 1e-2;

    let n = raw.noise.unwrap_or_default();
    let chosen = [
        n.if_sigma.is_some(),
        n.baseline_mm.is_some(),
        n.baseline_from_hardware == Some(true),
    ];
    if chosen.iter().filter(|&&b| b).count() > 1 {
        return Err(IoError::InvalidValue {
            line: locate(src, Some("noise"), None),
            key: "[noise]".into(),
            message: "set only one of if_sigma, baseline_mm and baseline_from_hardware".into(),
        });
    }
    let dc_offset = n.dc_offset.unwrap_or(0.0);
    if !dc_offset.is_finite() {
        return Err(c.fail("noise", "dc_offset", "must be finite"));
    }
    let noise = if let Some(sigma) = n.if_sigma {
        NoiseSection::Sigma {
            if_sigma: c.non_negative("noise", "if_sigma", Some(sigma), 0.0)?,
            dc_offset,
        }
    } else if let Some(mm) = n.baseline_mm {
        NoiseSection::Baseline {
            target_m: c.positive("noise", "baseline_mm", Some(mm), 0.0)? * 1e-3,
        }
    } else if n.baseline_from_hardware == Some(true) {
        NoiseSection::Hardware
    } else if dc_offset != 0.0 {
        NoiseSection::Sigma {
            if_sigma: 0.0,
            dc_offset,
        }
    } else {
        NoiseSection::Noiseless
    };

    let r = raw.range.unwrap_or_default();
    let range_default = RangeConfig::default();
    let distances_m = match r.distances_cm {
        Some(d) if d.is_empty() || d.iter().any(|&v| !(v > 0.0)) => {
            return Err(c.fail(
                "range",
                "distances_cm",
                "need one or more positive distances",
            ))
        }
        Some(d) => d.iter().map(|v| v * 1e-2).collect(),
        None => range_default.distances_m.clone(),
    };
    let sub_intervals = r.sub_intervals.unwrap_or(range_default.sub_intervals);
    if sub_intervals == 0 {
        return Err(c.fail("range", "sub_intervals", "must be at least 1"));
    }
    let range = RangeConfig {
        distances_m,
        phantom,
        duration_s: c.positive(
            "range",
            "duration_s",
            r.duration_s,
            range_default.duration_s,
        )?,
        sub_intervals,
        pad_bin_m: c.positive(
            "range",
            "pad_bin_cm",
            r.pad_bin_cm,
            range_default.pad_bin_m * 1e2,
        )? * 1e-2,
    };

    let baseline_angles_deg = raw
        .baseline
        .and_then(|b| b.angles_deg)
        .unwrap_or_else(|| reference::ANGLES_DEG.to_vec());
    if baseline_angles_deg.is_empty()
        || baseline_angles_deg.iter().any(|a| !(0.0..90.0).contains(a))
    {
        return Err(c.fail(
            "baseline",
            "angles_deg",
            "need one or more angles in [0, 90)",
        ));
    }

    let d = raw.displacement.unwrap_or_default();
    let dd = DisplacementConfig::default();
    let amplitudes_m = match d.amplitudes_mm {
        Some(a) if a.is_empty() || a.iter().any(|&v| !(v >= 0.0)) => {
            return Err(c.fail(
                "displacement",
                "amplitudes_mm",
                "need one or more non-negative amplitudes",
            ))
        }
        Some(a) => a.iter().map(|v| v * 1e-3).collect(),
        None => dd.amplitudes_m.clone(),
    };
    let smoothing_hz = match d.smoothing_hz {
        Some(0.0) => None,
        Some(v) => Some(c.positive("displacement", "smoothing_hz", Some(v), 0.0)?),
        None => dd.smoothing_hz,
    };
    let displacement = DisplacementConfig {
        amplitudes_m,
        phantom,
        freq_hz: c.positive("displacement", "freq_hz", d.freq_hz, dd.freq_hz)?,
        duration_s: c.positive("displacement", "duration_s", d.duration_s, dd.duration_s)?,
        step_m: c.non_negative("displacement", "step_um", d.step_um, dd.step_m * 1e6)? * 1e-6,
        base_range_m: distance_m,
        smoothing_hz,
    };

    let v = raw.vitals.unwrap_or_default();
    let vd = VitalsConfig::default();
    let cd = ChestParams::default();
    let chest = ChestParams {
        hr_hz: c.positive("vitals", "hr_bpm", v.hr_bpm, cd.hr_hz * 60.0)? / 60.0,
        rr_hz: c.positive("vitals", "rr_brpm", v.rr_brpm, cd.rr_hz * 60.0)? / 60.0,
        heart_amplitude_m: c.non_negative(
            "vitals",
            "heart_amplitude_mm",
            v.heart_amplitude_mm,
            cd.heart_amplitude_m * 1e3,
        )? * 1e-3,
        breath_amplitude_m: c.non_negative(
            "vitals",
            "breath_amplitude_mm",
            v.breath_amplitude_mm,
            cd.breath_amplitude_m * 1e3,
        )? * 1e-3,
        breath_harmonics: v.breath_harmonics.unwrap_or_default(),
        heart_pulse_width_s: c.positive(
            "vitals",
            "heart_pulse_width_ms",
            v.heart_pulse_width_ms,
            cd.heart_pulse_width_s * 1e3,
        )? * 1e-3,
        ..cd
    };
    chest.validate().map_err(|e| IoError::InvalidValue {
        line: locate(src, Some("vitals"), None),
        key: "[vitals]".into(),
        message: e.to_string(),
    })?;
    let zero_pad = v.rate_zero_pad.unwrap_or(vd.rate.zero_pad);
    if zero_pad == 0 {
        return Err(c.fail("vitals", "rate_zero_pad", "must be at least 1"));
    }
    let vitals = VitalsConfig {
        chest,
        duration_s: c.positive("vitals", "duration_s", v.duration_s, vd.duration_s)?,
        base_range_m: distance_m,
        window_s: c.positive("vitals", "window_s", v.window_s, vd.window_s)?,
        step_s: c.positive("vitals", "step_s", v.step_s, vd.step_s)?,
        rate: RateOptions { zero_pad },
    };

    let s = raw.simulate.unwrap_or_default();
    let simulate = SimulateSection {
        profile: match &s.profile {
            Some(name) => c.profile("simulate", "profile", name, custom)?,
            None => radars[0],
        },
        motion: s.motion.unwrap_or_default(),
        duration_s: c.positive("simulate", "duration_s", s.duration_s, 10.0)?,
        amplitude_m: c.non_negative("simulate", "amplitude_mm", s.amplitude_mm, 1.0)? * 1e-3,
        freq_hz: c.positive("simulate", "freq_hz", s.freq_hz, reference::PHANTOM_FREQ_HZ)?,
        step_m: c.non_negative(
            "simulate",
            "step_um",
            s.step_um,
            reference::PHANTOM_STEP_M * 1e6,
        )? * 1e-6,
    };

    Ok(ScenarioConfig {
        seed: raw.seed.unwrap_or(0),
        radars,
        phantom,
        angle_deg,
        distance_m,
        noise,
        range,
        baseline_angles_deg,
        displacement,
        vitals,
        simulate,
    })
}

/// A `[custom_radar]` section describing `profile`.
pub fn profile_to_config(profile: &RadarProfile) -> String {
    format!(
        "# {}\n[custom_radar]\nf_start_ghz = {}\nf_end_ghz = {}\nsample_rate_mhz = {}\nsamples_per_chirp = {}\nchirp_interval_ms = {}\n",
        profile.id,
        profile.f_start_hz / 1e9,
        profile.f_end_hz / 1e9,
        profile.sample_rate_hz / 1e6,
        profile.samples_per_chirp,
        profile.chirp_interval_s * 1e3,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distances_and_radars() {
        let cfg = parse_scenario(
            "seed = 7\n[radars]\nprofiles = [\"BGT60\", \"bgt120\"]\n[range]\ndistances_cm = [30, 40.5]\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.radars.len(), 2);
        assert_eq!(cfg.radars[1].id, ProfileId::Bgt120);
        assert_eq!(cfg.range.distances_m, vec![0.30, 0.405]);
        assert_eq!(cfg.noise, NoiseSection::Noiseless);
    }

    #[test]
    fn missing_unit_is_a_unit_violation() {
        let err =
            parse_scenario("[simulate]\nmotion = \"sinusoid\"\namplitude = 1.2\n").unwrap_err();
        assert_eq!(
            err,
            IoError::UnitViolation {
                line: 3,
                key: "amplitude".into(),
                expected: "amplitude_mm".into()
            }
        );
        let err = parse_scenario("[range]\ndistances_m = [0.3]\n").unwrap_err();
        assert!(
            matches!(err, IoError::UnitViolation { line: 2, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn unknown_keys_and_sections() {
        assert_eq!(
            parse_scenario("seed = 1\n[scene]\ncolour = \"red\"\n").unwrap_err(),
            IoError::UnknownKey {
                line: 3,
                key: "colour".into()
            }
        );
        assert_eq!(
            parse_scenario("seed = 1\n\n[plots]\nx = 1\n").unwrap_err(),
            IoError::UnknownKey {
                line: 3,
                key: "[plots]".into()
            }
        );
    }

    #[test]
    fn empty_and_malformed_files() {
        assert!(matches!(
            parse_scenario(""),
            Err(IoError::ParseError { .. })
        ));
        assert!(matches!(
            parse_scenario("# nothing\n\n"),
            Err(IoError::ParseError { .. })
        ));
        let err = parse_scenario("seed = 1\n[range\n").unwrap_err();
        assert!(
            matches!(err, IoError::ParseError { line: 2, .. }),
            "{err:?}"
        );
        let err = parse_scenario("[range]\nduration_s = \"long\"\n").unwrap_err();
        assert!(
            matches!(err, IoError::ParseError { line: 2, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn invalid_values_point_at_their_line() {
        let err = parse_scenario("[scene]\nangle_deg = 0\ndistance_cm = -3\n").unwrap_err();
        assert!(
            matches!(err, IoError::InvalidValue { line: 3, .. }),
            "{err:?}"
        );
        let err = parse_scenario("[radars]\nprofiles = [\"BGT77\"]\n").unwrap_err();
        assert!(
            matches!(err, IoError::InvalidValue { line: 2, .. }),
            "{err:?}"
        );
        let err = parse_scenario("[noise]\nif_sigma = 1\nbaseline_mm = 0.01\n").unwrap_err();
        assert!(
            matches!(err, IoError::InvalidValue { line: 1, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn custom_radar_round_trips_through_show() {
        let p = RadarProfile {
            id: ProfileId::Custom,
            f_start_hz: 76.0e9,
            f_end_hz: 81.0e9,
            ..make_profile(ProfileId::Custom)
        };
        let src = format!(
            "{}\n[radars]\nprofiles = [\"custom\"]\n",
            profile_to_config(&p)
        );
        let cfg = parse_scenario(&src).unwrap();
        assert_eq!(cfg.radars, vec![p]);
        assert_eq!(cfg.simulate.profile, p);

        let shown = profile_to_config(&make_profile(ProfileId::Bgt120));
        assert!(shown.contains("f_start_ghz = 116\n"), "{shown}");
    }

    #[test]
    fn units_are_converted() {
        let cfg = parse_scenario(
            "[displacement]\namplitudes_mm = [0.08]\nstep_um = 0.4\nsmoothing_hz = 0\n[vitals]\nhr_bpm = 60\nheart_pulse_width_ms = 100\n[simulate]\nmotion = \"chest\"\nduration_s = 2\n",
        )
        .unwrap();
        assert_eq!(cfg.displacement.amplitudes_m, vec![0.08e-3]);
        assert!((cfg.displacement.step_m - 0.4e-6).abs() < 1e-18);
        assert_eq!(cfg.displacement.smoothing_hz, None);
        assert_eq!(cfg.vitals.chest.hr_hz, 1.0);
        assert!((cfg.vitals.chest.heart_pulse_width_s - 0.1).abs() < 1e-15);
        let (scene, duration) = cfg.simulate_scene().unwrap();
        assert_eq!(duration, 2.0);
        assert_eq!(scene.targets[0].base_range_m, 0.5);
    }

    #[test]
    fn explicit_sigma_takes_the_scenario_seed() {
        let cfg = parse_scenario("seed = 9\n[noise]\nif_sigma = 0.5\n").unwrap();
        let n = cfg.noise_for(&make_profile(ProfileId::Bgt60)).unwrap();
        assert_eq!(n, NoiseModel::white(0.5, 9));
    }
}
