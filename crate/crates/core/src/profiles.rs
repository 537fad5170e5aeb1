//! Radar configurations and the chirp constants derived from them.
//!
//! All three built-in radars share the same acquisition settings: a 2 MHz
//! IF sampling rate, 128 samples per chirp and one chirp every 10 ms. They
//! differ only in the swept band, which sets the range-bin size `c / 2B`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Propagation speed used throughout the toolkit, in m/s.
///
/// The rounded value makes the built-in range bins come out at exactly
/// 7.5, 3 and 1.5 cm.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

const COMMON_SAMPLE_RATE_HZ: f64 = 2.0e6;
const COMMON_SAMPLES_PER_CHIRP: usize = 128;
const COMMON_CHIRP_INTERVAL_S: f64 = 10.0e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProfileId {
    #[serde(rename = "BGT24")]
    Bgt24,
    #[serde(rename = "BGT60")]
    Bgt60,
    #[serde(rename = "BGT120")]
    Bgt120,
    Custom,
}

impl ProfileId {
    pub const BUILT_IN: [ProfileId; 3] = [ProfileId::Bgt24, ProfileId::Bgt60, ProfileId::Bgt120];

    pub fn name(self) -> &'static str {
        match self {
            ProfileId::Bgt24 => "BGT24",
            ProfileId::Bgt60 => "BGT60",
            ProfileId::Bgt120 => "BGT120",
            ProfileId::Custom => "Custom",
        }
    }
}

impl fmt::Display for ProfileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown radar profile `{0}` (expected BGT24, BGT60 or BGT120)")]
pub struct UnknownProfile(pub String);

impl FromStr for ProfileId {
    type Err = UnknownProfile;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "BGT24" => Ok(ProfileId::Bgt24),
            "BGT60" => Ok(ProfileId::Bgt60),
            "BGT120" => Ok(ProfileId::Bgt120),
            _ => Err(UnknownProfile(s.to_string())),
        }
    }
}

/// Static configuration of one single-channel FMCW radar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarProfile {
    pub id: ProfileId,
    pub f_start_hz: f64,
    pub f_end_hz: f64,
    pub sample_rate_hz: f64,
    pub samples_per_chirp: usize,
    pub chirp_interval_s: f64,
}

/// Constants every later stage needs, computed once from a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChirpDerived {
    pub bandwidth_hz: f64,
    pub chirp_duration_s: f64,
    /// Frequency slope `S = B / Tc`, in Hz/s.
    pub slope_hz_per_s: f64,
    /// Range-bin size `R = c / 2B`, in meters.
    pub range_bin_m: f64,
    /// `n * R`: the nominal maximum range.
    pub max_range_m: f64,
    /// `n * R / 2`: the unambiguous range of a real-sampled IF signal.
    pub usable_range_m: f64,
    /// Wavelength at the centre of the swept band.
    pub wavelength_m: f64,
    pub slow_time_rate_hz: f64,
}

/// One failed profile invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileViolation {
    NonPositiveStartFrequency,
    ZeroBandwidth,
    NegativeBandwidth,
    NonPositiveSampleRate,
    TooFewSamples,
    ChirpLongerThanInterval,
    NonFinite,
}

impl fmt::Display for ProfileViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            ProfileViolation::NonPositiveStartFrequency => "start frequency not positive",
            ProfileViolation::ZeroBandwidth => "zero bandwidth",
            ProfileViolation::NegativeBandwidth => "end frequency below start frequency",
            ProfileViolation::NonPositiveSampleRate => "sample rate not positive",
            ProfileViolation::TooFewSamples => "fewer than 2 samples per chirp",
            ProfileViolation::ChirpLongerThanInterval => "chirp longer than interval",
            ProfileViolation::NonFinite => "non-finite parameter",
        };
        f.write_str(msg)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid radar profile: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))]
pub struct InvalidProfile(pub Vec<ProfileViolation>);

/// Returns one of the built-in radars. `Custom` yields the BGT60 band with
/// the custom tag, as a starting point for hand-made profiles.
pub fn make_profile(id: ProfileId) -> RadarProfile {
    let (f_start_hz, f_end_hz) = match id {
        ProfileId::Bgt24 => (23.0e9, 25.0e9),
        ProfileId::Bgt60 | ProfileId::Custom => (58.0e9, 63.0e9),
        ProfileId::Bgt120 => (116.0e9, 126.0e9),
    };
    RadarProfile {
        id,
        f_start_hz,
        f_end_hz,
        sample_rate_hz: COMMON_SAMPLE_RATE_HZ,
        samples_per_chirp: COMMON_SAMPLES_PER_CHIRP,
        chirp_interval_s: COMMON_CHIRP_INTERVAL_S,
    }
}

/// Lists every violated invariant; an empty list means the profile is valid.
pub fn validate_profile(profile: &RadarProfile) -> Vec<ProfileViolation> {
    let mut out = Vec::new();
    let p = profile;
    if ![
        p.f_start_hz,
        p.f_end_hz,
        p.sample_rate_hz,
        p.chirp_interval_s,
    ]
    .iter()
    .all(|v| v.is_finite())
    {
        out.push(ProfileViolation::NonFinite);
        return out;
    }
    if p.f_start_hz <= 0.0 {
        out.push(ProfileViolation::NonPositiveStartFrequency);
    }
    if p.f_end_hz == p.f_start_hz {
        out.push(ProfileViolation::ZeroBandwidth);
    } else if p.f_end_hz < p.f_start_hz {
        out.push(ProfileViolation::NegativeBandwidth);
    }
    if p.sample_rate_hz <= 0.0 {
        out.push(ProfileViolation::NonPositiveSampleRate);
    }
    if p.samples_per_chirp < 2 {
        out.push(ProfileViolation::TooFewSamples);
    }
    if p.sample_rate_hz > 0.0 && p.chirp_interval_s < p.samples_per_chirp as f64 / p.sample_rate_hz
    {
        out.push(ProfileViolation::ChirpLongerThanInterval);
    }
    out
}

pub fn derive_chirp_params(profile: &RadarProfile) -> Result<ChirpDerived, InvalidProfile> {
    let violations = validate_profile(profile);
    if !violations.is_empty() {
        return Err(InvalidProfile(violations));
    }
    let n = profile.samples_per_chirp as f64;
    let bandwidth_hz = profile.f_end_hz - profile.f_start_hz;
    let chirp_duration_s = n / profile.sample_rate_hz;
    let range_bin_m = SPEED_OF_LIGHT / (2.0 * bandwidth_hz);
    let max_range_m = n * range_bin_m;
    Ok(ChirpDerived {
        bandwidth_hz,
        chirp_duration_s,
        slope_hz_per_s: bandwidth_hz / chirp_duration_s,
        range_bin_m,
        max_range_m,
        usable_range_m: max_range_m / 2.0,
        wavelength_m: SPEED_OF_LIGHT / (0.5 * (profile.f_start_hz + profile.f_end_hz)),
        slow_time_rate_hz: 1.0 / profile.chirp_interval_s,
    })
}

impl RadarProfile {
    /// Convenience wrapper around [`derive_chirp_params`].
    pub fn derived(&self) -> Result<ChirpDerived, InvalidProfile> {
        derive_chirp_params(self)
    }
}
