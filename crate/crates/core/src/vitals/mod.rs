//! Heart and respiration rates from a chest displacement trace.
//!
//! Rates come from the strongest spectral peak of the band-passed trace;
//! individual heartbeats come from peak picking on the heart band.

mod beats;
mod filter;
mod rate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use beats::{
    detect_beats, detect_beats_with, match_beats, BeatMatch, BeatOptions, BEAT_TOLERANCE_S,
};
pub use filter::{bandpass, lowpass};
pub use rate::{estimate_rate, estimate_rate_with, sliding_estimates, RateOptions, RatePeak};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VitalsError {
    #[error("invalid band: {0}")]
    BandInvalid(String),
    #[error("no spectral peak in {low_hz}-{high_hz} Hz")]
    NoPeak { low_hz: f64, high_hz: f64 },
    #[error("trace of {have_s} s is shorter than the {need_s} s required")]
    TraceTooShort { have_s: f64, need_s: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandKind {
    Heart,
    Respiration,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub low_hz: f64,
    pub high_hz: f64,
    pub kind: BandKind,
}

impl Band {
    /// 0.7-2 Hz, i.e. 42-120 beats per minute.
    pub fn heart() -> Self {
        Self {
            low_hz: 0.7,
            high_hz: 2.0,
            kind: BandKind::Heart,
        }
    }

    /// 0.1-0.5 Hz, i.e. 6-30 breaths per minute.
    pub fn respiration() -> Self {
        Self {
            low_hz: 0.1,
            high_hz: 0.5,
            kind: BandKind::Respiration,
        }
    }

    pub fn custom(low_hz: f64, high_hz: f64) -> Result<Self, VitalsError> {
        let band = Self {
            low_hz,
            high_hz,
            kind: BandKind::Custom,
        };
        if !(low_hz > 0.0 && high_hz > low_hz) {
            return Err(VitalsError::BandInvalid(format!(
                "need 0 < low < high, got {low_hz}-{high_hz} Hz"
            )));
        }
        Ok(band)
    }

    pub fn contains(&self, f: f64) -> bool {
        (self.low_hz..=self.high_hz).contains(&f)
    }

    fn check_for_rate(&self, rate_hz: f64) -> Result<(), VitalsError> {
        if !(self.low_hz > 0.0 && self.high_hz > self.low_hz && self.high_hz < rate_hz / 2.0) {
            return Err(VitalsError::BandInvalid(format!(
                "{}-{} Hz does not fit below Nyquist of a {rate_hz} Hz trace",
                self.low_hz, self.high_hz
            )));
        }
        Ok(())
    }
}

/// Rates measured over one window of a rolling analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VitalsEstimate {
    pub window_start_s: f64,
    pub hr_bpm: f64,
    pub rr_brpm: f64,
    /// Peak magnitude over the mean in-band magnitude.
    pub hr_peak_mag: f64,
    pub rr_peak_mag: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bands() {
        assert_eq!(
            (Band::heart().low_hz * 60.0, Band::heart().high_hz * 60.0),
            (42.0, 120.0)
        );
        assert_eq!(
            (
                Band::respiration().low_hz * 60.0,
                Band::respiration().high_hz * 60.0
            ),
            (6.0, 30.0)
        );
        assert!(Band::custom(1.0, 0.5).is_err());
        assert!(Band::custom(0.0, 0.5).is_err());
        assert_eq!(Band::custom(0.2, 0.6).unwrap().kind, BandKind::Custom);
        assert!(Band::heart().check_for_rate(4.0).is_err());
        assert!(Band::heart().check_for_rate(100.0).is_ok());
    }
}
