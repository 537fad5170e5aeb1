//! `FMCWREC1` recording files.
//!
//! Layout, all little-endian:
//!
//! | offset | size | field                                 |
//! |-------:|-----:|---------------------------------------|
//! |      0 |    8 | magic `FMCWREC1`                      |
//! |      8 |    4 | version (u32) = 1                     |
//! |     12 |    8 | sweep start frequency, Hz (u64)       |
//! |     20 |    8 | sweep end frequency, Hz (u64)         |
//! |     28 |    8 | ADC sample rate, Hz (u64)             |
//! |     36 |    4 | samples per chirp (u32)               |
//! |     40 |    4 | chirps (u32)                          |
//! |     44 |    8 | chirp interval, s (f64)               |
//! |     52 |   32 | scene digest                          |
//! |     84 |  4Mn | IF samples (f32), chirp-major         |
//!
//! Samples are held as `f64` in memory and stored as `f32`; a recording
//! read from a file therefore survives any number of write/read cycles
//! bit for bit.

use std::fs;
use std::path::Path;

use super::IoError;
use crate::profiles::{make_profile, ProfileId, RadarProfile};
use crate::synth::ChirpRecording;

pub const MAGIC: &[u8; 8] = b"FMCWREC1";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 84;

fn whole_hz(what: &str, v: f64) -> Result<u64, IoError> {
    if v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 {
        Ok(v as u64)
    } else {
        Err(IoError::InvalidHeader(format!(
            "{what} {v} Hz is not a whole number of Hz"
        )))
    }
}

fn count(what: &str, v: usize) -> Result<u32, IoError> {
    u32::try_from(v)
        .map_err(|_| IoError::InvalidHeader(format!("{what} {v} does not fit in 32 bits")))
}

pub fn encode_recording(recording: &ChirpRecording) -> Result<Vec<u8>, IoError> {
    recording.validate().map_err(IoError::InvalidHeader)?;
    let p = &recording.profile;
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * recording.frames.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&whole_hz("start frequency", p.f_start_hz)?.to_le_bytes());
    out.extend_from_slice(&whole_hz("end frequency", p.f_end_hz)?.to_le_bytes());
    out.extend_from_slice(&whole_hz("sample rate", p.sample_rate_hz)?.to_le_bytes());
    out.extend_from_slice(&count("samples per chirp", p.samples_per_chirp)?.to_le_bytes());
    out.extend_from_slice(&count("chirp count", recording.chirps)?.to_le_bytes());
    out.extend_from_slice(&p.chirp_interval_s.to_le_bytes());
    out.extend_from_slice(&recording.scene_digest);
    for &x in &recording.frames {
        out.extend_from_slice(&(x as f32).to_le_bytes());
    }
    Ok(out)
}

/// Built-in radar whose parameters match, else a custom profile.
fn identify(mut profile: RadarProfile) -> RadarProfile {
    profile.id = ProfileId::BUILT_IN
        .into_iter()
        .find(|&id| RadarProfile { id, ..profile } == make_profile(id))
        .unwrap_or(ProfileId::Custom);
    profile
}

pub fn decode_recording(bytes: &[u8]) -> Result<ChirpRecording, IoError> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(IoError::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(IoError::TruncatedPayload {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let version = u32_at(8);
    if version != VERSION {
        return Err(IoError::VersionUnsupported(version));
    }
    let n = u32_at(36) as usize;
    let chirps = u32_at(40) as usize;
    let profile = identify(RadarProfile {
        id: ProfileId::Custom,
        f_start_hz: u64_at(12) as f64,
        f_end_hz: u64_at(20) as f64,
        sample_rate_hz: u64_at(28) as f64,
        samples_per_chirp: n,
        chirp_interval_s: f64::from_le_bytes(bytes[44..52].try_into().unwrap()),
    });
    let scene_digest: [u8; 32] = bytes[52..HEADER_LEN].try_into().unwrap();

    let expected = HEADER_LEN + 4 * n * chirps;
    if bytes.len() < expected {
        return Err(IoError::TruncatedPayload {
            expected,
            found: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(IoError::InvalidHeader(format!(
            "{} bytes after the declared {chirps} x {n} payload",
            bytes.len() - expected
        )));
    }
    let frames = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
        .collect();
    let recording = ChirpRecording {
        profile,
        frames,
        chirps,
        t0_s: 0.0,
        scene_digest,
    };
    recording.validate().map_err(IoError::InvalidHeader)?;
    Ok(recording)
}

pub fn write_recording(recording: &ChirpRecording, path: &Path) -> Result<(), IoError> {
    let bytes = encode_recording(recording)?;
    fs::write(path, bytes).map_err(|e| IoError::io(path, e))
}

pub fn read_recording(path: &Path) -> Result<ChirpRecording, IoError> {
    let bytes = fs::read(path).map_err(|e| IoError::io(path, e))?;
    decode_recording(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::make_profile;
    use crate::synth::{synthesize_recording, NoiseModel, Scene, Target};

    fn small() -> ChirpRecording {
        let p = make_profile(ProfileId::Bgt60);
        synthesize_recording(
            &p,
            &Scene::single(Target::fixed(0.4)),
            &NoiseModel::white(0.1, 2),
            0.05,
        )
        .unwrap()
    }

    #[test]
    fn header_layout() {
        let rec = small();
        let bytes = encode_recording(&rec).unwrap();
        assert_eq!(bytes.len(), HEADER_LEN + 4 * 5 * 128);
        assert_eq!(&bytes[..8], b"FMCWREC1");
        assert_eq!(bytes[8..12], [1, 0, 0, 0]);
        assert_eq!(
            u64::from_le_bytes(bytes[12..20].try_into().unwrap()),
            58_000_000_000
        );
        assert_eq!(u32::from_le_bytes(bytes[40..44].try_into().unwrap()), 5);
        assert_eq!(&bytes[52..84], &rec.scene_digest);
    }

    #[test]
    fn second_cycle_is_exact() {
        let once = decode_recording(&encode_recording(&small()).unwrap()).unwrap();
        assert_eq!(once.profile.id, ProfileId::Bgt60);
        let bytes = encode_recording(&once).unwrap();
        let twice = decode_recording(&bytes).unwrap();
        assert_eq!(twice, once);
        assert_eq!(encode_recording(&twice).unwrap(), bytes);
    }

    #[test]
    fn corrupt_files() {
        let mut bytes = encode_recording(&small()).unwrap();
        assert!(matches!(
            decode_recording(&bytes[..bytes.len() - 1]),
            Err(IoError::TruncatedPayload { .. })
        ));
        assert!(matches!(
            decode_recording(&bytes[..40]),
            Err(IoError::TruncatedPayload { .. })
        ));
        bytes[8] = 2;
        assert_eq!(
            decode_recording(&bytes),
            Err(IoError::VersionUnsupported(2))
        );
        bytes[0] = b'X';
        assert_eq!(decode_recording(&bytes), Err(IoError::BadMagic));
        assert_eq!(decode_recording(b"FMC"), Err(IoError::BadMagic));
    }

    #[test]
    fn fractional_hz_is_rejected() {
        let mut rec = small();
        rec.profile.f_start_hz += 0.5;
        assert!(matches!(
            encode_recording(&rec),
            Err(IoError::InvalidHeader(_))
        ));
    }
}
