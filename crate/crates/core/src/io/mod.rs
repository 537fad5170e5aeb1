//! Recording files, scenario configuration and CSV output.

mod csv;
mod recording;
mod scenario;

use std::path::Path;

use thiserror::Error;

pub use self::csv::{
    displacement_csv, estimates_csv, read_report_csv, traces_csv, write_text, ReportCsvRow,
};
pub use recording::{
    decode_recording, encode_recording, read_recording, write_recording, HEADER_LEN, MAGIC, VERSION,
};
pub use scenario::{
    load_scenario, parse_scenario, profile_to_config, MotionKind, NoiseSection, ScenarioConfig,
    SimulateSection,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IoError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("not a recording file (bad magic)")]
    BadMagic,
    #[error("recording format version {0} is not supported")]
    VersionUnsupported(u32),
    #[error("truncated recording: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("invalid recording header: {0}")]
    InvalidHeader(String),
    #[error("line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` has no recognised unit, expected `{expected}`")]
    UnitViolation {
        line: usize,
        key: String,
        expected: String,
    },
    #[error("line {line}: invalid value for `{key}`: {message}")]
    InvalidValue {
        line: usize,
        key: String,
        message: String,
    },
    #[error("csv: {0}")]
    Csv(String),
}

impl IoError {
    pub(crate) fn io(path: &Path, err: std::io::Error) -> Self {
        IoError::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
