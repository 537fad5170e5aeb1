use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::IoError;
use crate::motion::DisplacementTrace;
use crate::vitals::VitalsEstimate;

// `{}` on f64 prints the shortest string that parses back to the same value.

pub fn displacement_csv(trace: &DisplacementTrace) -> String {
    let mut out = String::from("time_s,displacement_m\n");
    for (i, x) in trace.samples.iter().enumerate() {
        let _ = writeln!(out, "{},{x}", trace.time_of(i));
    }
    out
}

/// Ground truth next to the measured trace, for plotting.
pub fn traces_csv(truth: &DisplacementTrace, measured: &DisplacementTrace) -> String {
    let mut out = String::from("time_s,truth_m,measured_m\n");
    for (i, (t, m)) in truth.samples.iter().zip(&measured.samples).enumerate() {
        let _ = writeln!(out, "{},{t},{m}", truth.time_of(i));
    }
    out
}

pub fn estimates_csv(estimates: &[VitalsEstimate]) -> String {
    let mut out = String::from("window_start_s,hr_bpm,rr_brpm\n");
    for e in estimates {
        let _ = writeln!(out, "{},{},{}", e.window_start_s, e.hr_bpm, e.rr_brpm);
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|e| IoError::io(path, e))
}

/// One row of a report CSV as written by `ExperimentReport::to_csv`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ReportCsvRow {
    pub experiment: String,
    pub configuration: String,
    pub value: f64,
    pub std: Option<f64>,
    pub units: String,
    pub hardware: Option<f64>,
    pub note: String,
    pub seed: u64,
    pub version: String,
}

pub fn read_report_csv(path: &Path) -> Result<Vec<ReportCsvRow>, IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    ::csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<Vec<ReportCsvRow>, _>>()
        .map_err(|e| IoError::Csv(format!("{}: {e}", path.display())))
}
