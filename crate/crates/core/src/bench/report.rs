use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Range,
    BaselineNoise,
    Displacement,
    Vitals,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Range => "range",
            ExperimentKind::BaselineNoise => "baseline_noise",
            ExperimentKind::Displacement => "displacement",
            ExperimentKind::Vitals => "vitals",
        }
    }

    fn title(self) -> &'static str {
        match self {
            ExperimentKind::Range => "Range estimation error",
            ExperimentKind::BaselineNoise => "Baseline noise at a fixed position",
            ExperimentKind::Displacement => "Peak-to-peak displacement error",
            ExperimentKind::Vitals => "Heart and respiration rate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RowValue {
    Scalar(f64),
    MeanStd { mean: f64, std: f64 },
}

impl RowValue {
    /// The scalar, or the mean.
    pub fn primary(&self) -> f64 {
        match *self {
            RowValue::Scalar(v) => v,
            RowValue::MeanStd { mean, .. } => mean,
        }
    }

    fn spread(&self) -> Option<f64> {
        match *self {
            RowValue::Scalar(_) => None,
            RowValue::MeanStd { std, .. } => Some(std),
        }
    }

    fn display(&self) -> String {
        match *self {
            RowValue::Scalar(v) => format_number(v),
            RowValue::MeanStd { mean, std } => {
                format!("{} ± {}", format_number(mean), format_number(std))
            }
        }
    }
}

fn format_number(v: f64) -> String {
    if v == 0.0 || (1e-3..1e4).contains(&v.abs()) {
        format!("{v:.4}")
    } else {
        format!("{v:.3e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub label: String,
    pub value: RowValue,
    pub units: String,
    /// Hardware measurement for the same configuration, in `units`.
    pub reference: Option<f64>,
    /// Set when the row is degenerate and should be read with care.
    pub note: Option<String>,
}

impl ReportRow {
    pub fn new(label: impl Into<String>, value: RowValue, units: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            value,
            units: units.into(),
            reference: None,
            note: None,
        }
    }

    pub fn with_reference(mut self, reference: Option<f64>) -> Self {
        self.reference = reference;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub experiment: ExperimentKind,
    pub rows: Vec<ReportRow>,
    pub seed: u64,
    pub version: String,
}

impl ExperimentReport {
    pub fn new(experiment: ExperimentKind, seed: u64) -> Self {
        Self {
            experiment,
            rows: Vec::new(),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn row(&self, label: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    /// Appends the rows of another report of the same experiment.
    pub fn merge(&mut self, other: ExperimentReport) {
        debug_assert_eq!(self.experiment, other.experiment);
        self.rows.extend(other.rows);
    }

    pub fn footer(&self) -> Option<&'static str> {
        match self.experiment {
            ExperimentKind::BaselineNoise => Some(
                "Baseline noise is the standard deviation of the displacement trace, in mm. \
                 The hardware table labels the same column \"variance of the phase in millimeters\"; \
                 a phase variance would be in rad², so the values are read as displacement spread.",
            ),
            ExperimentKind::Displacement => Some(
                "Peak-to-peak values are read after a zero-phase low-pass at four times the phantom frequency.",
            ),
            _ => None,
        }
    }

    /// Aligned-column markdown table.
    pub fn to_markdown(&self) -> String {
        let header = ["configuration", "value", "units", "hardware", "note"];
        let cells: Vec<[String; 5]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.label.clone(),
                    r.value.display(),
                    r.units.clone(),
                    r.reference.map(format_number).unwrap_or_else(|| "-".into()),
                    r.note.clone().unwrap_or_default(),
                ]
            })
            .collect();
        let mut widths = header.map(|h| h.chars().count());
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |cols: &[String]| {
            let padded: Vec<String> = cols
                .iter()
                .zip(widths)
                .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
                .collect();
            format!("| {} |\n", padded.join(" | "))
        };

        let mut out = String::new();
        let _ = writeln!(out, "## {}\n", self.experiment.title());
        let _ = writeln!(out, "seed {} · toolkit {}\n", self.seed, self.version);
        out.push_str(&line(&header.map(String::from)));
        out.push_str(&line(&widths.map(|w| "-".repeat(w))));
        for row in &cells {
            out.push_str(&line(row));
        }
        if let Some(footer) = self.footer() {
            let _ = write!(out, "\n{footer}\n");
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("experiment,configuration,value,std,units,hardware,note,seed,version\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                self.experiment.name(),
                csv_field(&r.label),
                r.value.primary(),
                r.value.spread().map(|s| s.to_string()).unwrap_or_default(),
                csv_field(&r.units),
                r.reference.map(|v| v.to_string()).unwrap_or_default(),
                csv_field(r.note.as_deref().unwrap_or("")),
                self.seed,
                self.version
            );
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
