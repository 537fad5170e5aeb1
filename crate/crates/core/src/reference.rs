//! Hardware measurements of the three radars on the phantom rig.
//!
//! The simulator does not model antenna coupling, phase noise or
//! mechanical slack, so these numbers serve as calibration targets and
//! upper bounds for simulated errors, never as exact expectations.

use crate::profiles::ProfileId;
use crate::synth::PhantomKind;

/// Incidence angles at which baseline noise was measured.
pub const ANGLES_DEG: [f64; 3] = [0.0, 30.0, 60.0];

/// Static-target distances of the range experiment, in meters.
pub const RANGE_DISTANCES_M: [f64; 4] = [0.30, 0.40, 0.50, 0.60];

/// Phantom oscillation amplitudes of the displacement experiment, in meters.
pub const DISPLACEMENT_AMPLITUDES_M: [f64; 3] = [1.2e-3, 0.3e-3, 0.08e-3];

/// Servo position step of the phantom.
pub const PHANTOM_STEP_M: f64 = 0.4e-6;

/// Phantom oscillation frequency.
pub const PHANTOM_FREQ_HZ: f64 = 0.5;

fn column(profile: ProfileId) -> Option<usize> {
    match profile {
        ProfileId::Bgt24 => Some(0),
        ProfileId::Bgt60 => Some(1),
        ProfileId::Bgt120 => Some(2),
        ProfileId::Custom => None,
    }
}

fn angle_row(angle_deg: f64) -> Option<usize> {
    ANGLES_DEG.iter().position(|&a| a == angle_deg)
}

// Rows: 0°, 30°, 60°. Columns: BGT24, BGT60, BGT120. Millimeters.
const BASELINE_METAL_MM: [[f64; 3]; 3] = [
    [0.015, 0.004, 0.001],
    [0.059, 0.001, 0.001],
    [0.044, 0.021, 0.348],
];
const BASELINE_GELATIN_MM: [[f64; 3]; 3] = [
    [0.040, 0.001, 0.001],
    [0.060, 0.001, 0.001],
    [2.988, 0.031, 3.796],
];

/// Measured baseline displacement noise (standard deviation), in meters.
pub fn baseline_noise_m(profile: ProfileId, phantom: PhantomKind, angle_deg: f64) -> Option<f64> {
    let table = match phantom {
        PhantomKind::Metal => &BASELINE_METAL_MM,
        PhantomKind::Gelatin => &BASELINE_GELATIN_MM,
    };
    Some(table[angle_row(angle_deg)?][column(profile)?] * 1e-3)
}

// Rows: 30, 40, 50, 60 cm. Each entry is (mean, std) in centimeters.
const RANGE_METAL_CM: [[(f64, f64); 3]; 4] = [
    [(6.25, 0.2), (0.49, 0.01), (0.02, 0.0)],
    [(5.53, 0.18), (-0.55, 0.01), (-0.87, 0.01)],
    [(6.57, 0.3), (0.14, 0.01), (-0.65, 0.01)],
    [(3.45, 1.88), (0.64, 0.01), (0.04, 0.0)],
];
const RANGE_GELATIN_CM: [[(f64, f64); 3]; 4] = [
    [(6.02, 0.2), (1.25, 0.04), (0.05, 0.13)],
    [(7.2, 3.2), (-0.21, 0.05), (-0.01, 0.72)],
    [(6.3, 0.76), (0.64, 0.11), (2.32, 0.06)],
    [(5.0, 0.18), (3.13, 0.01), (4.07, 0.04)],
];

/// Measured range error `(mean, std)` in meters at one of the reference distances.
pub fn range_error_m(
    profile: ProfileId,
    phantom: PhantomKind,
    distance_m: f64,
) -> Option<(f64, f64)> {
    let row = RANGE_DISTANCES_M
        .iter()
        .position(|&d| (d - distance_m).abs() < 1e-9)?;
    let table = match phantom {
        PhantomKind::Metal => &RANGE_METAL_CM,
        PhantomKind::Gelatin => &RANGE_GELATIN_CM,
    };
    let (mean, std) = table[row][column(profile)?];
    Some((mean * 1e-2, std * 1e-2))
}

// Rows: 1.2, 0.3, 0.08 mm. Absolute peak-to-peak error in millimeters.
const DISPLACEMENT_METAL_MM: [[f64; 3]; 3] = [
    [0.038, 0.018, 0.028],
    [0.055, 0.010, 0.010],
    [0.020, 0.047, 0.004],
];
const DISPLACEMENT_GELATIN_MM: [[f64; 3]; 3] = [
    [0.071, 0.040, 0.059],
    [0.120, 0.033, 0.013],
    [0.026, 0.019, 0.015],
];

/// Measured absolute peak-to-peak displacement error, in meters.
pub fn displacement_error_m(
    profile: ProfileId,
    phantom: PhantomKind,
    amplitude_m: f64,
) -> Option<f64> {
    let row = DISPLACEMENT_AMPLITUDES_M
        .iter()
        .position(|&a| (a - amplitude_m).abs() < 1e-12)?;
    let table = match phantom {
        PhantomKind::Metal => &DISPLACEMENT_METAL_MM,
        PhantomKind::Gelatin => &DISPLACEMENT_GELATIN_MM,
    };
    Some(table[row][column(profile)?] * 1e-3)
}

/// Heart-rate mean absolute error on human subjects, in bpm.
pub fn heart_rate_mae_bpm(profile: ProfileId) -> Option<f64> {
    Some([4.0, 6.0, 0.4][column(profile)?])
}

/// Reflection gain relative to a metal plate at normal incidence, implied
/// by the baseline-noise table: baseline noise scales inversely with gain.
///
/// The per-radar ratios `baseline(metal, 0°) / baseline(kind, angle)` are
/// combined by geometric mean, then forced to be non-increasing in angle
/// and no larger for gelatin than for metal.
pub fn reflection_gain_points(phantom: PhantomKind) -> [f64; 3] {
    let gains_for = |table: &[[f64; 3]; 3]| {
        let mut out = [0.0; 3];
        for (row, gain) in out.iter_mut().enumerate() {
            let log_sum: f64 = (0..3)
                .map(|col| (BASELINE_METAL_MM[0][col] / table[row][col]).ln())
                .sum();
            *gain = (log_sum / 3.0).exp();
        }
        out
    };
    let metal = monotone(gains_for(&BASELINE_METAL_MM));
    match phantom {
        PhantomKind::Metal => metal,
        PhantomKind::Gelatin => {
            let mut gel = monotone(gains_for(&BASELINE_GELATIN_MM));
            for (g, m) in gel.iter_mut().zip(metal) {
                *g = g.min(m);
            }
            gel
        }
    }
}

fn monotone(mut gains: [f64; 3]) -> [f64; 3] {
    gains[0] = gains[0].min(1.0);
    for i in 1..gains.len() {
        gains[i] = gains[i].min(gains[i - 1]);
    }
    gains
}
