//! Property checks shared by the proptest suites and the acceptance run.
//! Each returns a description of the first violation.
#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use fmcw_vitals::io::{decode_recording, encode_recording};
use fmcw_vitals::motion::{sinusoid_motion, DisplacementTrace};
use fmcw_vitals::pipeline::{
    range_fft, run_pipeline, unwrap_phase, wrap_phase, PadPolicy, PhaseSeries, PipelineOptions,
};
use fmcw_vitals::profiles::{make_profile, ProfileId, RadarProfile};
use fmcw_vitals::synth::{synthesize_recording, ChirpRecording, NoiseModel, Scene, Target};
use fmcw_vitals::vitals::{bandpass, Band};

pub type Check = Result<(), String>;

/// A walk whose steps stay below π must come back from wrapping up to a
/// constant multiple of 2π.
pub fn unwrap_recovers_walk(start: f64, steps: &[f64]) -> Check {
    let mut walk = vec![start];
    for s in steps {
        walk.push(walk.last().unwrap() + s);
    }
    let wrapped = PhaseSeries {
        rate_hz: 100.0,
        values: walk.iter().map(|&x| wrap_phase(x)).collect(),
        bin: 0,
        wrapped: true,
    };
    let back = unwrap_phase(&wrapped).values;
    let offset = back[0] - walk[0];
    let turns = offset / TAU;
    if (turns - turns.round()).abs() > 1e-9 {
        return Err(format!("offset {offset} is not a whole number of turns"));
    }
    for (i, (b, w)) in back.iter().zip(&walk).enumerate() {
        if (b - w - offset).abs() > 1e-9 {
            return Err(format!("sample {i}: {b} vs {w} + {offset}"));
        }
    }
    Ok(())
}

fn recording_of(frames: Vec<f64>, n: usize) -> ChirpRecording {
    let profile = RadarProfile {
        samples_per_chirp: n,
        ..make_profile(ProfileId::Custom)
    };
    ChirpRecording {
        profile,
        chirps: frames.len() / n,
        frames,
        t0_s: 0.0,
        scene_digest: [0; 32],
    }
}

/// Energy of each chirp equals its spectrum energy over the FFT length.
pub fn parseval_holds(frames: Vec<f64>, n: usize) -> Check {
    let rec = recording_of(frames, n);
    let spectra = range_fft(&rec, PadPolicy::None).map_err(|e| e.to_string())?;
    for m in 0..rec.chirps {
        let time: f64 = rec.chirp(m).iter().map(|x| x * x).sum();
        let freq = spectra.chirp_energy(m) / n as f64;
        if (time - freq).abs() > 1e-9 * time.max(f64::MIN_POSITIVE) {
            return Err(format!("chirp {m}: {time} vs {freq}"));
        }
    }
    Ok(())
}

/// Synthesizing two targets together equals the sum of synthesizing each alone.
pub fn superposition_holds(profile: &RadarProfile, a: Target, b: Target) -> Check {
    let quiet = NoiseModel::noiseless();
    let synth = |targets: Vec<Target>| {
        let scene = Scene {
            targets,
            ..Scene::single(Target::fixed(0.5))
        };
        synthesize_recording(profile, &scene, &quiet, 0.2).map_err(|e| e.to_string())
    };
    let both = synth(vec![a.clone(), b.clone()])?;
    let only_a = synth(vec![a])?;
    let only_b = synth(vec![b])?;
    let scale = both.frames.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    for (i, ((x, y), z)) in both
        .frames
        .iter()
        .zip(&only_a.frames)
        .zip(&only_b.frames)
        .enumerate()
    {
        if (x - y - z).abs() > 1e-9 * scale {
            return Err(format!("sample {i}: {x} vs {y} + {z}"));
        }
    }
    Ok(())
}

/// Values stored as f32 come back unchanged, as does the header.
pub fn file_round_trip_is_exact(
    profile: RadarProfile,
    values: Vec<f32>,
    digest: [u8; 32],
) -> Check {
    let n = profile.samples_per_chirp;
    let rec = ChirpRecording {
        profile,
        chirps: values.len() / n,
        frames: values.iter().map(|&v| v as f64).collect(),
        t0_s: 0.0,
        scene_digest: digest,
    };
    let bytes = encode_recording(&rec).map_err(|e| e.to_string())?;
    let back = decode_recording(&bytes).map_err(|e| e.to_string())?;
    if back != rec {
        return Err("decoded recording differs".into());
    }
    if encode_recording(&back).map_err(|e| e.to_string())? != bytes {
        return Err("re-encoded bytes differ".into());
    }
    Ok(())
}

/// Noiseless sinusoidal motion through the default pipeline of `profile`.
/// Returns (rms error in wavelengths, correlation).
pub fn round_trip(
    profile: &RadarProfile,
    range_m: f64,
    amplitude_m: f64,
    freq_hz: f64,
) -> Result<(f64, f64), String> {
    let rate = 1.0 / profile.chirp_interval_s;
    let duration = 10.0;
    let truth =
        sinusoid_motion(amplitude_m, freq_hz, duration, rate, 0.0).map_err(|e| e.to_string())?;
    let scene = Scene::single(Target::moving(range_m, truth.clone()));
    let rec = synthesize_recording(profile, &scene, &NoiseModel::noiseless(), duration)
        .map_err(|e| e.to_string())?;
    let out =
        run_pipeline(&rec, &PipelineOptions::for_profile(profile.id)).map_err(|e| e.to_string())?;
    let measured = &out.displacement.samples;
    let reference: Vec<f64> = truth.samples.iter().map(|x| x - truth.samples[0]).collect();
    let rms = (measured
        .iter()
        .zip(&reference)
        .map(|(m, t)| (m - t).powi(2))
        .sum::<f64>()
        / measured.len() as f64)
        .sqrt();
    let lambda = profile.derived().unwrap().wavelength_m;
    Ok((rms / lambda, correlation(measured, &reference)))
}

pub fn round_trip_within_bounds(
    profile: &RadarProfile,
    range_m: f64,
    amplitude_m: f64,
    freq_hz: f64,
) -> Check {
    let (rms_lambda, corr) = round_trip(profile, range_m, amplitude_m, freq_hz)?;
    if rms_lambda > 1e-3 || corr < 0.999 {
        return Err(format!(
            "{} at {range_m} m, {amplitude_m} m at {freq_hz} Hz: rms {rms_lambda} λ, correlation {corr}",
            profile.id
        ));
    }
    Ok(())
}

pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}

/// Steady-state gain of the band-pass at `freq_hz`, in dB.
pub fn bandpass_gain_db(band: &Band, freq_hz: f64) -> f64 {
    let rate = 100.0;
    let duration = 400.0;
    let len = (duration * rate) as usize;
    let input = DisplacementTrace::new(
        rate,
        (0..len)
            .map(|i| (2.0 * PI * freq_hz * i as f64 / rate).sin())
            .collect(),
    );
    let out = bandpass(&input, band).unwrap();
    let peak = out.samples[len / 4..3 * len / 4]
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    20.0 * peak.log10()
}

pub fn bandpass_in_band(band: &Band, freq_hz: f64) -> Check {
    let g = bandpass_gain_db(band, freq_hz);
    if g.abs() > 1.0 {
        return Err(format!(
            "{freq_hz} Hz in [{}, {}]: {g:.2} dB",
            band.low_hz, band.high_hz
        ));
    }
    Ok(())
}

pub fn bandpass_stop_band(band: &Band, freq_hz: f64) -> Check {
    let g = bandpass_gain_db(band, freq_hz);
    if g > -20.0 {
        return Err(format!(
            "{freq_hz} Hz outside [{}, {}]: {g:.2} dB",
            band.low_hz, band.high_hz
        ));
    }
    Ok(())
}
