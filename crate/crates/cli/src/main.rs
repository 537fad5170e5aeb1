//! `fmcw-vitals`: simulate recordings, analyze them and run the benchmark suite.
//!
//! Exit status: 0 on success, 1 on a usage error, 2 when the input data or
//! the scenario cannot be processed.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fmcw_vitals::bench::{
    baseline_noise_table, displacement_report, displacement_runs, range_experiment, vitals_report,
    vitals_run, ExperimentKind, ExperimentReport,
};
use fmcw_vitals::io::{
    displacement_csv, estimates_csv, load_scenario, profile_to_config, read_recording,
    read_report_csv, traces_csv, write_recording, write_text, IoError, ScenarioConfig,
};
use fmcw_vitals::pipeline::{run_pipeline, PadPolicy, PipelineOptions};
use fmcw_vitals::profiles::{make_profile, ProfileId};
use fmcw_vitals::synth::synthesize_recording;
use fmcw_vitals::Error;

#[derive(Parser)]
#[command(name = "fmcw-vitals", version, about = "FMCW radar vital-sign toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect the built-in radar profiles.
    Profile {
        #[command(subcommand)]
        action: ProfileAction,
    },
    /// Synthesize the recording described by a scenario's [simulate] section.
    Simulate {
        scenario: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Extract the displacement trace of a recording as CSV.
    Analyze {
        recording: PathBuf,
        /// Keep static clutter instead of subtracting the slow-time mean.
        #[arg(long)]
        no_dc_removal: bool,
        /// Zero-pad the range FFT to bins no wider than this many cm.
        #[arg(long, value_name = "CM")]
        pad_cm: Option<f64>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run one experiment over every radar of a scenario.
    Bench {
        experiment: Experiment,
        scenario: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Collect the reports of a bench output directory into report.md.
    Report { dir: PathBuf },
}

#[derive(Subcommand)]
enum ProfileAction {
    Show {
        #[arg(value_parser = parse_profile)]
        id: ProfileId,
    },
}

fn parse_profile(s: &str) -> Result<ProfileId, String> {
    s.parse()
        .map_err(|e: fmcw_vitals::profiles::UnknownProfile| e.to_string())
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    Range,
    Noise,
    Displacement,
    Vitals,
}

/// Experiments in report order.
const REPORT_ORDER: [ExperimentKind; 4] = [
    ExperimentKind::Range,
    ExperimentKind::BaselineNoise,
    ExperimentKind::Displacement,
    ExperimentKind::Vitals,
];

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Profile {
            action: ProfileAction::Show { id },
        } => profile_show(id),
        Command::Simulate { scenario, output } => simulate(&scenario, &output),
        Command::Analyze {
            recording,
            no_dc_removal,
            pad_cm,
            output,
        } => analyze(&recording, no_dc_removal, pad_cm, &output),
        Command::Bench {
            experiment,
            scenario,
            output,
        } => bench(experiment, &scenario, &output),
        Command::Report { dir } => report(&dir),
    }
}

fn profile_show(id: ProfileId) -> Result<(), Error> {
    let p = make_profile(id);
    let d = p.derived()?;
    println!("{}", profile_to_config(&p).trim_end());
    println!("# bandwidth {} GHz", d.bandwidth_hz / 1e9);
    println!("# chirp duration {} us", d.chirp_duration_s * 1e6);
    println!("# range bin {} cm", d.range_bin_m * 1e2);
    println!("# usable range {} m", d.usable_range_m);
    println!("# wavelength {} mm", d.wavelength_m * 1e3);
    println!("# slow-time rate {} Hz", d.slow_time_rate_hz);
    Ok(())
}

fn simulate(scenario: &Path, output: &Path) -> Result<(), Error> {
    let cfg = load_scenario(scenario)?;
    let profile = cfg.simulate.profile;
    let noise = cfg.noise_for(&profile)?;
    let (scene, duration_s) = cfg.simulate_scene()?;
    let rec = synthesize_recording(&profile, &scene, &noise, duration_s)?;
    write_recording(&rec, output)?;
    eprintln!(
        "{}: {} chirps of {} samples, {}",
        output.display(),
        rec.chirps,
        rec.samples_per_chirp(),
        profile.id
    );
    Ok(())
}

fn analyze(
    recording: &Path,
    no_dc_removal: bool,
    pad_cm: Option<f64>,
    output: &Path,
) -> Result<(), Error> {
    let rec = read_recording(recording)?;
    let mut options = PipelineOptions::for_profile(rec.profile.id);
    if no_dc_removal {
        options = options.with_dc_removal(false);
    }
    if let Some(cm) = pad_cm {
        options = options.with_pad(PadPolicy::TargetBin { bin_m: cm * 1e-2 });
    }
    let out = run_pipeline(&rec, &options)?;
    write_text(output, &displacement_csv(&out.displacement))?;
    eprintln!("target at {:.4} m (bin {})", out.range_m, out.bin);
    Ok(())
}

fn create_dir(dir: &Path) -> Result<(), IoError> {
    fs::create_dir_all(dir).map_err(|e| IoError::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    })
}

fn file_tag(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn bench(experiment: Experiment, scenario: &Path, dir: &Path) -> Result<(), Error> {
    let cfg = load_scenario(scenario)?;
    create_dir(dir)?;
    let report = match experiment {
        Experiment::Range => bench_range(&cfg)?,
        Experiment::Noise => bench_noise(&cfg)?,
        Experiment::Displacement => bench_displacement(&cfg, dir)?,
        Experiment::Vitals => bench_vitals(&cfg, dir)?,
    };
    let name = report.experiment.name();
    write_text(&dir.join(format!("{name}.csv")), &report.to_csv())?;
    write_text(&dir.join(format!("{name}.md")), &report.to_markdown())?;
    print!("{}", report.to_markdown());
    Ok(())
}

fn merged(
    kind: ExperimentKind,
    seed: u64,
    parts: impl IntoIterator<Item = Result<ExperimentReport, Error>>,
) -> Result<ExperimentReport, Error> {
    let mut report = ExperimentReport::new(kind, seed);
    for part in parts {
        report.merge(part?);
    }
    Ok(report)
}

fn bench_range(cfg: &ScenarioConfig) -> Result<ExperimentReport, Error> {
    merged(
        ExperimentKind::Range,
        cfg.seed,
        cfg.radars.iter().map(|p| {
            let noise = cfg.noise_for(p)?;
            Ok(range_experiment(p, &cfg.range, &noise)?)
        }),
    )
}

fn bench_noise(cfg: &ScenarioConfig) -> Result<ExperimentReport, Error> {
    merged(
        ExperimentKind::BaselineNoise,
        cfg.seed,
        cfg.radars.iter().flat_map(|p| {
            cfg.baseline_angles_deg.iter().map(move |&angle| {
                let noise = cfg.noise_at(p, angle)?;
                Ok(baseline_noise_table(p, cfg.phantom, &[angle], &noise)?)
            })
        }),
    )
}

fn bench_displacement(cfg: &ScenarioConfig, dir: &Path) -> Result<ExperimentReport, Error> {
    merged(
        ExperimentKind::Displacement,
        cfg.seed,
        cfg.radars.iter().map(|p| {
            let noise = cfg.noise_for(p)?;
            let runs = displacement_runs(p, &cfg.displacement, &noise)?;
            for run in &runs {
                let path = dir.join(format!("trace_{}.csv", file_tag(&run.label)));
                write_text(&path, &traces_csv(&run.truth, &run.measured))?;
            }
            Ok(displacement_report(p, cfg.phantom, &runs, noise.seed))
        }),
    )
}

fn bench_vitals(cfg: &ScenarioConfig, dir: &Path) -> Result<ExperimentReport, Error> {
    merged(
        ExperimentKind::Vitals,
        cfg.seed,
        cfg.radars.iter().map(|p| {
            let noise = cfg.noise_for(p)?;
            let run = vitals_run(p, &cfg.vitals, &noise)?;
            let tag = p.id.name();
            write_text(
                &dir.join(format!("rates_{tag}.csv")),
                &estimates_csv(&run.estimates),
            )?;
            write_text(
                &dir.join(format!("trace_{tag}_chest.csv")),
                &traces_csv(&run.truth, &run.measured),
            )?;
            Ok(vitals_report(p, &run, noise.seed))
        }),
    )
}

fn report(dir: &Path) -> Result<(), Error> {
    let mut out = String::from("# Benchmark report\n");
    let mut found = 0;
    for kind in REPORT_ORDER {
        let md = dir.join(format!("{}.md", kind.name()));
        let csv = dir.join(format!("{}.csv", kind.name()));
        if !csv.exists() {
            continue;
        }
        // The CSV is the source of truth; a report whose CSV no longer parses is rejected.
        let rows = read_report_csv(&csv)?;
        found += 1;
        let table = fs::read_to_string(&md).map_err(|e| IoError::Io {
            path: md.display().to_string(),
            message: e.to_string(),
        })?;
        let _ = write!(
            out,
            "\n{}\n({} rows, {})\n",
            table.trim_end(),
            rows.len(),
            csv.display()
        );
    }
    if found == 0 {
        return Err(IoError::Csv(format!("no experiment reports in {}", dir.display())).into());
    }

    let mut plots: Vec<String> = fs::read_dir(dir)
        .map_err(|e| IoError::Io {
            path: dir.display().to_string(),
            message: e.to_string(),
        })?
        .filter_map(|entry| entry.ok()?.file_name().into_string().ok())
        .filter(|name| {
            (name.starts_with("trace_") || name.starts_with("rates_")) && name.ends_with(".csv")
        })
        .collect();
    plots.sort();
    if !plots.is_empty() {
        out.push_str("\n## Plot data\n\n");
        for name in &plots {
            let columns = if name.starts_with("rates_") {
                "window_start_s, hr_bpm, rr_brpm"
            } else {
                "time_s, truth_m, measured_m"
            };
            let _ = writeln!(out, "- `{name}`: {columns}");
        }
    }
    write_text(&dir.join("report.md"), &out)?;
    print!("{out}");
    Ok(())
}
