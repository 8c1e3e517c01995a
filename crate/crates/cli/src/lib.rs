//! Command-line driver for the workday simulator.
//!
//! Subcommands: `run` (one parameter point), `sweep` (explicit grids),
//! `preset <name>` (figure reproductions) and `validate` (oracle and
//! invariant suite). Every successful invocation writes its CSV files plus a
//! `<name>_manifest.json` with checksums and timings.

pub mod config;
pub mod manifest;
pub mod output;

use std::ffi::OsString;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use workday_core::{run_sweep, validation, MasterSeed, Preset, SweepError, SweepResult, SweepSpec};

pub use config::{Effective, Settings};
pub use manifest::Manifest;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, bad config values or invalid parameter combinations.
    #[error("{0}")]
    Usage(String),
    /// IO failures and failed checks.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "workday",
    version,
    about = "Monte Carlo simulator of extrovert/introvert workplace productivity"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Ensemble at a single parameter point.
    Run(Settings),
    /// Ensembles over comma-separated eta, q and D grids.
    Sweep(Settings),
    /// Figure reproduction: fig1..fig5 or long_talks.
    Preset {
        #[arg(value_name = "NAME")]
        preset: String,
        #[command(flatten)]
        settings: Settings,
    },
    /// Run the bundled oracle and invariant checks.
    Validate {
        #[arg(long, value_parser = |s: &str| s.parse::<MasterSeed>().map_err(|e| e.to_string()))]
        seed: Option<MasterSeed>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Files and manifest written by one invocation.
#[derive(Debug)]
pub struct Written {
    pub manifest_path: PathBuf,
    pub files: Vec<PathBuf>,
    pub manifest: Manifest,
}

fn sweep_error(e: SweepError) -> CliError {
    match e {
        SweepError::Point {
            eta,
            q,
            max_duration,
            source,
        } => CliError::Usage(format!("grid point eta={eta} q={q} D={max_duration}: {source}")),
        SweepError::EmptyGrid(_) | SweepError::NoRuns | SweepError::UnknownPreset(_) => CliError::Usage(e.to_string()),
        other => CliError::Runtime(other.to_string()),
    }
}

/// Builds the sweep described by `command`, resolving config files.
pub fn plan(command: &Command) -> Result<(SweepSpec, Effective), CliError> {
    let (label, preset, settings) = match command {
        Command::Run(s) => ("run", None, s),
        Command::Sweep(s) => ("sweep", None, s),
        Command::Preset { preset, settings } => ("preset", Some(preset.clone()), settings),
        Command::Validate { .. } => return Err(CliError::Usage("validate has no sweep plan".into())),
    };
    let settings = settings.clone().resolve()?;
    let mut spec = match &preset {
        Some(name) => workday_core::preset(name.parse::<Preset>().map_err(sweep_error)?),
        None => SweepSpec::default(),
    };
    if label == "run" {
        for (flag, len) in [
            ("--eta", settings.eta.as_ref().map(Vec::len)),
            ("--q", settings.q.as_ref().map(Vec::len)),
            ("--d", settings.d.as_ref().map(Vec::len)),
        ] {
            if len.unwrap_or(1) != 1 {
                return Err(CliError::Usage(format!(
                    "{flag}: `run` takes one value; use `sweep` for grids"
                )));
            }
        }
    }
    settings.apply(&mut spec)?;
    spec.points().map_err(sweep_error)?;
    let name = settings
        .name
        .clone()
        .or_else(|| preset.clone())
        .unwrap_or_else(|| label.to_string());
    if name.is_empty() || name.contains(['/', '\\']) {
        return Err(CliError::Usage(format!("--name: `{name}` is not a plain file prefix")));
    }
    let effective = Effective::new(label, preset, name, &spec, &settings);
    Ok((spec, effective))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

/// Writes the CSV outputs of `result` and the manifest into `effective.out`.
pub fn emit(result: &SweepResult, effective: &Effective, started: Instant) -> Result<Written, CliError> {
    let dir = &effective.out;
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("cannot create output directory {}: {e}", dir.display())))?;
    let name = &effective.name;
    let mut files = vec![write_file(
        dir,
        &format!("{name}_end_of_day.csv"),
        &output::end_of_day_csv(result),
    )?];
    let sorted = result.sorted();
    for point in &sorted {
        if let Some(table) = output::series_csv(point) {
            let file = if sorted.len() == 1 {
                format!("{name}_series.csv")
            } else {
                let p = &point.point.params;
                format!(
                    "{name}_series_eta{}_q{}_D{}.csv",
                    output::format_g6(p.eta()),
                    output::format_g6(p.contact_rate),
                    p.max_duration
                )
            };
            files.push(write_file(dir, &file, &table)?);
        }
    }
    let traced: Vec<_> = sorted.iter().filter_map(|p| p.traces.as_ref()).collect();
    if let [traces] = traced.as_slice() {
        files.push(write_file(
            dir,
            &format!("{name}_trace.csv"),
            &output::trace_csv(traces),
        )?);
    }
    let manifest = Manifest::build(effective, &files, result, started.elapsed())?;
    let manifest_path = write_file(dir, &format!("{name}_manifest.json"), &manifest.to_json())?;
    Ok(Written {
        manifest_path,
        files,
        manifest,
    })
}

/// Runs the sweep planned from `command` and writes its outputs.
pub fn execute_sweep(command: &Command, log: &mut impl Write) -> Result<Written, CliError> {
    let started = Instant::now();
    let (spec, effective) = plan(command)?;
    let points = spec.points().map_err(sweep_error)?.len();
    std::fs::create_dir_all(&effective.out).map_err(|e| {
        CliError::Runtime(format!(
            "cannot create output directory {}: {e}",
            effective.out.display()
        ))
    })?;
    let _ = writeln!(
        log,
        "workday: {}: {points} point(s) x {} run(s), seed {}",
        effective.name, spec.runs_per_point, spec.master_seed
    );
    let result = run_sweep(&spec, effective.workers).map_err(sweep_error)?;
    let written = emit(&result, &effective, started)?;
    let _ = writeln!(
        log,
        "workday: wrote {} file(s) to {} in {:.2}s",
        written.files.len() + 1,
        effective.out.display(),
        started.elapsed().as_secs_f64()
    );
    Ok(written)
}

fn execute_validate(seed: MasterSeed, out: &Path, stdout: &mut impl Write) -> Result<(), CliError> {
    let started = Instant::now();
    let mut report = Vec::new();
    let ok = validation::run_suite(seed, &mut report).map_err(|e| CliError::Runtime(e.to_string()))?;
    let text = String::from_utf8(report).expect("report is UTF-8");
    let _ = stdout.write_all(text.as_bytes());
    if !ok {
        return Err(CliError::Runtime("validation failed".into()));
    }
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::Runtime(format!("cannot create output directory {}: {e}", out.display())))?;
    let report_path = write_file(out, "validate_report.txt", &text)?;
    let manifest = Manifest::for_validate(seed, &report_path, started.elapsed())?;
    write_file(out, "validate_manifest.json", &manifest.to_json())?;
    Ok(())
}

fn report_error(stderr: &mut impl Write, err: &dyn std::fmt::Display, color: bool) {
    let label = if color { "\x1b[1;31merror:\x1b[0m" } else { "error:" };
    let _ = writeln!(stderr, "{label} {err}");
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut stderr = std::io::stderr();
    let color = std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty()) && stderr.is_terminal();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Validate { seed, out } => execute_validate(
            seed.unwrap_or_default(),
            out.as_deref().unwrap_or(Path::new(".")),
            &mut std::io::stdout(),
        ),
        command => execute_sweep(command, &mut stderr).map(|_| ()),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            report_error(&mut stderr, &e, color);
            e.exit_code()
        }
    }
}
