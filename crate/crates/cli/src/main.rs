//! Command-line driver: each sweep subcommand assembles a config (file +
//! overrides + scenario defaults), runs the model, and emits CSV with a
//! metadata sidecar. Exit codes: 0 success, 1 config error, 2
//! solver/calibration error, 3 oracle failure.

use clap::{ArgAction, Parser, Subcommand};
use eshg_cli::{config, output};
use eshg_core::{
    calibrate, fixed_gain_scan, fit, run_scenario, Error, ExperimentConfig, FitModel, Result,
    RunOutput, Scenario,
};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "eshg-cli",
    version,
    about = "Squeezed-vacuum SHG model: source sweeps, loss scans, classical \
             comparisons, fits, calibration, and self-checks"
)]
struct Cli {
    /// Config file (sectioned key = value; omitted keys take scenario defaults)
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output CSV path; a .meta sidecar lands next to it. Without it the
    /// table goes to stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    /// RNG seed, overriding the config
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Config override, repeatable: --set section.key=value
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE", action = ArgAction::Append)]
    set: Vec<String>,

    /// Echo the effective config to stderr
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pump-energy sweep of the squeezed-vacuum source: gain, photon number,
    /// mode count
    PdcSweep,
    /// Pump-energy sweep of the bright field's beam-size and duration
    /// narrowing
    SizeSweep,
    /// Conversion under loss at matched input flux: lossless and attenuated
    /// curves side by side
    LossFixedFlux,
    /// Transmission scan at a fixed source gain: conversion vs flux with the
    /// field statistics pinned
    LossFixedGain,
    /// Pump sweep comparing squeezed-vacuum conversion against the matched
    /// classical pulse
    ClassicalCompare,
    /// Same sweep as classical-compare, read out as enhancement-ratio curves
    /// and their crossings
    Enhancement,
    /// Weighted least squares on a CSV of x,y[,sigma] columns
    Fit {
        /// Data file: two or three numeric columns, optional header line
        #[arg(long, value_name = "FILE")]
        data: PathBuf,
        /// linear | linear+quadratic | quadratic
        #[arg(long, default_value = "linear")]
        model: String,
    },
    /// Solve the coupling constants against the reference crossover and
    /// write the updated config back
    Calibrate,
    /// Run every self-check and report each invariant by name
    Oracle,
}

/// Scenario the subcommand runs by default, and which `sweep.scenario`
/// values a config may select under it.
fn family(cmd: &Command) -> (Scenario, &'static [Scenario]) {
    match cmd {
        Command::PdcSweep => (Scenario::Fig2a, &[Scenario::Fig2a]),
        Command::SizeSweep => (Scenario::Fig2b, &[Scenario::Fig2b]),
        Command::LossFixedFlux | Command::LossFixedGain => {
            (Scenario::Fig3a, &[Scenario::Fig3a, Scenario::Fig3b])
        }
        Command::ClassicalCompare | Command::Enhancement => (Scenario::Fig4, &[Scenario::Fig4]),
        Command::Calibrate => (Scenario::Calibrate, &Scenario::ALL),
        Command::Fit { .. } | Command::Oracle => {
            unreachable!("fit and oracle run before config assembly")
        }
    }
}

fn code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Domain(_) | Error::Shape(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(code_for(&e))
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Oracle => return run_oracle(),
        Command::Fit { data, model } => return run_fit(data, model),
        _ => {}
    }

    let (default_scenario, allowed) = family(&cli.command);
    let text = match &cli.config {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut cfg = config::parse_config(&text, default_scenario, allowed, &cli.set)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.verbose > 0 {
        eprint!("# effective config\n{}", config::serialize_config(&cfg));
    }

    if matches!(cli.command, Command::Calibrate) {
        return run_calibrate(&cli, cfg);
    }

    let out = match cli.command {
        Command::LossFixedGain => fixed_gain_scan(&cfg)?,
        _ => run_scenario(&cfg)?,
    };
    report(&out);

    match cli.out.clone().or_else(|| cfg.output.as_deref().map(PathBuf::from)) {
        Some(path) => {
            output::write_outputs(&path, &out, &cfg)?;
            eprintln!(
                "wrote {} and {}",
                path.display(),
                output::meta_path(&path).display()
            );
        }
        None => print!("{}", output::csv_text(&out)?),
    }
    Ok(ExitCode::SUCCESS)
}

fn report(out: &RunOutput) {
    eprintln!(
        "{}: {} rows (schema {} v{})",
        out.scenario,
        out.rows.len(),
        out.schema,
        out.schema_version
    );
    for (key, value) in &out.summary.scalars {
        eprintln!("  {key} = {value:.8e}");
    }
    for (name, f) in &out.summary.fits {
        let coeffs: Vec<String> = f
            .coefficients
            .iter()
            .zip(&f.uncertainties)
            .map(|(c, u)| format!("{c:.8e} ± {u:.8e}"))
            .collect();
        eprintln!("  fit {name}: {}", coeffs.join(", "));
    }
    for (label, crossings) in &out.summary.crossovers {
        let xs: Vec<String> = crossings.iter().map(|x| format!("{x:.6e}")).collect();
        eprintln!("  crossing {label}: [{}]", xs.join(", "));
    }
}

fn run_calibrate(cli: &Cli, mut cfg: ExperimentConfig) -> Result<ExitCode> {
    let outcome = calibrate(&cfg)?;
    cfg.coupling.beta = outcome.beta;
    cfg.coupling.nonlinearity_scale = outcome.nonlinearity_scale;
    cfg.coupling.path_efficiency = outcome.path_efficiency;
    eprintln!(
        "calibrated: beta = {:.6}, nonlinearity_scale = {:.6}, path_efficiency = {:.6} \
         (crossover {:.4})",
        outcome.beta, outcome.nonlinearity_scale, outcome.path_efficiency,
        outcome.achieved_crossover
    );
    let text = config::serialize_config(&cfg);
    match cli.out.as_ref().or(cli.config.as_ref()) {
        Some(path) => {
            fs::write(path, text)
                .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn run_oracle() -> Result<ExitCode> {
    let report = eshg_core::oracle::run_all();
    for check in &report.checks {
        let mark = if check.passed { "ok  " } else { "FAIL" };
        println!("{mark} {} — {}", check.name, check.detail);
    }
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    if failed == 0 {
        println!("all {} checks passed", report.checks.len());
        Ok(ExitCode::SUCCESS)
    } else {
        println!("{failed} of {} checks failed", report.checks.len());
        Ok(ExitCode::from(3))
    }
}

fn run_fit(path: &Path, model: &str) -> Result<ExitCode> {
    let model: FitModel = model.parse()?;
    let (xs, ys, sigmas) = read_columns(path)?;
    let result = fit(&xs, &ys, sigmas.as_deref(), model)?;
    println!("fit over {} points", xs.len());
    let names: &[&str] = match model {
        FitModel::Linear => &["a"],
        FitModel::LinearPlusQuadratic => &["a", "b"],
        FitModel::PureQuadratic => &["b"],
    };
    for ((name, c), u) in names.iter().zip(&result.coefficients).zip(&result.uncertainties) {
        println!("{name} = {c:.8e} ± {u:.8e}");
    }
    println!("reduced chi² = {:.6}", result.reduced_chi_square);
    Ok(ExitCode::SUCCESS)
}

/// Reads x,y[,sigma] columns; a non-numeric first line is taken as a header.
fn read_columns(path: &Path) -> Result<(Vec<f64>, Vec<f64>, Option<Vec<f64>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let (mut xs, mut ys, mut sigmas) = (Vec::new(), Vec::new(), Vec::new());
    for (i, record) in reader.records().enumerate() {
        let record =
            record.map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let fields: Option<Vec<f64>> = record.iter().map(|f| f.parse().ok()).collect();
        let Some(fields) = fields else {
            if i == 0 {
                continue;
            }
            return Err(Error::Config(format!(
                "{} line {}: non-numeric field",
                path.display(),
                i + 1
            )));
        };
        if !(2..=3).contains(&fields.len()) {
            return Err(Error::Config(format!(
                "{} line {}: expected 2 or 3 columns, got {}",
                path.display(),
                i + 1,
                fields.len()
            )));
        }
        xs.push(fields[0]);
        ys.push(fields[1]);
        if let Some(&s) = fields.get(2) {
            sigmas.push(s);
        }
    }
    if xs.is_empty() {
        return Err(Error::Config(format!("{}: no data rows", path.display())));
    }
    let sigmas = if sigmas.len() == xs.len() { Some(sigmas) } else { None };
    Ok((xs, ys, sigmas))
}
