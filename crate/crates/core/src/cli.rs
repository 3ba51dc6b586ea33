//! Command-line front end: argument grammar, subcommand dispatch and exit
//! codes.
//!
//! ```text
//! bulkphonon <subcommand> --config <path> [--in <path>] [--out <path>]
//!            [--high-power] [--seed <u64>] [--flux-points N] [--f-points N]
//! ```
//!
//! Output goes to `--out` when given, otherwise to stdout. Every subcommand is
//! a pure function of the config bytes, input bytes, flags and seed.

use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::acoustics::fd_eigenfrequencies;
use crate::config::RunConfig;
use crate::fitsuite::{extract_branches, fit_avoided_crossing, fit_notches, q_factor, FitResult};
use crate::io;
use crate::spectro::{sweep_spectrogram, AddNoise, Spectrum};
use crate::{Error, Result};

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Invalid configuration, flag value or missing required flag.
pub const EXIT_CONFIG: i32 = 2;
/// Unreadable/unwritable file or malformed input CSV/JSON.
pub const EXIT_IO: i32 = 3;
/// The fit did not converge or the data do not support it.
pub const EXIT_FIT: i32 = 4;

/// Branch peaks must rise above this fraction of the spectrogram maximum.
const BRANCH_PROMINENCE: f64 = 0.05;
/// Branch peaks closer than this many cavity linewidths count as one line.
const BRANCH_SEPARATION_LINEWIDTHS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Coupled odd-mode ladder inside the configured phonon band.
    Modes,
    /// Finite-difference eigenfrequencies against the analytic ladder.
    Eigen,
    /// Noise-free spectrum (one flux point) or flux-swept spectrogram.
    Simulate,
    /// `simulate` plus seeded Gaussian noise.
    Synth,
    /// Avoided-crossing fit of a spectrogram CSV.
    FitCrossing,
    /// Phonon notch fit of a spectrum CSV.
    FitNotches,
    /// Lorentzian quality-factor fit of a spectrum CSV.
    Qfactor,
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "bulkphonon",
    version,
    about = "Bulk phonon ladder simulation and spectroscopy fitting"
)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Input CSV for the fit subcommands.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Drive the cavity hard enough to saturate the qubit (drops the qubit term).
    #[arg(long)]
    pub high_power: bool,
    /// Noise seed for `synth`; overrides `noise.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Flux grid size; overrides `sweep.flux_points`.
    #[arg(long)]
    pub flux_points: Option<usize>,
    /// Frequency grid size; overrides `sweep.f_points`.
    #[arg(long)]
    pub f_points: Option<usize>,
}

/// Flags shared by all subcommands, separated from argument parsing.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub input: Option<PathBuf>,
    pub high_power: bool,
    pub seed: Option<u64>,
    pub flux_points: Option<usize>,
    pub f_points: Option<usize>,
}

impl From<&Cli> for RunOptions {
    fn from(cli: &Cli) -> Self {
        Self {
            input: cli.input.clone(),
            high_power: cli.high_power,
            seed: cli.seed,
            flux_points: cli.flux_points,
            f_points: cli.f_points,
        }
    }
}

/// Result of a subcommand: the file contents and whether a fit converged.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub fit_converged: bool,
}

impl Output {
    fn data(text: String) -> Self {
        Self {
            text,
            fit_converged: true,
        }
    }

    fn fit(fit: &FitResult) -> Self {
        Self {
            text: io::fit_result_json(fit),
            fit_converged: fit.converged,
        }
    }
}

/// Exit code for an error raised while running a subcommand.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::Domain(_) => EXIT_CONFIG,
        Error::Io(_) | Error::Format(_) => EXIT_IO,
        Error::IllPosed(_) | Error::NotFound(_) | Error::Numeric(_) => EXIT_FIT,
    }
}

/// Runs one subcommand and returns the text it emits.
pub fn run_subcommand(command: Command, config: &RunConfig, opts: &RunOptions) -> Result<Output> {
    match command {
        Command::Modes => Ok(Output::data(io::ladder_csv(&config.ladder()?))),
        Command::Eigen => eigen(config).map(Output::data),
        Command::Simulate => simulate(config, opts, None).map(Output::data),
        Command::Synth => {
            let seed = opts.seed.unwrap_or(config.noise.seed);
            simulate(config, opts, Some((config.noise.sigma, seed))).map(Output::data)
        }
        Command::FitCrossing => {
            let sg = io::parse_spectrogram_csv(&read_input(opts)?)?;
            let peak = sg.rows().iter().flatten().fold(0.0_f64, |m, v| m.max(*v));
            if !(peak > 0.0) {
                return Err(Error::NotFound(
                    "spectrogram has no transmission peaks".into(),
                ));
            }
            let points = extract_branches(
                &sg,
                BRANCH_PROMINENCE * peak,
                BRANCH_SEPARATION_LINEWIDTHS * config.cavity.kappa_total,
            )?;
            Ok(Output::fit(&fit_avoided_crossing(&points)?))
        }
        Command::FitNotches => {
            let spectrum = io::parse_spectrum_csv(&read_input(opts)?)?;
            Ok(Output::fit(&fit_notches(
                &spectrum,
                &config.ladder()?,
                &config.cavity,
            )?))
        }
        Command::Qfactor => {
            let spectrum = io::parse_spectrum_csv(&read_input(opts)?)?;
            Ok(Output::fit(&q_factor(&spectrum)?))
        }
    }
}

fn read_input(opts: &RunOptions) -> Result<String> {
    let path = opts
        .input
        .as_ref()
        .ok_or_else(|| Error::config("--in", "required by the fit subcommands"))?;
    Ok(std::fs::read_to_string(path)?)
}

fn eigen(config: &RunConfig) -> Result<String> {
    let v_t = config.shear_velocity();
    let f1 = config.fundamental_hz();
    let fd = fd_eigenfrequencies(
        v_t,
        &config.geometry,
        config.eigen.grid_points,
        config.eigen.count,
    )?;
    let rows: Vec<(u64, f64, f64)> = fd
        .iter()
        .enumerate()
        .map(|(k, &f)| {
            let n = k as u64 + 1;
            (n, f, n as f64 * f1)
        })
        .collect();
    Ok(io::eigen_csv(&rows))
}

fn grid_size(flag: Option<usize>, configured: usize, name: &str) -> Result<usize> {
    let n = flag.unwrap_or(configured);
    if n == 0 {
        return Err(Error::config(name, "must be at least 1"));
    }
    Ok(n)
}

fn simulate(config: &RunConfig, opts: &RunOptions, noise: Option<(f64, u64)>) -> Result<String> {
    let flux_points = grid_size(opts.flux_points, config.sweep.flux_points, "--flux-points")?;
    let f_points = grid_size(opts.f_points, config.sweep.f_points, "--f-points")?;
    if f_points < 2 {
        return Err(Error::config("--f-points", "must be at least 2"));
    }
    let mut model = config.system_model()?;
    if opts.high_power {
        model = model.without_qubit();
    }
    let freqs = config.freq_grid(f_points);
    if flux_points == 1 {
        let flux = config.flux_grid(1)[0];
        let mut spectrum = Spectrum::simulate(&model.with_flux(flux), freqs)?;
        if let Some((sigma, seed)) = noise {
            spectrum = spectrum.add_noise(sigma, seed)?;
        }
        Ok(io::spectrum_csv(&spectrum))
    } else {
        let flux = config.flux_grid(flux_points);
        let mut sg = sweep_spectrogram(&model, &flux, &freqs, opts.high_power)?;
        if let Some((sigma, seed)) = noise {
            sg = sg.add_noise(sigma, seed)?;
        }
        Ok(io::spectrogram_csv(&sg))
    }
}

/// Full CLI run: load config, dispatch, write output. Returns the exit code
/// and prints a one-line diagnostic to stderr on failure.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let config = RunConfig::load(&cli.config)?;
    let output = run_subcommand(cli.command, &config, &RunOptions::from(cli))?;
    match &cli.out {
        Some(path) => io::write_file(path, &output.text)?,
        None => print!("{}", output.text),
    }
    if output.fit_converged {
        Ok(EXIT_OK)
    } else {
        eprintln!("error: fit did not converge");
        Ok(EXIT_FIT)
    }
}
