//! Command-line dispatcher for the rydpol toolkit.
//!
//! Every subcommand writes its artifacts (JSON for scalar results, CSV for
//! curves) into `--output-dir` together with a `manifest.json` that records
//! the resolved configuration, seed and SHA-256 checksums. `replay` re-runs a
//! manifest and checks that the artifacts come out byte-identical.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use rydpol_core::units::ExperimentConfig;

mod commands;
mod manifest;

pub use manifest::{sha256_hex, Artifact, RunManifest, MANIFEST_FILE};

#[derive(Debug, Parser)]
#[command(
    name = "rydpol",
    version,
    about = "Rydberg polariton storage, microwave control and photon statistics",
    arg_required_else_help = true
)]
pub struct Cli {
    /// Experiment configuration (JSON). Falls back to $RYDPOL_CONFIG, then to
    /// the built-in defaults.
    #[arg(long, global = true, env = "RYDPOL_CONFIG")]
    pub config: Option<PathBuf>,

    /// Master seed of every stochastic stage.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, global = true, default_value = ".")]
    pub output_dir: PathBuf,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Species {
    Rb87,
    Hydrogen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhotonSource {
    /// Retrieved photons of the simulated store/rotate/retrieve shots.
    Protocol,
    /// A fixed number of independent single-photon emitters per pulse.
    Emitters,
    /// Coherent light with Poisson photon number.
    Poisson,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Optical and microwave blockade radii.
    Radius {
        /// Van der Waals coefficient, GHz·µm⁶ (sign ignored).
        #[arg(long, allow_negative_numbers = true)]
        c6: Option<f64>,
        /// EIT linewidth, MHz. Defaults to the configuration value.
        #[arg(long)]
        eit_width: Option<f64>,
        /// Resonant dipole coefficient, GHz·µm³ (sign ignored).
        #[arg(long, allow_negative_numbers = true)]
        c3: Option<f64>,
        /// Microwave Rabi frequency, MHz; adds the microwave radius.
        #[arg(long)]
        omega_mu: Option<f64>,
    },
    /// Quantum-defect energies and the radial matrix element of a transition.
    Structure {
        #[arg(long, value_enum, default_value_t = Species::Rb87)]
        species: Species,
        #[arg(long, default_value_t = 60)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        l: u32,
        #[arg(long, default_value_t = 0.5)]
        j: f64,
        #[arg(long, default_value_t = 59)]
        target_n: u32,
        #[arg(long, default_value_t = 1)]
        target_l: u32,
        #[arg(long, default_value_t = 1.5)]
        target_j: f64,
        /// Angular factor of the dipole moment; defaults to √(2/9).
        #[arg(long)]
        angular_factor: Option<f64>,
    },
    /// Collective retrieval probability against rotation angle.
    RabiCurve {
        #[arg(long, default_value_t = 1)]
        n_polaritons: u32,
        /// rad
        #[arg(long, default_value_t = 4.0 * std::f64::consts::PI)]
        theta_max: f64,
        /// Number of intervals; the curve has steps + 1 rows.
        #[arg(long, default_value_t = 500)]
        steps: usize,
    },
    /// Two-polariton spectrum against separation.
    Eigenscan {
        /// MHz
        #[arg(long, default_value_t = 20.0)]
        omega_mu: f64,
        /// µm
        #[arg(long, default_value_t = 4.0)]
        r_min: f64,
        /// µm
        #[arg(long, default_value_t = 14.0)]
        r_max: f64,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        /// GHz·µm³, signed.
        #[arg(long, allow_negative_numbers = true)]
        c3: Option<f64>,
    },
    /// Mean detected counts against microwave Rabi frequency at fixed pulse length.
    RabiScan {
        /// MHz
        #[arg(long, default_value_t = 1.0)]
        omega_min: f64,
        /// MHz
        #[arg(long, default_value_t = 80.0)]
        omega_max: f64,
        #[arg(long, default_value_t = 40)]
        points: usize,
        #[arg(long, default_value_t = 300.0)]
        pulse_ns: f64,
        #[arg(long, default_value_t = 10_000)]
        trials_per_point: usize,
    },
    /// Pulsed HBT second-order correlation.
    G2 {
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, value_enum, default_value_t = PhotonSource::Protocol)]
        source: PhotonSource,
        /// Emitters per pulse for `--source emitters`.
        #[arg(long, default_value_t = 3)]
        emitters: u32,
        /// Mean photon number for `--source poisson`.
        #[arg(long, default_value_t = 1.0)]
        mean_photons: f64,
        /// Microwave Rabi frequency of the protocol shots, MHz.
        #[arg(long, default_value_t = 0.0)]
        omega_mu: f64,
        #[arg(long, default_value_t = 0.0)]
        pulse_ns: f64,
        /// Relative standard deviation of a slow sinusoidal efficiency drift.
        #[arg(long)]
        drift_std: Option<f64>,
        #[arg(long, default_value_t = 10)]
        max_lag: usize,
    },
    /// Least-squares fit of (x, y, sigma) data.
    Fit {
        #[arg(long, value_parser = ["lorentzian", "rabi_collective"])]
        model: String,
        /// CSV with a header and columns x, y, sigma.
        #[arg(long)]
        input: PathBuf,
        /// Microwave pulse length for the collective Rabi model, ns. Estimated
        /// from the revival period when absent.
        #[arg(long)]
        pulse_ns: Option<f64>,
        /// Fix the Rabi background B at this value instead of fitting it.
        #[arg(long, allow_negative_numbers = true)]
        background: Option<f64>,
    },
    /// Full store / rotate / retrieve run with HBT analysis.
    Protocol {
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 0.0)]
        omega_mu: f64,
        #[arg(long, default_value_t = 0.0)]
        pulse_ns: f64,
        #[arg(long)]
        drift_std: Option<f64>,
        #[arg(long, default_value_t = 10)]
        max_lag: usize,
    },
    /// Re-run a manifest and verify its output checksums.
    Replay { manifest: PathBuf },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Radius { .. } => "radius",
            Command::Structure { .. } => "structure",
            Command::RabiCurve { .. } => "rabi-curve",
            Command::Eigenscan { .. } => "eigenscan",
            Command::RabiScan { .. } => "rabi-scan",
            Command::G2 { .. } => "g2",
            Command::Fit { .. } => "fit",
            Command::Protocol { .. } => "protocol",
            Command::Replay { .. } => "replay",
        }
    }
}

/// Why a run failed; decides the exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments, configuration or input files.
    Usage(String),
    Computation(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Computation(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Computation(m) => f.write_str(m),
        }
    }
}

impl From<rydpol_core::Error> for Failure {
    fn from(e: rydpol_core::Error) -> Self {
        Failure::Computation(e.to_string())
    }
}

pub fn load_config(path: Option<&Path>) -> Result<ExperimentConfig, Failure> {
    match path {
        Some(p) => ExperimentConfig::from_path(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => Ok(ExperimentConfig::default()),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code: 0 on success, 2 on usage errors, 1 on computation
/// errors.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(failure) => {
            eprintln!("error: {failure}");
            failure.exit_code()
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let threads = cli.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Replay { manifest } => manifest::replay(manifest, &cli.output_dir),
        command => {
            let config = load_config(cli.config.as_deref())?;
            manifest::execute(command, &config, cli.seed, &cli.output_dir).map(|_| ())
        }
    })
}
