//! `dispersia <command> [flags]`
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical failure (a residual,
//! table or convergence threshold missed, or a blow-up), 4 i/o error.

mod commands;
mod manifest;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dispersia_core::{GardnerForm, PhysicalParams};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "dispersia", version, about = "Nonlocal KdV-family waves: exact solutions, residual audits, compatibility sweeps and spectral evolution")]
pub struct Cli {
    /// Print machine-readable JSON (sorted keys, 17 significant digits).
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for random test fields.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a traveling-wave family and print its amplitude and speed.
    ///
    /// With --out, writes solution.json and profile.csv (columns: xi,u over one
    /// period, or ξ ∈ [−20, 20] for solitons).
    Solution(SolutionCmd),
    /// Reproduce the reference amplitudes and speeds with PASS/FAIL per row.
    Table(TableCmd),
    /// Residual of an equation for an exact wave (plane-wave mode) or for
    /// gridded fields (grid mode).
    Residual(ResidualCmd),
    /// Integrate an evolution equation on the periodic box.
    ///
    /// With --out, writes run.json, diagnostics.csv (columns: t,mass,l2) and
    /// snap_NNNNN.bin snapshots.
    Evolve(EvolveCmd),
    /// ε-sweep of the Boussinesq pair mismatch and its log-log slope.
    ///
    /// With --out, writes compat_<profile>.csv (columns:
    /// eps,diff_max,r1_max,r2_max,dropped_mean) and report.json.
    Compat(CompatCmd),
    /// Sample a wave or a random test field on a grid.
    Export(ExportCmd),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PhysArgs {
    #[arg(long, default_value_t = 0.15)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.05)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    /// Bond number.
    #[arg(long, default_value_t = 0.0)]
    pub tau: f64,
}

impl PhysArgs {
    pub fn params(&self) -> dispersia_core::Result<PhysicalParams> {
        PhysicalParams::new(self.alpha, self.beta, self.gamma, self.delta, self.tau)
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct WaveArgs {
    #[arg(long, default_value_t = 1.0)]
    pub k: f64,
    #[arg(long, default_value_t = 0.5)]
    pub l: f64,
    /// Elliptic parameter for periodic families.
    #[arg(long)]
    pub m: Option<f64>,
    /// λ of the classical KP frame; KP families without it use the moving frame.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct SolutionCmd {
    /// soliton, cnoidal-math, cnoidal-phys, superposition-{math,phys}[-plus|-minus],
    /// kp-soliton, kp-superposition
    pub family: String,
    #[command(flatten)]
    pub wave: WaveArgs,
    #[command(flatten)]
    pub phys: PhysArgs,
    /// Profile samples written to profile.csv.
    #[arg(long, default_value_t = 512)]
    pub samples: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct TableCmd {
    #[arg(long, default_value_t = dispersia_core::table::DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 1.0)]
    pub k: f64,
    #[arg(long, default_value_t = 0.5)]
    pub l: f64,
    #[arg(long, default_value_t = 0.999)]
    pub m_cno: f64,
    #[arg(long, default_value_t = 0.85989)]
    pub m_sup: f64,
    #[command(flatten)]
    pub phys: PhysArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize, PartialEq, Eq)]
pub enum FormArg {
    Consistent,
    WithCubic,
}

impl From<FormArg> for GardnerForm {
    fn from(f: FormArg) -> Self {
        match f {
            FormArg::Consistent => GardnerForm::Consistent,
            FormArg::WithCubic => GardnerForm::WithCubic,
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct ResidualCmd {
    /// kdv21, kdv21-bottom, kp-fixed, kp-classical, kp-moving, kdv5-21,
    /// kdv5-21-bottom, kp5, gardner21, gardner21-bottom, gardner11
    pub equation: String,
    /// Exact family to audit in plane-wave mode.
    #[arg(long, conflicts_with_all = ["soliton", "kp_soliton", "field", "random"])]
    pub family: Option<String>,
    /// Shorthand for --family soliton.
    #[arg(long)]
    pub soliton: bool,
    /// Shorthand for --family kp-soliton.
    #[arg(long)]
    pub kp_soliton: bool,
    /// Field2D binary file holding u (grid mode).
    #[arg(long, requires = "field_t")]
    pub field: Option<PathBuf>,
    /// Field2D binary file holding u_t.
    #[arg(long)]
    pub field_t: Option<PathBuf>,
    /// Seeded random profile as u with u_t = 0 (grid mode).
    #[arg(long)]
    pub random: bool,
    #[arg(long, default_value_t = 64)]
    pub nx: usize,
    #[arg(long, default_value_t = 32)]
    pub ny: usize,
    /// JSON list of bathymetry segments for bottom equations.
    #[arg(long)]
    pub bathymetry: Option<PathBuf>,
    #[command(flatten)]
    pub wave: WaveArgs,
    #[command(flatten)]
    pub phys: PhysArgs,
    #[arg(long, value_enum, default_value_t = FormArg::Consistent)]
    pub gardner_form: FormArg,
    /// Drop the γ² nested-integral term of kp5.
    #[arg(long)]
    pub no_gamma2: bool,
    /// ξ samples in plane-wave mode.
    #[arg(long, default_value_t = 2001)]
    pub samples: usize,
    /// Fail (exit 3) above this max-abs; plane-wave mode defaults to 1e-10.
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct EvolveCmd {
    /// JSON run description; without it the soliton-transit benchmark runs.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Also run at dt/2 and dt/4 against a dt/8 reference and report the order.
    #[arg(long)]
    pub convergence: bool,
    /// Fail (exit 3) when the shape error against the exact wave exceeds this.
    #[arg(long)]
    pub max_error: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize, PartialEq, Eq)]
pub enum ProfileArg {
    Soliton,
    Random,
    Both,
}

#[derive(Args, Debug, Serialize)]
pub struct CompatCmd {
    /// case5, case6 or case7
    #[arg(long)]
    pub case: String,
    #[arg(long, default_value_t = 1)]
    pub order: u32,
    /// Decreasing ε values; defaults to 0.1,0.05,0.025,0.0125, or
    /// 0.01,0.005,0.0025,0.00125 when corrections are broken.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = ProfileArg::Both)]
    pub profile: ProfileArg,
    /// Switch off a correction (Qa, Qb, Qg, ...); repeatable.
    #[arg(long = "break")]
    pub broken: Vec<String>,
    /// Coefficient of a trial (γ/α)∫∫u_yy correction.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub trial_ga: f64,
    #[arg(long, default_value_t = 0.0)]
    pub tau: f64,
    #[arg(long, value_enum, default_value_t = FormArg::Consistent)]
    pub gardner_form: FormArg,
    /// Tent bathymetry of this height over the box (Case5 only).
    #[arg(long)]
    pub tent: Option<f64>,
    #[arg(long, default_value_t = 128)]
    pub nx: usize,
    #[arg(long, default_value_t = 64)]
    pub ny: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize, PartialEq, Eq)]
pub enum FormatArg {
    Bin,
    Csv,
}

#[derive(Args, Debug, Serialize)]
pub struct ExportCmd {
    /// Family to sample; omit with --random.
    #[arg(long, required_unless_present = "random")]
    pub family: Option<String>,
    #[arg(long)]
    pub random: bool,
    #[command(flatten)]
    pub wave: WaveArgs,
    #[command(flatten)]
    pub phys: PhysArgs,
    #[arg(long, default_value_t = 128)]
    pub nx: usize,
    #[arg(long, default_value_t = 64)]
    pub ny: usize,
    #[arg(long, default_value_t = 40.0)]
    pub lx: f64,
    #[arg(long, default_value_t = 40.0)]
    pub ly: f64,
    /// Time at which to sample the wave.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t: f64,
    /// Also write u_t = −ω/k · u_x of the wave as <stem>_t.<ext>.
    #[arg(long)]
    pub with_t: bool,
    #[arg(long, value_enum, default_value_t = FormatArg::Bin)]
    pub format: FormatArg,
    /// Output file; its directory receives manifest.json.
    #[arg(long)]
    pub out: PathBuf,
}

/// Why a command failed, mapped onto the exit code.
#[derive(Debug)]
pub enum Failure {
    Core(dispersia_core::Error),
    /// A numerical criterion was evaluated and missed.
    Threshold(String),
}

impl From<dispersia_core::Error> for Failure {
    fn from(e: dispersia_core::Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Core(e) if e.is_validation() => 2,
            Failure::Core(e) if e.is_io() => 4,
            Failure::Core(_) | Failure::Threshold(_) => 3,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Core(e) => eprintln!("error: {e}"),
                Failure::Threshold(m) => eprintln!("FAIL: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
