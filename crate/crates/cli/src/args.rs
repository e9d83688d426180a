//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::parse::{self, Real};

#[derive(Debug, Parser)]
#[command(name = "weyllab", version, about = "Experiments on quadratic exponential sums")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Result format; csv is available for tabular commands.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate f(x,t) at points.
    Eval(EvalArgs),
    /// Superlevel strip counts and box norms.
    Levelsets(LevelsetArgs),
    /// Rational incidence counts.
    Incidence(IncidenceArgs),
    /// Major/minor arc decomposition of the kernel.
    Kernel(KernelArgs),
    /// Weighted L2 ratio on B_R.
    Weights(WeightsArgs),
    /// Sharpness constructions.
    Counterexample(CounterexampleArgs),
    /// The full bound battery and ledger.
    Suite(SuiteArgs),
    /// Number-theoretic helpers.
    Rationals(RationalsArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Eval(_) => "eval",
            Command::Levelsets(_) => "levelsets",
            Command::Incidence(_) => "incidence",
            Command::Kernel(_) => "kernel",
            Command::Weights(_) => "weights",
            Command::Counterexample(_) => "counterexample",
            Command::Suite(_) => "suite",
            Command::Rationals(_) => "rationals",
        }
    }
}

/// Coefficients: a preset name or a CSV file (`n,re,im`).
#[derive(Debug, Clone, Args, Serialize)]
pub struct CoeffArgs {
    /// Number of frequencies (taken from the file when omitted).
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// ones | random-phase | random-gaussian | <file>
    #[arg(long, alias = "preset", default_value = "ones")]
    pub coeffs: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[command(flatten)]
    pub coeffs: CoeffArgs,
    /// Evaluation point `x,t` in [0,1)^2; fractions allowed (repeatable).
    #[arg(long = "point", value_parser = parse::point, required = true)]
    pub points: Vec<(Real, Real)>,
}

#[derive(Debug, Args, Serialize)]
pub struct LevelsetArgs {
    #[command(flatten)]
    pub coeffs: CoeffArgs,
    /// Report every dyadic lambda in [N^1/4, N^1/2] (the default).
    #[arg(long)]
    pub lambda_all: bool,
    /// A single dyadic lambda (repeatable); overrides --lambda-all.
    #[arg(long = "lambda")]
    pub lambdas: Vec<f64>,
    /// Report in the rescaled picture on B_R (strips become R x R^1/2 tubes).
    #[arg(long)]
    pub rescaled: bool,
    /// Also report L4 / local L2 norms on the M heaviest strip boxes.
    #[arg(long = "boxes")]
    pub boxes: Option<usize>,
    #[arg(long, default_value_t = 4)]
    pub x_oversample: usize,
    #[arg(long, default_value_t = 4)]
    pub t_oversample: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Random,
    Sharp,
    File,
}

#[derive(Debug, Args, Serialize)]
pub struct IncidenceArgs {
    #[arg(long, value_enum, default_value_t = Family::Random)]
    pub family: Family,
    #[arg(long = "N")]
    pub n: usize,
    /// Family size (random) or the configuration parameter M (sharp).
    #[arg(long = "M")]
    pub m: Option<usize>,
    /// Dyadic scale; `all` scans every dyadic Q <= N.
    #[arg(long = "Q", default_value = "1")]
    pub q_scale: String,
    /// Denominator of the sharp configuration (defaults to Q).
    #[arg(long = "q")]
    pub q: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub tol_mult: f64,
    /// CSV `j,t` of points for `--family file`.
    #[arg(long)]
    pub points: Option<PathBuf>,
    /// Include the incidence list (exhaustive; small families only).
    #[arg(long)]
    pub records: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelReport {
    Sup,
    Bilinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    Adversarial,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cutoff {
    Desk,
    LogPower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smooth {
    C2,
    C3,
}

#[derive(Debug, Args, Serialize)]
pub struct KernelArgs {
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = KernelReport::Sup)]
    pub report: KernelReport,
    /// Box counts for the bilinear report.
    #[arg(long = "M", value_parser = parse::usize_list, default_value = "1,4,16")]
    pub m: ::std::vec::Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Selection::Adversarial)]
    pub selection: Selection,
    #[arg(long, value_enum, default_value_t = Smooth::C2)]
    pub smoothness: Smooth,
    #[arg(long, value_enum, default_value_t = Cutoff::Desk)]
    pub cutoff: Cutoff,
    /// CSV of per-row maxima of |K|, |K_Q| and |K'|.
    #[arg(long)]
    #[serde(skip)]
    pub rows_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightAction {
    Ratio,
    OneDim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    Uniform,
    Weyl,
    Greedy,
    Random1d,
    Lattice,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Horizontal,
    All,
}

#[derive(Debug, Args, Serialize)]
pub struct WeightsArgs {
    #[arg(value_enum, default_value_t = WeightAction::Ratio)]
    pub action: WeightAction,
    /// Ball scale R; must be a perfect square n^2, and n is the number of frequencies.
    #[arg(long = "N", alias = "R")]
    pub r_scale: u64,
    /// ones | random-phase | random-gaussian | <file>
    #[arg(long, alias = "preset", default_value = "ones")]
    pub coeffs: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = WeightKind::Uniform)]
    pub weight: WeightKind,
    /// CSV `x_cell,t_cell,mass` for `--weight file`.
    #[arg(long)]
    pub weight_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Horizontal)]
    pub mode: Mode,
    /// Write the weight as CSV.
    #[arg(long)]
    #[serde(skip)]
    pub weight_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Weyl,
    Jarnik,
}

#[derive(Debug, Args, Serialize)]
pub struct CounterexampleArgs {
    #[arg(long, value_enum, default_value_t = Kind::Jarnik)]
    pub kind: Kind,
    /// Polygon orders for `jarnik`.
    #[arg(long, value_parser = parse::usize_list, default_value = "8,16,32")]
    pub k: ::std::vec::Vec<usize>,
    /// Ball scale R = n^2 for `weyl`.
    #[arg(long = "N", alias = "R")]
    pub r_scale: Option<u64>,
    /// CSV of the lattice values (n, v_n) of the largest curve, or of the Weyl cells.
    #[arg(long)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SuiteArgs {
    #[arg(long = "N", default_value_t = 32)]
    pub n: usize,
    #[arg(long, value_parser = parse::seeds, default_value = "1..5")]
    pub seeds: ::std::vec::Vec<u64>,
    /// Ledger CSV, one row per inequality instance.
    #[arg(long)]
    #[serde(skip)]
    pub ledger: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct RationalsArgs {
    #[command(subcommand)]
    pub op: RationalOp,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "op")]
pub enum RationalOp {
    /// c_q(n).
    Ramanujan {
        #[arg(long)]
        q: u64,
        #[arg(long, allow_negative_numbers = true)]
        n: i64,
    },
    /// The reduced a/q with q <= N and |t - a/q| <= 1/(qN).
    Dirichlet {
        #[arg(long, value_parser = parse::real, allow_negative_numbers = true)]
        t: Real,
        #[arg(long = "N")]
        n: u64,
    },
    /// Reduced fractions of [-1, 1] with denominator in [Q, 2Q).
    Farey {
        #[arg(long = "Q")]
        q_scale: u64,
    },
    /// The major arc of scale Q containing t, if any.
    Arc {
        #[arg(long, value_parser = parse::real, allow_negative_numbers = true)]
        t: Real,
        #[arg(long = "Q")]
        q_scale: u64,
        #[arg(long = "N")]
        n: u64,
    },
}
