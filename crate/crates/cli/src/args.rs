use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use memdecay_core::{NormMode, ScaleChoice, TopologyKind};

#[derive(Parser, Debug)]
#[command(
    name = "memdecay",
    version,
    about = "Diagonal decay profiles, class norms and certified inverse decay bounds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a matrix from a JSON generator spec and write it as Matrix Market.
    Generate(GenerateArgs),
    /// Profile, class norms, decay fit and classification.
    Analyze(AnalyzeArgs),
    /// Analysis plus banded and Wiener inverse certificates.
    Bound(BoundArgs),
    /// Certificates checked against the directly computed inverse.
    Verify(VerifyArgs),
    /// Invert directly or by the windowed Neumann series.
    Invert(InvertArgs),
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TopologyArg {
    Linear,
    Circulant,
}

impl From<TopologyArg> for TopologyKind {
    fn from(t: TopologyArg) -> Self {
        match t {
            TopologyArg::Linear => TopologyKind::Linear,
            TopologyArg::Circulant => TopologyKind::Circulant,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    Spectral,
    RowSum,
    ColSum,
}

impl From<NormArg> for NormMode {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Spectral => NormMode::Spectral,
            NormArg::RowSum => NormMode::RowSum,
            NormArg::ColSum => NormMode::ColSum,
        }
    }
}

/// Input matrix and the options shared by analyze, bound and verify.
#[derive(Args, Debug)]
pub struct MatrixArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long, value_enum, default_value = "linear")]
    pub topology: TopologyArg,
    #[arg(long, value_enum, default_value = "spectral")]
    pub norm: NormArg,
    /// Window scale; repeat to report several Wiener norms. The first value
    /// is used for certificates.
    #[arg(long = "N", value_name = "INT", default_value = "1", value_parser = clap::value_parser!(u64).range(1..))]
    pub scales: Vec<u64>,
    /// Highest commutator order in the Sobolev-Wiener norms (linear topology).
    #[arg(long = "sobolev-m", value_name = "INT", default_value_t = 2)]
    pub sobolev_m: usize,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub matrix: MatrixArgs,
    #[arg(long = "profile-csv")]
    pub profile_csv: Option<PathBuf>,
    /// Largest step of the trapezoid rule for the integral Wiener norm.
    #[arg(long = "quad-step", default_value_t = 0.25)]
    pub quad_step: f64,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    #[command(flatten)]
    pub matrix: MatrixArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub matrix: MatrixArgs,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Direct,
    Neumann,
}

#[derive(Args, Debug)]
pub struct InvertArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long, value_enum, default_value = "linear")]
    pub topology: TopologyArg,
    #[arg(long, value_enum, default_value = "spectral")]
    pub norm: NormArg,
    #[arg(long, value_enum, default_value = "direct")]
    pub method: Method,
    /// Window scale for the Neumann split, or `auto`.
    #[arg(long = "N", value_name = "INT|auto", default_value = "auto")]
    pub scale: ScaleChoice,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long = "max-iter", default_value_t = 200)]
    pub max_iter: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub trace: Option<PathBuf>,
}
