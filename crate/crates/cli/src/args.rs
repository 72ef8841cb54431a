use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use spinlab::basis::Sector;
use spinlab::chain::Boundary;
use spinlab::eigen::DEFAULT_SEED;
use spinlab::toric::DegeneracyMethod;

#[derive(Debug, Parser)]
#[command(name = "spinlab", version, about = "Spin-chain, Bethe ansatz, toric-code and lattice-wave computations")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Output document format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Indent JSON output.
    #[arg(long, global = true)]
    pub pretty: bool,
    /// Worker threads (default: available parallelism). 1 runs sequentially.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for Krylov start blocks and random path sampling.
    #[arg(long, default_value_t = DEFAULT_SEED, global = true)]
    pub seed: u64,
    /// Directory for cached spectra.
    #[arg(long, env = "SPINLAB_CACHE_DIR", global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Neither read nor write the cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
    #[command(flatten)]
    pub tolerances: Tolerances,
}

/// Overrides of eigensolver defaults; unset fields keep the library values.
#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct Tolerances {
    /// Relative residual required of each Krylov eigenpair.
    #[arg(long, global = true)]
    pub eig_tol: Option<f64>,
    /// Levels closer than this count as degenerate.
    #[arg(long, global = true)]
    pub cluster_tol: Option<f64>,
    /// Largest dimension solved densely.
    #[arg(long, global = true)]
    pub dense_threshold: Option<usize>,
    #[arg(long, global = true)]
    pub max_restarts: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Heisenberg chain computations.
    #[command(subcommand)]
    Chain(ChainCmd),
    /// Toric-code computations.
    #[command(subcommand)]
    Toric(ToricCmd),
    /// Harmonic lattice waves.
    #[command(subcommand)]
    Wave(WaveCmd),
    /// Landau free-energy minimization.
    #[command(subcommand)]
    Landau(LandauCmd),
    /// Spectra of decoupled subsystems.
    #[command(subcommand)]
    Stack(StackCmd),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Chain(ChainCmd::Spectrum { .. }) => "chain spectrum",
            Command::Chain(ChainCmd::Dispersion { .. }) => "chain dispersion",
            Command::Chain(ChainCmd::Bethe(_)) => "chain bethe",
            Command::Chain(ChainCmd::Yangian { .. }) => "chain yangian",
            Command::Toric(ToricCmd::Spectrum { .. }) => "toric spectrum",
            Command::Toric(ToricCmd::Degeneracy { .. }) => "toric degeneracy",
            Command::Toric(ToricCmd::Braid(_)) => "toric braid",
            Command::Toric(ToricCmd::Lines { .. }) => "toric lines",
            Command::Wave(WaveCmd::Dispersion { .. }) => "wave dispersion",
            Command::Wave(WaveCmd::Integrate { .. }) => "wave integrate",
            Command::Landau(LandauCmd::Minimize(_)) => "landau minimize",
            Command::Stack(StackCmd::Spectra { .. }) => "stack spectra",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryArg {
    Periodic,
    Open,
}

impl From<BoundaryArg> for Boundary {
    fn from(b: BoundaryArg) -> Self {
        match b {
            BoundaryArg::Periodic => Boundary::Periodic,
            BoundaryArg::Open => Boundary::Open,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ChainArgs {
    /// Number of sites.
    #[arg(long = "n")]
    pub n: usize,
    /// Exchange coupling.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub j: f64,
    /// Uniform field.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub b: f64,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Periodic)]
    pub boundary: BoundaryArg,
}

fn parse_sector(s: &str) -> Result<Sector, String> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(Sector::All);
    }
    s.parse::<usize>().map(Sector::Magnons).map_err(|_| format!("expected `all` or a magnon count, got `{s}`"))
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainCmd {
    /// Lowest levels of one sector (or the full space).
    Spectrum {
        #[command(flatten)]
        chain: ChainArgs,
        /// `all` or a number of flipped spins.
        #[arg(long, default_value = "all", value_parser = parse_sector)]
        sector: Sector,
        /// Number of lowest levels; all of them when omitted.
        #[arg(long)]
        k: Option<usize>,
    },
    /// One-magnon dispersion table.
    Dispersion {
        #[command(flatten)]
        chain: ChainArgs,
    },
    /// Bethe root solving, optionally swept over all quantum numbers.
    Bethe(BetheArgs),
    /// Commutator norms of the quadratic Yangian generators, both boundaries.
    Yangian {
        #[arg(long = "n", default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        j: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        b: f64,
    },
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BetheArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Number of magnons (implied by --quantum-numbers when solving one set).
    #[arg(long)]
    pub magnons: Option<usize>,
    /// Comma-separated quantum numbers for a single solve.
    #[arg(long, value_delimiter = ',')]
    pub quantum_numbers: Vec<i64>,
    /// Try every nondecreasing quantum-number tuple.
    #[arg(long)]
    pub sweep: bool,
    /// Match energies against the sector spectrum.
    #[arg(long)]
    pub compare_ed: bool,
    /// Newton tolerance on the wrapped quantization residuals.
    #[arg(long, default_value_t = 1e-12)]
    pub bethe_tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    /// Largest energy difference accepted as an ED match.
    #[arg(long, default_value_t = 1e-8)]
    pub match_tol: f64,
    /// Largest sector dimension diagonalized for --compare-ed.
    #[arg(long, default_value_t = 4096)]
    pub dense_limit: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    Ed,
    Gf2,
}

impl From<MethodArg> for DegeneracyMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Ed => DegeneracyMethod::Ed,
            MethodArg::Gf2 => DegeneracyMethod::Gf2Rank,
        }
    }
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ToricCmd {
    /// Exact spectrum of the plaquette Hamiltonian.
    Spectrum {
        #[arg(long)]
        lx: usize,
        #[arg(long)]
        ly: usize,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Ground-state degeneracy certificate.
    Degeneracy {
        #[arg(long)]
        lx: usize,
        #[arg(long)]
        ly: usize,
        /// Defaults to ED on small lattices and GF(2) rank otherwise.
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
    },
    /// Braiding phases of W/B path pairs.
    Braid(BraidArgs),
    /// Line operators of the given paths, or the logical algebra without --input.
    Lines {
        /// Lattice/path JSON description.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        lx: usize,
        #[arg(long, default_value_t = 4)]
        ly: usize,
    },
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BraidArgs {
    /// Lattice/path JSON description; every black path is braided with every
    /// white one. Random walks are sampled when omitted.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 6)]
    pub lx: usize,
    #[arg(long, default_value_t = 6)]
    pub ly: usize,
    #[arg(long, default_value_t = 500)]
    pub pairs: usize,
    /// Steps per random walk.
    #[arg(long, default_value_t = 8)]
    pub steps: usize,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveCmd {
    /// Measured vs analytic frequency for a set of modes.
    Dispersion {
        #[arg(long = "n", default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        /// Integration length in periods of each mode.
        #[arg(long, default_value_t = 4.0)]
        periods: f64,
        /// Comma-separated mode indices m (k = 2πm/Na); all allowed modes when omitted.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        modes: Vec<i64>,
    },
    /// Integrates one mode.
    Integrate {
        #[arg(long = "n", default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        mode: i64,
        #[arg(long, default_value_t = 100.0)]
        t_final: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
    },
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LandauCmd {
    /// Global minimizer of F(φ) at one τ or over a τ sweep.
    Minimize(LandauArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LandauArgs {
    /// Single temperature.
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["tau_min", "tau_max", "points"])]
    pub tau: Option<f64>,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub tau_c: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, allow_negative_numbers = true, requires_all = ["tau_max", "points"])]
    pub tau_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true, requires_all = ["tau_min", "points"])]
    pub tau_max: Option<f64>,
    #[arg(long, requires_all = ["tau_min", "tau_max"])]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StackCmd {
    /// All pairwise sums of two spectra, ascending.
    Spectra {
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        a: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        b: Vec<f64>,
    },
}
