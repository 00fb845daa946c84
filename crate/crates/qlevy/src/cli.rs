use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "qlevy", version, about = "Spectral representation of discrete laws")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Options shared by every subcommand. Tolerances fall back to `QLEVY_*`
/// environment variables, then to the library defaults.
#[derive(Debug, Args)]
pub struct Common {
    /// Write the main artifact here instead of stdout.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for per-member work.
    #[arg(long, global = true, env = "QLEVY_THREADS")]
    pub threads: Option<usize>,
    /// Aliasing tolerance of the triplet extraction.
    #[arg(long, global = true, env = "QLEVY_TOL")]
    pub tol: Option<f64>,
    /// Initial grid points per torus axis.
    #[arg(long, global = true, env = "QLEVY_N_INIT")]
    pub n_init: Option<usize>,
    /// Largest grid points per torus axis.
    #[arg(long, global = true, env = "QLEVY_N_MAX")]
    pub n_max: Option<usize>,
    /// Bisection depth of the separation search.
    #[arg(long, global = true, env = "QLEVY_MAX_DEPTH")]
    pub max_depth: Option<u32>,
    /// Moduli at or below this count as zeros.
    #[arg(long, global = true, env = "QLEVY_ZERO_TOL")]
    pub zero_tol: Option<f64>,
    /// Certify once every cell bound reaches this fraction of the best value.
    #[arg(long, global = true, env = "QLEVY_TARGET_GAP")]
    pub target_gap: Option<f64>,
    /// Truncation tolerance of the exponential series.
    #[arg(long, global = true, env = "QLEVY_SERIES_TOL")]
    pub series_tol: Option<f64>,
    /// Prefix readings: values below this count as zero.
    #[arg(long, global = true, env = "QLEVY_ZERO_THRESHOLD")]
    pub zero_threshold: Option<f64>,
    /// Prefix readings: allowed growth of the running sup after burn-in.
    #[arg(long, global = true, env = "QLEVY_GROWTH_FACTOR")]
    pub growth_factor: Option<f64>,
    /// Prefix readings: index of the reference member.
    #[arg(long, global = true, env = "QLEVY_BURN_IN")]
    pub burn_in: Option<usize>,
    /// Prefix readings: frequency tail starts, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub tail_schedule: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct CurveRange {
    #[arg(long)]
    pub t_min: Option<f64>,
    /// Defaults to one period of the lattice, or 2π over the smallest generator.
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 1024)]
    pub samples: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify or refute that |f| stays away from zero.
    CheckS { law: PathBuf },
    /// Extract the spectral triplet (γ, λ).
    Triplet {
        law: PathBuf,
        /// Also write the characteristic-function curve as CSV.
        #[arg(long)]
        emit_curves: Option<PathBuf>,
        #[command(flatten)]
        range: CurveRange,
    },
    /// Rebuild a law from a triplet (or round-trip a law).
    Reconstruct { input: PathBuf },
    /// Fractional convolution power F^{*s}.
    Power {
        input: PathBuf,
        #[arg(long)]
        s: f64,
    },
    /// Decide infinite divisibility from the signs of the weights.
    ClassifyId {
        input: PathBuf,
        /// Weights above -tol count as nonnegative; defaults to the tail bound plus 1e-12.
        #[arg(long)]
        id_tol: Option<f64>,
    },
    /// Total-variation distance between two laws.
    Tv { a: PathBuf, b: PathBuf },
    /// Convergence in variation of a law sequence to a limit.
    ConvergeCheck {
        #[arg(long)]
        limit: PathBuf,
        #[arg(required = true)]
        members: Vec<PathBuf>,
        #[arg(long)]
        emit_trends: Option<PathBuf>,
    },
    /// Relative compactness in variation within D_S.
    CompactCheck {
        #[arg(required = true)]
        members: Vec<PathBuf>,
        #[arg(long)]
        emit_trends: Option<PathBuf>,
    },
    /// Stochastic compactness in variation within D_S.
    StochCheck {
        #[arg(required = true)]
        members: Vec<PathBuf>,
        #[arg(long)]
        emit_trends: Option<PathBuf>,
    },
    /// Sample f with a continuous argument.
    Curves {
        law: PathBuf,
        #[command(flatten)]
        range: CurveRange,
    },
}
