//! `ttk`: compress data into tensor trains, inspect container files and run
//! the sweep solvers on them.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Exit status of a solver run that stopped without converging.
pub const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "ttk", version, about = "Tensor-train compression and solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compress a raw f64 file into a TT vector (--shape) or operator
    /// (--row-shape and --col-shape, data row-major).
    Compress {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',')]
        shape: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        row_shape: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        col_shape: Option<Vec<usize>>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        max_rank: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Quantize a raw f64 vector, or a row-major matrix when --row-shape
    /// and --col-shape are given, into virtual modes of size --base.
    Quantize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        base: usize,
        /// Split sizes that are not powers of the base into prime factors.
        #[arg(long)]
        mixed_radix: bool,
        #[arg(long)]
        row_shape: Option<usize>,
        #[arg(long)]
        col_shape: Option<usize>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        max_rank: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print kind, modes, ranks and storage of a container.
    Info { file: PathBuf },
    /// Expand a container to a raw f64 file (operators row-major, block
    /// trains one tensor after another).
    Reconstruct {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Smallest eigenpairs of a symmetric operator.
    Eig {
        operator: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Largest singular triplet, or the K smallest singular values with
    /// --smallest.
    Svd {
        operator: PathBuf,
        #[arg(long)]
        smallest: bool,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Generalized eigenpairs of (X A Xᵀ, B).
    Gevd {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Canonical correlations of two data operators.
    Cca {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Replace the covariance Grams by identities.
        #[arg(long)]
        identity_gram: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Least-squares solution of A x = rhs.
    Solve {
        operator: PathBuf,
        #[arg(long)]
        rhs: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    /// Objective and residual tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 20)]
    pub max_sweeps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fixed bond rank (one-site sweeps).
    #[arg(long, conflicts_with = "adaptive")]
    pub rank: Option<usize>,
    /// Rank-adaptive two-site sweeps.
    #[arg(long)]
    pub adaptive: bool,
    /// Truncation tolerance of the adaptive splits.
    #[arg(long, default_value_t = 1e-10, requires = "adaptive")]
    pub trunc_tol: f64,
    /// Rank cap of the adaptive splits.
    #[arg(long, requires = "adaptive")]
    pub max_rank: Option<usize>,
    /// Exit with status 0 even when the sweeps did not converge.
    #[arg(long)]
    pub allow_nonconverged: bool,
    /// Output container; the report and trajectory are written beside it.
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compress {
            input,
            shape,
            row_shape,
            col_shape,
            tol,
            max_rank,
            out,
        } => commands::compress(&input, shape, row_shape, col_shape, tol, max_rank, &out),
        Command::Quantize {
            input,
            base,
            mixed_radix,
            row_shape,
            col_shape,
            tol,
            max_rank,
            out,
        } => commands::quantize(&input, base, mixed_radix, row_shape, col_shape, tol, max_rank, &out),
        Command::Info { file } => commands::info(&file),
        Command::Reconstruct { file, out } => commands::reconstruct(&file, &out),
        Command::Eig { operator, k, solver } => commands::eig(&operator, k, &solver),
        Command::Svd {
            operator,
            smallest,
            k,
            solver,
        } => commands::svd(&operator, smallest, k, &solver),
        Command::Gevd { x, a, b, k, solver } => commands::gevd(&x, &a, &b, k, &solver),
        Command::Cca {
            x,
            y,
            k,
            identity_gram,
            solver,
        } => commands::cca(&x, &y, k, identity_gram, &solver),
        Command::Solve { operator, rhs, solver } => commands::solve(&operator, &rhs, &solver),
    };
    match result {
        Ok(commands::Outcome::Done) => ExitCode::SUCCESS,
        Ok(commands::Outcome::NotConverged) => {
            eprintln!("error: sweeps did not converge (use --allow-nonconverged to accept)");
            ExitCode::from(EXIT_NOT_CONVERGED)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
