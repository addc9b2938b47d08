mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "kstab", version, about = "Exact K-stability invariants of toric filtrations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON input file; `-` reads standard input.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Output file (or directory for `corpus`); standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 1)]
    pub kmin: u32,
    #[arg(long, global = true, default_value_t = 6)]
    pub kmax: u32,
    #[arg(long, global = true, default_value_t = 1)]
    pub stride: u32,
    /// Threshold below which successive differences count as zero in trend checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tolerance: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Futaki invariants of the approximating test configurations.
    Fut,
    /// Chow weights, their trend and the lattice-sum instability test.
    Chow {
        /// Reference value for the mean of G (defaults to the exact mean for toric input).
        #[arg(long)]
        reference: Option<String>,
        /// Number of negative degrees needed to report a witness.
        #[arg(long, default_value_t = 1)]
        required: usize,
    },
    /// L2 and L-infinity norms.
    Norm,
    /// Convex transform, envelopes and sublevel bodies.
    Transform {
        /// Number of equally spaced sublevel heights between min G and max G.
        #[arg(long, default_value_t = 4)]
        levels: u32,
    },
    /// Threshold and corner-simplex witness for the vanishing criterion.
    Witness {
        /// Sublevel height; defaults to the threshold `9/10 max G + 1/10 mean G`.
        #[arg(long)]
        lambda: Option<String>,
    },
    /// Lattice-sum lower bounds on dilated simplices.
    Bounds {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 3)]
        max_n: usize,
        /// Simplex size `c`.
        #[arg(long, default_value = "1")]
        c: String,
        /// Lower bound `L` of the function.
        #[arg(long, default_value = "0")]
        lower: String,
    },
    /// Factorization, flags and Chow weights of a matrix family.
    Arc {
        /// Matrix size for the seeded random family used when no input is given.
        #[arg(long, default_value_t = 3)]
        size: usize,
        /// Truncation order of the factorization.
        #[arg(long)]
        order: Option<usize>,
    },
    /// Runs the invariant pipeline over the built-in corpus.
    Corpus,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(out) => match output::emit(cli.out.as_deref(), &out) {
            Ok(()) => ExitCode::from(if out.diagnostic { 2 } else { 0 }),
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        },
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
