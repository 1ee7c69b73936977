//! `fkpp`: spectra, ground states, evolution, existence regions and property
//! suites for Fisher–KPP on metric graphs.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "fkpp", version, about = "Fisher-KPP ground states on compact metric graphs")]
struct Cli {
    /// Worker threads for `region` and `validate` sweeps (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GraphArgs {
    /// JSON graph file (explicit edge list or flower shorthand).
    #[arg(long, value_name = "PATH")]
    pub graph: Option<PathBuf>,
    /// Flower shorthand, e.g. `--flower stem=0.8 loops=1.5,1.0` (total loop lengths).
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    pub flower: Vec<String>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteArg {
    Asymptotics,
    Monotonicity,
    Jacobian,
    Dichotomy,
    All,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Principal Kirchhoff-Dirichlet eigenvalue.
    Spectrum {
        #[command(flatten)]
        graph: GraphArgs,
        /// Mesh width of the discretised operator.
        #[arg(long, default_value_t = 1e-3)]
        mesh: f64,
        /// Root tolerance of the secular equation (flowers only).
        #[arg(long, default_value_t = 1e-13)]
        tol: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Output file (stdout when absent).
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Write the eigenfunction as `edge_id,x,u`.
        #[arg(long, value_name = "PATH")]
        eigenfunction: Option<PathBuf>,
    },
    /// Positive ground state of a flower graph.
    Groundstate {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Sample spacing of the reconstructed profile.
        #[arg(long, default_value_t = 1e-3)]
        dx: f64,
        /// JSON summary file (stdout when absent).
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Profile CSV `edge_id,x,u`.
        #[arg(long, value_name = "PATH")]
        profile: Option<PathBuf>,
    },
    /// Run the gradient flow to its attractor.
    Evolve {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 1e-2)]
        mesh: f64,
        #[arg(long, default_value_t = 0.1)]
        dt: f64,
        #[arg(long, default_value_t = 1e3)]
        max_t: f64,
        /// Stop once max |du/dt| falls below this.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Initial data as `edge_id,x,u`; defaults to the constant `--init-value`.
        #[arg(long, value_name = "PATH")]
        init_csv: Option<PathBuf>,
        #[arg(long, default_value_t = 0.5)]
        init_value: f64,
        /// Trace CSV `t,H,sup_norm`.
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
        /// Terminal field CSV `edge_id,x,u`.
        #[arg(long, value_name = "PATH")]
        field: Option<PathBuf>,
        /// JSON summary file (stdout when absent).
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Lower boundary of the existence region.
    Region {
        /// Symmetric flowers: one curve `(L_j, L)` per loop count.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        loops: Vec<usize>,
        /// Two-loop surface `(L_1, L_2, L)` instead of curves.
        #[arg(long)]
        surface: bool,
        /// Samples per axis over `[0, pi/2)`.
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Run property suites.
    Validate {
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
        #[arg(long, default_value_t = 20_240_611)]
        seed: u64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> io::CliResult<i32> {
    match cli.command {
        Command::Spectrum { graph, mesh, tol, format, output, eigenfunction } => {
            commands::spectrum(&graph, mesh, tol, format, output, eigenfunction)
        }
        Command::Groundstate { graph, tol, dx, output, profile } => {
            commands::groundstate(&graph, tol, dx, output, profile)
        }
        Command::Evolve { graph, mesh, dt, max_t, tol, init_csv, init_value, trace, field, output } => {
            let opts = fkpp_core::EvolveOptions { dt, max_t, tol, ..Default::default() };
            commands::evolve(&graph, mesh, opts, init_csv, init_value, trace, field, output)
        }
        Command::Region { loops, surface, samples, format, output } => {
            commands::region(&loops, surface, samples, format, output)
        }
        Command::Validate { suite, seed, output } => commands::validate(suite, seed, output),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FKPP_LOG", "warn")).init();
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
        log::warn!("worker pool: {e}");
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(f) => {
            eprintln!("fkpp: {}", f.message);
            ExitCode::from(f.code as u8)
        }
    }
}
