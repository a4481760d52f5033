use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

// Like print!/println!, but a closed stdout (e.g. `| head`) is not a panic.
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout(), $($t)*);
    }};
}
macro_rules! outln {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

mod commands;
mod model_file;
mod output;

/// Exit status 2: the run was misconfigured. Exit status 3: the mathematics
/// failed at run time (singular Hessian, domain error, ...).
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Math(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Math(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(name = "algebroid", version, about = "Hamiltonian and Lagrangian mechanics on almost-Lie algebroids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Formalism {
    Hamiltonian,
    LagrangianTt,
    LagrangianProlong,
    Forced,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification suite and print a report table.
    Verify {
        /// Builtin name or JSON model file; every builtin when omitted.
        #[arg(long)]
        model: Option<String>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Tolerance for the identities that hold exactly through jets.
        #[arg(long, default_value_t = algebroid_core::verify::ALGEBRAIC_TOL)]
        tol: f64,
        /// Samples per check (each check has its own default).
        #[arg(long)]
        samples: Option<usize>,
        /// Write JSON-lines reports here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a trajectory and write it as CSV.
    Simulate {
        #[arg(long)]
        model: String,
        #[arg(long, value_enum)]
        formalism: Formalism,
        /// Hamiltonian in x1..xn, xi1..xim.
        #[arg(long)]
        h: Option<String>,
        #[arg(long)]
        h_file: Option<PathBuf>,
        /// Lagrangian in x1..xn, y1..ym.
        #[arg(long)]
        l: Option<String>,
        #[arg(long)]
        l_file: Option<PathBuf>,
        /// Force components in x, xi separated by `;`.
        #[arg(long)]
        force: Option<String>,
        #[arg(long)]
        force_file: Option<PathBuf>,
        #[arg(long)]
        dt: f64,
        #[arg(long)]
        t_end: f64,
        /// Initial point, e.g. "x=0.5;xi=1,0,0" (defaults: x = 0, fiber = 1).
        #[arg(long)]
        at: Option<String>,
        /// CSV destination; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print dimensions, structure residuals and the Λ, Ω matrices at a point.
    Inspect {
        #[arg(long)]
        model: String,
        /// Point of E*, e.g. "xi=0,0,1" (defaults: x = 0, xi = 1).
        #[arg(long)]
        at: Option<String>,
        /// Seed for the sampled base points.
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Verify {
            model,
            seed,
            tol,
            samples,
            out,
        } => commands::verify(model.as_deref(), seed, tol, samples, out.as_deref()),
        Command::Simulate {
            model,
            formalism,
            h,
            h_file,
            l,
            l_file,
            force,
            force_file,
            dt,
            t_end,
            at,
            out,
        } => commands::simulate(&commands::SimulateConfig {
            model,
            formalism,
            h: commands::Source::new("--h", h, h_file),
            l: commands::Source::new("--l", l, l_file),
            force: commands::Source::new("--force", force, force_file),
            dt,
            t_end,
            at,
            out,
        }),
        Command::Inspect { model, at, seed } => commands::inspect(&model, at.as_deref(), seed),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
