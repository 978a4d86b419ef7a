//! `varorder`: batch front end writing CSV/JSON artifacts.
//!
//! Exit status: 0 success, 1 i/o error, 2 configuration error, 3 tolerance
//! or solver failure, 4 a checked property failed.

mod commands;
mod failure;
mod output;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use failure::Failure;

#[derive(Parser)]
#[command(name = "varorder", version, about = "Variable-order nonlocal operator experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Common {
    /// Flat key=value config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Extra config entries, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Normalising constant C_φ.
    Constant {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
        /// direct, reduced or closed-form.
        #[arg(long)]
        method: Option<String>,
    },
    /// C̲(R) and C̄(R) on a list of radii.
    Moments {
        #[command(flatten)]
        common: Common,
        /// Comma-separated radii.
        #[arg(long)]
        radii: Option<String>,
    },
    /// Moment inequalities on random (R, t), the weak-scaling certificate and
    /// the envelope of C_φ(C̲(R)+C̄(R)).
    Bounds {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        cases: Option<usize>,
    },
    /// Limits along kernel sequences with exponents tending to 2 or 0.
    Asymptotics {
        #[command(flatten)]
        common: Common,
        /// power or sum_powers.
        #[arg(long)]
        family: Option<String>,
        /// to-2 or to-0.
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k_min: Option<u32>,
        #[arg(long)]
        k_max: Option<u32>,
        /// moment or operator.
        #[arg(long)]
        quantity: Option<String>,
    },
    /// Operator values of a built-in function at a list of points.
    Operator {
        #[command(flatten)]
        common: Common,
        /// cos, bump, quadratic-cap, w_R or barrier.
        #[arg(long)]
        function: Option<String>,
        /// Points separated by ';', coordinates by ','.
        #[arg(long)]
        points: Option<String>,
        /// linear, plus or minus.
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Barrier exponent, κ₀ search and capped-barrier checks.
    Barrier {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long = "Lambda")]
        big_lambda: Option<f64>,
        #[arg(long = "R")]
        radius: Option<f64>,
        #[arg(long)]
        kappa1: Option<f64>,
    },
    /// One-dimensional Harnack sweep over a σ grid.
    Harnack {
        #[command(flatten)]
        common: Common,
        /// power or sum_powers.
        #[arg(long)]
        family: Option<String>,
        /// Comma-separated exponents.
        #[arg(long)]
        sigma_grid: Option<String>,
        #[arg(long = "R")]
        radius: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
        /// Exterior data: items `bump:C` (unit bump at C·R) or `const:c`,
        /// joined by '+' within a datum and ';' between data.
        #[arg(long)]
        data: Option<String>,
    },
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Constant { common, n, method } => commands::constant(&common, n, method),
        Command::Moments { common, radii } => commands::moments(&common, radii),
        Command::Bounds { common, n, cases } => commands::bounds(&common, n, cases),
        Command::Asymptotics {
            common,
            family,
            target,
            n,
            k_min,
            k_max,
            quantity,
        } => commands::asymptotics(&common, family, target, n, k_min, k_max, quantity),
        Command::Operator {
            common,
            function,
            points,
            kind,
            n,
        } => commands::operator(&common, function, points, kind, n),
        Command::Barrier {
            common,
            n,
            lambda,
            big_lambda,
            radius,
            kappa1,
        } => commands::barrier(&common, n, lambda, big_lambda, radius, kappa1),
        Command::Harnack {
            common,
            family,
            sigma_grid,
            radius,
            h,
            data,
        } => commands::harnack(&common, family, sigma_grid, radius, h, data),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("varorder: {e}");
            ExitCode::from(e.status() as u8)
        }
    }
}
