use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use g2roll_cli::{
    cmd_flag, cmd_phi_check, cmd_roll, cmd_scan, cmd_verify_algebra, read_curve, AlgebraConfig, CliError, Format,
    PhiConfig, ScanConfig, Status, Tolerances,
};

/// Rolling distributions, split-octonions and their invariants.
///
/// Tolerances can be overridden through G2ROLL_TOL_<NAME> environment
/// variables (ALGEBRA, PHI_ANNIHILATION, PHI_CONTRAST,
/// PHI_CONTRAST_FRACTION, FLATNESS, RBAR_REL).
#[derive(Parser)]
#[command(name = "g2roll", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Check the split-octonion identities on seeded random pairs.
    VerifyAlgebra {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Self-test: flip a sign in the product so that the suite fails.
        #[arg(long, hide = true)]
        corrupt_sign: bool,
    },
    /// Growth vector of the rolling distribution.
    Flag {
        #[arg(long)]
        rho: f64,
    },
    /// Annihilation of the pushed-forward distribution by the cone point.
    PhiCheck {
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Fundamental form and projective curvature over a list of ρ.
    Scan {
        #[arg(long, value_delimiter = ',', required = true)]
        rhos: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Roll along a contact-point curve read from a file of t,x,y,z lines.
    Roll {
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        curve: PathBuf,
    },
}

fn run(cli: Cli) -> Result<Status, CliError> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let status = match cli.command {
        Command::VerifyAlgebra { seed, samples, corrupt_sign } => {
            let cfg = AlgebraConfig { seed, samples, corrupt_sign, tolerances: Tolerances::from_env()? };
            cmd_verify_algebra(&cfg, &mut out)?
        }
        Command::Flag { rho } => cmd_flag(rho, &mut out)?,
        Command::PhiCheck { rho, samples, seed } => {
            cmd_phi_check(&PhiConfig { rho, samples, seed, tolerances: Tolerances::from_env()? }, &mut out)?
        }
        Command::Scan { rhos, out: path, format, seed } => {
            let format = match format {
                FormatArg::Json => Format::Json,
                FormatArg::Csv => Format::Csv,
            };
            let cfg = ScanConfig { rho_list: rhos, seed, tolerances: Tolerances::from_env()?, output_path: path, format };
            cmd_scan(&cfg, &mut out)?
        }
        Command::Roll { rho, curve } => {
            let file = std::fs::File::open(&curve)?;
            cmd_roll(rho, &read_curve(file)?, &mut out)?
        }
    };
    out.flush()?;
    Ok(status)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(s) => {
            if s == Status::Fail {
                eprintln!("acceptance criterion failed");
            }
            ExitCode::from(s.code() as u8)
        }
        Err(e) => {
            eprintln!("g2roll: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
