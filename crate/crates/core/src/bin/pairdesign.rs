use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pairdesign::cli::{self, CommandOutput, ExitStatus, SimulateArgs};
use pairdesign::Error;

#[derive(Parser)]
#[command(name = "pairdesign", version, about = "D-optimal paired comparison designs")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Certified D-optimal design as JSON.
    Design {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimal depths and weights for K = 4..10.
    Table1 {
        #[arg(long)]
        csv: bool,
    },
    /// Normalized variance function of the optimal designs for K = 4..10.
    Table2 {
        #[arg(long)]
        csv: bool,
    },
    /// Re-certify a design document.
    Check { file: PathBuf },
    /// Round a design document to N comparisons.
    Realize {
        file: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate responses and least-squares fits.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        /// Also simulate the uniform depth-1 design with the same N.
        #[arg(long)]
        compare_naive: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the ordered pairs of comparison depth D.
    Orbit {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
    },
    /// Optimal supports for K = 4..kmax against the predicted intermediate depth.
    Probe {
        #[arg(long, default_value_t = 40)]
        kmax: usize,
    },
}

fn read(path: &PathBuf) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<ExitStatus, Error> {
    let done = |out: CommandOutput| {
        print!("{}", out.stdout);
        Ok(out.status)
    };
    match command {
        Command::Design { k, out } => {
            let doc = cli::cmd_design(k)?;
            emit(&doc.to_json(), &out)?;
            Ok(if doc.certified { ExitStatus::Success } else { ExitStatus::Uncertified })
        }
        Command::Table1 { csv } => emit(&cli::cmd_table1(csv)?, &None).map(|_| ExitStatus::Success),
        Command::Table2 { csv } => emit(&cli::cmd_table2(csv)?, &None).map(|_| ExitStatus::Success),
        Command::Check { file } => done(cli::cmd_check(&read(&file)?)?),
        Command::Realize { file, n, format: Format::Csv, out } => {
            emit(&cli::cmd_realize(&read(&file)?, n)?, &out).map(|_| ExitStatus::Success)
        }
        Command::Simulate { file, n, sigma, seed, reps, compare_naive, out } => {
            let args = SimulateArgs { n, sigma, seed, reps, compare_naive };
            emit(&cli::cmd_simulate(&read(&file)?, &args)?, &out).map(|_| ExitStatus::Success)
        }
        Command::Orbit { k, d } => emit(&cli::cmd_orbit(k, d)?, &None).map(|_| ExitStatus::Success),
        Command::Probe { kmax } => done(cli::cmd_probe(kmax)?),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let args = Args::parse();
    let status = run(args.command).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        cli::status_for(&e)
    });
    ExitCode::from(status.code() as u8)
}
