use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use occucert::config::{parse_config, JobConfig};
use occucert::job::{self, RunError, RunOptions, Scope};
use occucert::sdp::InteriorPoint;

#[derive(Parser)]
#[command(version, about = "Occupation-time probability bounds for polynomial SDEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for simulate and audit tasks; OCCUCERT_SEED is used when absent.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for grid points and Monte Carlo paths.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Also write every grid-point SDP in SDPA sparse format.
    #[arg(long, global = true)]
    solver_dump: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verify tasks of a job file.
    Verify {
        /// Job file (JSON)
        config: PathBuf,
    },
    /// Run the simulate and audit tasks of a job file.
    Simulate {
        /// Job file (JSON)
        config: PathBuf,
    },
    /// Run every task of a job file.
    Run {
        /// Job file (JSON)
        config: PathBuf,
    },
    /// Print the report stored in an output directory.
    Report { dir: PathBuf },
}

fn load(path: &Path) -> Result<JobConfig, RunError> {
    let text = std::fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(parse_config(&text)?)
}

fn seed(flag: Option<u64>) -> Result<Option<u64>, String> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("OCCUCERT_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| format!("OCCUCERT_SEED is not an unsigned integer: {s:?}")),
        Err(_) => Ok(None),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("--jobs ignored: {e}");
        }
    }
    let seed = match seed(cli.seed) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let (scope, config) = match cli.command {
        Command::Report { dir } => {
            return match job::load_report(&dir) {
                Ok(r) => {
                    print!("{}", job::render_text(&r));
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            };
        }
        Command::Verify { config } => (Scope::Verify, config),
        Command::Simulate { config } => (Scope::Simulate, config),
        Command::Run { config } => (Scope::All, config),
    };
    let opts = RunOptions {
        scope,
        seed,
        solver_dump: cli.solver_dump,
    };
    let result = load(&config).and_then(|j| job::run(&j, &opts, &InteriorPoint::default()));
    match result {
        Ok(report) => {
            print!("{}", job::render_text(&report));
            let failures = report.solver_failures();
            if failures > 0 {
                eprintln!("error: {failures} grid point(s) ended in a numerical failure");
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
