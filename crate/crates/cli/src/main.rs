use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dhom_cli::check::{run_suite, Fixture, Suite};
use dhom_cli::commands::{self, report, CliError, EXIT_OK, EXIT_USAGE};
use dhom_cli::config::{parse_config, RunConfig};

#[derive(Parser)]
#[command(
    name = "dhom",
    version,
    about = "Homogeneous quantized control toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the configured closed loop and write the trajectory CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export quantization seeds for levels lo..hi (inclusive).
    Seeds {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        levels: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run property checks and print one PASS/FAIL line per property.
    Check {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(parse_config(&text)?)
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Simulate { config, out } => {
            commands::cmd_simulate(&load(&config)?, &out)?;
            Ok(EXIT_OK)
        }
        Command::Seeds {
            config,
            levels,
            out,
        } => {
            let range = commands::parse_levels(&levels)?;
            commands::cmd_seeds(&load(&config)?, range, &out)?;
            Ok(EXIT_OK)
        }
        Command::Check { suite, seed } => {
            let suite: Suite = suite.parse()?;
            let fixture = Fixture {
                seed,
                ..Fixture::default()
            };
            let lines = run_suite(suite, &fixture);
            for line in &lines {
                println!("{line}");
            }
            Ok(if lines.iter().all(|l| l.pass) {
                EXIT_OK
            } else {
                1
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let code = run(cli).unwrap_or_else(|e| {
        report(&format!("error: {e}"));
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
