use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use epitb::report::check_table;
use epitb::verify::run_suite;
use epitb::{map, simulate, CliError, RunOutput, Scenario};

#[derive(Parser)]
#[command(name = "epitb", version, about = "Epidemic, coupled-system and two-qubit tight-binding simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write series.csv, series.meta.json and report.json.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run the built-in verification suite.
    Verify {
        /// Case-insensitive substring of the criterion names to run.
        #[arg(long)]
        filter: Option<String>,
    },
    /// Certify the real 2N image of a mapping scenario.
    Map {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn finish(out: RunOutput, dir: &std::path::Path) -> Result<bool, CliError> {
    out.write(dir)?;
    print!("{}", check_table(&out.report.checks));
    Ok(out.report.passed())
}

fn execute(cmd: Command) -> Result<bool, CliError> {
    match cmd {
        Command::Simulate { config, out_dir } => {
            let s = Scenario::load(&config)?;
            finish(simulate(&s)?, &out_dir)
        }
        Command::Map { config, out_dir } => {
            let s = Scenario::load(&config)?;
            finish(map(&s)?, &out_dir)
        }
        Command::Verify { filter } => {
            let results = run_suite(filter.as_deref())?;
            for r in &results {
                println!("{} {:>2} {}", if r.pass { "PASS" } else { "FAIL" }, r.id, r.name);
                for line in check_table(&r.checks).lines() {
                    println!("      {line}");
                }
            }
            Ok(results.iter().all(|r| r.pass))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let outcome = execute(cli.command);
    println!("wall time: {:.3} s", start.elapsed().as_secs_f64());
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
