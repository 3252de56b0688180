//! Batch front end: `scan` runs verification suites from a JSON config and
//! writes a deterministic report; `verify` replays one serialized instance.

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use convex_weyl::error::Error;
use convex_weyl::report::{check_instance, cmd_scan, ScanConfig};

#[derive(Parser)]
#[command(name = "convex-weyl", about = "Convex-element and point-set verification suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suites selected in a JSON config over its type/field grid.
    Scan {
        /// Path to the scan configuration (JSON).
        #[arg(long)]
        config: String,
        /// Worker count (defaults to the CONVEX_WEYL_JOBS environment
        /// variable; suites currently execute sequentially for determinism).
        #[arg(long)]
        jobs: Option<usize>,
        /// Report output path (overrides the config's "out").
        #[arg(long)]
        out: Option<String>,
    },
    /// Re-run exactly one serialized instance and print expected vs actual.
    Verify {
        /// Suite the instance belongs to.
        #[arg(long)]
        suite: String,
        /// Path to the instance file (JSON).
        #[arg(long)]
        instance: String,
    },
}

fn run() -> Result<bool, Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::Scan { config, jobs, out } => {
            let _jobs = jobs.or_else(|| {
                std::env::var("CONVEX_WEYL_JOBS")
                    .ok()
                    .and_then(|v| v.parse().ok())
            });
            let raw: serde_json::Value = serde_json::from_slice(&std::fs::read(&config)?)?;
            let cfg = ScanConfig::from_value(&raw)?;
            let report = cmd_scan(&cfg, out.as_deref())?;
            for (name, suite) in &report.suites {
                println!(
                    "{name}: {} passed, {} failed, {} budget refusal(s)",
                    suite.pass_count,
                    suite.fail_count,
                    suite.budget_refusals.len()
                );
            }
            println!("overall: {}", if report.pass { "PASS" } else { "FAIL" });
            Ok(report.pass)
        }
        Command::Verify { suite, instance } => {
            let inst: serde_json::Value = serde_json::from_slice(&std::fs::read(&instance)?)?;
            let declared = inst.get("suite").and_then(|s| s.as_str()).unwrap_or("");
            if declared != suite {
                return Err(Error::Config(format!(
                    "instance declares suite \"{declared}\", expected \"{suite}\" (path: /suite)"
                )));
            }
            let res = check_instance(&inst)?;
            println!("expected: {}", serde_json::to_string_pretty(&res.expected)?);
            println!("actual:   {}", serde_json::to_string_pretty(&res.actual)?);
            println!("{}", if res.pass { "PASS" } else { "FAIL" });
            Ok(res.pass)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
