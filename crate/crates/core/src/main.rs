use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use shadow_rds::harness::runner::is_usage_error;
use shadow_rds::harness::scenarios::{build_scenario, ScenarioParams, SCENARIO_NAMES};
use shadow_rds::harness::{run_experiment, Config};

#[derive(Parser)]
#[command(name = "shadow-rds", version, about = "Shadowing and Lyapunov-exponent experiments for random hyperbolic dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// List the built-in scenarios.
    ListScenarios,
    /// Run every scenario's self-test.
    Selftest,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Run { config } => run(config),
        Command::ListScenarios => {
            let params = ScenarioParams { seed: 1, ..Default::default() };
            for name in SCENARIO_NAMES {
                match build_scenario(name, &params) {
                    Ok(sc) => println!("{name}\t{}", sc.notes),
                    Err(e) => println!("{name}\t(unavailable: {e})"),
                }
            }
            ExitCode::SUCCESS
        }
        Command::Selftest => selftest(),
    }
}

fn run(path: PathBuf) -> ExitCode {
    let cfg = match Config::load(&path) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run_experiment(&cfg) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.pass {
                println!("{} on {}: all certificates pass", cfg.kind.label(), cfg.scenario);
                ExitCode::SUCCESS
            } else {
                eprintln!("{} on {}: certificate failures", cfg.kind.label(), cfg.scenario);
                for f in &outcome.failures {
                    eprintln!("  {f}");
                }
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if is_usage_error(&e) { 2 } else { 1 })
        }
    }
}

fn selftest() -> ExitCode {
    let params = ScenarioParams { seed: 1, ..Default::default() };
    let mut ok = true;
    for name in SCENARIO_NAMES {
        let report = build_scenario(name, &params).and_then(|sc| sc.self_test());
        match report {
            Ok(rep) => {
                for c in &rep.checks {
                    println!("[{}] {name}/{}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
                }
                ok &= rep.passed();
            }
            Err(e) => {
                println!("[FAIL] {name}: {e}");
                ok = false;
            }
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
