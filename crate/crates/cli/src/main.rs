use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use surfacing_cli::check::{check_graph, Targets};
use surfacing_cli::{
    compare, execute, monitor_config_from_env, summary, traces, CliError, Scenario, Status,
};
use surfacing_core::{Graph, StateVector};

/// Event-driven simulator for consensus among intermittently connected agents.
#[derive(Parser)]
#[command(name = "consensus-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write CSV traces.
    Run {
        scenario: PathBuf,
        /// Overrides the scenario's `output` directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run scenarios sharing a graph and x0 in parallel and tabulate them.
    Compare {
        #[arg(required = true, num_args = 2..)]
        scenarios: Vec<PathBuf>,
    },
    /// Print V(x0) and 2/lambda_max for a graph file and compare with targets.
    CheckGraph {
        graph: PathBuf,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        x0: Vec<f64>,
        #[arg(long, allow_hyphen_values = true)]
        target_v: Option<f64>,
        #[arg(long)]
        target_period: Option<f64>,
        #[arg(long, default_value_t = 1e-9)]
        v_tol: f64,
        #[arg(long, default_value_t = 1e-4)]
        period_tol: f64,
        /// List every edge set on the same agents that matches both targets.
        #[arg(long)]
        search: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.status as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<Status, CliError> {
    match command {
        Command::Run { scenario, output } => {
            let monitor = monitor_config_from_env()?;
            let s = Scenario::load(&scenario)?;
            let result = execute(&s, &monitor)?;
            let dir = output.unwrap_or_else(|| s.output.clone());
            traces::write_all(&result, &dir).map_err(|e| {
                CliError::usage(format!("cannot write traces to {}: {e}", dir.display()))
            })?;
            print!("{}", summary(&s, &result));
            println!("traces     {}", dir.display());
            for v in &result.violations {
                eprintln!("violation: {v}");
            }
            Ok(if result.violations.is_empty() {
                Status::Pass
            } else {
                Status::Violation
            })
        }
        Command::Compare { scenarios } => {
            let monitor = monitor_config_from_env()?;
            let loaded = scenarios
                .iter()
                .map(Scenario::load)
                .collect::<Result<Vec<_>, _>>()?;
            let table = compare(&loaded, &monitor)?;
            print!("{table}");
            Ok(if table.any_violation() {
                Status::Violation
            } else {
                Status::Pass
            })
        }
        Command::CheckGraph {
            graph,
            x0,
            target_v,
            target_period,
            v_tol,
            period_tol,
            search,
        } => {
            let g = match Graph::load(&graph) {
                Ok(Ok(g)) => g,
                Ok(Err(e)) => return Err(CliError::usage(format!("{}: {e}", graph.display()))),
                Err(e) => {
                    return Err(CliError::usage(format!(
                        "cannot read {}: {e}",
                        graph.display()
                    )))
                }
            };
            let x0 = StateVector::new(x0).map_err(|e| CliError::usage(format!("--x0: {e}")))?;
            let targets = Targets {
                v: target_v,
                period: target_period,
                v_tol,
                period_tol,
                search,
            };
            let check = check_graph(&g, &x0, &targets)?;
            print!("{}", check.report);
            Ok(if check.passed() {
                Status::Pass
            } else {
                Status::Violation
            })
        }
    }
}
