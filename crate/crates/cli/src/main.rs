use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use owc_core::agents::exhaustive_optimum;
use owc_core::env::Objective;
use owc_core::experiment::{objective_total, run_compare, run_info, run_training, write_file};
use owc_core::report;
use owc_core::scenario::Scenario;
use owc_core::Error;

/// Channel modelling and resource allocation for indoor optical-wireless HetNets.
#[derive(Debug, Parser)]
#[command(name = "owc", version)]
struct Cli {
    /// Override the training seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the reward objective.
    #[arg(long, global = true, value_parser = parse_objective)]
    objective: Option<Objective>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute the channel gain matrix.
    Channel {
        /// Scenario JSON file, or `table1_default` for the bundled scenario.
        #[arg(long)]
        config: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the Q-learning agent and report its allocation.
    Train {
        #[arg(long)]
        config: String,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Find the exact optimum by exhaustive enumeration.
    Optimal {
        #[arg(long)]
        config: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run Q-learning and the exhaustive optimum and compare them.
    Compare {
        #[arg(long)]
        config: String,
        #[arg(long)]
        out_dir: PathBuf,
        /// Record wall-clock times in summary.csv (makes output non-reproducible).
        #[arg(long)]
        timing: bool,
    },
}

fn parse_objective(s: &str) -> Result<Objective, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn load(config: &str, cli: &Cli) -> owc_core::Result<Scenario> {
    let mut scenario = if config == "table1_default" && !Path::new(config).exists() {
        Scenario::table1_default()
    } else {
        Scenario::load(config)?
    };
    if let Some(seed) = cli.seed {
        scenario.hyperparams.seed = seed;
    }
    if let Some(objective) = cli.objective {
        scenario.reward.objective = objective;
    }
    scenario.validate()?;
    Ok(scenario)
}

fn run(cli: &Cli) -> owc_core::Result<()> {
    match &cli.command {
        Command::Channel { config, out } => {
            let scenario = load(config, cli)?;
            let gains = scenario.gain_matrix()?;
            write_file(out, |w| {
                report::write_gains(w, &run_info(&scenario), &gains)
            })?;
            println!(
                "wrote {} ({} users x {} transmitters)",
                out.display(),
                gains.num_users(),
                gains.num_transmitters()
            );
        }
        Command::Train { config, out_dir } => {
            let scenario = load(config, cli)?;
            let gains = scenario.gain_matrix()?;
            let env = scenario.env(&gains)?;
            let trained = run_training(&env, &scenario)?;
            let info = run_info(&scenario);
            std::fs::create_dir_all(out_dir)?;
            write_file(&out_dir.join("training_log.csv"), |w| {
                report::write_training_log(
                    w,
                    &info,
                    &trained.log,
                    scenario.output.training_log_every,
                )
            })?;
            write_file(&out_dir.join("qlearning_users.csv"), |w| {
                report::write_link_report(
                    w,
                    &info,
                    &trained.report,
                    &gains.tx_ids,
                    &scenario.wavelengths,
                )
            })?;
            println!(
                "action {} total {} {:.6e} in {:.2}s",
                trained.action,
                scenario.reward.objective.label(),
                objective_total(&trained.report, scenario.reward.objective),
                trained.log.wallclock_s
            );
        }
        Command::Optimal { config, out } => {
            let scenario = load(config, cli)?;
            let gains = scenario.gain_matrix()?;
            let env = scenario.env(&gains)?;
            let started = Instant::now();
            let optimum = exhaustive_optimum(&env, &scenario.search)?;
            write_file(out, |w| {
                report::write_link_report(
                    w,
                    &run_info(&scenario),
                    &optimum.report,
                    &gains.tx_ids,
                    &scenario.wavelengths,
                )
            })?;
            println!(
                "action {} reward {:.6e}, {} optimal action(s), {} searched in {:.2}s",
                optimum.action,
                optimum.reward,
                optimum.near_optimal.len(),
                env.space().size(),
                started.elapsed().as_secs_f64()
            );
        }
        Command::Compare {
            config,
            out_dir,
            timing,
        } => {
            let scenario = load(config, cli)?;
            let cmp = run_compare(&scenario)?;
            cmp.write_outputs(out_dir, *timing)?;
            println!(
                "ratio {:.4} ({} optimal action(s), {} visited by the agent)",
                cmp.ratio(),
                cmp.num_optimal_actions(),
                cmp.optimal_actions_visited()
            );
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Budget { .. } => 3,
        Error::Io(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
