//! End-to-end runs: gains, training, exhaustive optimum and their reports.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use crate::agents::{exhaustive_optimum, greedy_allocation, train, Optimum, QTable, TrainingLog};
use crate::channel::ChannelGainMatrix;
use crate::env::{AllocEnv, Objective};
use crate::error::{Error, Result};
use crate::link::LinkReport;
use crate::report::{self, RunInfo};
use crate::scenario::{Scenario, Users};

pub fn run_info(scenario: &Scenario) -> RunInfo {
    RunInfo {
        scenario: scenario.name.clone(),
        training_seed: scenario.hyperparams.seed,
        placement_seed: match scenario.users {
            Users::Uniform { seed, .. } => Some(seed),
            Users::Explicit { .. } => None,
        },
        objective: scenario.reward.objective.label().to_string(),
    }
}

/// The value each objective sums over users.
pub fn objective_total(report: &LinkReport, objective: Objective) -> f64 {
    match objective {
        Objective::TotalSinr => report.total_sinr_linear,
        Objective::TotalRate => report.total_rate,
    }
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub q: QTable,
    pub log: TrainingLog,
    /// Allocation the greedy policy settles on.
    pub action: u64,
    pub report: LinkReport,
}

pub fn run_training(env: &AllocEnv, scenario: &Scenario) -> Result<Trained> {
    let (q, log) = train(env, &scenario.hyperparams)?;
    let action = greedy_allocation(env, &q)?.ok_or_else(|| {
        Error::Config("training stored no Q-values; increase hyperparams.episodes".into())
    })?;
    let report = env.report(action)?;
    Ok(Trained {
        q,
        log,
        action,
        report,
    })
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub info: RunInfo,
    pub objective: Objective,
    pub tx_ids: Vec<String>,
    pub wavelengths: Vec<String>,
    pub gains: ChannelGainMatrix,
    pub trained: Trained,
    pub optimum: Optimum,
    pub optimum_wallclock_s: f64,
    pub training_log_every: u64,
}

impl Comparison {
    /// Q-learning total over the exhaustive optimum's total for the objective.
    pub fn ratio(&self) -> f64 {
        objective_total(&self.trained.report, self.objective)
            / objective_total(&self.optimum.report, self.objective)
    }

    pub fn num_optimal_actions(&self) -> usize {
        self.optimum.near_optimal.len()
    }

    /// How many of the optimal actions the agent stored a value for.
    pub fn optimal_actions_visited(&self) -> usize {
        let states = self.trained.q.states();
        self.optimum
            .near_optimal
            .iter()
            .filter(|&&a| states.iter().any(|&s| self.trained.q.is_visited(s, a)))
            .count()
    }

    /// Writes `gains.csv`, `training_log.csv`, `qlearning_users.csv`,
    /// `optimal_users.csv`, `comparison.csv` and `summary.csv` into `dir`.
    ///
    /// Wall-clock times go into `summary.csv` only when `timing` is set, so
    /// repeated runs produce identical files by default.
    pub fn write_outputs(&self, dir: &Path, timing: bool) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let info = &self.info;
        write_file(&dir.join("gains.csv"), |w| {
            report::write_gains(w, info, &self.gains)
        })?;
        write_file(&dir.join("training_log.csv"), |w| {
            report::write_training_log(w, info, &self.trained.log, self.training_log_every)
        })?;
        write_file(&dir.join("qlearning_users.csv"), |w| {
            report::write_link_report(
                w,
                info,
                &self.trained.report,
                &self.tx_ids,
                &self.wavelengths,
            )
        })?;
        write_file(&dir.join("optimal_users.csv"), |w| {
            report::write_link_report(
                w,
                info,
                &self.optimum.report,
                &self.tx_ids,
                &self.wavelengths,
            )
        })?;
        write_file(&dir.join("comparison.csv"), |w| {
            report::write_comparison_header(w, info)?;
            report::write_comparison_rows(
                w,
                "qlearning",
                &self.trained.report,
                &self.tx_ids,
                &self.wavelengths,
            )?;
            report::write_comparison_rows(
                w,
                "optimal",
                &self.optimum.report,
                &self.tx_ids,
                &self.wavelengths,
            )
        })?;
        write_file(&dir.join("summary.csv"), |w| {
            report::write_summary_header(w, info)?;
            report::write_summary_row(
                w,
                "qlearning",
                &self.trained.report,
                self.optimal_actions_visited(),
                timing.then_some(self.trained.log.wallclock_s),
            )?;
            report::write_summary_row(
                w,
                "optimal",
                &self.optimum.report,
                self.num_optimal_actions(),
                timing.then_some(self.optimum_wallclock_s),
            )
        })
    }
}

pub fn write_file(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> Result<()>,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Gains, Q-learning and the exhaustive optimum for one scenario.
pub fn run_compare(scenario: &Scenario) -> Result<Comparison> {
    scenario.validate()?;
    let gains = scenario.gain_matrix()?;
    let env = scenario.env(&gains)?;
    // refuse before spending time on training
    let size = env.space().size();
    if size > scenario.search.budget {
        return Err(Error::Budget {
            size,
            budget: scenario.search.budget,
        });
    }
    let trained = run_training(&env, scenario)?;
    let started = Instant::now();
    let optimum = exhaustive_optimum(&env, &scenario.search)?;
    let optimum_wallclock_s = started.elapsed().as_secs_f64();
    Ok(Comparison {
        info: run_info(scenario),
        objective: scenario.reward.objective,
        tx_ids: gains.tx_ids.clone(),
        wavelengths: scenario.wavelengths.clone(),
        gains,
        trained,
        optimum,
        optimum_wallclock_s,
        training_log_every: scenario.output.training_log_every,
    })
}
