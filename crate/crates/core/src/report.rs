//! CSV writers for every emitted report.
//!
//! Each file starts with one `#` comment row carrying the seeds and scenario
//! name, followed by the column header. Floats are written in scientific
//! notation with 12 fractional digits so identical runs give identical bytes.

use std::io::Write;

use crate::agents::TrainingLog;
use crate::channel::ChannelGainMatrix;
use crate::error::Result;
use crate::link::LinkReport;

pub const GAINS_HEADER: &str = "user_id,tx_id,h_los,h_first,h_second,h_total";
pub const LINK_HEADER: &str =
    "user_id,tx_id,wavelength,signal_A,interference_A2,noise_A2,sinr_linear,sinr_db,rate_bps_hz";
pub const TRAINING_HEADER: &str = "episode,step,epsilon,action_index,reward,best_reward";
pub const COMPARISON_HEADER: &str = "method,user_id,tx_id,wavelength,sinr_db,rate_bps_hz";
pub const SUMMARY_HEADER: &str = "method,total_sinr,total_rate,num_optimal_actions,wallclock_s";

/// Provenance written as the first row of every report.
#[derive(Debug, Clone, PartialEq)]
pub struct RunInfo {
    pub scenario: String,
    pub training_seed: u64,
    /// `None` when user positions are explicit.
    pub placement_seed: Option<u64>,
    pub objective: String,
}

impl RunInfo {
    fn comment(&self) -> String {
        let placement = self
            .placement_seed
            .map_or_else(|| "explicit".to_string(), |s| s.to_string());
        format!(
            "# scenario={} training_seed={} placement_seed={} objective={}",
            self.scenario, self.training_seed, placement, self.objective
        )
    }
}

pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.12e}")
    } else {
        // inf, -inf, NaN
        format!("{v}")
    }
}

fn preamble(w: &mut impl Write, info: &RunInfo, header: &str) -> Result<()> {
    writeln!(w, "{}", info.comment())?;
    writeln!(w, "{header}")?;
    Ok(())
}

pub fn write_gains(w: &mut impl Write, info: &RunInfo, gains: &ChannelGainMatrix) -> Result<()> {
    preamble(w, info, GAINS_HEADER)?;
    for u in 0..gains.num_users() {
        for (l, id) in gains.tx_ids.iter().enumerate() {
            let t = gains.terms(u, l);
            writeln!(
                w,
                "{u},{id},{},{},{},{}",
                fmt_f64(t.los),
                fmt_f64(t.first_order),
                fmt_f64(t.second_order),
                fmt_f64(t.total())
            )?;
        }
    }
    Ok(())
}

pub fn write_link_report(
    w: &mut impl Write,
    info: &RunInfo,
    report: &LinkReport,
    tx_ids: &[String],
    wavelengths: &[String],
) -> Result<()> {
    preamble(w, info, LINK_HEADER)?;
    for u in &report.users {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            u.user,
            tx_ids[u.tx],
            wavelengths[u.wavelength],
            fmt_f64(u.signal_a),
            fmt_f64(u.interference_a2),
            fmt_f64(u.noise_a2),
            fmt_f64(u.sinr_linear),
            fmt_f64(u.sinr_db),
            fmt_f64(u.rate_bps_hz)
        )?;
    }
    Ok(())
}

/// Writes every `every`-th step plus the final one.
pub fn write_training_log(
    w: &mut impl Write,
    info: &RunInfo,
    log: &TrainingLog,
    every: u64,
) -> Result<()> {
    preamble(w, info, TRAINING_HEADER)?;
    let every = every.max(1) as usize;
    let last = log.steps.len().saturating_sub(1);
    for (i, s) in log.steps.iter().enumerate() {
        if i % every != 0 && i != last {
            continue;
        }
        writeln!(
            w,
            "{},{},{},{},{},{}",
            s.episode,
            s.step,
            fmt_f64(s.epsilon),
            s.action,
            fmt_f64(s.reward),
            fmt_f64(s.best_reward)
        )?;
    }
    Ok(())
}

/// One method's per-user rows of `comparison.csv`.
pub fn write_comparison_rows(
    w: &mut impl Write,
    method: &str,
    report: &LinkReport,
    tx_ids: &[String],
    wavelengths: &[String],
) -> Result<()> {
    for u in &report.users {
        writeln!(
            w,
            "{method},{},{},{},{},{}",
            u.user,
            tx_ids[u.tx],
            wavelengths[u.wavelength],
            fmt_f64(u.sinr_db),
            fmt_f64(u.rate_bps_hz)
        )?;
    }
    Ok(())
}

pub fn write_comparison_header(w: &mut impl Write, info: &RunInfo) -> Result<()> {
    preamble(w, info, COMPARISON_HEADER)
}

pub fn write_summary_header(w: &mut impl Write, info: &RunInfo) -> Result<()> {
    preamble(w, info, SUMMARY_HEADER)
}

/// `wallclock_s` is left empty when `None`.
pub fn write_summary_row(
    w: &mut impl Write,
    method: &str,
    report: &LinkReport,
    num_optimal_actions: usize,
    wallclock_s: Option<f64>,
) -> Result<()> {
    writeln!(
        w,
        "{method},{},{},{num_optimal_actions},{}",
        fmt_f64(report.total_sinr_linear),
        fmt_f64(report.total_rate),
        wallclock_s.map(|t| format!("{t:.3}")).unwrap_or_default()
    )?;
    Ok(())
}
