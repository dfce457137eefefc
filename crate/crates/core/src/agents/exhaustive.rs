use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::AllocEnv;
use crate::error::{Error, Result};
use crate::link::LinkReport;

/// Limits for exact enumeration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    /// Largest action space that will be enumerated.
    pub budget: u64,
    /// Relative tolerance for counting actions as optimal.
    pub tolerance: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            budget: 5_000_000,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Optimum {
    /// Lowest index attaining the maximum reward.
    pub action: u64,
    pub reward: f64,
    /// Every action within tolerance of the maximum, ascending.
    pub near_optimal: Vec<u64>,
    pub report: LinkReport,
}

const CHUNK: usize = 1 << 14;

/// Reward of every action, indexed by action.
pub fn reward_table(env: &AllocEnv) -> Result<Vec<f64>> {
    let size = env.space().size() as usize;
    let mut rewards = vec![0.0; size];
    rewards
        .par_chunks_mut(CHUNK)
        .enumerate()
        .try_for_each(|(c, chunk)| -> Result<()> {
            let mut slots = vec![0; env.num_users()];
            let mut occupied = vec![false; env.space().num_slots()];
            let base = (c * CHUNK) as u64;
            for (i, r) in chunk.iter_mut().enumerate() {
                *r = env
                    .outcome_with(base + i as u64, &mut slots, &mut occupied)?
                    .reward;
            }
            Ok(())
        })?;
    Ok(rewards)
}

/// Indices whose reward is within `tolerance * |max|` of the maximum.
/// The first element is the lowest-index argmax.
pub fn argmax_set(rewards: &[f64], tolerance: f64) -> Vec<u64> {
    let Some(max) = rewards.iter().copied().reduce(f64::max) else {
        return Vec::new();
    };
    let floor = max - tolerance * max.abs();
    rewards
        .iter()
        .enumerate()
        .filter(|(_, &r)| r >= floor)
        .map(|(i, _)| i as u64)
        .collect()
}

/// Exact optimum by enumerating the whole action space.
pub fn exhaustive_optimum(env: &AllocEnv, cfg: &SearchConfig) -> Result<Optimum> {
    let size = env.space().size();
    if size > cfg.budget {
        return Err(Error::Budget {
            size,
            budget: cfg.budget,
        });
    }
    let rewards = reward_table(env)?;
    let near_optimal = argmax_set(&rewards, cfg.tolerance);
    let (mut action, mut reward) = (near_optimal[0], rewards[near_optimal[0] as usize]);
    for &a in &near_optimal {
        if rewards[a as usize] > reward {
            (action, reward) = (a, rewards[a as usize]);
        }
    }
    Ok(Optimum {
        action,
        reward,
        near_optimal,
        report: env.report(action)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_set_with_ties() {
        let r = [1.0, 3.0, 2.0, 3.0, 3.0 - 1e-12];
        assert_eq!(argmax_set(&r, 0.0), vec![1, 3]);
        assert_eq!(argmax_set(&r, 1e-9), vec![1, 3, 4]);
        assert!(argmax_set(&[], 0.0).is_empty());
    }

    #[test]
    fn negative_maximum_tolerance_band() {
        let r = [-10.0, -10.0 - 1e-9, -11.0];
        assert_eq!(argmax_set(&r, 1e-9), vec![0, 1]);
    }
}
