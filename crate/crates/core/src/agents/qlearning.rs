use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::qtable::QTable;
use crate::env::{AllocEnv, QosState, Transition};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    /// Learning rate.
    pub alpha: f64,
    /// Discount factor.
    pub gamma: f64,
    pub epsilon_start: f64,
    /// Multiplicative decay applied to epsilon after every step.
    pub epsilon_decay: f64,
    pub epsilon_min: f64,
    pub episodes: u64,
    pub steps_per_episode: u64,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            gamma: 0.0,
            epsilon_start: 1.0,
            epsilon_decay: 0.999,
            epsilon_min: 0.01,
            episodes: 2000,
            steps_per_episode: 10,
            seed: 0,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            (
                "hyperparams.alpha",
                self.alpha > 0.0 && self.alpha <= 1.0,
                "must lie in (0, 1]",
            ),
            (
                "hyperparams.gamma",
                (0.0..1.0).contains(&self.gamma),
                "must lie in [0, 1)",
            ),
            (
                "hyperparams.epsilon_min",
                0.0 <= self.epsilon_min && self.epsilon_min <= self.epsilon_start,
                "must satisfy 0 <= epsilon_min <= epsilon_start",
            ),
            (
                "hyperparams.epsilon_start",
                self.epsilon_start <= 1.0,
                "must be <= 1",
            ),
            (
                "hyperparams.epsilon_decay",
                self.epsilon_decay > 0.0 && self.epsilon_decay <= 1.0,
                "must lie in (0, 1]",
            ),
        ];
        for (field, ok, reason) in checks {
            if !ok {
                return Err(Error::validation(field, reason));
            }
        }
        Ok(())
    }
}

/// Epsilon-greedy choice.
///
/// With probability `eps` a uniform action. Otherwise the state's best stored
/// action if its value is positive, else an unvisited action (whose implicit
/// value 0 beats the stored ones).
pub fn select_action<R: Rng + ?Sized>(state: &QosState, q: &QTable, eps: f64, rng: &mut R) -> u64 {
    let s = state.index();
    if rng.gen::<f64>() < eps {
        return rng.gen_range(0..q.num_actions());
    }
    match q.best_stored(s) {
        Some((a, v)) if v > 0.0 => a,
        best => q
            .sample_unvisited(s, rng)
            .or(best.map(|b| b.0))
            .unwrap_or(0),
    }
}

/// Tabular temporal-difference update; returns the stored value.
pub fn q_update(q: &mut QTable, t: &Transition, hp: &Hyperparams) -> f64 {
    let (s, a) = (t.prev_state.index(), t.action_index);
    let old = q.get(s, a);
    let target = t.reward + hp.gamma * q.max_value(t.next_state.index());
    let new = old + hp.alpha * (target - old);
    q.set(s, a, new);
    new
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub episode: u64,
    pub step: u64,
    pub epsilon: f64,
    pub action: u64,
    pub reward: f64,
    /// Best reward seen so far in the run.
    pub best_reward: f64,
}

#[derive(Debug, Clone, Default)]
pub struct TrainingLog {
    pub steps: Vec<StepRecord>,
    /// `(state, best stored action, value)` for every visited state, ascending.
    pub greedy: Vec<(u64, u64, f64)>,
    pub wallclock_s: f64,
}

/// Runs `episodes * steps_per_episode` interactions from the all-zeros state.
pub fn train(env: &AllocEnv, hp: &Hyperparams) -> Result<(QTable, TrainingLog)> {
    hp.validate()?;
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut q = QTable::new(env.space().size());
    let mut log = TrainingLog::default();
    let mut eps = hp.epsilon_start;
    let mut best = f64::NEG_INFINITY;
    let mut slots = vec![0; env.num_users()];
    let mut occupied = vec![false; env.space().num_slots()];

    for episode in 0..hp.episodes {
        let mut state = env.initial_state();
        for step in 0..hp.steps_per_episode {
            let action = select_action(&state, &q, eps, &mut rng);
            let out = env.outcome_with(action, &mut slots, &mut occupied)?;
            let t = Transition {
                prev_state: state,
                action_index: action,
                reward: out.reward,
                next_state: QosState::from_index(out.state, env.num_users()),
            };
            q_update(&mut q, &t, hp);
            best = best.max(t.reward);
            log.steps.push(StepRecord {
                episode,
                step,
                epsilon: eps,
                action,
                reward: t.reward,
                best_reward: best,
            });
            state = t.next_state;
            eps = (eps * hp.epsilon_decay).max(hp.epsilon_min);
        }
    }
    log.greedy = q
        .states()
        .into_iter()
        .filter_map(|s| q.best_stored(s).map(|(a, v)| (s, a, v)))
        .collect();
    log.wallclock_s = started.elapsed().as_secs_f64();
    Ok((q, log))
}

/// The allocation the greedy policy settles on.
///
/// Follows the best stored action from the initial state until a state
/// repeats and returns the action taken in that recurring state. `None` if
/// the table has nothing stored for a state on the way.
pub fn greedy_allocation(env: &AllocEnv, q: &QTable) -> Result<Option<u64>> {
    let mut seen = Vec::new();
    let mut state = env.initial_state().index();
    loop {
        let Some((action, _)) = q.best_stored(state) else {
            return Ok(None);
        };
        if seen.contains(&state) {
            return Ok(Some(action));
        }
        seen.push(state);
        state = env.outcome(action)?.state;
    }
}
