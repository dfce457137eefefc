//! Decision makers over an [`AllocEnv`](crate::env::AllocEnv).

mod baseline;
mod exhaustive;
mod qlearning;
mod qtable;

pub use baseline::{random_baseline, BaselineStats};
pub use exhaustive::{argmax_set, exhaustive_optimum, reward_table, Optimum, SearchConfig};
pub use qlearning::{
    greedy_allocation, q_update, select_action, train, Hyperparams, StepRecord, TrainingLog,
};
pub use qtable::{Incumbent, QTable};
