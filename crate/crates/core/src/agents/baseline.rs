use rand::Rng;

use crate::env::AllocEnv;
use crate::error::{Error, Result};

/// Reward statistics of uniformly drawn actions.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineStats {
    pub draws: u64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// First drawn action attaining `max`.
    pub best_action: u64,
}

pub fn random_baseline<R: Rng + ?Sized>(
    env: &AllocEnv,
    draws: u64,
    rng: &mut R,
) -> Result<BaselineStats> {
    if draws == 0 {
        return Err(Error::Domain(
            "random baseline needs at least one draw".into(),
        ));
    }
    let mut slots = vec![0; env.num_users()];
    let mut occupied = vec![false; env.space().num_slots()];
    let mut stats = BaselineStats {
        draws,
        mean: 0.0,
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
        best_action: 0,
    };
    let mut sum = 0.0;
    for _ in 0..draws {
        let a = rng.gen_range(0..env.space().size());
        let r = env.outcome_with(a, &mut slots, &mut occupied)?.reward;
        sum += r;
        stats.min = stats.min.min(r);
        if r > stats.max {
            stats.max = r;
            stats.best_action = a;
        }
    }
    stats.mean = sum / draws as f64;
    Ok(stats)
}
