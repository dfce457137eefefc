//! The allocation MDP.
//!
//! A state is the QoS bit vector of the users, an action is the index of one
//! injective map from users to `(transmitter, wavelength)` slots. Users are
//! static, so the next state depends only on the action taken.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::{rate, to_db, Assignment, LinkBudget, LinkReport};

/// Per-user QoS flags; bit `u` of [`index`](Self::index) is user `u`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QosState {
    bits: Vec<bool>,
}

impl QosState {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn zeros(num_users: usize) -> Self {
        Self::new(vec![false; num_users])
    }

    pub fn from_index(index: u64, num_users: usize) -> Self {
        Self::new((0..num_users).map(|u| index >> u & 1 == 1).collect())
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn index(&self) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .fold(0, |acc, (u, &b)| acc | (b as u64) << u)
    }

    pub fn satisfied(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// All injective user-to-slot maps, ranked lexicographically by
/// (slot of user 0, slot of user 1, ...).
///
/// Slots are ordered by transmitter index, then wavelength index.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSpace {
    num_users: usize,
    num_transmitters: usize,
    num_wavelengths: usize,
    /// `suffix[k]` = number of completions once users `0..=k` are placed.
    suffix: Vec<u64>,
    size: u64,
}

impl ActionSpace {
    pub fn new(num_users: usize, num_transmitters: usize, num_wavelengths: usize) -> Result<Self> {
        let slots = num_transmitters * num_wavelengths;
        if num_users == 0 {
            return Err(Error::Domain("action space needs at least one user".into()));
        }
        if num_users > slots {
            return Err(Error::Domain(format!(
                "{num_users} users cannot be placed on {slots} slots"
            )));
        }
        if num_users > 64 {
            return Err(Error::Domain("at most 64 users are supported".into()));
        }
        let mut suffix = vec![1u64; num_users];
        for k in (0..num_users.saturating_sub(1)).rev() {
            let remaining = (slots - k - 1) as u64;
            suffix[k] = suffix[k + 1]
                .checked_mul(remaining)
                .ok_or_else(|| Error::Domain("action space size overflows u64".into()))?;
        }
        let size = suffix[0]
            .checked_mul(slots as u64)
            .ok_or_else(|| Error::Domain("action space size overflows u64".into()))?;
        Ok(Self {
            num_users,
            num_transmitters,
            num_wavelengths,
            suffix,
            size,
        })
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_slots(&self) -> usize {
        self.num_transmitters * self.num_wavelengths
    }

    /// `(transmitter, wavelength)` of slot `s`.
    pub fn slot(&self, s: usize) -> (usize, usize) {
        (s / self.num_wavelengths, s % self.num_wavelengths)
    }

    /// Writes the slot index of every user for action `index` into `out`.
    pub fn decode_into(&self, index: u64, out: &mut [usize]) -> Result<()> {
        if index >= self.size {
            return Err(Error::Domain(format!(
                "action index {index} out of range for a space of {}",
                self.size
            )));
        }
        let mut used = 0u128;
        let mut rest = index;
        for (k, slot) in out.iter_mut().enumerate().take(self.num_users) {
            let mut j = rest / self.suffix[k];
            rest %= self.suffix[k];
            // j-th unused slot
            let mut s = 0;
            loop {
                if used >> s & 1 == 0 {
                    if j == 0 {
                        break;
                    }
                    j -= 1;
                }
                s += 1;
            }
            used |= 1 << s;
            *slot = s;
        }
        Ok(())
    }

    pub fn index_to_assignment(&self, index: u64) -> Result<Assignment> {
        let mut slots = vec![0; self.num_users];
        self.decode_into(index, &mut slots)?;
        Assignment::new(
            self.num_transmitters,
            self.num_wavelengths,
            slots.into_iter().map(|s| self.slot(s)).collect(),
        )
    }

    pub fn assignment_to_index(&self, a: &Assignment) -> Result<u64> {
        if a.num_users() != self.num_users
            || a.num_transmitters() != self.num_transmitters
            || a.num_wavelengths() != self.num_wavelengths
        {
            return Err(Error::Assignment(
                "assignment shape does not match the action space".into(),
            ));
        }
        let mut used = 0u128;
        let mut index = 0u64;
        for (k, &(l, w)) in a.slots().iter().enumerate() {
            let s = l * self.num_wavelengths + w;
            let below_unused = (0..s).filter(|&t| used >> t & 1 == 0).count() as u64;
            index += below_unused * self.suffix[k];
            used |= 1 << s;
        }
        Ok(index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Per-user metric is the linear SINR; its QoS threshold is in dB.
    TotalSinr,
    /// Per-user metric is the spectral efficiency in bits/s/Hz.
    TotalRate,
}

impl Objective {
    pub fn label(self) -> &'static str {
        match self {
            Objective::TotalSinr => "sinr",
            Objective::TotalRate => "rate",
        }
    }
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sinr" | "total_sinr" => Ok(Objective::TotalSinr),
            "rate" | "total_rate" => Ok(Objective::TotalRate),
            other => Err(Error::validation(
                "objective",
                format!("expected sinr or rate, got {other:?}"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    pub objective: Objective,
    /// Per-user QoS threshold: dB for [`Objective::TotalSinr`], bits/s/Hz
    /// for [`Objective::TotalRate`].
    pub qos_threshold: f64,
    /// Penalty subtracted once per user below the threshold.
    pub penalty_weight: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            objective: Objective::TotalSinr,
            qos_threshold: 36.0,
            penalty_weight: 10.0,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.penalty_weight.is_finite() && self.penalty_weight >= 0.0) {
            return Err(Error::validation(
                "reward.penalty_weight",
                format!("must be finite and >= 0, got {}", self.penalty_weight),
            ));
        }
        if self.qos_threshold.is_nan() || self.qos_threshold == f64::NEG_INFINITY {
            return Err(Error::validation(
                "reward.qos_threshold",
                "must be a number below +inf or +inf",
            ));
        }
        Ok(())
    }

    /// Summed metric and the value compared against the threshold, for a
    /// user with the given linear SINR.
    pub fn metric(&self, sinr_linear: f64, rate_scale: f64) -> (f64, f64) {
        match self.objective {
            Objective::TotalSinr => (sinr_linear, to_db(sinr_linear)),
            Objective::TotalRate => {
                let r = rate(sinr_linear, rate_scale).unwrap_or(0.0);
                (r, r)
            }
        }
    }

    /// Reward and QoS-state index from per-user `(metric, qos value)` pairs,
    /// in user order.
    pub fn score(&self, metrics: impl IntoIterator<Item = (f64, f64)>) -> (f64, u64) {
        let mut total = 0.0;
        let mut violations = 0u32;
        let mut state = 0u64;
        for (u, (m, qos)) in metrics.into_iter().enumerate() {
            total += m;
            if qos >= self.qos_threshold {
                state |= 1 << u;
            } else {
                violations += 1;
            }
        }
        (total - self.penalty_weight * violations as f64, state)
    }
}

fn report_metrics<'a>(
    report: &'a LinkReport,
    cfg: &'a RewardConfig,
) -> impl Iterator<Item = (f64, f64)> + 'a {
    report.users.iter().map(move |u| match cfg.objective {
        Objective::TotalSinr => (u.sinr_linear, u.sinr_db),
        Objective::TotalRate => (u.rate_bps_hz, u.rate_bps_hz),
    })
}

/// QoS bit vector for a report: bit `u` set iff user `u` meets the threshold.
pub fn encode_state(report: &LinkReport, cfg: &RewardConfig) -> QosState {
    let bits = report_metrics(report, cfg)
        .map(|(_, q)| q >= cfg.qos_threshold)
        .collect();
    QosState::new(bits)
}

/// Total metric minus `penalty_weight` per QoS-violating user.
pub fn reward(report: &LinkReport, cfg: &RewardConfig) -> f64 {
    cfg.score(report_metrics(report, cfg)).0
}

/// One interaction with the environment.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub prev_state: QosState,
    pub action_index: u64,
    pub reward: f64,
    pub next_state: QosState,
}

/// Outcome of one action, without the full per-user report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub reward: f64,
    pub state: u64,
}

/// Environment over a fixed link budget.
#[derive(Debug, Clone)]
pub struct AllocEnv {
    space: ActionSpace,
    budget: LinkBudget,
    reward: RewardConfig,
}

impl AllocEnv {
    pub fn new(budget: LinkBudget, reward: RewardConfig) -> Result<Self> {
        reward.validate()?;
        let space = ActionSpace::new(
            budget.num_users(),
            budget.num_transmitters(),
            budget.wavelengths().len(),
        )?;
        Ok(Self {
            space,
            budget,
            reward,
        })
    }

    pub fn space(&self) -> &ActionSpace {
        &self.space
    }

    pub fn budget(&self) -> &LinkBudget {
        &self.budget
    }

    pub fn reward_config(&self) -> &RewardConfig {
        &self.reward
    }

    pub fn num_users(&self) -> usize {
        self.space.num_users()
    }

    pub fn initial_state(&self) -> QosState {
        QosState::zeros(self.num_users())
    }

    /// Full per-user report for an action.
    pub fn report(&self, action: u64) -> Result<LinkReport> {
        self.budget
            .evaluate(&self.space.index_to_assignment(action)?)
    }

    /// Reward and next state of an action, using caller-provided scratch
    /// buffers sized to the number of users and slots.
    pub fn outcome_with(
        &self,
        action: u64,
        slots: &mut [usize],
        occupied: &mut [bool],
    ) -> Result<Outcome> {
        let nu = self.num_users();
        self.space.decode_into(action, &mut slots[..nu])?;
        occupied.fill(false);
        for &s in &slots[..nu] {
            occupied[s] = true;
        }
        let scale = self.budget.rate_scale();
        let metrics = slots[..nu].iter().enumerate().map(|(u, &s)| {
            let (l, w) = self.space.slot(s);
            let sinr = self.budget.user_terms(u, l, w, occupied).3;
            self.reward.metric(sinr, scale)
        });
        let (reward, state) = self.reward.score(metrics);
        Ok(Outcome { reward, state })
    }

    pub fn outcome(&self, action: u64) -> Result<Outcome> {
        let mut slots = vec![0; self.num_users()];
        let mut occupied = vec![false; self.space.num_slots()];
        self.outcome_with(action, &mut slots, &mut occupied)
    }

    /// Applies `action`. The previous state does not influence the result.
    pub fn step(&self, state: &QosState, action: u64) -> Result<Transition> {
        let out = self.outcome(action)?;
        Ok(Transition {
            prev_state: state.clone(),
            action_index: action,
            reward: out.reward,
            next_state: QosState::from_index(out.state, self.num_users()),
        })
    }
}
