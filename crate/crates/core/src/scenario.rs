//! Declarative experiment description, stored as JSON.
//!
//! Omitted sections take their documented defaults; `room` defaults to the
//! 4 x 4 x 3 m reference room. [`Scenario::table1_default`] is the bundled
//! reference configuration.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{Hyperparams, SearchConfig};
use crate::channel::{ChannelGainMatrix, Receiver, Room, Transmitter};
use crate::env::{AllocEnv, RewardConfig};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::link::{LinkBudget, NoiseModel};

pub const SCHEMA: &str = "owc-alloc/1";

const TABLE1_DEFAULT: &str = include_str!("../scenarios/table1_default.json");

impl Default for Room {
    fn default() -> Self {
        Self {
            width: 4.0,
            length: 4.0,
            height: 3.0,
            rho_walls: 0.8,
            rho_ceiling: 0.8,
            rho_floor: 0.3,
            grid_first: 0.05,
            grid_second: 0.20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Users {
    Explicit {
        positions: Vec<Vec3>,
    },
    /// I.i.d. uniform positions over the floor plan at a fixed height.
    Uniform {
        count: usize,
        #[serde(default = "default_plane_height")]
        plane_height: f64,
        seed: u64,
    },
}

fn default_plane_height() -> f64 {
    1.0
}

impl Users {
    pub fn count(&self) -> usize {
        match self {
            Users::Explicit { positions } => positions.len(),
            Users::Uniform { count, .. } => *count,
        }
    }
}

/// Photodetector parameters shared by every user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReceiverConfig {
    pub area_m2: f64,
    pub fov_deg: f64,
    pub responsivity_a_per_w: f64,
    pub orientation: Vec3,
}

impl Default for ReceiverConfig {
    fn default() -> Self {
        Self {
            area_m2: 2e-5,
            fov_deg: 85.0,
            responsivity_a_per_w: 0.4,
            orientation: Vec3::UP,
        }
    }
}

/// Uniform positions over `[0, width) x [0, length)` at height `z`.
pub fn place_users(count: usize, seed: u64, plane_height: f64, room: &Room) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let x = rng.gen::<f64>() * room.width;
            let y = rng.gen::<f64>() * room.length;
            Vec3::new(x, y, plane_height)
        })
        .collect()
}

/// Report options that do not affect any computed value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Keep every n-th step in the training log (the last step is always kept).
    pub training_log_every: u64,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            training_log_every: 1,
        }
    }
}

fn default_schema() -> String {
    SCHEMA.to_string()
}

fn default_wavelengths() -> Vec<String> {
    vec!["red".to_string(), "yellow".to_string()]
}

fn default_rate_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_schema")]
    pub schema: String,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub room: Room,
    pub transmitters: Vec<Transmitter>,
    #[serde(default = "default_wavelengths")]
    pub wavelengths: Vec<String>,
    pub users: Users,
    #[serde(default)]
    pub receiver: ReceiverConfig,
    #[serde(default)]
    pub noise: NoiseModel,
    /// Factor applied to the SINR inside `log2(1 + k * SINR)`.
    #[serde(default = "default_rate_scale")]
    pub rate_sinr_scale: f64,
    #[serde(default)]
    pub reward: RewardConfig,
    #[serde(default)]
    pub hyperparams: Hyperparams,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Err(Error::Parse("scenario file is empty".into()));
        }
        let scenario: Scenario =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// The bundled reference room: one angle-diversity fixture with a Pico
    /// and four Atto access points serving eight users.
    pub fn table1_default() -> Self {
        Self::from_json(TABLE1_DEFAULT).expect("bundled scenario is valid")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(Error::validation(
                "schema",
                format!("expected {SCHEMA:?}, got {:?}", self.schema),
            ));
        }
        self.room.validate()?;
        if self.transmitters.is_empty() {
            return Err(Error::validation(
                "transmitters",
                "at least one transmitter is required",
            ));
        }
        if self.wavelengths.is_empty() {
            return Err(Error::validation(
                "wavelengths",
                "at least one wavelength is required",
            ));
        }
        for (i, wl) in self.wavelengths.iter().enumerate() {
            if self.wavelengths[..i].contains(wl) {
                return Err(Error::validation(
                    "wavelengths",
                    format!("duplicate label {wl:?}"),
                ));
            }
        }
        for (l, tx) in self.transmitters.iter().enumerate() {
            let field = format!("transmitters[{l}]");
            tx.validate(&field)?;
            if !self.room.contains(tx.position) {
                return Err(Error::validation(
                    format!("{field}.position"),
                    "must lie inside the room",
                ));
            }
            for wl in &self.wavelengths {
                if !tx.power_per_wavelength.contains_key(wl) {
                    return Err(Error::validation(
                        format!("{field}.power_per_wavelength"),
                        format!("missing wavelength {wl:?}"),
                    ));
                }
            }
        }
        let users = self.users.count();
        if users == 0 {
            return Err(Error::validation("users", "at least one user is required"));
        }
        let slots = self.transmitters.len() * self.wavelengths.len();
        if users > slots {
            return Err(Error::validation(
                "users",
                format!(
                    "{users} users exceed the {slots} (transmitter, wavelength) slots; each slot serves one user"
                ),
            ));
        }
        match &self.users {
            Users::Explicit { positions } => {
                for (u, p) in positions.iter().enumerate() {
                    if !self.room.contains(*p) {
                        return Err(Error::validation(
                            format!("users.positions[{u}]"),
                            "must lie inside the room",
                        ));
                    }
                }
            }
            Users::Uniform { plane_height, .. } => {
                if !(0.0..self.room.height).contains(plane_height) {
                    return Err(Error::validation(
                        "users.plane_height",
                        format!("must lie in [0, {}), got {plane_height}", self.room.height),
                    ));
                }
            }
        }
        let rx = &self.receiver;
        if !(rx.area_m2.is_finite() && rx.area_m2 > 0.0) {
            return Err(Error::validation("receiver.area_m2", "must be > 0"));
        }
        if !(rx.fov_deg > 0.0 && rx.fov_deg <= 90.0) {
            return Err(Error::validation("receiver.fov_deg", "must lie in (0, 90]"));
        }
        if !(rx.responsivity_a_per_w.is_finite() && rx.responsivity_a_per_w > 0.0) {
            return Err(Error::validation(
                "receiver.responsivity_a_per_w",
                "must be > 0",
            ));
        }
        if rx.orientation.normalized().is_none() {
            return Err(Error::validation(
                "receiver.orientation",
                "must be a non-zero vector",
            ));
        }
        self.noise.validate()?;
        if !(self.rate_sinr_scale.is_finite() && self.rate_sinr_scale > 0.0) {
            return Err(Error::validation("rate_sinr_scale", "must be > 0"));
        }
        self.reward.validate()?;
        self.hyperparams.validate()?;
        if self.search.tolerance.is_nan() || self.search.tolerance < 0.0 {
            return Err(Error::validation("search.tolerance", "must be >= 0"));
        }
        if self.output.training_log_every == 0 {
            return Err(Error::validation(
                "output.training_log_every",
                "must be >= 1",
            ));
        }
        Ok(())
    }

    pub fn user_positions(&self) -> Vec<Vec3> {
        match &self.users {
            Users::Explicit { positions } => positions.clone(),
            Users::Uniform {
                count,
                plane_height,
                seed,
            } => place_users(*count, *seed, *plane_height, &self.room),
        }
    }

    pub fn receivers(&self) -> Vec<Receiver> {
        let orientation = self.receiver.orientation.normalized().unwrap_or(Vec3::UP);
        self.user_positions()
            .into_iter()
            .map(|position| Receiver {
                position,
                area_m2: self.receiver.area_m2,
                fov_deg: self.receiver.fov_deg,
                responsivity_a_per_w: self.receiver.responsivity_a_per_w,
                orientation,
            })
            .collect()
    }

    pub fn gain_matrix(&self) -> Result<ChannelGainMatrix> {
        ChannelGainMatrix::compute(&self.room, &self.transmitters, &self.receivers())
    }

    pub fn link_budget(&self, gains: &ChannelGainMatrix) -> Result<LinkBudget> {
        LinkBudget::new(
            gains,
            &self.transmitters,
            &self.wavelengths,
            self.receiver.responsivity_a_per_w,
            self.noise.clone(),
            self.rate_sinr_scale,
        )
    }

    pub fn env(&self, gains: &ChannelGainMatrix) -> Result<AllocEnv> {
        AllocEnv::new(self.link_budget(gains)?, self.reward.clone())
    }
}
