//! Per-user photocurrent, noise, SINR and spectral efficiency under WDMA.
//!
//! Each (access point, wavelength) pair is a slot that serves at most one
//! user. A slot radiates only while occupied. A user on slot `(l, w)` sees
//! interference from every other access point that is active on `w`; the
//! other wavelength of its own access point is optically filtered out.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelGainMatrix, Transmitter};
use crate::error::{Error, Result};

/// Elementary charge, in coulombs.
pub const ELECTRON_CHARGE: f64 = 1.602e-19;

/// Receiver noise: thermal plus optional shot noise from the received current.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    pub bandwidth_hz: f64,
    pub thermal_psd_a2_per_hz: f64,
    pub include_shot: bool,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            bandwidth_hz: 500e6,
            thermal_psd_a2_per_hz: 4.7e-22,
            include_shot: true,
        }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0) {
            return Err(Error::validation(
                "noise.bandwidth_hz",
                format!("must be > 0, got {}", self.bandwidth_hz),
            ));
        }
        if !(self.thermal_psd_a2_per_hz.is_finite() && self.thermal_psd_a2_per_hz >= 0.0) {
            return Err(Error::validation(
                "noise.thermal_psd_a2_per_hz",
                format!("must be >= 0, got {}", self.thermal_psd_a2_per_hz),
            ));
        }
        Ok(())
    }

    /// Noise variance in A^2 for a detector collecting `received_current` amps.
    pub fn variance(&self, received_current: f64) -> f64 {
        let thermal = self.thermal_psd_a2_per_hz * self.bandwidth_hz;
        if self.include_shot {
            thermal + 2.0 * ELECTRON_CHARGE * received_current * self.bandwidth_hz
        } else {
            thermal
        }
    }
}

/// User-to-slot map equivalent to the binary tensor `x[u][l][w]`.
///
/// Every user holds exactly one slot and no slot holds two users.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    num_transmitters: usize,
    num_wavelengths: usize,
    serving: Vec<(usize, usize)>,
}

impl Assignment {
    pub fn new(
        num_transmitters: usize,
        num_wavelengths: usize,
        serving: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let mut taken = vec![None; num_transmitters * num_wavelengths];
        for (u, &(l, w)) in serving.iter().enumerate() {
            if l >= num_transmitters || w >= num_wavelengths {
                return Err(Error::Assignment(format!(
                    "user {u} assigned to ({l}, {w}) outside {num_transmitters} transmitters x {num_wavelengths} wavelengths"
                )));
            }
            if let Some(other) = taken[l * num_wavelengths + w].replace(u) {
                return Err(Error::Assignment(format!(
                    "one user per slot violated: users {other} and {u} share transmitter {l} wavelength {w}"
                )));
            }
        }
        Ok(Self {
            num_transmitters,
            num_wavelengths,
            serving,
        })
    }

    /// Validates a dense `x[u][l][w]` tensor.
    pub fn from_tensor(x: &[Vec<Vec<u8>>]) -> Result<Self> {
        let num_transmitters = x.first().map_or(0, |r| r.len());
        let num_wavelengths = x.first().and_then(|r| r.first()).map_or(0, |r| r.len());
        let mut serving = Vec::with_capacity(x.len());
        for (u, plane) in x.iter().enumerate() {
            if plane.len() != num_transmitters || plane.iter().any(|r| r.len() != num_wavelengths) {
                return Err(Error::Assignment(format!(
                    "tensor row for user {u} is ragged"
                )));
            }
            let mut slot = None;
            for (l, row) in plane.iter().enumerate() {
                for (w, &bit) in row.iter().enumerate() {
                    match bit {
                        0 => {}
                        1 if slot.is_none() => slot = Some((l, w)),
                        1 => {
                            return Err(Error::Assignment(format!(
                                "one slot per user violated: user {u} is assigned more than once"
                            )))
                        }
                        b => {
                            return Err(Error::Assignment(format!(
                                "entry x[{u}][{l}][{w}] = {b} is not binary"
                            )))
                        }
                    }
                }
            }
            let slot = slot.ok_or_else(|| {
                Error::Assignment(format!(
                    "one slot per user violated: user {u} is unassigned"
                ))
            })?;
            serving.push(slot);
        }
        Self::new(num_transmitters, num_wavelengths, serving)
    }

    pub fn to_tensor(&self) -> Vec<Vec<Vec<u8>>> {
        self.serving
            .iter()
            .map(|&(l, w)| {
                let mut plane = vec![vec![0u8; self.num_wavelengths]; self.num_transmitters];
                plane[l][w] = 1;
                plane
            })
            .collect()
    }

    pub fn num_users(&self) -> usize {
        self.serving.len()
    }

    pub fn num_transmitters(&self) -> usize {
        self.num_transmitters
    }

    pub fn num_wavelengths(&self) -> usize {
        self.num_wavelengths
    }

    /// Serving `(transmitter, wavelength)` of user `u`.
    pub fn serving(&self, u: usize) -> Option<(usize, usize)> {
        self.serving.get(u).copied()
    }

    pub fn slots(&self) -> &[(usize, usize)] {
        &self.serving
    }

    /// Occupancy flags indexed by `l * num_wavelengths + w`.
    pub fn occupancy(&self) -> Vec<bool> {
        let mut occ = vec![false; self.num_transmitters * self.num_wavelengths];
        for &(l, w) in &self.serving {
            occ[l * self.num_wavelengths + w] = true;
        }
        occ
    }
}

/// Photocurrent `R * P * H`.
pub fn signal_current(responsivity_a_per_w: f64, power_w: f64, gain: f64) -> f64 {
    responsivity_a_per_w * power_w * gain
}

/// Spectral efficiency `log2(1 + scale * sinr)` in bits/s/Hz.
pub fn rate(sinr_linear: f64, sinr_scale: f64) -> Result<f64> {
    if sinr_linear.is_nan() || sinr_linear < 0.0 {
        return Err(Error::Domain(format!(
            "SINR must be >= 0, got {sinr_linear}"
        )));
    }
    Ok((sinr_scale * sinr_linear).ln_1p() / std::f64::consts::LN_2)
}

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// One user's row of a [`LinkReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct UserLink {
    pub user: usize,
    pub tx: usize,
    pub wavelength: usize,
    pub signal_a: f64,
    pub interference_a2: f64,
    pub noise_a2: f64,
    pub sinr_linear: f64,
    /// `-inf` when the SINR is zero.
    pub sinr_db: f64,
    pub rate_bps_hz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkReport {
    pub users: Vec<UserLink>,
    pub total_sinr_linear: f64,
    pub total_sinr_db: f64,
    pub total_rate: f64,
}

impl LinkReport {
    fn from_users(users: Vec<UserLink>) -> Self {
        let mut report = Self {
            users,
            total_sinr_linear: 0.0,
            total_sinr_db: 0.0,
            total_rate: 0.0,
        };
        for u in &report.users {
            report.total_sinr_linear += u.sinr_linear;
            report.total_sinr_db += u.sinr_db;
            report.total_rate += u.rate_bps_hz;
        }
        report
    }
}

/// Photocurrents for every (user, transmitter, wavelength) plus the noise model.
///
/// Built once per scenario; all assignment evaluations read from it.
#[derive(Debug, Clone)]
pub struct LinkBudget {
    num_users: usize,
    num_transmitters: usize,
    wavelengths: Vec<String>,
    /// `currents[(u * L + l) * W + w]`
    currents: Vec<f64>,
    noise: NoiseModel,
    rate_scale: f64,
}

impl LinkBudget {
    pub fn new(
        gains: &ChannelGainMatrix,
        transmitters: &[Transmitter],
        wavelengths: &[String],
        responsivity_a_per_w: f64,
        noise: NoiseModel,
        rate_scale: f64,
    ) -> Result<Self> {
        if gains.num_transmitters() != transmitters.len() {
            return Err(Error::Config(format!(
                "gain matrix has {} transmitters but {} were given",
                gains.num_transmitters(),
                transmitters.len()
            )));
        }
        if !(responsivity_a_per_w.is_finite() && responsivity_a_per_w > 0.0) {
            return Err(Error::validation(
                "receiver.responsivity_a_per_w",
                "must be > 0",
            ));
        }
        if !(rate_scale.is_finite() && rate_scale > 0.0) {
            return Err(Error::validation("rate_sinr_scale", "must be > 0"));
        }
        noise.validate()?;
        let mut powers = Vec::with_capacity(transmitters.len() * wavelengths.len());
        for tx in transmitters {
            for wl in wavelengths {
                powers.push(tx.power(wl)?);
            }
        }
        let (nl, nw) = (transmitters.len(), wavelengths.len());
        let mut currents = Vec::with_capacity(gains.num_users() * nl * nw);
        for u in 0..gains.num_users() {
            for l in 0..nl {
                for w in 0..nw {
                    currents.push(signal_current(
                        responsivity_a_per_w,
                        powers[l * nw + w],
                        gains.gain(u, l),
                    ));
                }
            }
        }
        Ok(Self {
            num_users: gains.num_users(),
            num_transmitters: nl,
            wavelengths: wavelengths.to_vec(),
            currents,
            noise,
            rate_scale,
        })
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_transmitters(&self) -> usize {
        self.num_transmitters
    }

    pub fn wavelengths(&self) -> &[String] {
        &self.wavelengths
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn rate_scale(&self) -> f64 {
        self.rate_scale
    }

    /// Current that user `u` would collect from transmitter `l` on wavelength index `w`.
    pub fn current(&self, u: usize, l: usize, w: usize) -> f64 {
        self.currents[(u * self.num_transmitters + l) * self.wavelengths.len() + w]
    }

    /// Same as [`current`](Self::current) but addressed by wavelength label.
    pub fn signal_current(&self, u: usize, l: usize, wavelength: &str) -> Result<f64> {
        let w = self
            .wavelengths
            .iter()
            .position(|x| x == wavelength)
            .ok_or_else(|| Error::Config(format!("unknown wavelength {wavelength:?}")))?;
        if u >= self.num_users || l >= self.num_transmitters {
            return Err(Error::Domain(format!(
                "user {u} or transmitter {l} out of range"
            )));
        }
        Ok(self.current(u, l, w))
    }

    /// Signal current, interference power, noise power and linear SINR for a
    /// user on slot `(l, w)` given slot occupancy flags.
    pub(crate) fn user_terms(
        &self,
        u: usize,
        l: usize,
        w: usize,
        occupied: &[bool],
    ) -> (f64, f64, f64, f64) {
        let nw = self.wavelengths.len();
        let signal = self.current(u, l, w);
        let mut interference = 0.0;
        let mut received = signal;
        for other in 0..self.num_transmitters {
            if other != l && occupied[other * nw + w] {
                let i = self.current(u, other, w);
                interference += i * i;
                received += i;
            }
        }
        let noise = self.noise.variance(received);
        let sinr = if signal == 0.0 {
            0.0
        } else {
            signal * signal / (noise + interference)
        };
        (signal, interference, noise, sinr)
    }

    fn check_assignment(&self, a: &Assignment) -> Result<()> {
        if a.num_users() != self.num_users
            || a.num_transmitters() != self.num_transmitters
            || a.num_wavelengths() != self.wavelengths.len()
        {
            return Err(Error::Assignment(format!(
                "assignment shape {}x{}x{} does not match {} users, {} transmitters, {} wavelengths",
                a.num_users(),
                a.num_transmitters(),
                a.num_wavelengths(),
                self.num_users,
                self.num_transmitters,
                self.wavelengths.len()
            )));
        }
        Ok(())
    }

    /// Linear SINR of user `u` under assignment `a`.
    pub fn sinr(&self, u: usize, a: &Assignment) -> Result<f64> {
        self.check_assignment(a)?;
        let (l, w) = a
            .serving(u)
            .ok_or_else(|| Error::Assignment(format!("user {u} is unassigned")))?;
        Ok(self.user_terms(u, l, w, &a.occupancy()).3)
    }

    pub fn evaluate(&self, a: &Assignment) -> Result<LinkReport> {
        self.check_assignment(a)?;
        let occ = a.occupancy();
        let users = a
            .slots()
            .iter()
            .enumerate()
            .map(|(u, &(l, w))| {
                let (signal_a, interference_a2, noise_a2, sinr_linear) =
                    self.user_terms(u, l, w, &occ);
                Ok(UserLink {
                    user: u,
                    tx: l,
                    wavelength: w,
                    signal_a,
                    interference_a2,
                    noise_a2,
                    sinr_linear,
                    sinr_db: to_db(sinr_linear),
                    rate_bps_hz: rate(sinr_linear, self.rate_scale)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LinkReport::from_users(users))
    }
}
