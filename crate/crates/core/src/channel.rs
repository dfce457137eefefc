//! DC optical channel gains for an empty rectangular room.
//!
//! Sources radiate a generalized Lambertian pattern of order `m`. Every wall,
//! floor and ceiling element re-emits what it receives as an order-1
//! Lambertian source scaled by its reflectance. Gains are unitless ratios of
//! received to transmitted optical power; occlusion is not modeled, so every
//! path is limited only by cosine and field-of-view gating.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Room dimensions, surface reflectances and reflection-element edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Room {
    pub width: f64,
    pub length: f64,
    pub height: f64,
    pub rho_walls: f64,
    pub rho_ceiling: f64,
    pub rho_floor: f64,
    /// Element edge used for single-bounce paths.
    pub grid_first: f64,
    /// Element edge used for double-bounce paths.
    pub grid_second: f64,
}

impl Room {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("room.width", self.width),
            ("room.length", self.length),
            ("room.height", self.height),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(field, format!("must be > 0, got {v}")));
            }
        }
        for (field, v) in [
            ("room.rho_walls", self.rho_walls),
            ("room.rho_ceiling", self.rho_ceiling),
            ("room.rho_floor", self.rho_floor),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::validation(
                    field,
                    format!("must lie in [0, 1], got {v}"),
                ));
            }
        }
        let smallest = self.width.min(self.length).min(self.height);
        for (field, v) in [
            ("room.grid_first", self.grid_first),
            ("room.grid_second", self.grid_second),
        ] {
            if !(v.is_finite() && v > 0.0 && v <= smallest) {
                return Err(Error::validation(
                    field,
                    format!("must be > 0 and <= smallest room dimension {smallest}, got {v}"),
                ));
            }
        }
        Ok(())
    }

    pub fn surface_area(&self) -> f64 {
        2.0 * (self.width * self.length + self.width * self.height + self.length * self.height)
    }

    pub fn contains(&self, p: Vec3) -> bool {
        (0.0..=self.width).contains(&p.x)
            && (0.0..=self.length).contains(&p.y)
            && (0.0..=self.height).contains(&p.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Micro,
    Pico,
    Atto,
}

/// One access point of an angle-diversity fixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transmitter {
    pub id: String,
    pub cell_kind: CellKind,
    pub position: Vec3,
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    /// Semi-angle at half power.
    pub semi_angle_deg: f64,
    /// Total optical power per wavelength label, in watts.
    pub power_per_wavelength: BTreeMap<String, f64>,
    #[serde(default = "default_emitters")]
    pub num_emitters: u32,
}

fn default_emitters() -> u32 {
    1
}

impl Transmitter {
    pub fn boresight(&self) -> Vec3 {
        Vec3::from_angles(self.azimuth_deg, self.elevation_deg)
    }

    pub fn lambertian_order(&self) -> Result<f64> {
        lambertian_order(self.semi_angle_deg)
    }

    pub fn power(&self, wavelength: &str) -> Result<f64> {
        self.power_per_wavelength
            .get(wavelength)
            .copied()
            .ok_or_else(|| {
                Error::Config(format!(
                    "transmitter {} has no power for wavelength {wavelength:?}",
                    self.id
                ))
            })
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        if !self.position.is_finite() {
            return Err(Error::validation(
                format!("{field}.position"),
                "must be finite",
            ));
        }
        if !(self.semi_angle_deg > 0.0 && self.semi_angle_deg < 90.0) {
            return Err(Error::validation(
                format!("{field}.semi_angle_deg"),
                format!("must lie in (0, 90) degrees, got {}", self.semi_angle_deg),
            ));
        }
        if !(-90.0..=0.0).contains(&self.elevation_deg) {
            return Err(Error::validation(
                format!("{field}.elevation_deg"),
                format!(
                    "must lie in [-90, 0] for a ceiling source, got {}",
                    self.elevation_deg
                ),
            ));
        }
        if !self.azimuth_deg.is_finite() {
            return Err(Error::validation(
                format!("{field}.azimuth_deg"),
                "must be finite",
            ));
        }
        for (label, p) in &self.power_per_wavelength {
            if !(p.is_finite() && *p >= 0.0) {
                return Err(Error::validation(
                    format!("{field}.power_per_wavelength.{label}"),
                    format!("must be >= 0, got {p}"),
                ));
            }
        }
        Ok(())
    }
}

/// A user's photodetector.
#[derive(Debug, Clone, PartialEq)]
pub struct Receiver {
    pub position: Vec3,
    pub area_m2: f64,
    /// Acceptance half-angle.
    pub fov_deg: f64,
    pub responsivity_a_per_w: f64,
    /// Unit normal of the detector surface.
    pub orientation: Vec3,
}

impl Receiver {
    fn cos_fov(&self) -> f64 {
        self.fov_deg.to_radians().cos()
    }

    /// Incidence cosine for light arriving from `from`, or 0 outside the FOV.
    fn gated_incidence(&self, from: Vec3, dist: f64) -> f64 {
        let cos_in = self.orientation.dot(from - self.position) / dist;
        if cos_in <= 0.0 || cos_in < self.cos_fov() {
            0.0
        } else {
            cos_in
        }
    }
}

/// A flat patch of a room surface that re-emits as an order-1 Lambertian source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceElement {
    pub center: Vec3,
    /// Unit normal pointing into the room.
    pub normal: Vec3,
    pub area_m2: f64,
    pub reflectance: f64,
}

/// Lambertian mode number `m = -ln 2 / ln cos(semi_angle)`.
pub fn lambertian_order(semi_angle_deg: f64) -> Result<f64> {
    if !(semi_angle_deg > 0.0 && semi_angle_deg < 90.0) {
        return Err(Error::Domain(format!(
            "semi-angle must lie in (0, 90) degrees, got {semi_angle_deg}"
        )));
    }
    Ok(-std::f64::consts::LN_2 / semi_angle_deg.to_radians().cos().ln())
}

/// Radiant fraction per steradian at emission cosine `cos_emit` for order `m`.
fn lambertian_intensity(m: f64, cos_emit: f64) -> f64 {
    (m + 1.0) / (2.0 * PI) * cos_emit.powf(m)
}

/// Geometry of a source before any receiving surface is considered.
struct Source {
    position: Vec3,
    boresight: Vec3,
    order: f64,
}

impl Source {
    fn from_tx(tx: &Transmitter) -> Result<Self> {
        Ok(Self {
            position: tx.position,
            boresight: tx.boresight(),
            order: tx.lambertian_order()?,
        })
    }

    /// Power fraction captured by a surface of `area` at `target` facing `normal`.
    /// Returns 0 when either side faces away.
    fn fraction_onto(&self, target: Vec3, normal: Vec3, area: f64) -> f64 {
        let delta = target - self.position;
        let d2 = delta.norm_squared();
        if d2 == 0.0 {
            return 0.0;
        }
        let d = d2.sqrt();
        let cos_emit = self.boresight.dot(delta) / d;
        let cos_in = -normal.dot(delta) / d;
        if cos_emit <= 0.0 || cos_in <= 0.0 {
            return 0.0;
        }
        lambertian_intensity(self.order, cos_emit) * cos_in * area / d2
    }
}

fn validate_receiver(rx: &Receiver) -> Result<()> {
    if rx.area_m2.is_nan() || rx.area_m2 <= 0.0 {
        return Err(Error::Domain(format!(
            "receiver area must be > 0, got {}",
            rx.area_m2
        )));
    }
    if !(rx.fov_deg > 0.0 && rx.fov_deg <= 90.0) {
        return Err(Error::Domain(format!(
            "receiver FOV must lie in (0, 90], got {}",
            rx.fov_deg
        )));
    }
    if (rx.orientation.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(
            "receiver orientation must be a unit vector".into(),
        ));
    }
    Ok(())
}

/// Line-of-sight gain `(m+1) A / (2 pi d^2) cos^m(phi) cos(psi)`, zero outside the FOV.
pub fn los_gain(tx: &Transmitter, rx: &Receiver) -> Result<f64> {
    validate_receiver(rx)?;
    let source = Source::from_tx(tx)?;
    let delta = rx.position - tx.position;
    let d2 = delta.norm_squared();
    if d2 == 0.0 {
        return Err(Error::Domain(format!(
            "transmitter {} and receiver share a position",
            tx.id
        )));
    }
    Ok(los_from(&source, rx, d2))
}

fn los_from(source: &Source, rx: &Receiver, d2: f64) -> f64 {
    let d = d2.sqrt();
    let cos_emit = source.boresight.dot(rx.position - source.position) / d;
    let cos_in = rx.gated_incidence(source.position, d);
    if cos_emit <= 0.0 || cos_in == 0.0 {
        return 0.0;
    }
    lambertian_intensity(source.order, cos_emit) * rx.area_m2 * cos_in / d2
}

/// Tiles all six room faces with elements of edge close to `grid_edge`.
///
/// Each face dimension is split into `round(dim / grid_edge)` equal cells
/// (at least one), so the element areas always sum to the face area.
pub fn discretize_room(room: &Room, grid_edge: f64) -> Result<Vec<SurfaceElement>> {
    if !(grid_edge.is_finite() && grid_edge > 0.0) {
        return Err(Error::Domain(format!(
            "grid edge must be > 0, got {grid_edge}"
        )));
    }
    let cells = |dim: f64| ((dim / grid_edge).round() as usize).max(1);
    let (w, l, h) = (room.width, room.length, room.height);
    let mut out = Vec::new();

    // (fixed axis, fixed value, inward normal, reflectance)
    let faces = [
        (0usize, 0.0, Vec3::new(1.0, 0.0, 0.0), room.rho_walls),
        (0, w, Vec3::new(-1.0, 0.0, 0.0), room.rho_walls),
        (1, 0.0, Vec3::new(0.0, 1.0, 0.0), room.rho_walls),
        (1, l, Vec3::new(0.0, -1.0, 0.0), room.rho_walls),
        (2, 0.0, Vec3::UP, room.rho_floor),
        (2, h, Vec3::new(0.0, 0.0, -1.0), room.rho_ceiling),
    ];
    for (axis, fixed, normal, reflectance) in faces {
        let (span_a, span_b) = match axis {
            0 => (l, h),
            1 => (w, h),
            _ => (w, l),
        };
        let (na, nb) = (cells(span_a), cells(span_b));
        let (da, db) = (span_a / na as f64, span_b / nb as f64);
        let area = da * db;
        for i in 0..na {
            let a = (i as f64 + 0.5) * da;
            for j in 0..nb {
                let b = (j as f64 + 0.5) * db;
                let center = match axis {
                    0 => Vec3::new(fixed, a, b),
                    1 => Vec3::new(a, fixed, b),
                    _ => Vec3::new(a, b, fixed),
                };
                out.push(SurfaceElement {
                    center,
                    normal,
                    area_m2: area,
                    reflectance,
                });
            }
        }
    }
    Ok(out)
}

/// Fraction of a unit-power order-1 emission from `el` that reaches `rx`.
fn element_to_receiver(el: &SurfaceElement, rx: &Receiver) -> f64 {
    let delta = rx.position - el.center;
    let d2 = delta.norm_squared();
    if d2 == 0.0 {
        return 0.0;
    }
    let d = d2.sqrt();
    let cos_emit = el.normal.dot(delta) / d;
    if cos_emit <= 0.0 {
        return 0.0;
    }
    let cos_in = rx.gated_incidence(el.center, d);
    if cos_in == 0.0 {
        return 0.0;
    }
    cos_emit / PI * rx.area_m2 * cos_in / d2
}

/// Fraction of a unit-power order-1 emission from `from` captured by `to`.
fn element_to_element(from: &SurfaceElement, to: &SurfaceElement) -> f64 {
    let delta = to.center - from.center;
    let d2 = delta.norm_squared();
    if d2 == 0.0 {
        return 0.0;
    }
    let d = d2.sqrt();
    let cos_emit = from.normal.dot(delta) / d;
    let cos_in = -to.normal.dot(delta) / d;
    if cos_emit <= 0.0 || cos_in <= 0.0 {
        return 0.0;
    }
    cos_emit / PI * cos_in * to.area_m2 / d2
}

/// Power each element reflects back into the room for unit source power.
fn reflected_power(source: &Source, elements: &[SurfaceElement]) -> Vec<f64> {
    elements
        .iter()
        .map(|el| source.fraction_onto(el.center, el.normal, el.area_m2) * el.reflectance)
        .collect()
}

/// Power each element reflects after a second bounce, given the first-bounce powers.
fn relayed_power(first: &[f64], elements: &[SurfaceElement]) -> Vec<f64> {
    elements
        .par_iter()
        .enumerate()
        .map(|(j, to)| {
            let mut acc = 0.0;
            for (i, from) in elements.iter().enumerate() {
                if i == j || first[i] == 0.0 {
                    continue;
                }
                acc += first[i] * element_to_element(from, to);
            }
            acc * to.reflectance
        })
        .collect()
}

fn collect_at(powers: &[f64], elements: &[SurfaceElement], rx: &Receiver) -> f64 {
    powers
        .iter()
        .zip(elements)
        .filter(|(p, _)| **p != 0.0)
        .map(|(p, el)| p * element_to_receiver(el, rx))
        .sum()
}

/// Single-bounce gain summed over `elements`.
pub fn first_order_gain(
    tx: &Transmitter,
    rx: &Receiver,
    elements: &[SurfaceElement],
) -> Result<f64> {
    validate_receiver(rx)?;
    let source = Source::from_tx(tx)?;
    Ok(collect_at(
        &reflected_power(&source, elements),
        elements,
        rx,
    ))
}

/// Double-bounce gain over ordered pairs of distinct elements.
pub fn second_order_gain(
    tx: &Transmitter,
    rx: &Receiver,
    elements: &[SurfaceElement],
) -> Result<f64> {
    validate_receiver(rx)?;
    let source = Source::from_tx(tx)?;
    let first = reflected_power(&source, elements);
    Ok(collect_at(&relayed_power(&first, elements), elements, rx))
}

/// Contributions of the three path classes to one gain entry.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GainTerms {
    pub los: f64,
    pub first_order: f64,
    pub second_order: f64,
}

impl GainTerms {
    pub fn total(&self) -> f64 {
        self.los + self.first_order + self.second_order
    }
}

/// Gain from every transmitter to every user, `gain(u, l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelGainMatrix {
    pub tx_ids: Vec<String>,
    terms: Vec<Vec<GainTerms>>,
}

impl ChannelGainMatrix {
    /// Ray-traces every (user, transmitter) pair.
    ///
    /// Single-bounce sums use `room.grid_first` elements and double-bounce sums
    /// use `room.grid_second` elements.
    pub fn compute(
        room: &Room,
        transmitters: &[Transmitter],
        receivers: &[Receiver],
    ) -> Result<Self> {
        room.validate()?;
        for (l, tx) in transmitters.iter().enumerate() {
            tx.validate(&format!("transmitters[{l}]"))?;
        }
        for rx in receivers {
            validate_receiver(rx)?;
            for tx in transmitters {
                if rx.position == tx.position {
                    return Err(Error::Domain(format!(
                        "transmitter {} and a receiver share a position",
                        tx.id
                    )));
                }
            }
        }
        let single = discretize_room(room, room.grid_first)?;
        let double = discretize_room(room, room.grid_second)?;

        // per transmitter: first-bounce powers on the single-bounce grid and
        // second-bounce powers on the double-bounce grid
        let mut per_tx = Vec::with_capacity(transmitters.len());
        for tx in transmitters {
            let source = Source::from_tx(tx)?;
            let first = reflected_power(&source, &single);
            let second = relayed_power(&reflected_power(&source, &double), &double);
            per_tx.push((source, first, second));
        }

        let terms = receivers
            .par_iter()
            .map(|rx| {
                per_tx
                    .iter()
                    .map(|(source, first, second)| GainTerms {
                        los: los_from(source, rx, (rx.position - source.position).norm_squared()),
                        first_order: collect_at(first, &single, rx),
                        second_order: collect_at(second, &double, rx),
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            tx_ids: transmitters.iter().map(|t| t.id.clone()).collect(),
            terms,
        })
    }

    /// Builds a matrix from explicit per-entry contributions, `terms[u][l]`.
    pub fn from_terms(tx_ids: Vec<String>, terms: Vec<Vec<GainTerms>>) -> Result<Self> {
        for row in &terms {
            if row.len() != tx_ids.len() {
                return Err(Error::Domain(
                    "gain row length differs from transmitter count".into(),
                ));
            }
            for t in row {
                if !(t.los >= 0.0 && t.first_order >= 0.0 && t.second_order >= 0.0) {
                    return Err(Error::Domain("gain contributions must be >= 0".into()));
                }
            }
        }
        Ok(Self { tx_ids, terms })
    }

    pub fn num_users(&self) -> usize {
        self.terms.len()
    }

    pub fn num_transmitters(&self) -> usize {
        self.tx_ids.len()
    }

    pub fn terms(&self, user: usize, tx: usize) -> GainTerms {
        self.terms[user][tx]
    }

    pub fn gain(&self, user: usize, tx: usize) -> f64 {
        self.terms[user][tx].total()
    }
}
