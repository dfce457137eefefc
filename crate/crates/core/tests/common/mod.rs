#![allow(dead_code)]

use owc_core::scenario::Scenario;
use serde_json::json;

const CEILING_SPOTS: [[f64; 3]; 3] = [[1.0, 1.0, 3.0], [3.0, 3.0, 3.0], [1.0, 3.0, 3.0]];

fn downlight(id: &str, position: [f64; 3], semi_angle: f64) -> serde_json::Value {
    json!({
        "id": id,
        "cell_kind": "atto",
        "position": position,
        "azimuth_deg": 0.0,
        "elevation_deg": -90.0,
        "semi_angle_deg": semi_angle,
        "power_per_wavelength": { "red": 0.8, "yellow": 0.5 },
    })
}

/// Small instance with a coarse reflection grid: `num_tx` downlights,
/// `wavelengths` of red/yellow and `users` placed uniformly with `seed`.
pub fn toy(num_tx: usize, num_wavelengths: usize, users: usize, seed: u64) -> Scenario {
    let txs: Vec<_> = (0..num_tx)
        .map(|l| {
            downlight(
                &format!("ap{l}"),
                CEILING_SPOTS[l],
                if l == 0 { 42.0 } else { 30.0 },
            )
        })
        .collect();
    let wavelengths = &["red", "yellow"][..num_wavelengths];
    let value = json!({
        "schema": "owc-alloc/1",
        "name": format!("toy{num_tx}x{num_wavelengths}x{users}"),
        "room": { "width": 4.0, "length": 4.0, "height": 3.0,
                  "rho_walls": 0.8, "rho_ceiling": 0.8, "rho_floor": 0.3,
                  "grid_first": 0.5, "grid_second": 1.0 },
        "wavelengths": wavelengths,
        "transmitters": txs,
        "users": { "uniform": { "count": users, "seed": seed } },
        "hyperparams": { "seed": seed },
    });
    Scenario::from_json(&value.to_string()).unwrap()
}

/// Two downlights mirrored about `x = 2` serving two users on that plane
/// over one wavelength; a third light on the plane breaks the trivial case.
pub fn mirror_symmetric() -> Scenario {
    let value = json!({
        "schema": "owc-alloc/1",
        "name": "mirror",
        "room": { "width": 4.0, "length": 4.0, "height": 3.0,
                  "rho_walls": 0.8, "rho_ceiling": 0.8, "rho_floor": 0.3,
                  "grid_first": 0.5, "grid_second": 1.0 },
        "wavelengths": ["red"],
        "transmitters": [
            downlight("west", [1.0, 2.0, 3.0], 30.0),
            downlight("east", [3.0, 2.0, 3.0], 30.0),
            downlight("centre", [2.0, 2.0, 3.0], 30.0),
        ],
        "users": { "explicit": { "positions": [[2.0, 1.2, 1.0], [2.0, 3.5, 1.0]] } },
        "reward": { "penalty_weight": 0.0 },
    });
    Scenario::from_json(&value.to_string()).unwrap()
}

/// Exhaustive optimum by recursive lexicographic enumeration of injective
/// user-to-slot maps, recomputing every SINR from the gain matrix.
/// Returns `(lexicographic position, reward)` of the first maximum.
pub fn naive_optimum(s: &Scenario) -> (u64, f64) {
    let gains = s.gain_matrix().unwrap();
    let users = s.users.count();
    let (nl, nw) = (s.transmitters.len(), s.wavelengths.len());
    let resp = s.receiver.responsivity_a_per_w;
    let current = |u: usize, l: usize, w: usize| {
        resp * s.transmitters[l].power_per_wavelength[&s.wavelengths[w]] * gains.gain(u, l)
    };
    let reward_of = |slots: &[(usize, usize)]| -> f64 {
        let mut total = 0.0;
        let mut violations = 0.0;
        for (u, &(l, w)) in slots.iter().enumerate() {
            let signal = current(u, l, w);
            let mut interference = 0.0;
            let mut received = signal;
            for other in 0..nl {
                if other != l && slots.iter().any(|&(l2, w2)| l2 == other && w2 == w) {
                    let i = current(u, other, w);
                    interference += i * i;
                    received += i;
                }
            }
            let n = &s.noise;
            let mut noise = n.thermal_psd_a2_per_hz * n.bandwidth_hz;
            if n.include_shot {
                noise += 2.0 * 1.602e-19 * received * n.bandwidth_hz;
            }
            let sinr = signal * signal / (noise + interference);
            let (metric, qos) = match s.reward.objective {
                owc_core::env::Objective::TotalSinr => (sinr, 10.0 * sinr.log10()),
                owc_core::env::Objective::TotalRate => {
                    let r = (1.0 + s.rate_sinr_scale * sinr).log2();
                    (r, r)
                }
            };
            total += metric;
            if qos < s.reward.qos_threshold {
                violations += 1.0;
            }
        }
        total - s.reward.penalty_weight * violations
    };

    type RewardFn<'a> = &'a dyn Fn(&[(usize, usize)]) -> f64;

    fn recurse(
        slots: &mut Vec<(usize, usize)>,
        users: usize,
        nl: usize,
        nw: usize,
        counter: &mut u64,
        best: &mut (u64, f64),
        reward_of: RewardFn,
    ) {
        if slots.len() == users {
            let r = reward_of(slots);
            if r > best.1 {
                *best = (*counter, r);
            }
            *counter += 1;
            return;
        }
        for l in 0..nl {
            for w in 0..nw {
                if !slots.contains(&(l, w)) {
                    slots.push((l, w));
                    recurse(slots, users, nl, nw, counter, best, reward_of);
                    slots.pop();
                }
            }
        }
    }

    let mut best = (0, f64::NEG_INFINITY);
    let mut counter = 0;
    recurse(
        &mut Vec::new(),
        users,
        nl,
        nw,
        &mut counter,
        &mut best,
        &reward_of,
    );
    best
}
