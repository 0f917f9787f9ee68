//! Small-cell topology, channel gains, subcarrier assignment and uplink rates.
//!
//! SBSs sit at the quadrant centers of a square area; users are dropped
//! uniformly at random and associate with the nearest SBS. Spectrum is
//! orthogonal within an SBS and fully reused across SBSs, so the only
//! interference a user sees comes from the co-channel users of other cells.
//! Link state (LoS/NLoS) is sampled once per serving link with the scenario
//! RNG; the interference sum treats every co-channel user as transmitting
//! regardless of its offload decision.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::SystemConfig;
use crate::error::{Error, Result};

/// Urban-micro pathloss in dB. Distances below 1 m are clamped to 1 m.
pub fn pathloss_db(distance_m: f64, carrier_hz: f64, los: bool) -> f64 {
    let d = distance_m.max(1.0);
    let f_ghz = carrier_hz / 1e9;
    if los {
        22.0 * d.log10() + 28.0 + 20.0 * f_ghz.log10()
    } else {
        36.7 * d.log10() + 22.7 + 26.0 * f_ghz.log10()
    }
}

/// Distance-dependent LoS probability of the urban-micro model.
pub fn los_probability(distance_m: f64) -> f64 {
    let e = (-distance_m / 36.0).exp();
    (18.0 / distance_m).min(1.0) * (1.0 - e) + e
}

/// Linear power gain from a pathloss in dB, 0 dBi antennas.
pub fn gain_from_pathloss(pl_db: f64) -> f64 {
    10f64.powf(-pl_db / 10.0)
}

/// Single-subcarrier uplink rate in bits/s.
pub fn uplink_rate(gain: f64, interference_w: f64, cfg: &SystemConfig) -> f64 {
    let sinr = cfg.tx_power_w * gain / (interference_w + cfg.noise_power_w);
    cfg.subcarrier_bandwidth() * (1.0 + sinr).log2()
}

/// SBS positions on a quadrant grid covering the square area.
pub fn sbs_grid(cfg: &SystemConfig) -> Vec<[f64; 2]> {
    let side = (cfg.num_sbs as f64).sqrt().ceil() as usize;
    let cell = cfg.area_side_m / side as f64;
    let mut positions = Vec::with_capacity(cfg.num_sbs);
    'outer: for i in 0..side {
        for j in 0..side {
            if positions.len() == cfg.num_sbs {
                break 'outer;
            }
            positions.push([(i as f64 + 0.5) * cell, (j as f64 + 0.5) * cell]);
        }
    }
    positions
}

pub fn nearest_sbs(pos: [f64; 2], sbs_positions: &[[f64; 2]]) -> usize {
    let mut best = 0;
    let mut best_d2 = f64::INFINITY;
    for (k, s) in sbs_positions.iter().enumerate() {
        let d2 = (pos[0] - s[0]).powi(2) + (pos[1] - s[1]).powi(2);
        if d2 < best_d2 {
            best_d2 = d2;
            best = k;
        }
    }
    best
}

/// Round-robin subcarriers within each SBS: the i-th associated user of an
/// SBS gets subcarrier i. Fails when an SBS has more users than subcarriers.
pub fn assign_subcarriers(
    association: &[usize],
    num_sbs: usize,
    num_subcarriers: usize,
) -> Result<Vec<usize>> {
    let mut next = vec![0usize; num_sbs];
    let mut map = Vec::with_capacity(association.len());
    for &k in association {
        let n = next[k];
        if n >= num_subcarriers {
            return Err(Error::ScenarioInfeasible(format!(
                "SBS {k} has more than {num_subcarriers} users; no free subcarrier"
            )));
        }
        map.push(n);
        next[k] += 1;
    }
    Ok(map)
}

/// An immutable generated scenario: geometry, association, subcarrier map,
/// serving-link gains and per-user uplink rates.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub sbs_positions: Vec<[f64; 2]>,
    pub user_positions: Vec<[f64; 2]>,
    /// Serving SBS index per user.
    pub association: Vec<usize>,
    /// Subcarrier index per user.
    pub subcarrier: Vec<usize>,
    /// Serving-link linear power gain per user.
    pub gain: Vec<f64>,
    /// Uplink rate per user, bits/s.
    pub rate: Vec<f64>,
}

impl Scenario {
    /// Generate a scenario from the config; pure in `(cfg, cfg.rng_seed)`.
    pub fn generate(cfg: &SystemConfig) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        let sbs_positions = sbs_grid(cfg);

        let mut user_positions = Vec::with_capacity(cfg.num_users);
        for _ in 0..cfg.num_users {
            let x = rng.gen_range(0.0..cfg.area_side_m);
            let y = rng.gen_range(0.0..cfg.area_side_m);
            user_positions.push([x, y]);
        }
        let association: Vec<usize> = user_positions
            .iter()
            .map(|&p| nearest_sbs(p, &sbs_positions))
            .collect();
        let subcarrier = assign_subcarriers(&association, cfg.num_sbs, cfg.num_subcarriers)?;

        let mut gain = Vec::with_capacity(cfg.num_users);
        for u in 0..cfg.num_users {
            let s = sbs_positions[association[u]];
            let p = user_positions[u];
            let d = ((p[0] - s[0]).powi(2) + (p[1] - s[1]).powi(2)).sqrt();
            let los = rng.gen_bool(los_probability(d).clamp(0.0, 1.0));
            gain.push(gain_from_pathloss(pathloss_db(d, cfg.carrier_freq_hz, los)));
        }

        let mut scenario = Self {
            sbs_positions,
            user_positions,
            association,
            subcarrier,
            gain,
            rate: Vec::new(),
        };
        scenario.rate = (0..cfg.num_users)
            .map(|u| uplink_rate(scenario.gain[u], scenario.interference_w(u, cfg), cfg))
            .collect();
        Ok(scenario)
    }

    /// Co-channel interference power at user `u`'s serving SBS, summed over
    /// same-subcarrier users of other SBSs.
    pub fn interference_w(&self, u: usize, cfg: &SystemConfig) -> f64 {
        let n = self.subcarrier[u];
        let k = self.association[u];
        (0..self.gain.len())
            .filter(|&v| v != u && self.subcarrier[v] == n && self.association[v] != k)
            .map(|v| cfg.tx_power_w * self.gain[v])
            .sum()
    }

    pub fn num_users(&self) -> usize {
        self.gain.len()
    }

    /// Check structural invariants: one SBS per user, per-SBS injective
    /// subcarriers, positive gains and rates.
    pub fn validate(&self, cfg: &SystemConfig) -> Result<()> {
        let u = self.num_users();
        if self.user_positions.len() != u
            || self.association.len() != u
            || self.subcarrier.len() != u
            || self.rate.len() != u
        {
            return Err(Error::ScenarioInfeasible("inconsistent field lengths".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for v in 0..u {
            if self.association[v] >= self.sbs_positions.len() {
                return Err(Error::ScenarioInfeasible(format!(
                    "user {v} associated with unknown SBS"
                )));
            }
            if !seen.insert((self.association[v], self.subcarrier[v])) {
                return Err(Error::ScenarioInfeasible(format!(
                    "subcarrier {} reused within SBS {}",
                    self.subcarrier[v], self.association[v]
                )));
            }
            if !(self.gain[v] > 0.0) || !(self.rate[v] > 0.0) {
                return Err(Error::ScenarioInfeasible(format!(
                    "user {v} has non-positive gain or rate"
                )));
            }
            if self.subcarrier[v] >= cfg.num_subcarriers {
                return Err(Error::ScenarioInfeasible(format!(
                    "user {v} assigned subcarrier beyond num_subcarriers"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_sbs_sit_at_quadrant_centers() {
        let cfg = SystemConfig {
            area_side_m: 200.0,
            num_sbs: 4,
            ..SystemConfig::default()
        };
        let grid = sbs_grid(&cfg);
        assert_eq!(
            grid,
            vec![[50.0, 50.0], [50.0, 150.0], [150.0, 50.0], [150.0, 150.0]]
        );
    }

    #[test]
    fn user_associates_with_nearest_sbs() {
        let sbs = vec![[50.0, 50.0], [50.0, 150.0], [150.0, 50.0], [150.0, 150.0]];
        assert_eq!(nearest_sbs([51.0, 51.0], &sbs), 0);
    }

    #[test]
    fn same_seed_reproduces_scenario() {
        let cfg = SystemConfig::default();
        let a = Scenario::generate(&cfg).unwrap();
        let b = Scenario::generate(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pathloss_los_hand_value() {
        let expected = 22.0 * 2.0 + 28.0 + 20.0 * 3.5f64.log10();
        let pl = pathloss_db(100.0, 3.5e9, true);
        assert!((pl - expected).abs() <= 1e-12, "pl = {pl}");
        assert!((pl - 82.88).abs() <= 5e-3);
    }

    #[test]
    fn pathloss_nlos_hand_value() {
        let expected = 36.7 * 2.0 + 22.7 + 26.0 * 3.5f64.log10();
        let pl = pathloss_db(100.0, 3.5e9, false);
        assert!((pl - expected).abs() <= 1e-12, "pl = {pl}");
        assert!((pl - 110.25).abs() <= 5e-3);
    }

    #[test]
    fn pathloss_log_terms_vanish_at_one_meter_one_ghz() {
        assert!((pathloss_db(1.0, 1e9, true) - 28.0).abs() <= 1e-12);
        // Below 1 m clamps to 1 m.
        assert!((pathloss_db(0.2, 1e9, true) - 28.0).abs() <= 1e-12);
    }

    #[test]
    fn los_probability_limits() {
        assert!((los_probability(1e-9) - 1.0).abs() <= 1e-9);
        assert!((los_probability(18.0) - 1.0).abs() <= 1e-12);
        let p360 = los_probability(360.0);
        let expected = 0.05 * (1.0 - (-10.0f64).exp()) + (-10.0f64).exp();
        assert!((p360 - expected).abs() <= 1e-15);
        assert!((p360 - 0.05).abs() <= 1e-4);
    }

    #[test]
    fn subcarriers_round_robin_within_sbs() {
        let map = assign_subcarriers(&[0, 0, 0], 1, 50).unwrap();
        assert_eq!(map, vec![0, 1, 2]);
        let map = assign_subcarriers(&[0, 1], 2, 50).unwrap();
        assert_eq!(map, vec![0, 0]);
    }

    #[test]
    fn subcarrier_overflow_is_an_error() {
        let assoc = vec![0usize; 51];
        assert!(assign_subcarriers(&assoc, 1, 50).is_err());
    }

    #[test]
    fn uplink_rate_hand_value() {
        // B = 10 MHz over 50 subcarriers, P*g = 1e-11 W, no interference,
        // sigma2 = 1e-13 W: r = 200 kHz * log2(101).
        let cfg = SystemConfig {
            noise_power_w: 1e-13,
            ..SystemConfig::default()
        };
        let r = uplink_rate(1e-10, 0.0, &cfg);
        let expected = 2e5 * 101f64.log2();
        assert!(
            (r - expected).abs() <= 1e-9 * expected,
            "r = {r}, expected {expected}"
        );
        assert!((r - 1.332e6).abs() <= 1e3);
    }

    #[test]
    fn rate_vanishes_with_gain() {
        let cfg = SystemConfig::default();
        assert_eq!(uplink_rate(0.0, 0.0, &cfg), 0.0);
    }

    #[test]
    fn rate_monotonicity() {
        let cfg = SystemConfig::default();
        let base = uplink_rate(1e-10, 1e-13, &cfg);
        assert!(uplink_rate(2e-10, 1e-13, &cfg) > base);
        assert!(uplink_rate(1e-10, 2e-13, &cfg) < base);
        let noisier = SystemConfig {
            noise_power_w: cfg.noise_power_w * 10.0,
            ..cfg.clone()
        };
        assert!(uplink_rate(1e-10, 1e-13, &noisier) < base);
    }

    #[test]
    fn single_sbs_means_no_interference() {
        let cfg = SystemConfig {
            num_sbs: 1,
            num_users: 10,
            rng_seed: 7,
            ..SystemConfig::default()
        };
        let s = Scenario::generate(&cfg).unwrap();
        for u in 0..s.num_users() {
            assert_eq!(s.interference_w(u, &cfg), 0.0);
            let expected = uplink_rate(s.gain[u], 0.0, &cfg);
            assert_eq!(s.rate[u], expected);
        }
    }

    #[test]
    fn generated_scenarios_satisfy_invariants() {
        for seed in 0..20 {
            let cfg = SystemConfig {
                rng_seed: seed,
                ..SystemConfig::default()
            };
            let s = Scenario::generate(&cfg).unwrap();
            s.validate(&cfg).unwrap();
        }
    }

    #[test]
    fn co_channel_interferer_reduces_rate() {
        // Two SBSs, one user each, same subcarrier: each interferes with
        // the other, so both rates are below their interference-free value.
        let cfg = SystemConfig {
            num_sbs: 2,
            num_users: 2,
            rng_seed: 3,
            ..SystemConfig::default()
        };
        let s = Scenario::generate(&cfg).unwrap();
        if s.association[0] != s.association[1] {
            assert_eq!(s.subcarrier, vec![0, 0]);
            for u in 0..2 {
                assert!(s.interference_w(u, &cfg) > 0.0);
                assert!(s.rate[u] < uplink_rate(s.gain[u], 0.0, &cfg));
            }
        }
    }
}
