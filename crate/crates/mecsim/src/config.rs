//! System-wide parameters and the line-oriented `key = value` config format.

use std::path::Path;

use crate::error::{Error, Result};
use crate::taskmodel::{TaskCatalog, TaskType};

/// Scenario- and model-level scalars. Defaults carry the standard small-cell
/// simulation values plus calibrated task constants (see `volume_range`,
/// `overhead_slope`, `overhead_intercept`, `bits_per_unit`).
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Total uplink bandwidth in Hz.
    pub bandwidth_hz: f64,
    /// Number of orthogonal subcarriers the bandwidth is divided into.
    pub num_subcarriers: usize,
    /// Per-user transmit power in W.
    pub tx_power_w: f64,
    /// Noise power in W.
    pub noise_power_w: f64,
    /// Carrier frequency in Hz.
    pub carrier_freq_hz: f64,
    /// Side of the square deployment area in m.
    pub area_side_m: f64,
    /// Number of small base stations, each hosting one MEC server.
    pub num_sbs: usize,
    /// Total number of users.
    pub num_users: usize,
    /// MEC server computing capacity per SBS, cycles/s.
    pub mec_capacity: f64,
    /// Local device computing capacity, cycles/s.
    pub local_capacity: f64,
    /// Utility weight between accuracy revenue and delay cost.
    pub utility_weight: f64,
    /// Computing overhead slope, cycles per data unit.
    pub overhead_slope: f64,
    /// Computing overhead intercept, cycles.
    pub overhead_intercept: f64,
    /// Raw data volume range in data units (uniform draw).
    pub volume_range: (f64, f64),
    /// Bits transmitted per data unit.
    pub bits_per_unit: f64,
    /// Seed for scenario and task generation.
    pub rng_seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            bandwidth_hz: 10e6,
            num_subcarriers: 50,
            tx_power_w: 0.1,
            noise_power_w: dbm_to_watts(-100.0),
            carrier_freq_hz: 3.5e9,
            area_side_m: 200.0,
            num_sbs: 4,
            num_users: 30,
            mec_capacity: 200e9,
            local_capacity: 1.4e9,
            utility_weight: 1.0,
            overhead_slope: 7.5e3,
            overhead_intercept: 2e7,
            volume_range: (200.0, 1000.0),
            bits_per_unit: 50.0,
            rng_seed: 1,
        }
    }
}

impl SystemConfig {
    /// Bandwidth of one subcarrier, Hz.
    pub fn subcarrier_bandwidth(&self) -> f64 {
        self.bandwidth_hz / self.num_subcarriers as f64
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("bandwidth_hz", self.bandwidth_hz),
            ("tx_power_w", self.tx_power_w),
            ("noise_power_w", self.noise_power_w),
            ("carrier_freq_hz", self.carrier_freq_hz),
            ("area_side_m", self.area_side_m),
            ("mec_capacity", self.mec_capacity),
            ("local_capacity", self.local_capacity),
            ("utility_weight", self.utility_weight),
            ("overhead_slope", self.overhead_slope),
            ("overhead_intercept", self.overhead_intercept),
            ("volume_min", self.volume_range.0),
            ("bits_per_unit", self.bits_per_unit),
        ];
        for (key, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(invalid(key, "must be strictly positive"));
            }
        }
        if self.num_subcarriers < 1 {
            return Err(invalid("num_subcarriers", "must be at least 1"));
        }
        if self.num_sbs < 1 {
            return Err(invalid("num_sbs", "must be at least 1"));
        }
        if self.num_users < 1 {
            return Err(invalid("num_users", "must be at least 1"));
        }
        if self.volume_range.1 < self.volume_range.0 {
            return Err(invalid("volume_max", "must be >= volume_min"));
        }
        Ok(())
    }
}

/// Iteration tolerances and caps for the alternating solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Outer-loop stopping tolerance on the objective, utility units.
    pub outer_tol: f64,
    /// Inner (SCA) stopping tolerance on the subproblem objective.
    pub inner_tol: f64,
    /// Cap on outer iterations.
    pub max_outer: usize,
    /// Cap on SCA iterations per outer round.
    pub max_inner: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            outer_tol: 1e-3,
            inner_tol: 1e-4,
            max_outer: 10,
            max_inner: 20,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.outer_tol > 0.0) {
            return Err(invalid("outer_tol", "must be strictly positive"));
        }
        if !(self.inner_tol > 0.0) {
            return Err(invalid("inner_tol", "must be strictly positive"));
        }
        if self.max_outer < 1 {
            return Err(invalid("max_outer", "must be at least 1"));
        }
        if self.max_inner < 1 {
            return Err(invalid("max_inner", "must be at least 1"));
        }
        Ok(())
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

fn invalid(key: &str, reason: &str) -> Error {
    Error::InvalidValue {
        key: key.to_string(),
        reason: reason.to_string(),
    }
}

/// Parse a config file. Missing keys keep their defaults; unknown keys are
/// rejected with the offending line number.
pub fn parse_config(path: &Path) -> Result<(SystemConfig, TaskCatalog, SolverConfig)> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text)
}

/// Same as [`parse_config`], from an in-memory string.
///
/// Format: one `key = value` per line; blank lines and `#` comments are
/// ignored. `task = <delay_s>,<accuracy_pct>` may repeat; the first such
/// line replaces the default catalog.
pub fn parse_config_str(text: &str) -> Result<(SystemConfig, TaskCatalog, SolverConfig)> {
    let mut cfg = SystemConfig::default();
    let mut catalog = TaskCatalog::default();
    let mut solver = SolverConfig::default();
    let mut tasks: Vec<TaskType> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config {
                line: line_no,
                msg: format!("expected `key = value`, got `{line}`"),
            });
        };
        let key = key.trim();
        let value = value.trim();
        let parse_f64 = || -> Result<f64> {
            value.parse::<f64>().map_err(|_| Error::Config {
                line: line_no,
                msg: format!("`{value}` is not a number"),
            })
        };
        let parse_count = |key: &str| -> Result<usize> {
            let v = value.parse::<i64>().map_err(|_| Error::Config {
                line: line_no,
                msg: format!("`{value}` is not an integer"),
            })?;
            if v < 0 {
                return Err(invalid(key, "must be non-negative"));
            }
            Ok(v as usize)
        };
        match key {
            "bandwidth_hz" => cfg.bandwidth_hz = parse_f64()?,
            "num_subcarriers" => cfg.num_subcarriers = parse_count(key)?,
            "tx_power_w" => cfg.tx_power_w = parse_f64()?,
            "noise_power_dbm" => cfg.noise_power_w = dbm_to_watts(parse_f64()?),
            "carrier_freq_hz" => cfg.carrier_freq_hz = parse_f64()?,
            "area_side_m" => cfg.area_side_m = parse_f64()?,
            "num_sbs" => cfg.num_sbs = parse_count(key)?,
            "num_users" => cfg.num_users = parse_count(key)?,
            "mec_capacity" => cfg.mec_capacity = parse_f64()?,
            "local_capacity" => cfg.local_capacity = parse_f64()?,
            "utility_weight" => cfg.utility_weight = parse_f64()?,
            "overhead_slope" => cfg.overhead_slope = parse_f64()?,
            "overhead_intercept" => cfg.overhead_intercept = parse_f64()?,
            "volume_min" => cfg.volume_range.0 = parse_f64()?,
            "volume_max" => cfg.volume_range.1 = parse_f64()?,
            "bits_per_unit" => cfg.bits_per_unit = parse_f64()?,
            "rng_seed" => {
                cfg.rng_seed = value.parse::<u64>().map_err(|_| Error::Config {
                    line: line_no,
                    msg: format!("`{value}` is not a valid seed"),
                })?
            }
            "fit_p" => catalog.fit.p = parse_f64()?,
            "fit_q" => catalog.fit.q = parse_f64()?,
            "fit_r" => catalog.fit.r = parse_f64()?,
            "task" => {
                let Some((d, a)) = value.split_once(',') else {
                    return Err(Error::Config {
                        line: line_no,
                        msg: format!("expected `task = <delay_s>,<accuracy_pct>`, got `{value}`"),
                    });
                };
                let delay = d.trim().parse::<f64>().map_err(|_| Error::Config {
                    line: line_no,
                    msg: format!("`{d}` is not a number"),
                })?;
                let acc = a.trim().parse::<f64>().map_err(|_| Error::Config {
                    line: line_no,
                    msg: format!("`{a}` is not a number"),
                })?;
                tasks.push(TaskType {
                    delay_limit: delay,
                    accuracy_limit: acc,
                });
            }
            "outer_tol" => solver.outer_tol = parse_f64()?,
            "inner_tol" => solver.inner_tol = parse_f64()?,
            "max_outer" => solver.max_outer = parse_count(key)?,
            "max_inner" => solver.max_inner = parse_count(key)?,
            other => {
                return Err(Error::Config {
                    line: line_no,
                    msg: format!("unknown key `{other}`"),
                });
            }
        }
    }
    if !tasks.is_empty() {
        catalog.types = tasks;
    }
    cfg.validate()?;
    catalog.validate()?;
    solver.validate()?;
    Ok((cfg, catalog, solver))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_yields_defaults() {
        let (cfg, catalog, solver) = parse_config_str("").unwrap();
        assert_eq!(cfg.bandwidth_hz, 10e6);
        assert_eq!(cfg.mec_capacity, 200e9);
        assert_eq!(cfg.num_users, 30);
        assert_eq!(cfg.utility_weight, 1.0);
        assert_eq!(cfg.local_capacity, 1.4e9);
        assert_eq!(catalog.fit.p, 100.0);
        assert_eq!(catalog.fit.q, 80.0);
        assert_eq!(catalog.fit.r, 0.6);
        assert_eq!(catalog.types.len(), 3);
        assert_eq!(solver.max_outer, 10);
    }

    #[test]
    fn noise_power_dbm_converts_to_watts() {
        let (cfg, _, _) = parse_config_str("noise_power_dbm = -100").unwrap();
        assert!(
            (cfg.noise_power_w - 1e-13).abs() <= 1e-13 * 1e-9,
            "sigma2 = {}",
            cfg.noise_power_w
        );
    }

    #[test]
    fn negative_user_count_is_rejected() {
        let err = parse_config_str("num_users = -5").unwrap_err();
        assert!(
            matches!(err, Error::InvalidValue { ref key, .. } if key == "num_users"),
            "{err}"
        );
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_config_str("bandwidth_hz = 1e7\nnot a key value\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }), "{err}");
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = parse_config_str("beamforming = yes").unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, .. }), "{err}");
    }

    #[test]
    fn task_lines_replace_default_catalog() {
        let (_, catalog, _) = parse_config_str("task = 0.05, 80\ntask = 0.1, 90").unwrap();
        assert_eq!(catalog.types.len(), 2);
        assert_eq!(catalog.types[0].delay_limit, 0.05);
        assert_eq!(catalog.types[1].accuracy_limit, 90.0);
    }

    #[test]
    fn out_of_range_volume_is_rejected() {
        let err = parse_config_str("volume_min = 100\nvolume_max = 50").unwrap_err();
        assert!(matches!(err, Error::InvalidValue { .. }), "{err}");
    }

    #[test]
    fn later_keys_override_earlier_ones() {
        let (cfg, _, _) = parse_config_str("num_users = 10\nnum_users = 25").unwrap();
        assert_eq!(cfg.num_users, 25);
    }

    #[test]
    fn fit_exponent_outside_unit_interval_is_rejected() {
        let err = parse_config_str("fit_r = 1.5").unwrap_err();
        assert!(
            matches!(err, Error::InvalidValue { ref key, .. } if key == "fit_r"),
            "{err}"
        );
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let (cfg, _, _) =
            parse_config_str("# header\n\n  # indented comment\nnum_sbs = 9\n").unwrap();
        assert_eq!(cfg.num_sbs, 9);
    }
}
