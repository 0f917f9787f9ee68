//! Joint computing-offloading and semantic-compression optimization for
//! multi-cell MEC systems.
//!
//! The library generates small-cell uplink scenarios, models intelligent
//! computing tasks whose accuracy follows a power law in the processed data
//! volume, and maximizes the logarithmic system utility `sum ln(L y / t)`
//! by alternating two subproblem solvers: a KKT-based allocation of each
//! server's computing capacity and a successive-convex-approximation pass
//! over the per-user offload flags and compression ratios. Two baselines
//! (even capacity split, offloading without compression) and a seeded
//! experiment harness with CSV output round out the toolkit.
//!
//! See the `examples/` directory for one runnable example per capability
//! and the `mecsim` binary for the experiment CLI.

// Validations use `!(x > 0.0)` so NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod compression;
pub mod config;
pub mod error;
pub mod experiment;
pub mod numeric;
pub mod orchestrator;
pub mod scenario;
pub mod taskmodel;

pub use config::{parse_config, parse_config_str, SolverConfig, SystemConfig};
pub use error::{Error, Result};
pub use orchestrator::{run, run_ac, run_algorithm1, run_wcr, RunTrace, Scheme};
pub use scenario::Scenario;
pub use taskmodel::{Decision, TaskCatalog, TaskSet};
