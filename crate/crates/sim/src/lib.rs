//! Closed-loop simulation of reactive planar trajectory generation:
//! scenario files, a synthetic world with ray-cast scans, the multi-rate
//! loop tying sensing, avoidance, control and the quadrotor plant
//! together, and CSV logging.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod log;
pub mod run;
pub mod scenario;
pub mod world;

pub use run::{run, RunError, RunOptions, RunOutput, RunSummary};
pub use scenario::{load_scenario, Scenario, ScenarioError};
