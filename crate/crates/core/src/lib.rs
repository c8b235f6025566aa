//! Reactive planar trajectory generation for thrust-limited vehicles.
//!
//! Heading and speed are sums of tanh transitions whose timespans are
//! sized so the commanded path never asks for more planar thrust than the
//! vehicle has left after hover and worst-case drag. Each sensing period
//! the vehicle segments its range scan, picks the closest and best-aligned
//! threats and turns to the tangent of the clearance disc around them, or
//! toward the goal when that is safe.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod avoidance;
pub mod coordination;
pub mod cubic;
pub mod error;
pub mod geom;
pub mod guarantees;
pub mod plant;
pub mod sensing;
pub mod sigmoid;

pub use avoidance::{AvoidanceDecision, Avoider, HeadingCandidate, SelectionBranch};
pub use coordination::{ManeuverSet, VehicleBeacon};
pub use error::{
    AvoidanceError, ControlError, CoordinationError, GeomError, GuaranteeError, SensingError, TrajError, WindError,
};
pub use geom::{Polygon, TurnDirection, Vec2};
pub use guarantees::{CruiseSolution, ForceBudget, TauFSolution, VehicleParams};
pub use plant::{QuadrotorState, WindProvider};
pub use sensing::{AugmentedTable, ObstacleTrack, RangeScan, SensorConfig, TargetId};
pub use sigmoid::{DesiredState, SigmoidSegment, TrajectoryProfile};
