use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum GeomError {
    #[error("angle undefined for a zero-length vector")]
    ZeroVector,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SensingError {
    #[error("track ids differ ({now} vs {prev})")]
    IdMismatch { now: u32, prev: u32 },
    #[error("desired velocity is zero, heading undefined")]
    ZeroHeading,
    #[error("obstacle table is empty")]
    EmptyTable,
    #[error("speed-class constant K_o = {0} must lie in (0, 1)")]
    BadKo(f64),
    #[error("sample period must be positive, got {0}")]
    BadPeriod(f64),
    #[error("invalid sensor configuration: {0}")]
    BadConfig(String),
    #[error("invalid range scan: {0}")]
    BadScan(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AvoidanceError {
    #[error("desired velocity is zero, heading undefined")]
    ZeroHeading,
    #[error("point at {distance:.4} m is inside the clearance radius {r_c} m")]
    ClearanceViolated { distance: f64, r_c: f64 },
    #[error("vehicle is at the goal, goal bearing undefined")]
    AtGoal,
    #[error("obstacle speed {obstacle:.4} m/s exceeds vehicle speed {vehicle:.4} m/s")]
    SpeedRatioDomain { obstacle: f64, vehicle: f64 },
    #[error("no candidate points")]
    NoPoints,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajError {
    #[error("sigmoid timespan must be positive for a nonzero change, got {0}")]
    BadTimespan(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GuaranteeError {
    #[error("hover infeasible: f_max {f_max} N <= m g {weight} N")]
    HoverInfeasible { f_max: f64, weight: f64 },
    #[error("wind bound {v_air} m/s is not below the drag limit {limit:.4} m/s")]
    WindTooStrong { v_air: f64, limit: f64 },
    #[error("no real root of the peak-acceleration cubic satisfies |H| < eps")]
    NoQualifyingRoot,
    #[error("commanded speed plus wind exhaust the planar force budget (a_max = {0:.4})")]
    NegativeAmax(f64),
    #[error("thrust quadratic has no positive root")]
    NoPositiveRoot,
    #[error("no positive cruise velocity satisfies the sensor constraint")]
    Infeasible,
    #[error("invalid vehicle parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Traj(#[from] TrajError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("thrust vector is zero, attitude undefined")]
    ZeroThrust,
    #[error("invalid gains: {0}")]
    BadGains(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WindError {
    #[error("gust amplitudes {sum:.4} exceed the declared bound {bound} minus the mean {mean:.4}")]
    GustExceedsBound { sum: f64, mean: f64, bound: f64 },
    #[error("grid sample {index} has magnitude {magnitude:.4} above the declared bound {bound}")]
    GridExceedsBound { index: usize, magnitude: f64, bound: f64 },
    #[error("wind grid: {0}")]
    BadGrid(String),
    #[error("position ({x:.3}, {y:.3}) lies outside the wind grid")]
    OutOfGrid { x: f64, y: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoordinationError {
    #[error("duplicate vehicle id {0}")]
    DuplicateId(u32),
}
