//! Quadrotor rigid-body plant, the RISE translational controller, the PID
//! attitude loop and bounded wind providers.
//!
//! Inertial frame is x-y-z with z up; gravity is `(0, 0, −g)`. Attitude is
//! the body-to-inertial rotation and thrust acts along body +z.

use std::sync::atomic::{AtomicBool, Ordering};

use log::warn;
use nalgebra::{Matrix3, Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{ControlError, WindError};
use crate::geom::{wrap_angle, Polygon, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantParams {
    pub mass: f64,
    pub gravity: f64,
    /// Drag constant ½ρ C_D A, kg/m.
    pub k_d: f64,
    /// Principal moments of inertia, kg m².
    pub inertia: [f64; 3],
    pub f_max: f64,
}

impl PlantParams {
    pub fn inertia_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&Vector3::from(self.inertia))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadrotorState {
    pub p: Vector3<f64>,
    pub v: Vector3<f64>,
    /// Body to inertial.
    pub attitude: UnitQuaternion<f64>,
    /// Body rates, rad/s.
    pub omega: Vector3<f64>,
}

impl QuadrotorState {
    pub fn at_rest(p: Vector3<f64>) -> Self {
        Self { p, v: Vector3::zeros(), attitude: UnitQuaternion::identity(), omega: Vector3::zeros() }
    }

    pub fn planar_position(&self) -> Vec2 {
        Vec2::new(self.p.x, self.p.y)
    }

    pub fn planar_velocity(&self) -> Vec2 {
        Vec2::new(self.v.x, self.v.y)
    }

    /// Inertial direction of body +z.
    pub fn thrust_axis(&self) -> Vector3<f64> {
        self.attitude * Vector3::z()
    }

    pub fn is_finite(&self) -> bool {
        self.p.iter().chain(self.v.iter()).chain(self.omega.iter()).all(|x| x.is_finite())
            && self.attitude.coords.iter().all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    pub dp: Vector3<f64>,
    pub dv: Vector3<f64>,
    pub dq: Quaternion<f64>,
    pub domega: Vector3<f64>,
}

/// Aerodynamic drag from the air velocity relative to the vehicle.
pub fn drag_force(k_d: f64, v_air: Vector3<f64>, v: Vector3<f64>) -> Vector3<f64> {
    let rel = v_air - v;
    rel * (k_d * rel.norm())
}

fn planar_to_3d(v: Vec2) -> Vector3<f64> {
    Vector3::new(v.x, v.y, 0.0)
}

/// State derivative for inertial thrust `f` and body torque `u`.
pub fn plant_derivatives(
    s: &QuadrotorState,
    f: Vector3<f64>,
    u: Vector3<f64>,
    wind: &WindProvider,
    t: f64,
    p: &PlantParams,
) -> StateDerivative {
    let v_air = planar_to_3d(wind.sample(s.planar_position(), t));
    let gravity = Vector3::new(0.0, 0.0, -p.gravity * p.mass);
    let dv = (f + gravity + drag_force(p.k_d, v_air, s.v)) / p.mass;
    let j = p.inertia_matrix();
    let jw = j * s.omega;
    let domega = Vector3::from_iterator((0..3).map(|i| (u - s.omega.cross(&jw))[i] / p.inertia[i]));
    let dq = s.attitude.quaternion() * Quaternion::from_imag(s.omega) * 0.5;
    StateDerivative { dp: s.v, dv, dq, domega }
}

fn offset(s: &QuadrotorState, d: &StateDerivative, h: f64) -> QuadrotorState {
    QuadrotorState {
        p: s.p + d.dp * h,
        v: s.v + d.dv * h,
        attitude: UnitQuaternion::new_normalize(s.attitude.quaternion() + d.dq * h),
        omega: s.omega + d.domega * h,
    }
}

/// One RK4 step with thrust magnitude held and applied along the body
/// axis of each intermediate state.
pub fn rk4_step(
    s: &QuadrotorState,
    thrust: f64,
    u: Vector3<f64>,
    wind: &WindProvider,
    t: f64,
    dt: f64,
    p: &PlantParams,
) -> QuadrotorState {
    let deriv = |x: &QuadrotorState, tt: f64| plant_derivatives(x, x.thrust_axis() * thrust, u, wind, tt, p);
    let k1 = deriv(s, t);
    let k2 = deriv(&offset(s, &k1, 0.5 * dt), t + 0.5 * dt);
    let k3 = deriv(&offset(s, &k2, 0.5 * dt), t + 0.5 * dt);
    let k4 = deriv(&offset(s, &k3, dt), t + dt);
    let w = dt / 6.0;
    QuadrotorState {
        p: s.p + (k1.dp + k2.dp * 2.0 + k3.dp * 2.0 + k4.dp) * w,
        v: s.v + (k1.dv + k2.dv * 2.0 + k3.dv * 2.0 + k4.dv) * w,
        attitude: UnitQuaternion::new_normalize(
            s.attitude.quaternion() + (k1.dq + k2.dq * 2.0 + k3.dq * 2.0 + k4.dq) * w,
        ),
        omega: s.omega + (k1.domega + k2.domega * 2.0 + k3.domega * 2.0 + k4.domega) * w,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiseGains {
    pub k_s: f64,
    pub alpha_1: f64,
    pub alpha_2: f64,
    pub beta: f64,
}

impl Default for RiseGains {
    fn default() -> Self {
        Self { k_s: 6.0, alpha_1: 2.0, alpha_2: 1.0, beta: 0.05 }
    }
}

impl RiseGains {
    pub fn validate(&self) -> Result<(), ControlError> {
        if !(self.k_s > 0.0) || !(self.alpha_2 > 0.5) || !(self.alpha_1 > 0.0) || !(self.beta >= 0.0) {
            return Err(ControlError::BadGains(format!(
                "need k_s > 0, alpha_1 > 0, alpha_2 > 0.5, beta >= 0, got {self:?}"
            )));
        }
        Ok(())
    }
}

fn sign0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// RISE outer loop. The returned thrust includes gravity compensation so
/// that zero error means hover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiseController {
    pub gains: RiseGains,
    pub nu: Vector3<f64>,
    pub e2_initial: Option<Vector3<f64>>,
    pub mass: f64,
    pub gravity: f64,
    pub f_max: f64,
    pub clip_events: u64,
}

impl RiseController {
    pub fn new(gains: RiseGains, mass: f64, gravity: f64, f_max: f64) -> Result<Self, ControlError> {
        gains.validate()?;
        Ok(Self { gains, nu: Vector3::zeros(), e2_initial: None, mass, gravity, f_max, clip_events: 0 })
    }

    pub fn e2(&self, e1: Vector3<f64>, e1_dot: Vector3<f64>) -> Vector3<f64> {
        e1_dot + e1 * self.gains.alpha_1
    }

    /// Thrust command for position error `e1 = p_d − p` and its rate.
    /// `ν` is advanced by one explicit Euler step of length `dt`.
    pub fn update(&mut self, e1: Vector3<f64>, e1_dot: Vector3<f64>, dt: f64) -> Vector3<f64> {
        let g = self.gains;
        let e2 = self.e2(e1, e1_dot);
        let e2_0 = *self.e2_initial.get_or_insert(e2);
        let gain = g.k_s + 1.0;
        let hover = Vector3::new(0.0, 0.0, self.mass * self.gravity);
        let mut f = (e2 - e2_0) * gain + self.nu + hover;
        let nu_dot = e2 * (gain * g.alpha_2) + e2.map(sign0) * g.beta;
        self.nu += nu_dot * dt;
        let norm = f.norm();
        if norm > self.f_max {
            self.clip_events += 1;
            f *= self.f_max / norm;
        }
        f
    }
}

/// Roll, pitch, yaw (rad), rotation order z-y-x.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EulerAngles {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl EulerAngles {
    pub fn from_attitude(q: &UnitQuaternion<f64>) -> Self {
        let (roll, pitch, yaw) = q.euler_angles();
        Self { roll, pitch, yaw }
    }

    pub fn to_attitude(self) -> UnitQuaternion<f64> {
        UnitQuaternion::from_euler_angles(self.roll, self.pitch, self.yaw)
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.roll, self.pitch, self.yaw)
    }
}

/// Attitude whose body z-axis points along `f`, with the given yaw.
pub fn attitude_from_thrust(f: Vector3<f64>, yaw_ref: f64) -> Result<EulerAngles, ControlError> {
    let n = f.norm();
    if !(n > 0.0) {
        return Err(ControlError::ZeroThrust);
    }
    let b = f / n;
    let (s, c) = yaw_ref.sin_cos();
    // undo the yaw, then read roll and pitch off the remaining tilt
    let bx = c * b.x + s * b.y;
    let by = -s * b.x + c * b.y;
    let roll = (-by).clamp(-1.0, 1.0).asin();
    let pitch = bx.atan2(b.z);
    Ok(EulerAngles { roll, pitch, yaw: yaw_ref })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidGains {
    pub k_p: f64,
    pub k_i: f64,
    pub k_d: f64,
    /// Per-axis bound on the integral contribution, N m.
    pub u_max: f64,
}

impl Default for PidGains {
    fn default() -> Self {
        Self { k_p: 0.6, k_i: 0.05, k_d: 0.05, u_max: 0.05 }
    }
}

impl PidGains {
    pub fn validate(&self) -> Result<(), ControlError> {
        if !(self.k_p > 0.0 && self.k_i > 0.0 && self.k_d > 0.0 && self.u_max > 0.0) {
            return Err(ControlError::BadGains(format!("PID gains must be positive, got {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PidController {
    pub gains: PidGains,
    pub integral: Vector3<f64>,
}

impl PidController {
    pub fn new(gains: PidGains) -> Result<Self, ControlError> {
        gains.validate()?;
        Ok(Self { gains, integral: Vector3::zeros() })
    }

    /// Torque for attitude error `q_err` and error rate `q_err_rate`.
    pub fn update(&mut self, q_err: Vector3<f64>, q_err_rate: Vector3<f64>, dt: f64) -> Vector3<f64> {
        let g = self.gains;
        self.integral += q_err * dt;
        let limit = g.u_max / g.k_i;
        self.integral = self.integral.map(|x| x.clamp(-limit, limit));
        q_err * g.k_p + self.integral * g.k_i + q_err_rate * g.k_d
    }
}

/// Attitude error `q_d − q` with the yaw difference wrapped.
pub fn attitude_error(desired: EulerAngles, actual: EulerAngles) -> Vector3<f64> {
    Vector3::new(
        desired.roll - actual.roll,
        desired.pitch - actual.pitch,
        wrap_angle(desired.yaw - actual.yaw),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GustComponent {
    /// Peak air velocity of this component, m/s.
    pub amplitude: Vec2,
    /// rad/s
    pub omega: f64,
    /// rad
    pub phase: f64,
}

/// Row-major grid of planar air velocities, bilinearly interpolated.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindGrid {
    /// Position of sample `(0, 0)`, m.
    pub origin: Vec2,
    pub dx: f64,
    pub dy: f64,
    pub nx: usize,
    pub ny: usize,
    /// Declared sup-norm bound, m/s.
    pub bound: f64,
    /// `nx * ny` samples `[u, v]`, x fastest.
    pub samples: Vec<[f64; 2]>,
    /// Frozen-field advection velocity, m/s.
    #[serde(default)]
    pub advect: Vec2,
    #[serde(skip)]
    warned: AtomicBool,
}

impl Clone for WindGrid {
    fn clone(&self) -> Self {
        Self {
            origin: self.origin,
            dx: self.dx,
            dy: self.dy,
            nx: self.nx,
            ny: self.ny,
            bound: self.bound,
            samples: self.samples.clone(),
            advect: self.advect,
            warned: AtomicBool::new(self.warned.load(Ordering::Relaxed)),
        }
    }
}

impl PartialEq for WindGrid {
    fn eq(&self, o: &Self) -> bool {
        self.origin == o.origin
            && self.dx == o.dx
            && self.dy == o.dy
            && self.nx == o.nx
            && self.ny == o.ny
            && self.bound == o.bound
            && self.samples == o.samples
            && self.advect == o.advect
    }
}

impl WindGrid {
    pub fn new(origin: Vec2, dx: f64, dy: f64, nx: usize, ny: usize, bound: f64, samples: Vec<[f64; 2]>) -> Self {
        Self { origin, dx, dy, nx, ny, bound, samples, advect: Vec2::ZERO, warned: AtomicBool::new(false) }
    }

    /// Checks shape and that every sample respects the declared bound.
    /// Bilinear weights are convex, so interpolated values do too.
    pub fn certify(&self) -> Result<(), WindError> {
        if self.nx < 2 || self.ny < 2 || !(self.dx > 0.0) || !(self.dy > 0.0) {
            return Err(WindError::BadGrid(format!(
                "need nx, ny >= 2 and positive spacing, got {}x{} at ({}, {})",
                self.nx, self.ny, self.dx, self.dy
            )));
        }
        if self.samples.len() != self.nx * self.ny {
            return Err(WindError::BadGrid(format!(
                "expected {} samples, found {}",
                self.nx * self.ny,
                self.samples.len()
            )));
        }
        for (index, s) in self.samples.iter().enumerate() {
            let magnitude = s[0].hypot(s[1]);
            if !(magnitude <= self.bound) {
                return Err(WindError::GridExceedsBound { index, magnitude, bound: self.bound });
            }
        }
        Ok(())
    }

    pub fn try_sample(&self, p: Vec2, t: f64) -> Result<Vec2, WindError> {
        let q = p - self.advect * t - self.origin;
        let fx = q.x / self.dx;
        let fy = q.y / self.dy;
        let max_x = (self.nx - 1) as f64;
        let max_y = (self.ny - 1) as f64;
        if !(fx >= 0.0 && fy >= 0.0 && fx <= max_x && fy <= max_y) {
            return Err(WindError::OutOfGrid { x: p.x, y: p.y });
        }
        let i = (fx.floor() as usize).min(self.nx - 2);
        let j = (fy.floor() as usize).min(self.ny - 2);
        let (sx, sy) = (fx - i as f64, fy - j as f64);
        let at = |i: usize, j: usize| {
            let s = self.samples[j * self.nx + i];
            Vec2::new(s[0], s[1])
        };
        let bottom = at(i, j) * (1.0 - sx) + at(i + 1, j) * sx;
        let top = at(i, j + 1) * (1.0 - sx) + at(i + 1, j + 1) * sx;
        Ok(bottom * (1.0 - sy) + top * sy)
    }

    /// Sample, or zero with a one-time warning outside the grid.
    pub fn sample(&self, p: Vec2, t: f64) -> Vec2 {
        match self.try_sample(p, t) {
            Ok(v) => v,
            Err(e) => {
                if !self.warned.swap(true, Ordering::Relaxed) {
                    warn!("{e}; using zero wind");
                }
                Vec2::ZERO
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WindModel {
    Constant {
        velocity: Vec2,
    },
    SinusoidGust {
        mean: Vec2,
        bound: f64,
        components: Vec<GustComponent>,
    },
    Gridded {
        grid: WindGrid,
    },
}

impl WindModel {
    pub fn bound(&self) -> f64 {
        match self {
            WindModel::Constant { velocity } => velocity.norm(),
            WindModel::SinusoidGust { bound, .. } => *bound,
            WindModel::Gridded { grid } => grid.bound,
        }
    }

    pub fn certify(&self) -> Result<(), WindError> {
        match self {
            WindModel::Constant { .. } => Ok(()),
            WindModel::SinusoidGust { mean, bound, components } => {
                let sum: f64 = components.iter().map(|c| c.amplitude.norm()).sum();
                if sum > *bound - mean.norm() {
                    return Err(WindError::GustExceedsBound { sum, mean: mean.norm(), bound: *bound });
                }
                Ok(())
            }
            WindModel::Gridded { grid } => grid.certify(),
        }
    }

    fn raw_sample(&self, p: Vec2, t: f64) -> Vec2 {
        match self {
            WindModel::Constant { velocity } => *velocity,
            WindModel::SinusoidGust { mean, components, .. } => components
                .iter()
                .fold(*mean, |acc, c| acc + c.amplitude * (c.omega * t + c.phase).sin()),
            WindModel::Gridded { grid } => grid.sample(p, t),
        }
    }
}

/// Sheltered regions: zero wind deeper than `transition` inside a region,
/// ramping linearly to the outside value across the transition band.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndoorMask {
    pub regions: Vec<Polygon>,
    #[serde(default)]
    pub transition: f64,
}

impl IndoorMask {
    /// Factor in [0, 1] applied to the outdoor wind at `p`.
    pub fn factor(&self, p: Vec2) -> f64 {
        self.regions
            .iter()
            .map(|r| {
                let depth = -r.signed_distance(p);
                if depth <= 0.0 {
                    1.0
                } else if self.transition > 0.0 {
                    (1.0 - depth / self.transition).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .fold(1.0, f64::min)
    }
}

/// A certified wind model plus optional sheltered regions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindProvider {
    pub model: WindModel,
    #[serde(default)]
    pub mask: IndoorMask,
}

impl WindProvider {
    pub fn new(model: WindModel, mask: IndoorMask) -> Result<Self, WindError> {
        model.certify()?;
        Ok(Self { model, mask })
    }

    pub fn calm() -> Self {
        Self { model: WindModel::Constant { velocity: Vec2::ZERO }, mask: IndoorMask::default() }
    }

    pub fn bound(&self) -> f64 {
        self.model.bound()
    }

    pub fn sample(&self, p: Vec2, t: f64) -> Vec2 {
        let f = self.mask.factor(p);
        if f == 0.0 {
            return Vec2::ZERO;
        }
        self.model.raw_sample(p, t) * f
    }
}

pub fn wind_sample(w: &WindProvider, p: Vec2, t: f64) -> Vec2 {
    w.sample(p, t)
}
