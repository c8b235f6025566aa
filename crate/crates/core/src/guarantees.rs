//! Thrust and sensor guarantees: the sigmoid timespan that keeps the summed
//! trajectory inside the planar force budget, and the maximum cruise speed.

use std::f64::consts::FRAC_PI_2;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::cubic::{eval_cubic, real_roots};
use crate::error::GuaranteeError;
use crate::sensing::SensorConfig;
use crate::sigmoid::{
    c3, make_segment, path_derivatives, RequestTiming, SegmentKind, SigmoidSegment, TrajectoryProfile,
    EPSILON_1,
};

/// Sea-level standard air density, kg/m³.
pub const SEA_LEVEL_RHO: f64 = 1.225;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleParams {
    /// kg
    pub mass: f64,
    /// Maximum total thrust, N.
    pub f_max: f64,
    #[serde(default = "default_gravity")]
    pub gravity: f64,
    /// Air density, kg/m³.
    #[serde(default = "default_rho")]
    pub rho: f64,
    pub drag_coefficient: f64,
    /// Cross-sectional area normal to the relative wind, m².
    pub area: f64,
    /// Tightest turn radius the thrust bound is sized for, m.
    #[serde(default = "default_r_min")]
    pub r_min: f64,
    /// Fastest obstacle the sensor bound is sized for, m/s.
    #[serde(default = "default_v_o_max")]
    pub v_o_max: f64,
    /// Certified bound on the wind speed, m/s.
    #[serde(default)]
    pub v_air: f64,
}

fn default_gravity() -> f64 {
    9.81
}
fn default_rho() -> f64 {
    SEA_LEVEL_RHO
}
fn default_r_min() -> f64 {
    1.0
}
fn default_v_o_max() -> f64 {
    1.0
}

impl VehicleParams {
    pub fn weight(&self) -> f64 {
        self.mass * self.gravity
    }

    pub fn validate(&self) -> Result<(), GuaranteeError> {
        let positive = [
            ("mass", self.mass),
            ("f_max", self.f_max),
            ("gravity", self.gravity),
            ("r_min", self.r_min),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(GuaranteeError::BadParams(format!("{name} must be positive, got {value}")));
            }
        }
        let non_negative = [
            ("rho", self.rho),
            ("drag_coefficient", self.drag_coefficient),
            ("area", self.area),
            ("v_o_max", self.v_o_max),
            ("v_air", self.v_air),
        ];
        for (name, value) in non_negative {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(GuaranteeError::BadParams(format!("{name} must be non-negative, got {value}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceBudget {
    /// Thrust left for horizontal manoeuvring after hover, N.
    pub f_planar: f64,
    /// Drag constant ½ρ C_D A, kg/m.
    pub k_d: f64,
    /// Largest wind speed the budget tolerates, m/s.
    pub v_air_max_allowed: f64,
}

impl ForceBudget {
    /// Acceleration left after drag at relative airspeed `v_w`.
    pub fn a_max(&self, mass: f64, v_w: f64) -> f64 {
        (self.f_planar - self.k_d * v_w * v_w) / mass
    }
}

pub fn force_budget(p: &VehicleParams) -> Result<ForceBudget, GuaranteeError> {
    p.validate()?;
    let weight = p.weight();
    if p.f_max <= weight {
        return Err(GuaranteeError::HoverInfeasible { f_max: p.f_max, weight });
    }
    let f_planar = (p.f_max * p.f_max - weight * weight).sqrt();
    let k_d = 0.5 * p.rho * p.drag_coefficient * p.area;
    let limit = if k_d > 0.0 { (f_planar / k_d).sqrt() } else { f64::INFINITY };
    if p.v_air >= limit {
        return Err(GuaranteeError::WindTooStrong { v_air: p.v_air, limit });
    }
    Ok(ForceBudget { f_planar, k_d, v_air_max_allowed: limit })
}

/// Coefficients (ascending) of the cubic whose roots locate the peak of
/// ‖p̈_d‖ in terms of the common tanh value `H`.
pub fn peak_cubic(c1: f64, d1: f64, d4: f64) -> [f64; 4] {
    let c1s = c1 * c1;
    [
        d1 * d4 * c1s,
        -2.0 * c1s * d4 * d4 + d1 * d1 * c1s - 2.0 * d1 * d1,
        -5.0 * c1s * d1 * d4,
        -3.0 * c1s * d1 * d1,
    ]
}

pub fn compute_s_traj(c1: f64, d1: f64, d4: f64, h: f64) -> f64 {
    let w = 1.0 - h * h;
    let a = c1 * (d1 * h + d4) * w;
    let b = d1 * w;
    a * a + b * b
}

/// Peak-location fraction `K` from `H`.
pub fn k_from_h(h: f64) -> f64 {
    0.5 * (h.atanh() / c3() + 1.0)
}

/// Root `H` with `|H| < eps_1` of the peak-acceleration cubic and the
/// matching `K`. When several qualify the largest `S_traj` wins.
pub fn solve_h(c1: f64, d1: f64, d4: f64) -> Result<(f64, f64), GuaranteeError> {
    if d1 == 0.0 || c1 == 0.0 {
        // the cubic collapses to a multiple of H
        return Ok((0.0, 0.5));
    }
    let coeffs = peak_cubic(c1, d1, d4);
    let best = real_roots(coeffs)
        .into_iter()
        .filter(|h| h.abs() < EPSILON_1)
        .map(|h| (h, compute_s_traj(c1, d1, d4, h)))
        .max_by(|a, b| a.1.total_cmp(&b.1));
    match best {
        Some((h, _)) => Ok((h, k_from_h(h))),
        None => Err(GuaranteeError::NoQualifyingRoot),
    }
}

/// Residual of the peak cubic at `h`.
pub fn peak_cubic_residual(c1: f64, d1: f64, d4: f64, h: f64) -> f64 {
    eval_cubic(peak_cubic(c1, d1, d4), h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TauBranch {
    /// Previous request finished: full budget available.
    Fresh,
    /// Previous request still in flight: match its slope.
    SlopeMatched,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauFSolution {
    pub tau_f: f64,
    /// Common tanh value at the acceleration peak.
    pub h_root: f64,
    pub k: f64,
    pub s_traj: f64,
    pub a_max: f64,
    pub v_w_max: f64,
    /// Slope carried to the next request.
    pub slope: f64,
    pub branch: TauBranch,
}

/// Timespan for a combined heading change `delta_phi` and speed change
/// `delta_v` starting from speed `v_i`.
pub fn solve_tau_f(
    delta_phi: f64,
    delta_v: f64,
    v_i: f64,
    budget: &ForceBudget,
    p: &VehicleParams,
    prev: Option<RequestTiming>,
    t_now: f64,
) -> Result<TauFSolution, GuaranteeError> {
    let v_w_max = v_i.max(v_i + delta_v) + p.v_air;
    let a_max = budget.a_max(p.mass, v_w_max);
    if a_max <= 0.0 {
        return Err(GuaranteeError::NegativeAmax(a_max));
    }
    let c1 = 0.5 * delta_phi;
    let d1 = 0.5 * delta_v;
    let d4 = v_i + 0.5 * delta_v;
    let (h_root, k) = solve_h(c1, d1, d4)?;
    let s_traj = compute_s_traj(c1, d1, d4, h_root);
    let fresh = match prev {
        None => true,
        Some(prev) => t_now >= prev.end_time() || prev.h <= 0.0,
    };
    let shift = c3();
    let (tau_f, slope, branch) = if fresh {
        let tau = 2.0 * shift / a_max * s_traj.sqrt();
        let slope = if tau > 0.0 { a_max / ((1.0 - k) * tau) } else { 0.0 };
        (tau, slope, TauBranch::Fresh)
    } else {
        let h_prev = prev.map(|p| p.h).unwrap_or(0.0);
        let tau = (2.0 * shift * s_traj.sqrt() / h_prev).sqrt();
        (tau, h_prev, TauBranch::SlopeMatched)
    };
    Ok(TauFSolution { tau_f, h_root, k, s_traj, a_max, v_w_max, slope, branch })
}

/// A request placed on a profile after checking the summed result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifiedRequest {
    pub solution: TauFSolution,
    pub heading: SigmoidSegment,
    pub velocity: SigmoidSegment,
    pub t_o: f64,
    /// Factor applied to the nominal timespan (1 when untouched).
    pub stretch: f64,
    /// Largest sampled `m‖p̈_d‖ + K_d v_w,max²` over the affected window, N.
    pub peak_force: f64,
    pub certified: bool,
}

impl CertifiedRequest {
    pub fn tau_f(&self) -> f64 {
        self.heading.tau_f.max(self.velocity.tau_f)
    }
}

/// Maximum over `[t0, t1]` of `m‖p̈_d(t)‖ + K_d (v_peak + v_air)²`, where
/// `v_peak` is the largest speed reached on the window.
pub fn sampled_peak_force(
    profile: &TrajectoryProfile,
    t0: f64,
    t1: f64,
    budget: &ForceBudget,
    p: &VehicleParams,
    samples: usize,
) -> f64 {
    let n = samples.max(2);
    let span = (t1 - t0).max(0.0);
    let dt = span / (n - 1) as f64;
    let accel = |t: f64| -> (f64, f64) {
        let s = profile.evaluate(t);
        (path_derivatives(&s)[1].norm(), s.v)
    };
    let mut values = Vec::with_capacity(n);
    let mut v_peak: f64 = 0.0;
    for i in 0..n {
        let t = t0 + dt * i as f64;
        let (a, v) = accel(t);
        v_peak = v_peak.max(v);
        values.push(a);
    }
    // refine the largest local maxima; the grid alone can miss a narrow peak
    let mut peaks: Vec<usize> = (0..n)
        .filter(|&i| {
            let left = if i > 0 { values[i - 1] } else { f64::NEG_INFINITY };
            let right = if i + 1 < n { values[i + 1] } else { f64::NEG_INFINITY };
            values[i] >= left && values[i] >= right
        })
        .collect();
    peaks.sort_by(|a, b| values[*b].total_cmp(&values[*a]));
    let mut a_peak = values.iter().cloned().fold(0.0, f64::max);
    for &i in peaks.iter().take(4) {
        let lo = t0 + dt * (i as f64 - 1.0).max(0.0);
        let hi = (t0 + dt * (i as f64 + 1.0)).min(t1);
        let (a, v) = golden_max(accel, lo, hi);
        a_peak = a_peak.max(a);
        v_peak = v_peak.max(v);
    }
    p.mass * a_peak + budget.k_d * (v_peak + p.v_air).powi(2)
}

fn golden_max(f: impl Fn(f64) -> (f64, f64), mut lo: f64, mut hi: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut best = if f1.0 > f2.0 { f1 } else { f2 };
    for _ in 0..40 {
        if f1.0 < f2.0 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
        if f1.0 > best.0 {
            best = f1;
        }
        if f2.0 > best.0 {
            best = f2;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    best
}

/// Growth limits for [`certify_request`].
const MAX_STRETCH_ROUNDS: usize = 80;
const CERTIFY_SAMPLES: usize = 3000;
/// Relative slack on the force budget accepted by certification.
const CERTIFY_TOLERANCE: f64 = 1e-9;

/// Solves the timespan for a request issued at `t_now`, places it on a
/// copy of `profile`, and verifies the summed profile by dense sampling.
/// While the sampled force exceeds the budget the timespan is stretched;
/// if stretching alone cannot fix it (the previous request is the
/// offender) the activation is pushed to the end of the active segments.
///
/// The returned segments are not yet added; call
/// [`TrajectoryProfile::push_request`] with them.
pub fn certify_request(
    profile: &TrajectoryProfile,
    delta_phi: f64,
    delta_v: f64,
    t_now: f64,
    budget: &ForceBudget,
    p: &VehicleParams,
) -> Result<CertifiedRequest, GuaranteeError> {
    certify_request_from(profile, delta_phi, delta_v, t_now, t_now, budget, p)
}

/// As [`certify_request`], for a request that must not activate before
/// `earliest` (≥ `t_now`).
pub fn certify_request_from(
    profile: &TrajectoryProfile,
    delta_phi: f64,
    delta_v: f64,
    t_now: f64,
    earliest: f64,
    budget: &ForceBudget,
    p: &VehicleParams,
) -> Result<CertifiedRequest, GuaranteeError> {
    let earliest = earliest.max(t_now);
    let v_i = profile.evaluate(earliest).v;
    let solution = solve_tau_f(delta_phi, delta_v, v_i, budget, p, profile.last_request, earliest)?;
    let nominal_t_o = match solution.branch {
        TauBranch::Fresh => earliest,
        TauBranch::SlopeMatched => profile.activation_time(earliest),
    };
    if solution.tau_f == 0.0 || (delta_phi == 0.0 && delta_v == 0.0) {
        let heading = make_segment(SegmentKind::Heading, 0.0, 0.0, nominal_t_o, v_i)?;
        let velocity = make_segment(SegmentKind::Velocity, 0.0, 0.0, nominal_t_o, v_i)?;
        return Ok(CertifiedRequest {
            solution,
            heading,
            velocity,
            t_o: nominal_t_o,
            stretch: 1.0,
            peak_force: 0.0,
            certified: true,
        });
    }
    let limit = budget.f_planar * (1.0 + CERTIFY_TOLERANCE);
    let mut best: Option<CertifiedRequest> = None;
    let candidates_t_o = [nominal_t_o, profile.active_until().unwrap_or(t_now).max(nominal_t_o)];
    for (attempt, &t_o) in candidates_t_o.iter().enumerate() {
        let v_at = profile.evaluate(t_o).v;
        let mut stretch = 1.0;
        for _ in 0..MAX_STRETCH_ROUNDS {
            let tau = solution.tau_f * stretch;
            let trial = build_request(&solution, delta_phi, delta_v, tau, t_o, v_at, stretch)?;
            let mut scratch = profile.clone();
            scratch.push_request(&[trial.heading, trial.velocity], solution.k);
            let window_end = scratch.active_until().unwrap_or(t_o + tau);
            let peak = sampled_peak_force(&scratch, t_o, window_end, budget, p, CERTIFY_SAMPLES);
            let candidate = CertifiedRequest { peak_force: peak, certified: peak <= limit, ..trial };
            if candidate.certified {
                if stretch > 1.0 || attempt > 0 {
                    debug!(
                        "request at t = {t_now:.3} certified with stretch {stretch:.4}, t_o {t_o:.3} (nominal {nominal_t_o:.3})"
                    );
                }
                return Ok(candidate);
            }
            if best.as_ref().is_none_or(|b| peak < b.peak_force) {
                best = Some(candidate);
            }
            let excess = (peak - budget.f_planar) / budget.f_planar;
            stretch *= 1.0 + (2.0 * excess).clamp(2e-3, 0.25);
        }
    }
    Ok(best.expect("at least one trial was evaluated"))
}

fn build_request(
    solution: &TauFSolution,
    delta_phi: f64,
    delta_v: f64,
    tau: f64,
    t_o: f64,
    v_at: f64,
    stretch: f64,
) -> Result<CertifiedRequest, GuaranteeError> {
    let slope = match solution.branch {
        TauBranch::Fresh if tau > 0.0 => solution.a_max / ((1.0 - solution.k) * tau),
        _ => solution.slope,
    };
    let mut heading = make_segment(SegmentKind::Heading, delta_phi, tau, t_o, v_at)?;
    let mut velocity = make_segment(SegmentKind::Velocity, delta_v, tau, t_o, v_at)?;
    heading.h = slope;
    velocity.h = slope;
    let mut solution = *solution;
    solution.tau_f = tau;
    solution.slope = slope;
    Ok(CertifiedRequest { solution, heading, velocity, t_o, stretch, peak_force: 0.0, certified: false })
}

/// Thrust-limited cruise speed: smallest positive root of
/// `(m/r_min + K_d) v² + 2 K_d v_air v + K_d v_air² − f_planar = 0`.
pub fn solve_vc_thrust(budget: &ForceBudget, p: &VehicleParams) -> Result<f64, GuaranteeError> {
    let a = p.mass / p.r_min + budget.k_d;
    let b = 2.0 * budget.k_d * p.v_air;
    let c = budget.k_d * p.v_air * p.v_air - budget.f_planar;
    crate::cubic::quadratic_roots(a, b, c)
        .into_iter()
        .filter(|v| *v > 0.0)
        .reduce(f64::min)
        .ok_or(GuaranteeError::NoPositiveRoot)
}

/// Residual of the thrust quadratic at `v`.
pub fn vc_thrust_residual(budget: &ForceBudget, p: &VehicleParams, v: f64) -> f64 {
    (p.mass / p.r_min + budget.k_d) * v * v + 2.0 * budget.k_d * p.v_air * v + budget.k_d * p.v_air * p.v_air
        - budget.f_planar
}

/// Which form of the first heading change to use in the sensor bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FirstTurnForm {
    /// `r_s − ΔT_s (v_o,max + v)`: closing speed form.
    #[default]
    Closing,
    /// `r_s − ΔT_s (v_o,max − v)`.
    Difference,
}

/// Evaluation of the sensor constraint at one candidate speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorCheck {
    pub v: f64,
    pub tau_f: f64,
    pub tau_f1: f64,
    pub dphi1: f64,
    pub dphi2: f64,
    /// Lateral displacement integral over the two-turn manoeuvre, m.
    pub lateral: f64,
    /// Right-hand side minus left-hand side; feasible when ≥ 0.
    pub slack: f64,
    /// The arccos argument had to be clamped.
    pub marginal: bool,
}

/// Intervals of the composite Simpson rule for the lateral integral.
const SENSOR_SIMPSON_INTERVALS: usize = 2000;

/// Evaluates the sensor constraint at speed `v`. Returns `None` where the
/// manoeuvre is undefined (drag budget exhausted or obstacle faster than v).
pub fn sensor_check(
    v: f64,
    budget: &ForceBudget,
    p: &VehicleParams,
    cfg: &SensorConfig,
    form: FirstTurnForm,
) -> Option<SensorCheck> {
    if !(v > 0.0) {
        return None;
    }
    let den = budget.f_planar - budget.k_d * (v + p.v_air).powi(2);
    if den <= 0.0 || p.v_o_max > v {
        return None;
    }
    let (r_s, dt_s, r_c) = (cfg.r_s, cfg.dt_s, cfg.r_c);
    let closing = match form {
        FirstTurnForm::Closing => p.v_o_max + v,
        FirstTurnForm::Difference => p.v_o_max - v,
    };
    let raw = (r_s - dt_s * closing) / r_s;
    let marginal = !(-1.0..=1.0).contains(&raw);
    let dphi1 = raw.clamp(-1.0, 1.0).acos() + (r_c / r_s).clamp(-1.0, 1.0).asin();
    let dphi2 = FRAC_PI_2 + (p.v_o_max / v).asin() - dphi1;
    let shift = c3();
    let m = p.mass;
    let tau_f1 = shift * m * dphi1.abs() * v / den;
    let tau_f2 = if 2.0 * dt_s >= tau_f1 {
        shift * m * dphi2.abs() * v / den
    } else {
        (shift * m * tau_f1 * dphi2.abs() * v / (2.0 * den)).sqrt()
    };
    let tau_f = tau_f2 + 0.5 * tau_f1;
    let first = make_segment(SegmentKind::Heading, dphi1, tau_f1, 0.0, v).ok()?;
    let second = if dphi2 != 0.0 && tau_f2 > 0.0 {
        Some(make_segment(SegmentKind::Heading, dphi2, tau_f2, 0.5 * tau_f1, v).ok()?)
    } else {
        None
    };
    let phi = |t: f64| first.eval(t)[0] + second.map_or(0.0, |s| s.eval(t)[0]);
    let n = SENSOR_SIMPSON_INTERVALS;
    let h = tau_f / n as f64;
    let mut acc = 0.0;
    for i in 0..=n {
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * phi(h * i as f64).sin();
    }
    let lateral = v * acc * h / 3.0;
    let slack = r_s - r_c - p.v_o_max * tau_f - v * dt_s - lateral;
    Some(SensorCheck { v, tau_f, tau_f1, dphi1, dphi2, lateral, slack, marginal })
}

/// Grid resolution used to bracket the feasible set before bisection.
const SENSOR_SCAN_POINTS: usize = 400;
const SENSOR_TOLERANCE: f64 = 1e-4;

/// Largest speed satisfying the sensor constraint, searched over the whole
/// drag-limited speed range.
pub fn solve_vc_sensor(
    budget: &ForceBudget,
    p: &VehicleParams,
    cfg: &SensorConfig,
    form: FirstTurnForm,
) -> Result<SensorCheck, GuaranteeError> {
    let v_limit = budget.v_air_max_allowed - p.v_air;
    if !(v_limit > 0.0) {
        return Err(GuaranteeError::Infeasible);
    }
    let v_limit = v_limit.min(1e3);
    let feasible = |v: f64| sensor_check(v, budget, p, cfg, form).filter(|c| c.slack >= 0.0);
    let step = v_limit / SENSOR_SCAN_POINTS as f64;
    let mut lo = None;
    for i in (1..SENSOR_SCAN_POINTS).rev() {
        let v = step * i as f64;
        if let Some(c) = feasible(v) {
            lo = Some(c);
            break;
        }
    }
    let mut best = match lo {
        Some(c) => c,
        None => {
            // the feasible set may be narrower than the grid; try just above v_o,max
            let v = p.v_o_max.max(1e-6) * (1.0 + 1e-9);
            feasible(v).ok_or(GuaranteeError::Infeasible)?
        }
    };
    let mut hi = (best.v + step).min(v_limit);
    while hi - best.v > SENSOR_TOLERANCE {
        let mid = 0.5 * (best.v + hi);
        match feasible(mid) {
            Some(c) => best = c,
            None => hi = mid,
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CruiseSolution {
    pub v_c: f64,
    pub v_c_thrust: f64,
    pub v_c_sensor: f64,
    pub tau_f: f64,
    pub tau_f1: f64,
    pub dphi1: f64,
    pub dphi2: f64,
    pub marginal: bool,
}

pub fn cruise_velocity(p: &VehicleParams, cfg: &SensorConfig) -> Result<CruiseSolution, GuaranteeError> {
    cruise_velocity_with(p, cfg, FirstTurnForm::default())
}

pub fn cruise_velocity_with(
    p: &VehicleParams,
    cfg: &SensorConfig,
    form: FirstTurnForm,
) -> Result<CruiseSolution, GuaranteeError> {
    let budget = force_budget(p)?;
    let v_c_thrust = solve_vc_thrust(&budget, p)?;
    let sensor = solve_vc_sensor(&budget, p, cfg, form)?;
    Ok(CruiseSolution {
        v_c: v_c_thrust.min(sensor.v),
        v_c_thrust,
        v_c_sensor: sensor.v,
        tau_f: sensor.tau_f,
        tau_f1: sensor.tau_f1,
        dphi1: sensor.dphi1,
        dphi2: sensor.dphi2,
        marginal: sensor.marginal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    pub(crate) fn reference_params() -> VehicleParams {
        VehicleParams {
            mass: 0.54,
            f_max: 10.2,
            gravity: 9.81,
            rho: SEA_LEVEL_RHO,
            drag_coefficient: 1.7,
            area: 0.2,
            r_min: 1.0,
            v_o_max: 1.0,
            v_air: 2.0,
        }
    }

    fn sensor() -> SensorConfig {
        SensorConfig { r_s: 10.0, r_a: 10.0, dt_s: 1.0, r_c: 2.0, ..SensorConfig::default() }
    }

    #[test]
    fn budget_examples() {
        let b = force_budget(&reference_params()).unwrap();
        assert_abs_diff_eq!(b.f_planar, 8.7165, epsilon = 5e-4);
        assert_abs_diff_eq!(b.k_d, 0.20825, epsilon = 1e-12);
        assert_abs_diff_eq!(b.v_air_max_allowed, 6.4696, epsilon = 5e-4);
    }

    #[test]
    fn budget_errors() {
        let mut p = reference_params();
        p.f_max = 5.0;
        assert!(matches!(force_budget(&p), Err(GuaranteeError::HoverInfeasible { .. })));
        let mut p = reference_params();
        p.v_air = 6.5;
        assert!(matches!(force_budget(&p), Err(GuaranteeError::WindTooStrong { .. })));
    }

    #[test]
    fn h_degenerate_cases() {
        assert_eq!(solve_h(0.7, 0.0, 1.5).unwrap(), (0.0, 0.5));
        assert_eq!(solve_h(0.0, 0.4, 1.5).unwrap(), (0.0, 0.5));
    }

    #[test]
    fn h_root_is_a_root_and_qualifies() {
        let (h, k) = solve_h(0.785, 0.5, 1.5).unwrap();
        assert!(h.abs() < EPSILON_1);
        assert!((0.0..=1.0).contains(&k));
        assert!(peak_cubic_residual(0.785, 0.5, 1.5, h).abs() < 1e-12);
    }

    #[test]
    fn s_traj_examples() {
        assert_abs_diff_eq!(compute_s_traj(0.6, 0.0, 1.83, 0.0), (0.6 * 1.83f64).powi(2), epsilon = 1e-15);
        assert_eq!(compute_s_traj(0.0, 1.0, 7.0, 0.0), 1.0);
        // term-by-term hand evaluation
        let (c1, d1, d4) = (0.785, 0.5, 1.5);
        let (h, _) = solve_h(c1, d1, d4).unwrap();
        let w = 1.0 - h * h;
        let first = c1 * (d1 * h + d4) * w;
        let second = d1 * w;
        assert_abs_diff_eq!(compute_s_traj(c1, d1, d4, h), first * first + second * second, epsilon = 1e-15);
    }

    #[test]
    fn tau_f_quarter_turn_at_cruise() {
        let p = reference_params();
        let b = force_budget(&p).unwrap();
        let s = solve_tau_f(PI / 2.0, 0.0, 1.83, &b, &p, None, 0.0).unwrap();
        assert_abs_diff_eq!(s.s_traj, (PI / 4.0 * 1.83).powi(2), epsilon = 1e-9);
        assert_abs_diff_eq!(s.a_max, 10.49, epsilon = 0.01);
        assert_abs_diff_eq!(s.tau_f, 1.04, epsilon = 0.01);
        assert_eq!(s.branch, TauBranch::Fresh);
    }

    #[test]
    fn tau_f_noop_and_errors() {
        let p = reference_params();
        let b = force_budget(&p).unwrap();
        assert_eq!(solve_tau_f(0.0, 0.0, 1.0, &b, &p, None, 0.0).unwrap().tau_f, 0.0);
        assert!(matches!(
            solve_tau_f(0.3, 0.0, 5.0, &b, &p, None, 0.0),
            Err(GuaranteeError::NegativeAmax(_))
        ));
    }

    #[test]
    fn tau_f_slope_matched_branch() {
        let p = reference_params();
        let b = force_budget(&p).unwrap();
        let prev = RequestTiming { t_o: 0.0, tau_f: 1.0, h: 20.0, k: 0.5 };
        let s = solve_tau_f(0.4, 0.0, 1.5, &b, &p, Some(prev), 0.3).unwrap();
        assert_eq!(s.branch, TauBranch::SlopeMatched);
        assert_abs_diff_eq!(s.tau_f, (2.0 * c3() * s.s_traj.sqrt() / 20.0).sqrt(), epsilon = 1e-15);
        assert_eq!(s.slope, 20.0);
        let s = solve_tau_f(0.4, 0.0, 1.5, &b, &p, Some(prev), 1.0).unwrap();
        assert_eq!(s.branch, TauBranch::Fresh);
    }

    #[test]
    fn tau_f_monotone_in_turn_and_speed() {
        let p = reference_params();
        let b = force_budget(&p).unwrap();
        let mut last = 0.0;
        for i in 0..=20 {
            let dphi = PI * i as f64 / 20.0;
            let t = solve_tau_f(dphi, 0.0, 1.2, &b, &p, None, 0.0).unwrap().tau_f;
            assert!(t >= last);
            last = t;
        }
        let mut last = 0.0;
        for i in 0..=20 {
            let v = 1.83 * i as f64 / 20.0;
            let t = solve_tau_f(1.0, 0.0, v, &b, &p, None, 0.0).unwrap().tau_f;
            assert!(t >= last);
            last = t;
        }
    }

    #[test]
    fn thrust_cruise_examples() {
        let mut p = reference_params();
        let b = force_budget(&p).unwrap();
        let v = solve_vc_thrust(&b, &p).unwrap();
        assert_abs_diff_eq!(v, 2.74, epsilon = 0.005);
        assert!(vc_thrust_residual(&b, &p, v).abs() < 1e-12);

        p.rho = 0.0;
        p.v_air = 0.0;
        let b = force_budget(&p).unwrap();
        let v = solve_vc_thrust(&b, &p).unwrap();
        assert_abs_diff_eq!(v, (b.f_planar * p.r_min / p.mass).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn thrust_cruise_at_wind_limit_has_no_positive_root() {
        let p = reference_params();
        let mut b = force_budget(&p).unwrap();
        // exactly at the drag limit the constant term vanishes
        let mut q = p;
        q.v_air = b.v_air_max_allowed;
        b.f_planar = b.k_d * q.v_air * q.v_air;
        assert_eq!(solve_vc_thrust(&b, &q), Err(GuaranteeError::NoPositiveRoot));
    }

    #[test]
    fn sensor_bound_slack_limit() {
        let mut p = reference_params();
        p.v_o_max = 0.0;
        let cfg = SensorConfig { r_s: 100.0, dt_s: 1e-3, ..sensor() };
        let b = force_budget(&p).unwrap();
        let s = solve_vc_sensor(&b, &p, &cfg, FirstTurnForm::Closing).unwrap();
        assert!(s.v > solve_vc_thrust(&b, &p).unwrap());
    }

    #[test]
    fn sensor_bound_grows_with_range() {
        let mut p = reference_params();
        p.v_o_max = 1.8;
        let b = force_budget(&p).unwrap();
        let a = solve_vc_sensor(&b, &p, &sensor(), FirstTurnForm::Closing).unwrap();
        let d = solve_vc_sensor(&b, &p, &SensorConfig { r_s: 20.0, ..sensor() }, FirstTurnForm::Closing).unwrap();
        assert!(d.v > a.v, "{} vs {}", d.v, a.v);
    }

    #[test]
    fn sensor_infeasible_when_range_too_short() {
        let mut p = reference_params();
        p.v_o_max = 1.0;
        let cfg = SensorConfig { r_s: 2.2, r_a: 2.2, r_c: 2.0, ..sensor() };
        let b = force_budget(&p).unwrap();
        assert_eq!(solve_vc_sensor(&b, &p, &cfg, FirstTurnForm::Closing), Err(GuaranteeError::Infeasible));
    }

    #[test]
    fn cruise_picks_minimum() {
        let p = reference_params();
        let c = cruise_velocity(&p, &sensor()).unwrap();
        assert_eq!(c.v_c, c.v_c_thrust.min(c.v_c_sensor));
        assert_abs_diff_eq!(c.v_c, c.v_c_thrust, epsilon = 1e-15);
    }
}
