//! The lock-step multi-rate loop: plant at `dt`, control at `dt_c`,
//! sensing and planning at `ΔT_s`.

use std::collections::BTreeMap;

use log::{debug, info, warn};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use reactive_traj::avoidance::{AvoidanceContext, Avoider, PlannedChange, SelectionBranch};
use reactive_traj::coordination::{neighbors, rank, VehicleBeacon};
use reactive_traj::error::{AvoidanceError, ControlError, CoordinationError, GuaranteeError, SensingError};
use reactive_traj::geom::{wrap_angle, Vec2};
use reactive_traj::guarantees::{
    certify_request, certify_request_from, force_budget, CertifiedRequest, CruiseSolution, ForceBudget, VehicleParams,
};
use reactive_traj::plant::{
    attitude_error, attitude_from_thrust, drag_force, rk4_step, EulerAngles, PidController, PlantParams,
    QuadrotorState, RiseController,
};
use reactive_traj::sensing::{build_tables, ObstacleTrack, RangeScan, Segmenter, TargetId};
use reactive_traj::sigmoid::{c3, DesiredState, SegmentKind, TrajectoryProfile};

use crate::log::{LogRecord, LOG_SCHEMA_VERSION};
use crate::scenario::{Scenario, StartSpeed, VehicleSpec};

/// Heading and speed changes below these are not commanded.
const HEADING_DEADBAND: f64 = 1e-6;
const SPEED_DEADBAND: f64 = 1e-6;
/// Step used when predicting where a scheduled stop ends.
const PREDICT_DT: f64 = 2e-3;

#[derive(Debug, Error)]
pub enum StepError {
    #[error(transparent)]
    Sensing(#[from] SensingError),
    #[error(transparent)]
    Avoidance(#[from] AvoidanceError),
    #[error(transparent)]
    Coordination(#[from] CoordinationError),
    #[error(transparent)]
    Guarantee(#[from] GuaranteeError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error("vehicle state became non-finite")]
    Diverged,
}

#[derive(Debug, Error)]
#[error("t = {t:.3} s, vehicle {vehicle}: {source}")]
pub struct RunError {
    pub t: f64,
    pub vehicle: u32,
    pub source: StepError,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub duration: Option<f64>,
}

/// One commanded sigmoid segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub vehicle: u32,
    pub kind: String,
    pub t_issue: f64,
    pub t_o: f64,
    pub tau_f: f64,
    pub delta: f64,
    pub branch: u8,
    pub certified: bool,
    pub stretch: f64,
    /// Part of a goal stop.
    pub stop: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleSummary {
    pub id: u32,
    pub v_c: f64,
    pub v_c_thrust: f64,
    pub v_c_sensor: f64,
    pub reached_goal: bool,
    /// Time the commanded stop at the goal completed, s.
    pub arrival_time: Option<f64>,
    pub final_goal_distance: f64,
    /// Closest approach of p_d to an obstacle boundary; `None` with no obstacles.
    pub min_clearance_obstacle: Option<f64>,
    /// Closest approach of p_d to another vehicle's p_d; `None` when alone.
    pub min_clearance_vehicle: Option<f64>,
    pub max_tracking_error: f64,
    pub max_budget_ratio: f64,
    pub max_thrust: f64,
    pub clip_events: u64,
    pub heading_segments: usize,
    pub velocity_segments: usize,
    pub uncertified_requests: usize,
    /// Planning steps where a must-avoid vehicle was one of the critical targets.
    pub yield_steps: usize,
    /// Neighbours this vehicle was ever ranked to avoid.
    pub avoided_vehicles: Vec<u32>,
    pub clearance_saturations: usize,
    pub speed_clamp_events: u64,
    pub reapproaches: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub scenario: String,
    pub seed: u64,
    pub duration: f64,
    pub t_end: f64,
    /// Every vehicle stopped inside the goal tolerance.
    pub completed: bool,
    pub r_c: f64,
    pub tracking_budget: f64,
    pub vehicles: Vec<VehicleSummary>,
}

impl RunSummary {
    pub fn vehicle(&self, id: u32) -> Option<&VehicleSummary> {
        self.vehicles.iter().find(|v| v.id == id)
    }

    pub fn min_clearance(&self) -> f64 {
        self.vehicles
            .iter()
            .flat_map(|v| [v.min_clearance_obstacle, v.min_clearance_vehicle])
            .flatten()
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub records: Vec<LogRecord>,
    pub segments: Vec<SegmentRecord>,
    pub beacons: Vec<VehicleBeacon>,
    pub summary: RunSummary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Mode {
    Cruise,
    /// A stop at the goal is scheduled and finishes at `end`.
    Stopping { end: f64 },
    Stopped,
}

struct Agent {
    spec: VehicleSpec,
    params: VehicleParams,
    plant: PlantParams,
    budget: ForceBudget,
    cruise: CruiseSolution,
    profile: TrajectoryProfile,
    state: QuadrotorState,
    rise: RiseController,
    pid: PidController,
    segmenter: Segmenter,
    tracks: Vec<ObstacleTrack>,
    avoider: Avoider,
    mode: Mode,
    /// Speed ceiling, lowered for a slow re-approach after stopping short.
    speed_cap: f64,
    desired: DesiredState,
    thrust: f64,
    torque: Vector3<f64>,
    last_dphi: f64,
    last_dv: f64,
    last_branch: u8,
    last_tau: f64,
    summary: VehicleSummary,
}

impl Agent {
    fn new(spec: &VehicleSpec, cruise: CruiseSolution, sc: &Scenario, t0: f64) -> Result<Self, StepError> {
        let params = spec.params;
        let budget = force_budget(&params)?;
        let plant = PlantParams {
            mass: params.mass,
            gravity: params.gravity,
            k_d: budget.k_d,
            inertia: spec.inertia,
            f_max: params.f_max,
        };
        let heading = (spec.goal - spec.start).angle();
        let speed = match spec.start_speed {
            StartSpeed::Cruise => cruise.v_c,
            StartSpeed::Rest => 0.0,
        };
        let mut profile = TrajectoryProfile::new(spec.start, heading, speed, t0);
        let desired = profile.desired_state(t0, sc.file.rates.dt);
        let v0 = to_3d(desired.velocity(), 0.0);
        let mut state = QuadrotorState::at_rest(to_3d(spec.start, spec.altitude));
        state.v = v0;

        // engage in trim: the thrust that holds the initial desired state
        let wind = to_3d(sc.wind.sample(spec.start, t0), 0.0);
        let drag = drag_force(budget.k_d, wind, v0);
        let trim = to_3d(desired.acceleration(), 0.0) * params.mass - drag;
        let mut rise = RiseController::new(spec.gains.rise, params.mass, params.gravity, params.f_max)?;
        rise.nu = trim;
        let hover = Vector3::new(0.0, 0.0, params.mass * params.gravity);
        state.attitude = attitude_from_thrust(trim + hover, 0.0)?.to_attitude();

        let summary = VehicleSummary {
            id: spec.id,
            v_c: cruise.v_c,
            v_c_thrust: cruise.v_c_thrust,
            v_c_sensor: cruise.v_c_sensor,
            reached_goal: false,
            arrival_time: None,
            final_goal_distance: spec.start.distance(spec.goal),
            min_clearance_obstacle: None,
            min_clearance_vehicle: None,
            max_tracking_error: 0.0,
            max_budget_ratio: 0.0,
            max_thrust: 0.0,
            clip_events: 0,
            heading_segments: 0,
            velocity_segments: 0,
            uncertified_requests: 0,
            yield_steps: 0,
            avoided_vehicles: Vec::new(),
            clearance_saturations: 0,
            speed_clamp_events: 0,
            reapproaches: 0,
        };
        Ok(Self {
            spec: spec.clone(),
            params,
            plant,
            budget,
            cruise,
            profile,
            state,
            rise,
            pid: PidController::new(spec.gains.pid)?,
            segmenter: Segmenter::new(sc.file.sensor, params.v_o_max),
            tracks: Vec::new(),
            avoider: Avoider::default(),
            mode: Mode::Cruise,
            speed_cap: cruise.v_c,
            desired,
            thrust: params.mass * params.gravity,
            torque: Vector3::zeros(),
            last_dphi: 0.0,
            last_dv: 0.0,
            last_branch: 0,
            last_tau: 0.0,
            summary,
        })
    }

    fn beacon(&self, t: f64) -> VehicleBeacon {
        VehicleBeacon { id: self.spec.id, p: self.desired.p, v: self.desired.velocity(), v_c: self.cruise.v_c, timestamp: t }
    }

    fn goal_distance(&self) -> f64 {
        self.desired.p.distance(self.spec.goal)
    }

    fn arrived(&self, tol: f64) -> bool {
        self.mode == Mode::Stopped && self.goal_distance() <= tol
    }
}

fn to_3d(v: Vec2, z: f64) -> Vector3<f64> {
    Vector3::new(v.x, v.y, z)
}

fn deadband(x: f64, band: f64) -> f64 {
    if x.abs() < band {
        0.0
    } else {
        x
    }
}

/// Runs `sc` to completion or to its duration.
pub fn run(sc: &Scenario, opts: RunOptions) -> Result<RunOutput, RunError> {
    let file = &sc.file;
    let seed = opts.seed.unwrap_or(file.seed);
    let duration = opts.duration.unwrap_or(file.duration);
    let dt = file.rates.dt;
    let per_control = (file.rates.dt_c / dt).round() as u64;
    let per_plan = (file.sensor.dt_s / dt).round() as u64;
    let dt_c = per_control as f64 * dt;
    let tol = file.goal_tolerance;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut agents = Vec::new();
    for (spec, cruise) in file.vehicles.iter().zip(&sc.cruise) {
        let a = Agent::new(spec, *cruise, sc, 0.0).map_err(|source| RunError { t: 0.0, vehicle: spec.id, source })?;
        agents.push(a);
    }
    info!(
        "running {} with {} vehicles, cruise speeds {:?}",
        file.name,
        agents.len(),
        agents.iter().map(|a| a.cruise.v_c).collect::<Vec<_>>()
    );

    let mut out = RunOutput {
        records: Vec::new(),
        segments: Vec::new(),
        beacons: Vec::new(),
        summary: RunSummary {
            schema_version: LOG_SCHEMA_VERSION,
            scenario: file.name.clone(),
            seed,
            duration,
            t_end: 0.0,
            completed: false,
            r_c: file.sensor.r_c,
            tracking_budget: file.tracking_budget,
            vehicles: Vec::new(),
        },
    };

    let mut n: u64 = 0;
    let mut t: f64;
    loop {
        t = n as f64 * dt;
        if n.is_multiple_of(per_control) {
            for a in agents.iter_mut() {
                a.desired = a.profile.desired_state(t, dt);
            }
            if n.is_multiple_of(per_plan) {
                let beacons: Vec<VehicleBeacon> = agents.iter().map(|a| a.beacon(t)).collect();
                out.beacons.extend(beacons.iter().copied());
                for a in agents.iter_mut() {
                    plan(a, sc, &beacons, t, duration, &mut rng, &mut out.segments)
                        .map_err(|source| RunError { t, vehicle: a.spec.id, source })?;
                }
                for a in agents.iter_mut() {
                    a.desired = a.profile.desired_state(t, dt);
                }
            }
            for a in agents.iter_mut() {
                if let Mode::Stopping { end } = a.mode {
                    if t >= end && a.profile.final_speed().abs() < 1e-9 {
                        a.mode = Mode::Stopped;
                        a.summary.arrival_time = Some(t);
                        debug!("vehicle {} stopped {:.3} m from its goal at t = {t:.2}", a.spec.id, a.goal_distance());
                    }
                }
                a.profile.retire_segments(t);
            }
            let positions: Vec<(u32, Vec2)> = agents.iter().map(|a| (a.spec.id, a.desired.p)).collect();
            for a in agents.iter_mut() {
                control(a, dt_c).map_err(|source| RunError { t, vehicle: a.spec.id, source })?;
                let rec = record(a, sc, &positions, t);
                out.records.push(rec);
            }
            if agents.iter().all(|a| a.arrived(tol) && a.state.planar_position().distance(a.spec.goal) <= tol) {
                out.summary.completed = true;
                break;
            }
        }
        if t >= duration {
            break;
        }
        for a in agents.iter_mut() {
            a.state = rk4_step(&a.state, a.thrust, a.torque, &sc.wind, t, dt, &a.plant);
            if !a.state.is_finite() {
                return Err(RunError { t, vehicle: a.spec.id, source: StepError::Diverged });
            }
        }
        n += 1;
    }

    out.summary.t_end = t;
    for mut a in agents {
        a.summary.final_goal_distance = a.state.planar_position().distance(a.spec.goal);
        a.summary.reached_goal = a.arrived(tol) && a.summary.final_goal_distance <= tol;
        a.summary.clip_events = a.rise.clip_events;
        a.summary.speed_clamp_events = a.profile.clamp_events;
        out.summary.vehicles.push(a.summary);
    }
    Ok(out)
}

fn control(a: &mut Agent, dt_c: f64) -> Result<(), StepError> {
    let alt = a.spec.altitude;
    let e1 = to_3d(a.desired.p, alt) - a.state.p;
    let e1_dot = to_3d(a.desired.velocity(), 0.0) - a.state.v;
    let f = a.rise.update(e1, e1_dot, dt_c);
    let q_d = attitude_from_thrust(f, 0.0)?;
    let q = EulerAngles::from_attitude(&a.state.attitude);
    let q_err = attitude_error(q_d, q);
    // desired attitude is held between control steps, so the error rate is −ω
    a.torque = a.pid.update(q_err, -a.state.omega, dt_c);
    a.thrust = f.norm();
    Ok(())
}

fn record(a: &mut Agent, sc: &Scenario, positions: &[(u32, Vec2)], t: f64) -> LogRecord {
    let d = &a.desired;
    let s = a.profile.evaluate(t);
    let clearance_obstacle = sc.world.clearance(d.p, t);
    let clearance_vehicle = positions
        .iter()
        .filter(|(id, _)| *id != a.spec.id)
        .map(|(_, p)| p.distance(d.p))
        .fold(f64::INFINITY, f64::min);
    let tracking_error = (to_3d(d.p, a.spec.altitude) - a.state.p).norm();
    let v_w = d.velocity().norm() + a.params.v_air;
    let budget_ratio = (a.params.mass * d.acceleration().norm() + a.budget.k_d * v_w * v_w) / a.budget.f_planar;

    let sm = &mut a.summary;
    let lower = |cur: Option<f64>, x: f64| if x.is_finite() { Some(cur.map_or(x, |c| c.min(x))) } else { cur };
    sm.min_clearance_obstacle = lower(sm.min_clearance_obstacle, clearance_obstacle);
    sm.min_clearance_vehicle = lower(sm.min_clearance_vehicle, clearance_vehicle);
    sm.max_tracking_error = sm.max_tracking_error.max(tracking_error);
    sm.max_budget_ratio = sm.max_budget_ratio.max(budget_ratio);
    sm.max_thrust = sm.max_thrust.max(a.thrust);

    let p = a.state.p;
    let v = a.state.v;
    LogRecord {
        t,
        vehicle: a.spec.id,
        pd_x: d.p.x,
        pd_y: d.p.y,
        vd_x: d.derivatives[0].x,
        vd_y: d.derivatives[0].y,
        ad_x: d.derivatives[1].x,
        ad_y: d.derivatives[1].y,
        p_x: p.x,
        p_y: p.y,
        p_z: p.z,
        v_x: v.x,
        v_y: v.y,
        v_z: v.z,
        phi: s.phi,
        dphi_cmd: a.last_dphi,
        dv_cmd: a.last_dv,
        thrust: a.thrust,
        clearance_obstacle,
        clearance_vehicle,
        tracking_error,
        budget_ratio,
        branch: a.last_branch,
        tau_f: a.last_tau,
        v_c: a.cruise.v_c,
    }
}

fn noisy_scan(a: &Agent, sc: &Scenario, t: f64, rng: &mut ChaCha8Rng) -> RangeScan {
    let origin = a.state.planar_position();
    let heading = a.profile.evaluate(t).phi;
    let mut scan = sc.world.scan(origin, heading, t, &sc.file.sensor);
    let noise = sc.file.range_noise;
    if noise > 0.0 {
        for s in scan.samples.iter_mut() {
            s.1 = (s.1 + rng.gen_range(-noise..=noise)).max(0.0);
        }
    }
    scan
}

fn plan(
    a: &mut Agent,
    sc: &Scenario,
    beacons: &[VehicleBeacon],
    t: f64,
    duration: f64,
    rng: &mut ChaCha8Rng,
    log: &mut Vec<SegmentRecord>,
) -> Result<(), StepError> {
    let file = &sc.file;
    let cfg = &file.sensor;
    match a.mode {
        Mode::Stopping { .. } => return Ok(()),
        Mode::Stopped if a.goal_distance() <= file.goal_tolerance => return Ok(()),
        Mode::Stopped => {
            // stopped short: approach again slowly enough to stop within one period
            let d = a.goal_distance();
            let a_max = a.budget.a_max(a.params.mass, a.params.v_air);
            a.speed_cap = (d * a_max / c3()).sqrt().min(a.cruise.v_c);
            a.mode = Mode::Cruise;
            a.summary.reapproaches += 1;
            info!("vehicle {} re-approaching its goal from {d:.3} m at {:.3} m/s", a.spec.id, a.speed_cap);
        }
        Mode::Cruise => {}
    }

    let scan = noisy_scan(a, sc, t, rng);
    a.tracks = a.segmenter.segment(&scan, &a.tracks);

    let me = a.beacon(t);
    let near = neighbors(me.id, me.p, beacons, cfg.r_a);
    let mnvr = rank(&me, &near)?;
    let avoid: Vec<VehicleBeacon> = near.iter().filter(|b| mnvr.contains(b.id)).copied().collect();
    for b in &avoid {
        if !a.summary.avoided_vehicles.contains(&b.id) {
            a.summary.avoided_vehicles.push(b.id);
        }
    }

    let sample = a.profile.evaluate(t);
    let v_c = a.cruise.v_c.min(a.speed_cap);
    let mut v_ref = sample.v.max(a.profile.final_speed());
    if v_ref <= 0.0 {
        v_ref = v_c;
    }
    let v_ctx = Vec2::from_angle(sample.phi) * v_ref;
    let p_d = a.desired.p;
    let table = build_tables(&a.tracks, &avoid, p_d, v_ctx, cfg)?;
    let mut velocities = BTreeMap::new();
    for tr in &a.tracks {
        velocities.insert(TargetId::Obstacle(tr.id), tr.velocity_or_zero());
    }
    for b in &avoid {
        velocities.insert(TargetId::Vehicle(b.id), b.v);
    }
    let ctx = AvoidanceContext {
        table: &table,
        velocities: &velocities,
        p_d,
        v_d: v_ctx,
        p_g: a.spec.goal,
        v_c,
        k_o: file.k_o,
        r_c: cfg.r_c,
        dt_s: cfg.dt_s,
    };
    let change: PlannedChange = a.avoider.decide(&ctx)?;
    debug!(
        "vehicle {} t = {t:.2}: tracks {:?}, critical {:?}, branch {:?}, dphi {:.4}, senses {:?}",
        a.spec.id,
        a.tracks.iter().map(|tr| (tr.id, tr.centroid(), tr.velocity)).collect::<Vec<_>>(),
        change.critical,
        change.decision.branch,
        change.decision.delta_phi_signed,
        a.avoider.cache
    );
    if change.clearance_saturated {
        a.summary.clearance_saturations += 1;
    }
    if let Some((x, y)) = change.critical {
        if [x, y].iter().any(|id| matches!(id, TargetId::Vehicle(_))) {
            a.summary.yield_steps += 1;
        }
    }

    let branch = change.decision.branch;
    let target_heading = sample.phi + change.decision.delta_phi_signed;
    let target_speed = change.target_speed.min(v_c);
    let dphi = deadband(wrap_angle(target_heading - a.profile.final_heading()), HEADING_DEADBAND);
    let dv = deadband(target_speed - a.profile.final_speed(), SPEED_DEADBAND);
    a.last_dphi = dphi;
    a.last_dv = dv;
    a.last_branch = branch.code();

    let req = certify_request(&a.profile, dphi, dv, t, &a.budget, &a.params)?;
    commit(a, &req, t, branch, false, log);

    let clear = matches!(branch, SelectionBranch::NoThreat | SelectionBranch::GoalClear);
    if clear {
        schedule_goal_stop(a, t, (t + cfg.dt_s).min(duration.max(t)), branch, log)?;
    }
    Ok(())
}

fn commit(a: &mut Agent, req: &CertifiedRequest, t: f64, branch: SelectionBranch, stop: bool, log: &mut Vec<SegmentRecord>) {
    if req.heading.is_noop() && req.velocity.is_noop() {
        return;
    }
    if !req.certified {
        a.summary.uncertified_requests += 1;
        warn!(
            "vehicle {}: request at t = {t:.3} exceeds the force budget ({:.3} N > {:.3} N)",
            a.spec.id, req.peak_force, a.budget.f_planar
        );
    }
    a.profile.push_request(&[req.heading, req.velocity], req.solution.k);
    a.last_tau = req.tau_f();
    for seg in [req.heading, req.velocity] {
        if seg.is_noop() {
            continue;
        }
        let kind = match seg.kind {
            SegmentKind::Heading => {
                a.summary.heading_segments += 1;
                "heading"
            }
            SegmentKind::Velocity => {
                a.summary.velocity_segments += 1;
                "velocity"
            }
        };
        log.push(SegmentRecord {
            vehicle: a.spec.id,
            kind: kind.into(),
            t_issue: t,
            t_o: seg.t_o,
            tau_f: seg.tau_f,
            delta: seg.delta,
            branch: branch.code(),
            certified: req.certified,
            stretch: req.stretch,
            stop,
        });
    }
}

/// Where a full stop requested no earlier than `t_s` leaves the vehicle,
/// measured along the current direction to the goal (positive past it).
fn stop_overshoot(a: &Agent, t: f64, t_s: f64) -> Result<(f64, CertifiedRequest), StepError> {
    let req = certify_request_from(&a.profile, 0.0, -a.profile.final_speed(), t, t_s, &a.budget, &a.params)?;
    let mut trial = a.profile.clone();
    trial.push_request(&[req.heading, req.velocity], req.solution.k);
    let end = trial.active_until().unwrap_or(t_s).max(t_s);
    trial.advance_to(end, PREDICT_DT);
    let to_goal = a.spec.goal - a.desired.p;
    let u = to_goal.normalized().unwrap_or(Vec2::from_angle(a.profile.final_heading()));
    Ok(((trial.position - a.spec.goal).dot(u), req))
}

/// Schedules the stop at the goal if waiting for the next planning step
/// would carry the vehicle past it. The start of the stop is placed so it
/// ends on the goal.
fn schedule_goal_stop(
    a: &mut Agent,
    t: f64,
    t_next: f64,
    branch: SelectionBranch,
    log: &mut Vec<SegmentRecord>,
) -> Result<(), StepError> {
    if a.profile.final_speed() <= 0.0 {
        return Ok(());
    }
    let (late, _) = stop_overshoot(a, t, t_next)?;
    if late < 0.0 {
        return Ok(());
    }
    let (now, req_now) = stop_overshoot(a, t, t)?;
    let req = if now >= 0.0 {
        req_now
    } else {
        let (mut lo, mut hi) = (t, t_next);
        let mut best = req_now;
        for _ in 0..40 {
            if hi - lo < 1e-4 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let (s, req) = stop_overshoot(a, t, mid)?;
            if s < 0.0 {
                lo = mid;
                best = req;
            } else {
                hi = mid;
            }
        }
        best
    };
    debug!("vehicle {} stop scheduled at t_o = {:.3} (tau_f {:.3})", a.spec.id, req.t_o, req.tau_f());
    commit(a, &req, t, branch, true, log);
    let end = a.profile.active_until().unwrap_or(req.t_o);
    a.mode = Mode::Stopping { end };
    Ok(())
}
