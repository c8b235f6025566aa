//! Declarative scenario files and their load-time assumption checks.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use reactive_traj::error::{ControlError, GuaranteeError, SensingError, WindError};
use reactive_traj::geom::Vec2;
use reactive_traj::guarantees::{cruise_velocity, CruiseSolution, FirstTurnForm, VehicleParams};
use reactive_traj::plant::{IndoorMask, PidGains, RiseGains, WindGrid, WindModel, WindProvider};
use reactive_traj::sensing::SensorConfig;

use crate::world::{Obstacle, Shape, World};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("assumption violated: {0}")]
    Assumption(String),
    #[error("vehicle {id}: {source}")]
    Solver { id: u32, source: GuaranteeError },
    #[error(transparent)]
    Sensor(#[from] SensingError),
    #[error(transparent)]
    Wind(#[from] WindError),
    #[error(transparent)]
    Control(#[from] ControlError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartSpeed {
    /// Start moving toward the goal at cruise speed.
    #[default]
    Cruise,
    /// Start hovering and accelerate on the first planning step.
    Rest,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerGains {
    #[serde(default)]
    pub rise: RiseGains,
    #[serde(default)]
    pub pid: PidGains,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleSpec {
    pub id: u32,
    pub params: VehicleParams,
    /// Principal moments of inertia, kg m².
    #[serde(default = "default_inertia")]
    pub inertia: [f64; 3],
    pub start: Vec2,
    pub goal: Vec2,
    #[serde(default = "default_altitude")]
    pub altitude: f64,
    #[serde(default)]
    pub start_speed: StartSpeed,
    #[serde(default)]
    pub gains: ControllerGains,
}

fn default_inertia() -> [f64; 3] {
    [0.0017, 0.0017, 0.0031]
}
fn default_altitude() -> f64 {
    1.5
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WindSpec {
    #[default]
    Calm,
    Constant { velocity: Vec2 },
    SinusoidGust { mean: Vec2, bound: f64, components: Vec<reactive_traj::plant::GustComponent> },
    Gridded { grid: WindGrid },
    /// Grid loaded from a JSON file, relative to the scenario file.
    GridFile { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindConfig {
    #[serde(default)]
    pub model: WindSpec,
    #[serde(default)]
    pub mask: IndoorMask,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rates {
    /// Plant integration step, s.
    pub dt: f64,
    /// Controller period, s.
    pub dt_c: f64,
}

impl Default for Rates {
    fn default() -> Self {
        Self { dt: 1e-3, dt_c: 1e-2 }
    }
}

/// Scenario file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub duration: f64,
    #[serde(default)]
    pub seed: u64,
    pub sensor: SensorConfig,
    #[serde(default = "default_k_o")]
    pub k_o: f64,
    #[serde(default)]
    pub rates: Rates,
    pub vehicles: Vec<VehicleSpec>,
    /// Half-width of uniform range noise added to each scan sample, m.
    #[serde(default)]
    pub range_noise: f64,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    #[serde(default)]
    pub wind: WindConfig,
    #[serde(default = "default_goal_tolerance")]
    pub goal_tolerance: f64,
    /// Allowed tracking error ‖p − p_d‖, m.
    #[serde(default = "default_tracking_budget")]
    pub tracking_budget: f64,
}

fn default_k_o() -> f64 {
    0.5
}
fn default_goal_tolerance() -> f64 {
    0.2
}
fn default_tracking_budget() -> f64 {
    0.5
}

/// A loaded and validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub world: World,
    pub wind: WindProvider,
    /// Cruise solution per vehicle, in `file.vehicles` order.
    pub cruise: Vec<CruiseSolution>,
}

impl Scenario {
    pub fn name(&self) -> &str {
        &self.file.name
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.into(), source })?;
    let file: ScenarioFile =
        serde_json::from_str(&text).map_err(|source| ScenarioError::Parse { path: path.into(), source })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    build_scenario(file, base)
}

/// Validates `file`; `base` resolves relative grid-file paths.
pub fn build_scenario(file: ScenarioFile, base: &Path) -> Result<Scenario, ScenarioError> {
    file.sensor.validate()?;
    let wind = build_wind(&file.wind, base)?;
    let violation = |msg: String| Err(ScenarioError::Assumption(msg));
    if !(file.duration > 0.0) {
        return violation(format!("duration must be positive, got {}", file.duration));
    }
    if !(file.k_o > 0.0 && file.k_o < 1.0) {
        return violation(format!("K_o = {} must lie in (0, 1)", file.k_o));
    }
    let r = file.rates;
    if !(r.dt > 0.0 && r.dt_c >= r.dt && file.sensor.dt_s >= r.dt_c) {
        return violation(format!("need 0 < dt <= dt_c <= dt_s, got {} / {} / {}", r.dt, r.dt_c, file.sensor.dt_s));
    }
    for (name, period, unit) in [("dt_c", r.dt_c, r.dt), ("dt_s", file.sensor.dt_s, r.dt_c)] {
        let ratio = period / unit;
        if (ratio - ratio.round()).abs() > 1e-6 {
            return violation(format!("{name} must be a whole multiple of the next faster period"));
        }
    }
    if !(file.range_noise >= 0.0) || !(file.goal_tolerance > 0.0) || !(file.tracking_budget > 0.0) {
        return violation("range_noise must be non-negative; goal_tolerance and tracking_budget positive".into());
    }
    if file.vehicles.is_empty() {
        return violation("scenario has no vehicles".into());
    }
    let mut cruise = Vec::new();
    for (i, v) in file.vehicles.iter().enumerate() {
        if file.vehicles[..i].iter().any(|o| o.id == v.id) {
            return violation(format!("duplicate vehicle id {}", v.id));
        }
        v.gains.rise.validate()?;
        v.gains.pid.validate()?;
        if wind.bound() > v.params.v_air {
            return violation(format!(
                "wind bound {} m/s exceeds vehicle {}'s certified v_air {} m/s",
                wind.bound(),
                v.id,
                v.params.v_air
            ));
        }
        let c = cruise_velocity(&v.params, &file.sensor).map_err(|source| ScenarioError::Solver { id: v.id, source })?;
        cruise.push(c);
    }
    let world = World { obstacles: file.obstacles.clone() };
    let r_c = file.sensor.r_c;

    // goals pairwise apart and clear of every obstacle for the whole run
    for (i, a) in file.vehicles.iter().enumerate() {
        for b in &file.vehicles[i + 1..] {
            let d = a.goal.distance(b.goal);
            if d <= r_c {
                return violation(format!(
                    "goals of vehicles {} and {} are {d:.3} m apart, not more than r_c = {r_c}",
                    a.id, b.id
                ));
            }
        }
    }
    for (k, o) in file.obstacles.iter().enumerate() {
        let label = o.name.clone().unwrap_or_else(|| format!("#{k}"));
        for (i, v) in file.vehicles.iter().enumerate() {
            if o.speed() >= cruise[i].v_c {
                return violation(format!(
                    "obstacle {label} moves at {:.3} m/s, not below vehicle {}'s cruise speed {:.3} m/s",
                    o.speed(),
                    v.id,
                    cruise[i].v_c
                ));
            }
            let d = min_distance_over_run(o, v.goal, file.duration);
            if d <= r_c {
                return violation(format!(
                    "goal of vehicle {} comes within {d:.3} m of obstacle {label}, not more than r_c = {r_c}",
                    v.id
                ));
            }
            let s = o.at(0.0).signed_distance(v.start);
            if s <= r_c {
                return violation(format!(
                    "start of vehicle {} is {s:.3} m from obstacle {label}, not more than r_c = {r_c}",
                    v.id
                ));
            }
        }
    }
    // static obstacles either join up or leave room to fly between them
    let fixed: Vec<(String, Shape)> = file
        .obstacles
        .iter()
        .enumerate()
        .filter(|(_, o)| o.speed() == 0.0)
        .map(|(k, o)| (o.name.clone().unwrap_or_else(|| format!("#{k}")), o.shape.clone()))
        .collect();
    for (i, (na, a)) in fixed.iter().enumerate() {
        for (nb, b) in &fixed[i + 1..] {
            let g = a.gap(b);
            if g > JOIN_TOLERANCE && g <= 2.0 * r_c {
                return violation(format!(
                    "obstacles {na} and {nb} leave a {g:.3} m gap, too narrow to pass with r_c = {r_c}"
                ));
            }
        }
    }
    Ok(Scenario { file, world, wind, cruise })
}

/// Static obstacles closer than this count as one joined obstacle.
const JOIN_TOLERANCE: f64 = 1e-9;

fn min_distance_over_run(o: &Obstacle, p: Vec2, duration: f64) -> f64 {
    if o.speed() == 0.0 {
        return o.at(0.0).signed_distance(p);
    }
    // fine enough that a boundary moving below v_c cannot slip through
    let steps = ((duration * o.speed()) / 0.01).ceil().max(1.0) as usize;
    (0..=steps)
        .map(|k| o.at(duration * k as f64 / steps as f64).signed_distance(p))
        .fold(f64::INFINITY, f64::min)
}

fn build_wind(cfg: &WindConfig, base: &Path) -> Result<WindProvider, ScenarioError> {
    let model = match &cfg.model {
        WindSpec::Calm => WindModel::Constant { velocity: Vec2::ZERO },
        WindSpec::Constant { velocity } => WindModel::Constant { velocity: *velocity },
        WindSpec::SinusoidGust { mean, bound, components } => {
            WindModel::SinusoidGust { mean: *mean, bound: *bound, components: components.clone() }
        }
        WindSpec::Gridded { grid } => WindModel::Gridded { grid: grid.clone() },
        WindSpec::GridFile { path } => {
            let full = base.join(path);
            let text = fs::read_to_string(&full).map_err(|source| ScenarioError::Io { path: full.clone(), source })?;
            let grid: WindGrid =
                serde_json::from_str(&text).map_err(|source| ScenarioError::Parse { path: full, source })?;
            WindModel::Gridded { grid }
        }
    };
    Ok(WindProvider::new(model, cfg.mask.clone())?)
}

/// Vehicle and sensor parameters for the solver subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub vehicle: VehicleParams,
    #[serde(default)]
    pub sensor: SensorConfig,
    #[serde(default)]
    pub first_turn: FirstTurnForm,
}

pub fn load_params(path: &Path) -> Result<ParamsFile, ScenarioError> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.into(), source })?;
    let p: ParamsFile =
        serde_json::from_str(&text).map_err(|source| ScenarioError::Parse { path: path.into(), source })?;
    p.sensor.validate()?;
    Ok(p)
}
