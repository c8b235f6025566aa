#![allow(dead_code)]

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use reactive_sim::scenario::{build_scenario, ScenarioError, ScenarioFile};
use reactive_sim::Scenario;

pub const BUNDLED: [&str; 5] = ["single_static", "slow_moving", "fast_crossing", "head_on", "building_entry"];

pub fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

pub fn bundled(name: &str) -> Scenario {
    reactive_sim::load_scenario(&scenario_dir().join(format!("{name}.json"))).unwrap()
}

pub fn vehicle(id: u32, start: [f64; 2], goal: [f64; 2]) -> Value {
    json!({
        "id": id,
        "params": {
            "mass": 0.54, "f_max": 10.2, "drag_coefficient": 1.7, "area": 0.2,
            "r_min": 0.32, "v_o_max": 1.0, "v_air": 2.0
        },
        "start": start,
        "goal": goal
    })
}

/// Minimal open-field scenario; tests patch fields into it.
pub fn base_file() -> Value {
    json!({
        "name": "test",
        "duration": 40.0,
        "sensor": { "r_s": 10.0, "r_a": 10.0, "dt_s": 1.0, "r_c": 2.0 },
        "vehicles": [vehicle(1, [0.0, 0.0], [10.0, 0.0])]
    })
}

pub fn build(v: Value) -> Result<Scenario, ScenarioError> {
    let file: ScenarioFile = serde_json::from_value(v).expect("test scenario parses");
    build_scenario(file, Path::new("."))
}
