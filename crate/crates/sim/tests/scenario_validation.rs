mod common;

use serde_json::json;

use common::{base_file, build, bundled, vehicle, BUNDLED};
use reactive_sim::ScenarioError;

fn assumption(r: Result<reactive_sim::Scenario, ScenarioError>) -> String {
    match r {
        Err(ScenarioError::Assumption(msg)) => msg,
        Err(e) => panic!("expected an assumption violation, got {e}"),
        Ok(_) => panic!("expected an assumption violation, scenario loaded"),
    }
}

#[test]
fn bundled_scenarios_load_clean() {
    for name in BUNDLED {
        let sc = bundled(name);
        assert_eq!(sc.name(), name);
        for c in &sc.cruise {
            assert!((c.v_c - 1.83).abs() < 0.05, "{name}: v_c {}", c.v_c);
        }
    }
}

#[test]
fn goal_next_to_an_obstacle_is_rejected() {
    let mut f = base_file();
    f["obstacles"] = json!([{ "shape": { "circle": { "center": [10.0, 1.5], "radius": 0.5 } } }]);
    let msg = assumption(build(f));
    assert!(msg.contains("goal of vehicle 1"), "{msg}");
}

#[test]
fn obstacle_faster_than_cruise_is_rejected() {
    let mut f = base_file();
    f["obstacles"] = json!([{
        "name": "dart",
        "shape": { "circle": { "center": [5.0, 8.0], "radius": 0.5 } },
        "velocity": [3.0, 0.0]
    }]);
    let msg = assumption(build(f));
    assert!(msg.contains("dart") && msg.contains("cruise speed"), "{msg}");
}

#[test]
fn moving_obstacle_sweeping_over_the_goal_is_rejected() {
    let mut f = base_file();
    f["obstacles"] = json!([{
        "shape": { "circle": { "center": [10.0, 20.0], "radius": 0.5 } },
        "velocity": [0.0, -1.0]
    }]);
    assumption(build(f));
}

#[test]
fn goals_too_close_together_are_rejected() {
    let mut f = base_file();
    f["vehicles"] = json!([vehicle(1, [0.0, 0.0], [10.0, 0.0]), vehicle(2, [0.0, 5.0], [10.0, 1.5])]);
    let msg = assumption(build(f));
    assert!(msg.contains("goals of vehicles 1 and 2"), "{msg}");
}

#[test]
fn gap_narrower_than_two_clearance_radii_is_rejected() {
    let mut f = base_file();
    f["obstacles"] = json!([
        { "name": "left", "shape": { "circle": { "center": [5.0, 4.0], "radius": 1.0 } } },
        { "name": "right", "shape": { "circle": { "center": [5.0, -4.0], "radius": 1.0 } } }
    ]);
    // 6 m between the boundaries leaves room; 3.5 m does not
    build(f.clone()).unwrap();
    f["obstacles"][1]["shape"]["circle"]["center"] = json!([5.0, -1.5]);
    let msg = assumption(build(f));
    assert!(msg.contains("left") && msg.contains("right"), "{msg}");
}

#[test]
fn touching_walls_count_as_one_obstacle() {
    let mut f = base_file();
    f["obstacles"] = json!([
        { "shape": { "polygon": { "vertices": [[4.0, 3.0], [6.0, 3.0], [6.0, 3.4], [4.0, 3.4]] } } },
        { "shape": { "polygon": { "vertices": [[6.0, 3.0], [6.4, 3.0], [6.4, 8.0], [6.0, 8.0]] } } }
    ]);
    build(f).unwrap();
}

#[test]
fn wind_above_the_certified_bound_is_rejected() {
    let mut f = base_file();
    f["wind"] = json!({ "model": { "kind": "constant", "velocity": [2.5, 0.0] } });
    let msg = assumption(build(f));
    assert!(msg.contains("v_air"), "{msg}");
}

#[test]
fn rates_must_nest() {
    let mut f = base_file();
    f["rates"] = json!({ "dt": 0.001, "dt_c": 0.0105 });
    assumption(build(f));
}

#[test]
fn unknown_fields_are_parse_errors() {
    let mut f = base_file();
    f["colour"] = json!("red");
    assert!(serde_json::from_value::<reactive_sim::scenario::ScenarioFile>(f).is_err());
}

#[test]
fn infeasible_vehicle_is_a_solver_error() {
    let mut f = base_file();
    f["vehicles"][0]["params"]["f_max"] = json!(4.0);
    match build(f) {
        Err(ScenarioError::Solver { id: 1, .. }) => {}
        other => panic!("expected a solver error, got {other:?}"),
    }
}
