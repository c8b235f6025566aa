mod common;

use serde_json::json;

use common::{base_file, build, bundled};
use reactive_sim::{run, RunOptions};

#[test]
fn open_field_run_arrives_on_the_cruise_time_estimate() {
    let sc = build(base_file()).unwrap();
    let out = run(&sc, RunOptions::default()).unwrap();
    let v = &out.summary.vehicles[0];
    assert!(out.summary.completed && v.reached_goal);
    assert_eq!(v.heading_segments, 0);
    assert_eq!(v.velocity_segments, 1);

    // cruise at v_c, then one symmetric stop sigmoid that covers v_c τ / 2
    let stop = out.segments.iter().find(|s| s.stop).expect("a stop request");
    let expected = 10.0 / v.v_c + 0.5 * stop.tau_f;
    let arrival = v.arrival_time.unwrap();
    assert!((arrival - expected).abs() <= stop.tau_f, "arrived at {arrival} s, expected {expected} ± {}", stop.tau_f);

    // the desired path stops within 0.1 m of the goal
    let last = out.records.last().unwrap();
    let miss = ((last.pd_x - 10.0).powi(2) + last.pd_y.powi(2)).sqrt();
    assert!(miss < 0.1, "stopped {miss} m from the goal");
}

#[test]
fn runs_are_deterministic() {
    for name in ["fast_crossing", "head_on"] {
        let sc = bundled(name);
        let a = run(&sc, RunOptions::default()).unwrap();
        let b = run(&sc, RunOptions::default()).unwrap();
        assert_eq!(a.records, b.records, "{name}");
        assert_eq!(a.segments, b.segments, "{name}");
    }
}

#[test]
fn range_noise_follows_the_seed() {
    let mut f = base_file();
    f["range_noise"] = json!(0.05);
    f["vehicles"][0]["goal"] = json!([30.0, 0.0]);
    f["obstacles"] = json!([{ "shape": { "circle": { "center": [15.0, 0.5], "radius": 1.5 } } }]);
    let sc = build(f).unwrap();
    let a = run(&sc, RunOptions { seed: Some(1), duration: None }).unwrap();
    let b = run(&sc, RunOptions { seed: Some(1), duration: None }).unwrap();
    let c = run(&sc, RunOptions { seed: Some(2), duration: None }).unwrap();
    assert_eq!(a.records, b.records);
    assert_ne!(a.segments, c.segments);
}

#[test]
fn head_on_lower_id_yields_and_the_other_holds_course() {
    let out = run(&bundled("head_on"), RunOptions::default()).unwrap();
    let one = out.summary.vehicle(1).unwrap();
    let two = out.summary.vehicle(2).unwrap();
    assert!(one.yield_steps > 0 && one.avoided_vehicles == vec![2]);
    assert!(one.heading_segments > 0);
    assert_eq!(two.yield_steps, 0);
    assert_eq!(two.heading_segments, 0);
    assert!(one.reached_goal && two.reached_goal);
}

#[test]
fn single_obstacle_keeps_clearance() {
    let out = run(&bundled("single_static"), RunOptions::default()).unwrap();
    let v = &out.summary.vehicles[0];
    assert!(v.reached_goal);
    let r_c = out.summary.r_c;
    assert!(v.min_clearance_obstacle.unwrap() >= r_c - 1e-3);
}

#[test]
fn duration_override_stops_early() {
    let sc = bundled("single_static");
    let out = run(&sc, RunOptions { seed: None, duration: Some(3.0) }).unwrap();
    assert!(!out.summary.completed);
    assert!((out.summary.t_end - 3.0).abs() < 1e-9);
    assert!(!out.summary.vehicles[0].reached_goal);
}
