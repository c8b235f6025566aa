//! Randomized request sequences, including requests issued while an
//! earlier one is still in flight, must keep the commanded acceleration
//! plus worst-case drag inside the planar thrust budget.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reactive_traj::guarantees::{certify_request, force_budget, ForceBudget, TauBranch, VehicleParams};
use reactive_traj::sigmoid::{SigmoidSegment, TrajectoryProfile};

const V_C: f64 = 1.83;
const ORACLE_STEP: f64 = 2e-4;

fn params() -> VehicleParams {
    VehicleParams {
        mass: 0.54,
        f_max: 10.2,
        gravity: 9.81,
        rho: 1.225,
        drag_coefficient: 1.7,
        area: 0.2,
        r_min: 0.32,
        v_o_max: 1.0,
        v_air: 2.0,
    }
}

/// tanh value and its first derivative, summed over `segs` at `t`.
fn sum_segments(segs: &[SigmoidSegment], t: f64) -> (f64, f64) {
    segs.iter().filter(|s| t >= s.t_o && s.delta != 0.0).fold((0.0, 0.0), |(x, dx), s| {
        let c2 = 2.0 * s.c3 / s.tau_f;
        let y = (c2 * (t - s.t_o) - s.c3).tanh();
        (x + 0.5 * s.delta * (1.0 + y), dx + 0.5 * s.delta * c2 * (1.0 - y * y))
    })
}

/// Worst `m‖p̈‖ + K_d (v_peak + v_air)²` over `[t0, t1]`, from the segment
/// coefficients alone.
fn oracle_peak(profile: &TrajectoryProfile, t0: f64, t1: f64, budget: &ForceBudget, p: &VehicleParams) -> f64 {
    let n = ((t1 - t0) / ORACLE_STEP).ceil().max(1.0) as usize;
    let mut a_peak: f64 = 0.0;
    let mut v_peak: f64 = 0.0;
    for i in 0..=n {
        let t = t0 + (t1 - t0) * i as f64 / n as f64;
        let (_, dphi) = sum_segments(&profile.heading_segments, t);
        let (dv_sum, dv) = sum_segments(&profile.velocity_segments, t);
        let v = profile.base_speed + dv_sum;
        let a = (dv * dv + v * v * dphi * dphi).sqrt();
        a_peak = a_peak.max(a);
        v_peak = v_peak.max(v);
    }
    p.mass * a_peak + budget.k_d * (v_peak + p.v_air).powi(2)
}

#[test]
fn thousand_random_requests_stay_in_budget() {
    let started = Instant::now();
    let p = params();
    let budget = force_budget(&p).unwrap();
    let limit = budget.f_planar * (1.0 + 1e-6);
    let mut rng = ChaCha8Rng::seed_from_u64(42);

    let mut profile = TrajectoryProfile::new(Default::default(), 0.0, V_C, 0.0);
    let mut t = 0.0;
    let mut slope_matched = 0;
    let mut chained = 0;
    let mut prev_branch = TauBranch::Fresh;
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        // short gaps land mid-flight and take the slope-matched branch
        t += if rng.gen_bool(0.5) { rng.gen_range(0.05..0.5) } else { rng.gen_range(0.5..2.5) };
        profile.retire_segments(t);
        let delta_phi = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let v_now = profile.final_speed();
        let target = if rng.gen_bool(0.3) { rng.gen_range(0.0..V_C) } else { v_now };
        let req = certify_request(&profile, delta_phi, target - v_now, t, &budget, &p).unwrap();
        assert!(req.certified, "request {i} at t = {t} was not certified (peak {} N)", req.peak_force);
        if req.solution.branch == TauBranch::SlopeMatched {
            slope_matched += 1;
            if prev_branch == TauBranch::SlopeMatched {
                chained += 1;
            }
        }
        prev_branch = req.solution.branch;
        profile.push_request(&[req.heading, req.velocity], req.solution.k);
        let end = profile.active_until().unwrap_or(req.t_o);
        let peak = oracle_peak(&profile, req.t_o, end.max(req.t_o), &budget, &p);
        assert!(peak <= limit, "request {i}: {peak} N exceeds f_planar {} N", budget.f_planar);
        worst = worst.max(peak / budget.f_planar);
    }
    let elapsed = started.elapsed().as_secs_f64();
    println!("{slope_matched} slope-matched ({chained} chained), worst ratio {worst:.6}, {elapsed:.2} s");
    assert!(slope_matched >= 100, "only {slope_matched} slope-matched requests");
    assert!(chained >= 20, "only {chained} chained slope-matched requests");
    assert!(elapsed < 30.0, "took {elapsed} s");
}
