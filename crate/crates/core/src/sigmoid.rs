//! Summed tanh heading and speed profiles.
//!
//! A profile is a base heading and speed plus a list of sigmoid segments of
//! each kind. Segments sum; they are never replaced. Each segment is
//!
//! ```text
//! value(t) = c1 tanh(c2 (t - t_o) - c3) + c4      for t >= t_o
//!          = 0                                    for t <  t_o
//! ```
//!
//! with `c3 = artanh(eps_1)`, `c2 = 2 c3 / tau_f` and `c1 = c4 = delta / 2`,
//! so the segment rises from ~0 to ~delta over `[t_o, t_o + tau_f]`.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::TrajError;
use crate::geom::Vec2;

/// Fraction of the tanh asymptote reached at either end of a segment.
pub const EPSILON_1: f64 = 1.0 - 1e-3;

/// Default peak-location fraction used when a previous request is unknown.
pub const DEFAULT_K: f64 = 0.5;

/// Completed segments are folded into the base after `MARGIN * tau_f`.
pub const RETIRE_MARGIN: f64 = 0.5;

/// `artanh(EPSILON_1)`, ≈ 3.8.
pub fn c3() -> f64 {
    EPSILON_1.atanh()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SegmentKind {
    Heading,
    Velocity,
}

/// One tanh transition of heading (rad) or speed (m/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmoidSegment {
    pub kind: SegmentKind,
    /// Total commanded change.
    pub delta: f64,
    /// `c1` / `d1`, half the change.
    pub c1: f64,
    /// `c2` / `d2`, 1/s.
    pub c2: f64,
    /// `c3` / `d3`.
    pub c3: f64,
    /// `c4` / `d4` as used for evaluation: equal to `c1`.
    pub c4: f64,
    /// Activation offset, s.
    pub t_o: f64,
    pub tau_f: f64,
    /// Linearised slope carried forward for slope matching.
    pub h: f64,
    /// Speed at activation plus half the change. Only meaningful for
    /// velocity segments; the peak-acceleration analysis uses it as `d4`.
    pub solver_d4: f64,
}

/// Builds a segment for a change of `delta` over `tau_f` starting at `t_o`.
pub fn make_segment(
    kind: SegmentKind,
    delta: f64,
    tau_f: f64,
    t_o: f64,
    current_speed: f64,
) -> Result<SigmoidSegment, TrajError> {
    let shift = c3();
    let (c2, tau_f) = if delta == 0.0 {
        (0.0, tau_f.max(0.0))
    } else {
        if !(tau_f > 0.0) || !tau_f.is_finite() {
            return Err(TrajError::BadTimespan(tau_f));
        }
        (2.0 * shift / tau_f, tau_f)
    };
    let half = 0.5 * delta;
    let solver_d4 = match kind {
        SegmentKind::Velocity => current_speed + half,
        SegmentKind::Heading => half,
    };
    Ok(SigmoidSegment {
        kind,
        delta,
        c1: half,
        c2,
        c3: shift,
        c4: half,
        t_o,
        tau_f,
        h: 0.0,
        solver_d4,
    })
}

impl SigmoidSegment {
    pub fn is_noop(&self) -> bool {
        self.delta == 0.0
    }

    pub fn end_time(&self) -> f64 {
        self.t_o + self.tau_f
    }

    /// Value and first three time derivatives at `t`.
    pub fn eval(&self, t: f64) -> [f64; 4] {
        if self.is_noop() || t < self.t_o {
            return [0.0; 4];
        }
        let y = (self.c2 * (t - self.t_o) - self.c3).tanh();
        let s = 1.0 - y * y;
        let k = self.c2;
        [
            self.c1 * y + self.c4,
            self.c1 * k * s,
            self.c1 * k * k * (-2.0 * y * s),
            self.c1 * k * k * k * s * (6.0 * y * y - 2.0),
        ]
    }

    /// Fourth time derivative, used only for the p_d fifth-order check.
    pub fn fourth_derivative(&self, t: f64) -> f64 {
        if self.is_noop() || t < self.t_o {
            return 0.0;
        }
        let y = (self.c2 * (t - self.t_o) - self.c3).tanh();
        let s = 1.0 - y * y;
        self.c1 * self.c2.powi(4) * s * y * (16.0 - 24.0 * y * y)
    }
}

/// Heading and speed with derivatives up to third order.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ProfileSample {
    pub phi: f64,
    pub dphi: f64,
    pub d2phi: f64,
    pub d3phi: f64,
    pub v: f64,
    pub dv: f64,
    pub d2v: f64,
    pub d3v: f64,
}

/// Desired position and its first four derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DesiredState {
    pub p: Vec2,
    /// `[ṗ, p̈, p⁽³⁾, p⁽⁴⁾]`
    pub derivatives: [Vec2; 4],
}

impl DesiredState {
    pub fn velocity(&self) -> Vec2 {
        self.derivatives[0]
    }

    pub fn acceleration(&self) -> Vec2 {
        self.derivatives[1]
    }
}

/// Timing record of the most recent request, needed for slope matching.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RequestTiming {
    pub t_o: f64,
    pub tau_f: f64,
    pub h: f64,
    pub k: f64,
}

impl RequestTiming {
    pub fn end_time(&self) -> f64 {
        self.t_o + self.tau_f
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryProfile {
    pub base_heading: f64,
    pub base_speed: f64,
    pub heading_segments: Vec<SigmoidSegment>,
    pub velocity_segments: Vec<SigmoidSegment>,
    pub last_request: Option<RequestTiming>,
    /// Integrated desired position at `position_time`.
    pub position: Vec2,
    pub position_time: f64,
    /// Number of times the speed floor had to engage.
    pub clamp_events: u64,
}

impl TrajectoryProfile {
    pub fn new(start: Vec2, heading: f64, speed: f64, t0: f64) -> Self {
        Self {
            base_heading: heading,
            base_speed: speed,
            heading_segments: Vec::new(),
            velocity_segments: Vec::new(),
            last_request: None,
            position: start,
            position_time: t0,
            clamp_events: 0,
        }
    }

    /// Heading the profile settles at once every segment completes.
    pub fn final_heading(&self) -> f64 {
        self.base_heading + self.heading_segments.iter().map(|s| s.delta).sum::<f64>()
    }

    pub fn final_speed(&self) -> f64 {
        self.base_speed + self.velocity_segments.iter().map(|s| s.delta).sum::<f64>()
    }

    /// Latest nominal end time over all segments.
    pub fn active_until(&self) -> Option<f64> {
        self.segments()
            .filter(|s| !s.is_noop())
            .map(|s| s.end_time())
            .reduce(f64::max)
    }

    pub fn segments(&self) -> impl Iterator<Item = &SigmoidSegment> {
        self.heading_segments.iter().chain(self.velocity_segments.iter())
    }

    /// Activation time for a request issued at `t_now`:
    /// `max(t_now, t_o,prev + K_prev tau_f,prev)`.
    pub fn activation_time(&self, t_now: f64) -> f64 {
        match self.last_request {
            Some(prev) => t_now.max(prev.t_o + prev.k * prev.tau_f),
            None => t_now,
        }
    }

    /// Appends one segment, activated per [`Self::activation_time`].
    /// Previously added segments are left untouched.
    pub fn add_segment(&mut self, mut seg: SigmoidSegment, k: f64, t_now: f64) {
        seg.t_o = self.activation_time(t_now);
        self.push_request(&[seg], k);
    }

    /// Appends a set of segments that share one activation time and
    /// timespan (a combined heading and speed request) and records the
    /// request timing. Zero-amplitude segments are dropped.
    pub fn push_request(&mut self, segs: &[SigmoidSegment], k: f64) {
        let mut timing: Option<RequestTiming> = None;
        for seg in segs {
            if timing.is_none() || !seg.is_noop() {
                timing = Some(RequestTiming { t_o: seg.t_o, tau_f: seg.tau_f, h: seg.h, k });
            }
            if seg.is_noop() {
                continue;
            }
            match seg.kind {
                SegmentKind::Heading => self.heading_segments.push(*seg),
                SegmentKind::Velocity => self.velocity_segments.push(*seg),
            }
        }
        if let Some(t) = timing {
            if t.tau_f > 0.0 {
                self.last_request = Some(t);
            }
        }
    }

    /// Raw heading and speed sums, without the speed floor.
    pub fn evaluate_raw(&self, t: f64) -> ProfileSample {
        let mut out = ProfileSample { phi: self.base_heading, v: self.base_speed, ..Default::default() };
        for seg in &self.heading_segments {
            let e = seg.eval(t);
            out.phi += e[0];
            out.dphi += e[1];
            out.d2phi += e[2];
            out.d3phi += e[3];
        }
        for seg in &self.velocity_segments {
            let e = seg.eval(t);
            out.v += e[0];
            out.dv += e[1];
            out.d2v += e[2];
            out.d3v += e[3];
        }
        out
    }

    /// Heading and speed at `t` with analytic derivatives. Speed is floored
    /// at zero; the floor zeroes the speed derivatives.
    pub fn evaluate(&self, t: f64) -> ProfileSample {
        let mut out = self.evaluate_raw(t);
        if out.v < 0.0 {
            // summed segments undershooting zero means the caller scheduled
            // more deceleration than the current speed
            if out.v < -1e-9 {
                warn!("speed profile undershoots zero at t = {t:.4} s (v = {:.3e})", out.v);
            }
            out.v = 0.0;
            out.dv = 0.0;
            out.d2v = 0.0;
            out.d3v = 0.0;
        }
        out
    }

    /// `[ṗ, p̈, p⁽³⁾, p⁽⁴⁾]` at `t`.
    pub fn derivatives(&self, t: f64) -> [Vec2; 4] {
        path_derivatives(&self.evaluate(t))
    }

    /// Moves the integrated position forward to `t` using fixed steps of at
    /// most `dt` (Simpson's rule, i.e. RK4 for a time-only right-hand side).
    pub fn advance_to(&mut self, t: f64, dt: f64) {
        assert!(dt > 0.0, "integration step must be positive");
        let span = t - self.position_time;
        if span <= 0.0 {
            return;
        }
        let steps = (span / dt).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        let start = self.position_time;
        let mut p = self.position;
        for i in 0..steps {
            let a = start + h * i as f64;
            let k1 = self.velocity_floored(a);
            let k2 = self.velocity_floored(a + 0.5 * h);
            let k3 = self.velocity_floored(a + h);
            p += (k1 + 4.0 * k2 + k3) * (h / 6.0);
        }
        self.position = p;
        self.position_time = t;
    }

    fn velocity_floored(&mut self, t: f64) -> Vec2 {
        let s = self.evaluate_raw(t);
        if s.v < -1e-9 {
            self.clamp_events += 1;
        }
        Vec2::from_angle(s.phi) * s.v.max(0.0)
    }

    /// Integrates the position to `t` and returns the full desired state.
    pub fn desired_state(&mut self, t: f64, dt_integrate: f64) -> DesiredState {
        self.advance_to(t, dt_integrate);
        DesiredState { p: self.position, derivatives: self.derivatives(t) }
    }

    /// Folds segments finished by `t` (plus the retirement margin) into the
    /// base heading and speed.
    pub fn retire_segments(&mut self, t: f64) {
        let done = |s: &SigmoidSegment| t >= s.t_o + (1.0 + RETIRE_MARGIN) * s.tau_f;
        let mut heading_fold = 0.0;
        self.heading_segments.retain(|s| {
            if done(s) {
                heading_fold += s.delta;
                false
            } else {
                true
            }
        });
        let mut speed_fold = 0.0;
        self.velocity_segments.retain(|s| {
            if done(s) {
                speed_fold += s.delta;
                false
            } else {
                true
            }
        });
        self.base_heading += heading_fold;
        self.base_speed += speed_fold;
    }
}

/// Derivatives of `ṗ = v (cos φ, sin φ)` up to `p⁽⁴⁾` by the product rule
/// on `v · exp(iφ)`.
pub fn path_derivatives(s: &ProfileSample) -> [Vec2; 4] {
    let v = [s.v, s.dv, s.d2v, s.d3v];
    let (p1, p2, p3) = (s.dphi, s.d2phi, s.d3phi);
    // derivatives of exp(iφ) as multiples of exp(iφ), (re, im)
    let e = [
        (1.0, 0.0),
        (0.0, p1),
        (-p1 * p1, p2),
        (-3.0 * p1 * p2, p3 - p1 * p1 * p1),
    ];
    const BINOM: [[f64; 4]; 4] = [
        [1.0, 0.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0],
        [1.0, 2.0, 1.0, 0.0],
        [1.0, 3.0, 3.0, 1.0],
    ];
    let (sin, cos) = s.phi.sin_cos();
    let mut out = [Vec2::ZERO; 4];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut re = 0.0;
        let mut im = 0.0;
        for j in 0..=k {
            let w = BINOM[k][j] * v[k - j];
            re += w * e[j].0;
            im += w * e[j].1;
        }
        *slot = Vec2::new(re * cos - im * sin, re * sin + im * cos);
    }
    out
}
