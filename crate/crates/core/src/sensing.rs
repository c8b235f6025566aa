//! Range-scan segmentation, obstacle tracking and the angle/range tables
//! that feed heading selection.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::coordination::VehicleBeacon;
use crate::error::SensingError;
use crate::geom::{wrap_angle, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorConfig {
    /// Sensor range, m.
    pub r_s: f64,
    /// Communication range, m.
    pub r_a: f64,
    /// Sensing and planning period, s.
    pub dt_s: f64,
    /// Clearance radius, m.
    pub r_c: f64,
    /// Ray spacing, rad.
    #[serde(default = "default_resolution")]
    pub angular_resolution: f64,
    /// Range discontinuity that splits a run, m.
    #[serde(default = "default_range_jump")]
    pub range_jump: f64,
    /// Angular gap that splits a run, in multiples of the resolution.
    #[serde(default = "default_gap_factor")]
    pub gap_factor: f64,
    /// Added to `v_o,max ΔT_s` to form the association radius, m.
    #[serde(default = "default_assoc_margin")]
    pub assoc_margin: f64,
}

fn default_resolution() -> f64 {
    2f64.to_radians()
}
fn default_range_jump() -> f64 {
    0.5
}
fn default_gap_factor() -> f64 {
    3.0
}
fn default_assoc_margin() -> f64 {
    0.5
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            r_s: 10.0,
            r_a: 10.0,
            dt_s: 1.0,
            r_c: 2.0,
            angular_resolution: default_resolution(),
            range_jump: default_range_jump(),
            gap_factor: default_gap_factor(),
            assoc_margin: default_assoc_margin(),
        }
    }
}

impl SensorConfig {
    pub fn validate(&self) -> Result<(), SensingError> {
        if !(self.dt_s > 0.0) {
            return Err(SensingError::BadPeriod(self.dt_s));
        }
        if !(self.r_c > 0.0 && self.r_s > self.r_c) {
            return Err(SensingError::BadConfig(format!(
                "need r_s > r_c > 0, got r_s = {}, r_c = {}",
                self.r_s, self.r_c
            )));
        }
        if !(self.angular_resolution > 0.0 && self.angular_resolution < PI) {
            return Err(SensingError::BadConfig(format!(
                "angular resolution {} outside (0, pi)",
                self.angular_resolution
            )));
        }
        Ok(())
    }

    pub fn assoc_radius(&self, v_o_max: f64) -> f64 {
        v_o_max * self.dt_s + self.assoc_margin
    }

    fn angular_gap(&self) -> f64 {
        self.gap_factor * self.angular_resolution
    }
}

/// One omnidirectional scan. Bearings are relative to `heading`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeScan {
    pub timestamp: f64,
    /// Sensor position when the scan was taken.
    pub origin: Vec2,
    /// Vehicle heading the bearings are measured from, rad.
    pub heading: f64,
    /// `(bearing, range)` pairs, bearings strictly increasing within one revolution.
    pub samples: Vec<(f64, f64)>,
}

impl RangeScan {
    pub fn validate(&self, cfg: &SensorConfig) -> Result<(), SensingError> {
        for w in self.samples.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(SensingError::BadScan(format!("bearings not increasing at {}", w[1].0)));
            }
        }
        if let (Some(first), Some(last)) = (self.samples.first(), self.samples.last()) {
            if last.0 - first.0 >= 2.0 * PI {
                return Err(SensingError::BadScan("scan spans more than one revolution".into()));
            }
        }
        for &(_, r) in &self.samples {
            if !(r > 0.0 && r <= cfg.r_s) {
                return Err(SensingError::BadScan(format!("range {r} outside (0, r_s]")));
            }
        }
        Ok(())
    }

    /// Inertial point of sample `i`.
    pub fn point(&self, i: usize) -> Vec2 {
        let (b, r) = self.samples[i];
        self.origin + Vec2::from_angle(self.heading + b) * r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleTrack {
    pub id: u32,
    /// Sensed boundary points, inertial frame.
    pub points: Vec<Vec2>,
    /// `None` until the track has been associated across two scans.
    pub velocity: Option<Vec2>,
    pub last_seen: f64,
    /// Scan origin and the `(inertial bearing, range)` rays behind `points`.
    pub origin: Vec2,
    pub rays: Vec<(f64, f64)>,
}

impl ObstacleTrack {
    pub fn centroid(&self) -> Vec2 {
        let n = self.points.len().max(1) as f64;
        self.points.iter().fold(Vec2::ZERO, |acc, p| acc + *p) / n
    }

    /// Velocity estimate, zero when unknown.
    pub fn velocity_or_zero(&self) -> Vec2 {
        self.velocity.unwrap_or(Vec2::ZERO)
    }

    fn range_at(&self, bearing: f64) -> Option<f64> {
        // rays are contiguous and ordered; interpolate between neighbours
        let n = self.rays.len();
        if n == 0 {
            return None;
        }
        if n == 1 {
            let (b, r) = self.rays[0];
            return (wrap_angle(bearing - b).abs() < 1e-9).then_some(r);
        }
        let b0 = self.rays[0].0;
        let rel = |b: f64| (b - b0).rem_euclid(2.0 * PI);
        let x = rel(bearing);
        for w in self.rays.windows(2) {
            let (xa, xb) = (rel(w[0].0), rel(w[1].0));
            if x >= xa && x <= xb && xb > xa {
                let s = (x - xa) / (xb - xa);
                return Some(w[0].1 + s * (w[1].1 - w[0].1));
            }
        }
        None
    }

    /// Mean range misfit of `points` shifted by `offset` against this
    /// track's rays, over the points that fall inside its angular span.
    fn misfit(&self, points: &[Vec2], offset: Vec2) -> Option<f64> {
        let mut total = 0.0;
        let mut count = 0usize;
        for p in points {
            let q = *p + offset - self.origin;
            if let Some(r) = self.range_at(q.angle()) {
                total += (r - q.norm()).abs();
                count += 1;
            }
        }
        (count > 0).then(|| total / count as f64)
    }
}

/// Pure centroid-difference velocity.
pub fn estimate_velocity(
    track_now: &ObstacleTrack,
    track_prev: &ObstacleTrack,
    dt_s: f64,
) -> Result<Vec2, SensingError> {
    if track_now.id != track_prev.id {
        return Err(SensingError::IdMismatch { now: track_now.id, prev: track_prev.id });
    }
    if !(dt_s > 0.0) {
        return Err(SensingError::BadPeriod(dt_s));
    }
    Ok((track_now.centroid() - track_prev.centroid()) / dt_s)
}

/// Velocity estimate that guards against the apparent motion of a
/// partially visible static surface: when the previous points sit on the
/// current boundary at least as well as the centroid-shifted ones, the
/// obstacle is taken as static.
pub fn estimate_track_velocity(
    track_now: &ObstacleTrack,
    track_prev: &ObstacleTrack,
    dt_s: f64,
    tolerance: f64,
) -> Result<Vec2, SensingError> {
    let centroid_velocity = estimate_velocity(track_now, track_prev, dt_s)?;
    let still = track_now.misfit(&track_prev.points, Vec2::ZERO);
    let moved = track_now.misfit(&track_prev.points, centroid_velocity * dt_s);
    Ok(match (still, moved) {
        (Some(s), _) if s <= tolerance => Vec2::ZERO,
        (Some(s), Some(m)) if s <= m => Vec2::ZERO,
        _ => centroid_velocity,
    })
}

/// Splits a scan into contiguous runs of sample indices.
pub fn split_runs(scan: &RangeScan, cfg: &SensorConfig) -> Vec<Vec<usize>> {
    let n = scan.samples.len();
    if n == 0 {
        return Vec::new();
    }
    let gap = cfg.angular_gap();
    let breaks = |a: (f64, f64), b: (f64, f64), db: f64| db > gap || (b.1 - a.1).abs() > cfg.range_jump;
    let mut runs: Vec<Vec<usize>> = vec![vec![0]];
    for i in 1..n {
        let (a, b) = (scan.samples[i - 1], scan.samples[i]);
        if breaks(a, b, b.0 - a.0) {
            runs.push(vec![i]);
        } else {
            runs.last_mut().expect("non-empty").push(i);
        }
    }
    if runs.len() > 1 {
        let (first, last) = (scan.samples[0], scan.samples[n - 1]);
        if !breaks(last, first, first.0 + 2.0 * PI - last.0) {
            let head = runs.remove(0);
            runs.last_mut().expect("non-empty").extend(head);
        }
    } else {
        // a single run that closes on itself stays one run
    }
    runs
}

/// Segments scans into tracks and keeps ids stable across scans.
#[derive(Debug, Clone, PartialEq)]
pub struct Segmenter {
    pub cfg: SensorConfig,
    pub v_o_max: f64,
    next_id: u32,
}

/// Range misfit below which a surface counts as unchanged, m.
const STATIC_TOLERANCE: f64 = 0.02;

impl Segmenter {
    pub fn new(cfg: SensorConfig, v_o_max: f64) -> Self {
        Self { cfg, v_o_max, next_id: 1 }
    }

    /// Tracks for `scan`, associating each run with at most one previous
    /// track. A run matches a track when their centroids lie within the
    /// association radius or, for extended surfaces whose visible part
    /// slides, when their point sets come within the range-jump threshold.
    pub fn segment(&mut self, scan: &RangeScan, prev: &[ObstacleTrack]) -> Vec<ObstacleTrack> {
        let runs = split_runs(scan, &self.cfg);
        let mut fresh: Vec<ObstacleTrack> = runs
            .iter()
            .map(|run| ObstacleTrack {
                id: 0,
                points: run.iter().map(|&i| scan.point(i)).collect(),
                velocity: None,
                last_seen: scan.timestamp,
                origin: scan.origin,
                rays: run
                    .iter()
                    .map(|&i| (scan.heading + scan.samples[i].0, scan.samples[i].1))
                    .collect(),
            })
            .collect();
        let dt = scan.timestamp - prev.iter().map(|t| t.last_seen).fold(f64::NEG_INFINITY, f64::max);
        let dt = if dt.is_finite() && dt > 0.0 { dt } else { self.cfg.dt_s };
        let r_assoc = self.cfg.assoc_radius(self.v_o_max);

        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (i, run) in fresh.iter().enumerate() {
            let c = run.centroid();
            for (j, old) in prev.iter().enumerate() {
                let predicted = old.centroid() + old.velocity_or_zero() * dt;
                let d = c.distance(predicted);
                if d <= r_assoc {
                    pairs.push((d, i, j));
                } else {
                    let shift = old.velocity_or_zero() * dt;
                    let near = set_distance(&run.points, &old.points, shift);
                    if near <= self.cfg.range_jump {
                        // ranked after every centroid match
                        pairs.push((r_assoc + near, i, j));
                    }
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut run_taken = vec![false; fresh.len()];
        let mut prev_taken = vec![false; prev.len()];
        for (_, i, j) in pairs {
            if run_taken[i] || prev_taken[j] {
                continue;
            }
            run_taken[i] = true;
            prev_taken[j] = true;
            fresh[i].id = prev[j].id;
            fresh[i].velocity = estimate_track_velocity(&fresh[i], &prev[j], dt, STATIC_TOLERANCE).ok();
        }
        let used: BTreeSet<u32> = prev.iter().map(|t| t.id).collect();
        for (i, run) in fresh.iter_mut().enumerate() {
            if !run_taken[i] {
                while used.contains(&self.next_id) {
                    self.next_id += 1;
                }
                run.id = self.next_id;
                self.next_id += 1;
            }
        }
        fresh
    }
}

fn set_distance(a: &[Vec2], b: &[Vec2], shift: Vec2) -> f64 {
    let mut best = f64::INFINITY;
    for p in a {
        for q in b {
            best = best.min(p.distance(*q + shift));
        }
    }
    best
}

/// Stateless form of [`Segmenter::segment`]: new ids continue after the
/// largest previous id.
pub fn segment_scan(scan: &RangeScan, prev_tracks: &[ObstacleTrack], cfg: &SensorConfig, v_o_max: f64) -> Vec<ObstacleTrack> {
    let mut seg = Segmenter::new(*cfg, v_o_max);
    seg.next_id = prev_tracks.iter().map(|t| t.id + 1).max().unwrap_or(1);
    seg.segment(scan, prev_tracks)
}

/// Source of a table row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TargetId {
    Obstacle(u32),
    Vehicle(u32),
}

impl TargetId {
    pub fn is_vehicle(self) -> bool {
        matches!(self, TargetId::Vehicle(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    /// Bearing from the desired velocity, rad.
    pub theta: f64,
    /// Distance from the desired position, m.
    pub range: f64,
    pub id: TargetId,
    /// Bearing seen from the left offset point `p_d + r_c n̂`.
    pub theta_plus: f64,
    /// Bearing seen from the right offset point `p_d − r_c n̂`.
    pub theta_minus: f64,
    /// Inertial position of the point.
    pub point: Vec2,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AugmentedTable {
    pub rows: Vec<TableRow>,
}

impl AugmentedTable {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn ids(&self) -> BTreeSet<TargetId> {
        self.rows.iter().map(|r| r.id).collect()
    }

    pub fn points_of(&self, id: TargetId) -> impl Iterator<Item = &TableRow> {
        self.rows.iter().filter(move |r| r.id == id)
    }

    pub fn min_range(&self) -> Option<f64> {
        self.rows.iter().map(|r| r.range).reduce(f64::min)
    }
}

/// Builds the augmented table from the tracked points and the beacons of
/// vehicles this one must avoid.
pub fn build_tables(
    tracks: &[ObstacleTrack],
    beacons: &[VehicleBeacon],
    p_d: Vec2,
    v_d: Vec2,
    cfg: &SensorConfig,
) -> Result<AugmentedTable, SensingError> {
    let dir = v_d.normalized().ok_or(SensingError::ZeroHeading)?;
    let heading = dir.angle();
    let n = dir.perp();
    let p_plus = p_d + n * cfg.r_c;
    let p_minus = p_d - n * cfg.r_c;
    let row = |point: Vec2, id: TargetId| TableRow {
        theta: wrap_angle((point - p_d).angle() - heading),
        range: point.distance(p_d),
        id,
        theta_plus: wrap_angle((point - p_plus).angle() - heading),
        theta_minus: wrap_angle((point - p_minus).angle() - heading),
        point,
    };
    let mut rows = Vec::new();
    for t in tracks {
        rows.extend(t.points.iter().map(|p| row(*p, TargetId::Obstacle(t.id))));
    }
    rows.extend(beacons.iter().map(|b| row(b.p, TargetId::Vehicle(b.id))));
    Ok(AugmentedTable { rows })
}

/// `(ID_r, ID_θ)`: id of the closest row and of the row best aligned with
/// the heading or either offset ray. Ties go to the earlier row.
pub fn select_critical(table: &AugmentedTable) -> Result<(TargetId, TargetId), SensingError> {
    let first = table.rows.first().ok_or(SensingError::EmptyTable)?;
    let mut closest = first;
    let mut aligned = first;
    let alignment = |r: &TableRow| r.theta.abs().min(r.theta_plus.abs()).min(r.theta_minus.abs());
    for r in &table.rows[1..] {
        if r.range < closest.range {
            closest = r;
        }
        if alignment(r) < alignment(aligned) {
            aligned = r;
        }
    }
    Ok((closest.id, aligned.id))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpeedClass {
    Slow,
    Fast,
}

pub fn classify_speed(v_o: f64, v_c: f64, k_o: f64) -> Result<SpeedClass, SensingError> {
    if !(k_o > 0.0 && k_o < 1.0) {
        return Err(SensingError::BadKo(k_o));
    }
    Ok(if v_o <= k_o * v_c { SpeedClass::Slow } else { SpeedClass::Fast })
}

/// Position of `p_o` one period ahead at constant velocity.
pub fn project_obstacle(p_o: Vec2, v_o: Vec2, dt_s: f64) -> Vec2 {
    v_o * dt_s + p_o
}
