//! Heading-change selection around the critical obstacles.
//!
//! Candidate headings are kept as signed angles from the desired velocity
//! (positive counterclockwise). A candidate's `sense` is the side on which
//! the vehicle circumnavigates its target: for `Ccw` the target stays on
//! the right and every heading at or left of the candidate clears it; for
//! `Cw` the mirror holds. The selection rule combines these one-sided
//! bounds with the goal bearing.

use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::AvoidanceError;
use crate::geom::{angle_between, rotate_z, signed_angle, signed_turn, TurnDirection, Vec2};
use crate::sensing::{classify_speed, project_obstacle, select_critical, AugmentedTable, SpeedClass, TargetId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CandidateSource {
    ClosestObstacle,
    AlignedObstacle,
    Goal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeadingCandidate {
    /// Unsigned magnitude, rad.
    pub delta_phi: f64,
    /// Turn direction of the change.
    pub direction: TurnDirection,
    /// Circumnavigation sense of the target.
    pub sense: TurnDirection,
    pub source: CandidateSource,
    pub target: Option<TargetId>,
}

impl HeadingCandidate {
    pub fn from_signed(signed: f64, sense: TurnDirection, source: CandidateSource, target: Option<TargetId>) -> Self {
        Self { delta_phi: signed.abs(), direction: TurnDirection::from_sign(signed), sense, source, target }
    }

    pub fn signed(&self) -> f64 {
        self.direction.sign() * self.delta_phi
    }

    fn is_obstacle(&self) -> bool {
        matches!(self.target, Some(TargetId::Obstacle(_)))
    }
}

/// Which row of the selection rule produced the heading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SelectionBranch {
    /// Goal closer than any sensed point.
    GoalClear,
    /// Both critical targets passed counterclockwise: largest change.
    BothCcw,
    /// Both critical targets passed clockwise: smallest change.
    BothCw,
    /// Bounds cross; the closest target wins.
    Crossed,
    /// Goal bearing lies between the bounds.
    GoalBetween,
    /// Smaller of the two obstacle candidates.
    Smallest,
    /// Nothing sensed ahead; head for the goal.
    NoThreat,
}

impl SelectionBranch {
    pub fn code(self) -> u8 {
        match self {
            SelectionBranch::GoalClear => 1,
            SelectionBranch::BothCcw => 2,
            SelectionBranch::BothCw => 3,
            SelectionBranch::Crossed => 4,
            SelectionBranch::GoalBetween => 5,
            SelectionBranch::Smallest => 6,
            SelectionBranch::NoThreat => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AvoidanceDecision {
    pub delta_phi_signed: f64,
    pub delta_v: f64,
    pub branch: SelectionBranch,
}

/// Circumnavigation sense for a target with closest relative point `p_min`.
pub fn circumnavigation_direction(
    p_min: Vec2,
    v_d: Vec2,
    v_o: Vec2,
    speed_class: SpeedClass,
) -> Result<TurnDirection, AvoidanceError> {
    if v_d.norm() == 0.0 {
        return Err(AvoidanceError::ZeroHeading);
    }
    Ok(match speed_class {
        SpeedClass::Slow => signed_turn(p_min, v_d),
        SpeedClass::Fast => signed_turn(v_o, v_d),
    })
}

/// Senses cached per target while it stays in the table.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DirectionCache {
    senses: BTreeMap<TargetId, TurnDirection>,
}

impl DirectionCache {
    pub fn get(&self, id: TargetId) -> Option<TurnDirection> {
        self.senses.get(&id).copied()
    }

    pub fn get_or_try_insert(
        &mut self,
        id: TargetId,
        compute: impl FnOnce() -> Result<TurnDirection, AvoidanceError>,
    ) -> Result<TurnDirection, AvoidanceError> {
        if let Some(d) = self.get(id) {
            return Ok(d);
        }
        let d = compute()?;
        self.senses.insert(id, d);
        Ok(d)
    }

    /// Forgets targets that left the table.
    pub fn retain_present(&mut self, table: &AugmentedTable) {
        let present = table.ids();
        self.senses.retain(|id, _| present.contains(id));
    }

    pub fn len(&self) -> usize {
        self.senses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.senses.is_empty()
    }
}

/// Tangent heading that clears every point in `points` by `r_c` on the
/// side given by `dir`. Points at or behind the vehicle's beam
/// (`(p − p_d)·v_d ≤ 0`) impose no constraint on the forward ray and are
/// skipped; `None` means no point constrains the heading.
pub fn tangent_candidate(
    points: &[Vec2],
    p_d: Vec2,
    v_d: Vec2,
    r_c: f64,
    dir: TurnDirection,
) -> Result<Option<HeadingCandidate>, AvoidanceError> {
    tangent_impl(points, p_d, v_d, r_c, dir, false).map(|(c, _)| c)
}

/// As [`tangent_candidate`], but points inside the clearance radius are
/// treated as lying on it (tangent at ±π/2). The flag reports whether
/// that happened.
pub fn tangent_candidate_saturated(
    points: &[Vec2],
    p_d: Vec2,
    v_d: Vec2,
    r_c: f64,
    dir: TurnDirection,
) -> Result<(Option<HeadingCandidate>, bool), AvoidanceError> {
    tangent_impl(points, p_d, v_d, r_c, dir, true)
}

fn tangent_impl(
    points: &[Vec2],
    p_d: Vec2,
    v_d: Vec2,
    r_c: f64,
    dir: TurnDirection,
    saturate: bool,
) -> Result<(Option<HeadingCandidate>, bool), AvoidanceError> {
    if v_d.norm() == 0.0 {
        return Err(AvoidanceError::ZeroHeading);
    }
    if points.is_empty() {
        return Err(AvoidanceError::NoPoints);
    }
    let mut best: Option<f64> = None;
    let mut saturated = false;
    for p in points {
        let r = *p - p_d;
        let dist = r.norm();
        if dist <= r_c {
            if !saturate {
                return Err(AvoidanceError::ClearanceViolated { distance: dist, r_c });
            }
            saturated = true;
        }
        if r.dot(v_d) <= 0.0 {
            continue;
        }
        let ratio = (r_c / dist).min(1.0);
        let phi_h = ratio.asin();
        let leg = (dist * dist - r_c * r_c).max(0.0).sqrt();
        let p_h = p_d + rotate_z(r, dir.sign() * phi_h) * (leg / dist);
        // a tangent point collapsing onto p_d leaves only the rotated bearing
        let to_h = if leg > 0.0 { p_h - p_d } else { rotate_z(r, dir.sign() * phi_h) };
        let a = signed_angle(v_d, to_h);
        best = Some(match (best, dir) {
            (None, _) => a,
            (Some(b), TurnDirection::Ccw) => b.max(a),
            (Some(b), TurnDirection::Cw) => b.min(a),
        });
    }
    Ok((best.map(|a| HeadingCandidate::from_signed(a, dir, CandidateSource::ClosestObstacle, None)), saturated))
}

pub fn goal_candidate(p_g: Vec2, p_d: Vec2, v_d: Vec2) -> Result<HeadingCandidate, AvoidanceError> {
    let to_goal = p_g - p_d;
    if to_goal.norm() == 0.0 {
        return Err(AvoidanceError::AtGoal);
    }
    let magnitude = angle_between(v_d, to_goal).map_err(|_| AvoidanceError::ZeroHeading)?;
    let direction = signed_turn(v_d, to_goal);
    Ok(HeadingCandidate { delta_phi: magnitude, direction, sense: direction, source: CandidateSource::Goal, target: None })
}

/// Adds the extra turn that lifts the vehicle's velocity component along
/// the obstacle velocity up to the obstacle speed.
pub fn velocity_match_augment(
    candidate: HeadingCandidate,
    v_d: Vec2,
    v_o: Vec2,
) -> Result<HeadingCandidate, AvoidanceError> {
    let speed_o = v_o.norm();
    if speed_o == 0.0 {
        return Ok(candidate);
    }
    let v_turned = rotate_z(v_d, candidate.signed());
    let speed_d = v_turned.norm();
    let v_vo = v_turned.dot(v_o) / speed_o;
    if v_vo >= speed_o {
        return Ok(candidate);
    }
    if speed_o > speed_d {
        return Err(AvoidanceError::SpeedRatioDomain { obstacle: speed_o, vehicle: speed_d });
    }
    let extra = (speed_o / speed_d).asin() - (v_vo / speed_d).clamp(-1.0, 1.0).asin();
    let extra_dir = signed_turn(v_turned, v_o);
    // the sign of the sum is that of the larger contribution; the side the
    // obstacle is passed on does not change
    let combined = candidate.signed() + extra_dir.sign() * extra;
    Ok(HeadingCandidate::from_signed(combined, candidate.sense, candidate.source, candidate.target))
}

/// Sequential selection over the two obstacle candidates and the goal.
pub fn select_heading(
    cand_r: &HeadingCandidate,
    cand_theta: &HeadingCandidate,
    cand_g: &HeadingCandidate,
    dist_to_goal: f64,
    min_obstacle_dist: f64,
) -> AvoidanceDecision {
    let (r, th, g) = (cand_r.signed(), cand_theta.signed(), cand_g.signed());
    let pick = |value: f64, branch| AvoidanceDecision { delta_phi_signed: value, delta_v: 0.0, branch };
    if dist_to_goal < min_obstacle_dist {
        return pick(g, SelectionBranch::GoalClear);
    }
    match (cand_r.sense, cand_theta.sense) {
        (TurnDirection::Ccw, TurnDirection::Ccw) => return pick(r.max(th).max(g), SelectionBranch::BothCcw),
        (TurnDirection::Cw, TurnDirection::Cw) => return pick(r.min(th).min(g), SelectionBranch::BothCw),
        _ => {}
    }
    let (lo, hi) = match cand_r.sense {
        TurnDirection::Ccw => (r, th),
        TurnDirection::Cw => (th, r),
    };
    if lo > hi {
        return pick(r, SelectionBranch::Crossed);
    }
    if lo <= g && g <= hi {
        return pick(g, SelectionBranch::GoalBetween);
    }
    let smaller = if r.abs() <= th.abs() { r } else { th };
    pick(smaller, SelectionBranch::Smallest)
}

/// Commanded speed: slowed to `K_o v_c` when the critical pair mixes a
/// vehicle and an obstacle.
pub fn velocity_policy(threats: Option<(TargetId, TargetId)>, current_v: f64, v_c: f64, k_o: f64) -> f64 {
    match threats {
        None => current_v,
        Some((a, b)) if a.is_vehicle() != b.is_vehicle() => k_o * v_c,
        Some(_) => v_c,
    }
}

/// Everything the decision step reads about one vehicle's surroundings.
#[derive(Debug, Clone, Copy)]
pub struct AvoidanceContext<'a> {
    pub table: &'a AugmentedTable,
    /// Velocity of each target, where known.
    pub velocities: &'a BTreeMap<TargetId, Vec2>,
    pub p_d: Vec2,
    pub v_d: Vec2,
    pub p_g: Vec2,
    pub v_c: f64,
    pub k_o: f64,
    pub r_c: f64,
    pub dt_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannedChange {
    pub decision: AvoidanceDecision,
    /// Commanded speed after this step, m/s.
    pub target_speed: f64,
    pub critical: Option<(TargetId, TargetId)>,
    /// A sensed point was inside the clearance radius.
    pub clearance_saturated: bool,
    /// The obstacle outran the velocity match and speed was reduced.
    pub outrun: bool,
}

/// Per-vehicle decision state: the circumnavigation cache.
#[derive(Debug, Clone, Default)]
pub struct Avoider {
    pub cache: DirectionCache,
}

impl Avoider {
    pub fn decide(&mut self, ctx: &AvoidanceContext<'_>) -> Result<PlannedChange, AvoidanceError> {
        self.cache.retain_present(ctx.table);
        let goal = goal_candidate(ctx.p_g, ctx.p_d, ctx.v_d)?;
        let dist_to_goal = ctx.p_g.distance(ctx.p_d);
        let clear = |target_speed| PlannedChange {
            decision: AvoidanceDecision {
                delta_phi_signed: goal.signed(),
                delta_v: target_speed - ctx.v_d.norm(),
                branch: SelectionBranch::NoThreat,
            },
            target_speed,
            critical: None,
            clearance_saturated: false,
            outrun: false,
        };
        let Ok((id_r, id_theta)) = select_critical(ctx.table) else {
            return Ok(clear(ctx.v_c));
        };
        let mut saturated = false;
        let mut build = |id: TargetId, source: CandidateSource| -> Result<Option<HeadingCandidate>, AvoidanceError> {
            let v_o = ctx.velocities.get(&id).copied().unwrap_or(Vec2::ZERO);
            let current: Vec<Vec2> = ctx.table.points_of(id).map(|r| r.point).collect();
            let p_min = current
                .iter()
                .copied()
                .min_by(|a, b| a.distance(ctx.p_d).total_cmp(&b.distance(ctx.p_d)))
                .ok_or(AvoidanceError::NoPoints)?;
            let class = classify_speed(v_o.norm(), ctx.v_c, ctx.k_o).unwrap_or(SpeedClass::Slow);
            let class = if v_o.norm() == 0.0 { SpeedClass::Slow } else { class };
            let sense = self
                .cache
                .get_or_try_insert(id, || circumnavigation_direction(p_min - ctx.p_d, ctx.v_d, v_o, class))?;
            let mut points = current.clone();
            points.extend(current.iter().map(|p| project_obstacle(*p, v_o, ctx.dt_s)));
            let (cand, sat) = tangent_candidate_saturated(&points, ctx.p_d, ctx.v_d, ctx.r_c, sense)?;
            saturated |= sat;
            Ok(cand.map(|c| HeadingCandidate { source, target: Some(id), ..c }))
        };
        let cand_r = build(id_r, CandidateSource::ClosestObstacle)?;
        let cand_theta = build(id_theta, CandidateSource::AlignedObstacle)?;
        if saturated {
            warn!("sensed point inside the clearance radius at p_d = ({:.3}, {:.3})", ctx.p_d.x, ctx.p_d.y);
        }
        let target_speed = velocity_policy(Some((id_r, id_theta)), ctx.v_d.norm(), ctx.v_c, ctx.k_o);
        let (mut cand_r, mut cand_theta) = match (cand_r, cand_theta) {
            (None, None) => {
                let mut out = clear(target_speed);
                out.critical = Some((id_r, id_theta));
                return Ok(out);
            }
            (Some(a), None) => (a, HeadingCandidate { source: CandidateSource::AlignedObstacle, ..a }),
            (None, Some(b)) => (HeadingCandidate { source: CandidateSource::ClosestObstacle, ..b }, b),
            (Some(a), Some(b)) => (a, b),
        };

        let mut outrun = false;
        if cand_r.sense == cand_theta.sense && dist_to_goal >= ctx.table.min_range().unwrap_or(f64::INFINITY) {
            let extreme = |c: &HeadingCandidate| match cand_r.sense {
                TurnDirection::Ccw => c.signed(),
                TurnDirection::Cw => -c.signed(),
            };
            let top = [&cand_r, &cand_theta, &goal]
                .into_iter()
                .max_by(|a, b| extreme(a).total_cmp(&extreme(b)))
                .expect("three candidates");
            if top.is_obstacle() {
                for c in [&mut cand_r, &mut cand_theta] {
                    if !c.is_obstacle() {
                        continue;
                    }
                    let v_o = c.target.and_then(|id| ctx.velocities.get(&id)).copied().unwrap_or(Vec2::ZERO);
                    match velocity_match_augment(*c, ctx.v_d, v_o) {
                        Ok(aug) => *c = aug,
                        Err(AvoidanceError::SpeedRatioDomain { .. }) => outrun = true,
                        Err(e) => return Err(e),
                    }
                }
            }
        }
        let range = ctx.table.min_range().unwrap_or(f64::INFINITY);
        let mut decision = select_heading(&cand_r, &cand_theta, &goal, dist_to_goal, range);
        let target_speed = if outrun { ctx.k_o * ctx.v_c } else { target_speed };
        decision.delta_v = target_speed - ctx.v_d.norm();
        Ok(PlannedChange { decision, target_speed, critical: Some((id_r, id_theta)), clearance_saturated: saturated, outrun })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    const X: Vec2 = Vec2::new(1.0, 0.0);

    #[test]
    fn circumnavigation_examples() {
        let slow = circumnavigation_direction(Vec2::new(1.0, 1.0), X, Vec2::ZERO, SpeedClass::Slow).unwrap();
        assert_eq!(slow, TurnDirection::Cw);
        let ahead = circumnavigation_direction(X, X, Vec2::ZERO, SpeedClass::Slow).unwrap();
        assert_eq!(ahead, TurnDirection::Ccw);
        let fast = circumnavigation_direction(X, X, Vec2::new(0.0, 1.0), SpeedClass::Fast).unwrap();
        assert_eq!(fast, TurnDirection::Cw);
        assert_eq!(
            circumnavigation_direction(X, Vec2::ZERO, Vec2::ZERO, SpeedClass::Slow),
            Err(AvoidanceError::ZeroHeading)
        );
    }

    #[test]
    fn tangent_dead_ahead() {
        let c = tangent_candidate(&[Vec2::new(5.0, 0.0)], Vec2::ZERO, X, 2.0, TurnDirection::Ccw)
            .unwrap()
            .unwrap();
        assert_abs_diff_eq!(c.delta_phi, (0.4f64).asin(), epsilon = 1e-12);
        assert_eq!(c.direction, TurnDirection::Ccw);
        // the tangent leg is sqrt(21) long
        let leg = (25.0f64 - 4.0).sqrt();
        assert_abs_diff_eq!(leg, 4.583, epsilon = 1e-3);
    }

    #[test]
    fn tangent_limit_and_violation() {
        let c = tangent_candidate(&[Vec2::new(2.0 + 1e-9, 0.0)], Vec2::ZERO, X, 2.0, TurnDirection::Cw)
            .unwrap()
            .unwrap();
        assert_abs_diff_eq!(c.delta_phi, FRAC_PI_2, epsilon = 1e-3);
        assert_eq!(c.direction, TurnDirection::Cw);
        assert!(matches!(
            tangent_candidate(&[Vec2::new(1.5, 0.0)], Vec2::ZERO, X, 2.0, TurnDirection::Ccw),
            Err(AvoidanceError::ClearanceViolated { .. })
        ));
        let (c, sat) =
            tangent_candidate_saturated(&[Vec2::new(1.5, 0.0)], Vec2::ZERO, X, 2.0, TurnDirection::Ccw).unwrap();
        assert!(sat);
        assert_abs_diff_eq!(c.unwrap().signed(), FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn points_behind_do_not_constrain() {
        let c = tangent_candidate(&[Vec2::new(-5.0, 1.0)], Vec2::ZERO, X, 2.0, TurnDirection::Ccw).unwrap();
        assert!(c.is_none());
    }

    #[test]
    fn goal_examples() {
        let g = goal_candidate(Vec2::new(5.0, 0.0), Vec2::ZERO, X).unwrap();
        assert_eq!(g.delta_phi, 0.0);
        let g = goal_candidate(Vec2::new(0.0, 3.0), Vec2::ZERO, X).unwrap();
        assert_abs_diff_eq!(g.delta_phi, FRAC_PI_2, epsilon = 1e-15);
        assert_eq!(g.direction, TurnDirection::Ccw);
        let g = goal_candidate(Vec2::from_angle(-2.0) * 4.0, Vec2::ZERO, X).unwrap();
        assert_abs_diff_eq!(g.delta_phi, 2.0, epsilon = 1e-12);
        assert_eq!(g.direction, TurnDirection::Cw);
        assert_eq!(goal_candidate(Vec2::ZERO, Vec2::ZERO, X), Err(AvoidanceError::AtGoal));
    }

    fn cand(signed: f64, sense: TurnDirection) -> HeadingCandidate {
        HeadingCandidate::from_signed(signed, sense, CandidateSource::ClosestObstacle, Some(TargetId::Obstacle(1)))
    }

    #[test]
    fn augmentation_examples() {
        // already matching: unchanged
        let c = cand(0.0, TurnDirection::Ccw);
        assert_eq!(velocity_match_augment(c, X * 2.0, Vec2::new(1.0, 0.0)).unwrap(), c);
        // perpendicular obstacle velocity: extra pi/6 toward it
        let out = velocity_match_augment(c, X * 2.0, Vec2::new(0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(out.signed(), PI / 6.0, epsilon = 1e-12);
        // the augmented angle can change sign; the side the obstacle is
        // passed on does not
        let neg = velocity_match_augment(cand(-0.3, TurnDirection::Ccw), X * 2.0, Vec2::new(0.0, 1.0)).unwrap();
        let extra = 0.5f64.asin() - (-0.3f64).sin().asin();
        assert_abs_diff_eq!(neg.signed(), -0.3 + extra, epsilon = 1e-12);
        assert_eq!(neg.sense, TurnDirection::Ccw);
        assert_eq!(velocity_match_augment(c, X, Vec2::new(0.0, 0.0)).unwrap(), c);
        assert!(matches!(
            velocity_match_augment(c, X, Vec2::new(0.0, 3.0)),
            Err(AvoidanceError::SpeedRatioDomain { .. })
        ));
    }

    #[test]
    fn selection_rows() {
        use TurnDirection::{Ccw, Cw};
        let g = |s: f64| HeadingCandidate::from_signed(s, TurnDirection::from_sign(s), CandidateSource::Goal, None);
        let d = select_heading(&cand(0.3, Ccw), &cand(0.5, Ccw), &g(0.2), 1.0, 5.0);
        assert_eq!(d.branch, SelectionBranch::GoalClear);
        assert_eq!(d.delta_phi_signed, 0.2);
        let d = select_heading(&cand(0.3, Ccw), &cand(0.5, Ccw), &g(0.2), 10.0, 5.0);
        assert_eq!((d.branch, d.delta_phi_signed), (SelectionBranch::BothCcw, 0.5));
        let d = select_heading(&cand(-0.3, Cw), &cand(-0.5, Cw), &g(0.2), 10.0, 5.0);
        assert_eq!((d.branch, d.delta_phi_signed), (SelectionBranch::BothCw, -0.5));
        // r lower bound above theta upper bound
        let d = select_heading(&cand(0.6, Ccw), &cand(0.2, Cw), &g(0.0), 10.0, 5.0);
        assert_eq!((d.branch, d.delta_phi_signed), (SelectionBranch::Crossed, 0.6));
        let d = select_heading(&cand(-0.2, Ccw), &cand(0.4, Cw), &g(0.1), 10.0, 5.0);
        assert_eq!((d.branch, d.delta_phi_signed), (SelectionBranch::GoalBetween, 0.1));
        let d = select_heading(&cand(-0.2, Ccw), &cand(0.4, Cw), &g(0.9), 10.0, 5.0);
        assert_eq!((d.branch, d.delta_phi_signed), (SelectionBranch::Smallest, -0.2));
        // theta as the lower bound when r passes clockwise
        let d = select_heading(&cand(0.4, Cw), &cand(0.1, Ccw), &g(0.3), 10.0, 5.0);
        assert_eq!((d.branch, d.delta_phi_signed), (SelectionBranch::GoalBetween, 0.3));
    }

    #[test]
    fn speed_policy() {
        let o = TargetId::Obstacle(1);
        let v = TargetId::Vehicle(2);
        assert_eq!(velocity_policy(Some((o, o)), 1.0, 1.83, 0.5), 1.83);
        assert_abs_diff_eq!(velocity_policy(Some((v, o)), 1.0, 1.83, 0.5), 0.915, epsilon = 1e-12);
        assert_eq!(velocity_policy(None, 1.2, 1.83, 0.5), 1.2);
    }

    #[test]
    fn cache_persists_until_target_leaves() {
        let mut cache = DirectionCache::default();
        let id = TargetId::Obstacle(3);
        assert_eq!(cache.get_or_try_insert(id, || Ok(TurnDirection::Cw)).unwrap(), TurnDirection::Cw);
        assert_eq!(cache.get_or_try_insert(id, || Ok(TurnDirection::Ccw)).unwrap(), TurnDirection::Cw);
        cache.retain_present(&AugmentedTable::default());
        assert!(cache.is_empty());
    }
}
