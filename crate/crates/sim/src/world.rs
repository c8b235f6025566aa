//! Obstacle geometry, constant-velocity motion and scan synthesis.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use reactive_traj::geom::{Polygon, Vec2};
use reactive_traj::sensing::{RangeScan, SensorConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    Circle { center: Vec2, radius: f64 },
    Polygon { vertices: Vec<Vec2> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Obstacle {
    pub shape: Shape,
    /// Constant velocity, m/s.
    #[serde(default)]
    pub velocity: Vec2,
    #[serde(default)]
    pub name: Option<String>,
}

impl Obstacle {
    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }

    /// Shape translated to its position at time `t`.
    pub fn at(&self, t: f64) -> Shape {
        let d = self.velocity * t;
        match &self.shape {
            Shape::Circle { center, radius } => Shape::Circle { center: *center + d, radius: *radius },
            Shape::Polygon { vertices } => Shape::Polygon { vertices: vertices.iter().map(|v| *v + d).collect() },
        }
    }
}

impl Shape {
    /// Distance from `p` to the boundary, negative inside.
    pub fn signed_distance(&self, p: Vec2) -> f64 {
        match self {
            Shape::Circle { center, radius } => p.distance(*center) - radius,
            Shape::Polygon { vertices } => Polygon::new(vertices.clone()).signed_distance(p),
        }
    }

    /// Range along the unit ray `dir` from `o` to the first boundary hit.
    pub fn ray_hit(&self, o: Vec2, dir: Vec2) -> Option<f64> {
        match self {
            Shape::Circle { center, radius } => {
                let oc = o - *center;
                let b = oc.dot(dir);
                let c = oc.norm_squared() - radius * radius;
                let disc = b * b - c;
                if disc < 0.0 {
                    return None;
                }
                let sq = disc.sqrt();
                let near = -b - sq;
                let far = -b + sq;
                if near > 0.0 {
                    Some(near)
                } else if far > 0.0 {
                    Some(far)
                } else {
                    None
                }
            }
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                let mut best: Option<f64> = None;
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    if let Some(t) = ray_segment(o, dir, a, b) {
                        best = Some(best.map_or(t, |x| x.min(t)));
                    }
                }
                best
            }
        }
    }

    /// Boundary-to-boundary gap between two shapes; zero when they touch
    /// or overlap.
    pub fn gap(&self, other: &Shape) -> f64 {
        let g = match (self, other) {
            (Shape::Circle { center: a, radius: ra }, Shape::Circle { center: b, radius: rb }) => {
                a.distance(*b) - ra - rb
            }
            (Shape::Circle { center, radius }, poly @ Shape::Polygon { .. })
            | (poly @ Shape::Polygon { .. }, Shape::Circle { center, radius }) => poly.signed_distance(*center) - radius,
            (Shape::Polygon { vertices: a }, Shape::Polygon { vertices: b }) => {
                if edges_cross(a, b) {
                    0.0
                } else {
                    // disjoint polygons are closest at a vertex of one of them
                    let ab = a.iter().map(|v| other.signed_distance(*v)).fold(f64::INFINITY, f64::min);
                    let ba = b.iter().map(|v| self.signed_distance(*v)).fold(f64::INFINITY, f64::min);
                    ab.min(ba)
                }
            }
        };
        g.max(0.0)
    }
}

fn edges_cross(a: &[Vec2], b: &[Vec2]) -> bool {
    let edges = |v: &[Vec2]| (0..v.len()).map(|i| (v[i], v[(i + 1) % v.len()])).collect::<Vec<_>>();
    let (ea, eb) = (edges(a), edges(b));
    ea.iter().any(|&(p, q)| {
        eb.iter().any(|&(r, s)| {
            let d1 = (q - p).cross(r - p);
            let d2 = (q - p).cross(s - p);
            let d3 = (s - r).cross(p - r);
            let d4 = (s - r).cross(q - r);
            d1 * d2 < 0.0 && d3 * d4 < 0.0
        })
    })
}

fn ray_segment(o: Vec2, dir: Vec2, a: Vec2, b: Vec2) -> Option<f64> {
    let e = b - a;
    let denom = dir.cross(e);
    if denom.abs() < 1e-15 {
        return None;
    }
    let ao = a - o;
    let t = ao.cross(e) / denom;
    let s = ao.cross(dir) / denom;
    (t > 0.0 && (0.0..=1.0).contains(&s)).then_some(t)
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct World {
    pub obstacles: Vec<Obstacle>,
}

impl World {
    pub fn shapes_at(&self, t: f64) -> Vec<Shape> {
        self.obstacles.iter().map(|o| o.at(t)).collect()
    }

    /// Smallest boundary distance from `p` over all obstacles at `t`.
    pub fn clearance(&self, p: Vec2, t: f64) -> f64 {
        self.obstacles
            .iter()
            .map(|o| o.at(t).signed_distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Omnidirectional scan from `origin` at `t`. Ray `k` has bearing
    /// `−π + (k + ½) δ` relative to `heading`.
    pub fn scan(&self, origin: Vec2, heading: f64, t: f64, cfg: &SensorConfig) -> RangeScan {
        let shapes = self.shapes_at(t);
        let n = (2.0 * PI / cfg.angular_resolution).round() as usize;
        let step = 2.0 * PI / n as f64;
        let mut samples = Vec::new();
        for k in 0..n {
            let bearing = -PI + (k as f64 + 0.5) * step;
            let dir = Vec2::from_angle(heading + bearing);
            let hit = shapes
                .iter()
                .filter_map(|s| s.ray_hit(origin, dir))
                .fold(f64::INFINITY, f64::min);
            if hit <= cfg.r_s {
                samples.push((bearing, hit));
            }
        }
        RangeScan { timestamp: t, origin, heading, samples }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn circle_ray_and_distance() {
        let c = Shape::Circle { center: Vec2::new(5.0, 0.0), radius: 1.0 };
        assert_abs_diff_eq!(c.ray_hit(Vec2::ZERO, Vec2::new(1.0, 0.0)).unwrap(), 4.0, epsilon = 1e-12);
        assert!(c.ray_hit(Vec2::ZERO, Vec2::new(-1.0, 0.0)).is_none());
        assert_abs_diff_eq!(c.signed_distance(Vec2::ZERO), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn polygon_ray() {
        let sq = Shape::Polygon {
            vertices: vec![Vec2::new(2.0, -1.0), Vec2::new(4.0, -1.0), Vec2::new(4.0, 1.0), Vec2::new(2.0, 1.0)],
        };
        assert_abs_diff_eq!(sq.ray_hit(Vec2::ZERO, Vec2::new(1.0, 0.0)).unwrap(), 2.0, epsilon = 1e-12);
        assert!(sq.ray_hit(Vec2::ZERO, Vec2::new(0.0, 1.0)).is_none());
    }

    #[test]
    fn moving_obstacle_position() {
        let o = Obstacle {
            shape: Shape::Circle { center: Vec2::new(0.0, 0.0), radius: 1.0 },
            velocity: Vec2::new(0.5, 0.0),
            name: None,
        };
        match o.at(2.0) {
            Shape::Circle { center, .. } => assert_eq!(center, Vec2::new(1.0, 0.0)),
            _ => unreachable!(),
        }
    }

    #[test]
    fn shape_gaps() {
        let sq = |x: f64| Shape::Polygon {
            vertices: vec![Vec2::new(x, 0.0), Vec2::new(x + 1.0, 0.0), Vec2::new(x + 1.0, 1.0), Vec2::new(x, 1.0)],
        };
        let c = Shape::Circle { center: Vec2::new(-2.0, 0.5), radius: 1.0 };
        assert_abs_diff_eq!(sq(0.0).gap(&sq(3.0)), 2.0, epsilon = 1e-12);
        assert_eq!(sq(0.0).gap(&sq(1.0)), 0.0);
        assert_eq!(sq(0.0).gap(&sq(0.5)), 0.0);
        assert_abs_diff_eq!(c.gap(&sq(0.0)), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sq(0.0).gap(&c), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn scan_of_circle_lies_on_circle() {
        let cfg = SensorConfig::default();
        let w = World {
            obstacles: vec![Obstacle {
                shape: Shape::Circle { center: Vec2::new(5.0, 0.0), radius: 1.0 },
                velocity: Vec2::ZERO,
                name: None,
            }],
        };
        let s = w.scan(Vec2::ZERO, 0.3, 0.0, &cfg);
        assert!(!s.samples.is_empty());
        s.validate(&cfg).unwrap();
        for i in 0..s.samples.len() {
            assert_abs_diff_eq!(s.point(i).distance(Vec2::new(5.0, 0.0)), 1.0, epsilon = 1e-9);
        }
    }
}
