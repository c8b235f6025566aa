//! Beacon exchange and the rule deciding which of two vehicles yields.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::CoordinationError;
use crate::geom::Vec2;

/// State a vehicle broadcasts each sensing period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleBeacon {
    pub id: u32,
    pub p: Vec2,
    pub v: Vec2,
    /// Maximum cruise speed, m/s.
    pub v_c: f64,
    pub timestamp: f64,
}

/// Ids of the neighbours this vehicle must manoeuvre around.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ManeuverSet {
    pub id_mnvr: BTreeSet<u32>,
}

impl ManeuverSet {
    pub fn contains(&self, id: u32) -> bool {
        self.id_mnvr.contains(&id)
    }
}

/// Beacons inside the closed communication ball, excluding `self_id`.
pub fn neighbors(self_id: u32, self_p: Vec2, all: &[VehicleBeacon], r_a: f64) -> Vec<VehicleBeacon> {
    all.iter()
        .filter(|b| b.id != self_id && b.p.distance(self_p) <= r_a)
        .copied()
        .collect()
}

/// True when `a` must avoid `b`: faster vehicles yield, and between equal
/// speeds the lower id yields.
pub fn must_avoid(a: &VehicleBeacon, b: &VehicleBeacon) -> bool {
    a.v_c > b.v_c || (a.v_c == b.v_c && a.id < b.id)
}

pub fn rank(me: &VehicleBeacon, near: &[VehicleBeacon]) -> Result<ManeuverSet, CoordinationError> {
    let mut seen = BTreeSet::from([me.id]);
    let mut out = ManeuverSet::default();
    for n in near {
        if !seen.insert(n.id) {
            return Err(CoordinationError::DuplicateId(n.id));
        }
        if must_avoid(me, n) {
            out.id_mnvr.insert(n.id);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beacon(id: u32, x: f64, v_c: f64) -> VehicleBeacon {
        VehicleBeacon { id, p: Vec2::new(x, 0.0), v: Vec2::ZERO, v_c, timestamp: 0.0 }
    }

    #[test]
    fn neighbour_filter() {
        let me = beacon(1, 0.0, 1.0);
        assert!(neighbors(1, me.p, &[me], 10.0).is_empty());
        let edge = beacon(2, 10.0, 1.0);
        assert_eq!(neighbors(1, me.p, &[me, edge], 10.0), vec![edge]);
        assert!(neighbors(1, me.p, &[beacon(3, 10.0 + 1e-9, 1.0)], 10.0).is_empty());
    }

    #[test]
    fn ranking_examples() {
        let set = rank(&beacon(1, 0.0, 2.0), &[beacon(2, 1.0, 1.0)]).unwrap();
        assert!(set.contains(2));
        let set = rank(&beacon(1, 0.0, 1.0), &[beacon(2, 1.0, 1.0)]).unwrap();
        assert!(set.contains(2));
        let set = rank(&beacon(2, 0.0, 1.0), &[beacon(1, 1.0, 1.0)]).unwrap();
        assert!(set.id_mnvr.is_empty());
    }

    #[test]
    fn duplicate_ids_rejected() {
        let r = rank(&beacon(1, 0.0, 1.0), &[beacon(2, 1.0, 1.0), beacon(2, 2.0, 1.0)]);
        assert_eq!(r, Err(CoordinationError::DuplicateId(2)));
        assert_eq!(rank(&beacon(1, 0.0, 1.0), &[beacon(1, 2.0, 1.0)]), Err(CoordinationError::DuplicateId(1)));
    }
}
