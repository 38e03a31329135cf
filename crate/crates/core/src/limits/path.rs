//! Extremal paths t ↦ max(initial, sup_{t_k ≤ t}(drift·t_k + j_k), floor(t))
//! stored as their record values, and their generalized inverses.

use serde::{Deserialize, Serialize};

use super::measure::{PointMeasure, Window};

/// The deterministic line slope·t + intercept.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Floor {
    pub slope: f64,
    pub intercept: f64,
}

impl Floor {
    pub fn at(&self, t: f64) -> f64 {
        self.slope * t + self.intercept
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremalPath {
    pub window: Window,
    /// Value at t_lo before any atom of the window.
    pub initial_level: f64,
    /// (time, new level) at each record, both strictly increasing.
    pub records: Vec<(f64, f64)>,
    pub floor: Option<Floor>,
}

impl ExtremalPath {
    /// Path value at t; t below the window is clamped to t_lo.
    pub fn value(&self, t: f64) -> f64 {
        let idx = self.records.partition_point(|r| r.0 <= t);
        let base = if idx == 0 { self.initial_level } else { self.records[idx - 1].1 };
        match self.floor {
            Some(f) => base.max(f.at(t.max(self.window.t_lo))),
            None => base,
        }
    }

    pub fn jump_times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.0).collect()
    }
}

/// ℱ applied to the atoms: records of drift·t_k + j_k above the initial level.
/// Atoms at or below the floor at their own time never become visible and
/// are dropped.
pub fn build_extremal_path(points: &PointMeasure, drift_slope: f64, initial_level: f64, floor: Option<Floor>) -> ExtremalPath {
    build_from_atoms(points.window, &points.atoms, drift_slope, initial_level, floor)
}

pub fn build_from_atoms(
    window: Window,
    atoms: &[(f64, f64)],
    drift_slope: f64,
    initial_level: f64,
    floor: Option<Floor>,
) -> ExtremalPath {
    let mut level = initial_level;
    let mut records: Vec<(f64, f64)> = Vec::new();
    for &(s, j) in atoms {
        let x = drift_slope * s + j;
        if x <= level || floor.is_some_and(|f| x <= f.at(s)) {
            continue;
        }
        level = x;
        match records.last_mut() {
            // equal times keep the larger value
            Some(last) if last.0 == s => last.1 = x,
            _ => records.push((s, x)),
        }
    }
    ExtremalPath { window, initial_level, records, floor }
}

/// Where a level is first exceeded.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "time", rename_all = "snake_case")]
pub enum Crossing {
    Inside(f64),
    /// The path already exceeds the level at t_lo; the inverse restricted to
    /// the window is t_lo, the true crossing may be earlier.
    LeftCensored(f64),
    /// No crossing up to t_hi.
    RightCensored(f64),
}

impl Crossing {
    /// The crossing time, or the window edge for censored crossings.
    pub fn time(&self) -> f64 {
        match *self {
            Crossing::Inside(t) | Crossing::LeftCensored(t) | Crossing::RightCensored(t) => t,
        }
    }

    pub fn is_censored(&self) -> bool {
        !matches!(self, Crossing::Inside(_))
    }
}

/// inf{t : path(t) > y} for each level.
pub fn generalized_inverse(path: &ExtremalPath, levels: &[f64]) -> Vec<Crossing> {
    levels.iter().map(|&y| crossing(path, y)).collect()
}

fn crossing(path: &ExtremalPath, y: f64) -> Crossing {
    let Window { t_lo, t_hi } = path.window;
    if path.value(t_lo) > y {
        return Crossing::LeftCensored(t_lo);
    }
    // record levels increase, so the first record above y is found by bisection
    let idx = path.records.partition_point(|r| r.1 <= y);
    let mut best = path.records.get(idx).map_or(f64::INFINITY, |r| r.0);
    if let Some(f) = path.floor {
        if f.slope > 0.0 {
            best = best.min((y - f.intercept) / f.slope);
        }
    }
    if best <= t_hi {
        Crossing::Inside(best.max(t_lo))
    } else {
        Crossing::RightCensored(t_hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn window(a: f64, b: f64) -> Window {
        Window::new(a, b).unwrap()
    }

    #[test]
    fn constant_without_atoms() {
        let p = build_from_atoms(window(0.0, 5.0), &[], 0.0, 2.0, None);
        assert_eq!(p.value(0.0), 2.0);
        assert_eq!(p.value(4.0), 2.0);
        assert_eq!(generalized_inverse(&p, &[1.0])[0], Crossing::LeftCensored(0.0));
        assert_eq!(generalized_inverse(&p, &[1.0])[0].time(), 0.0);
        assert_eq!(generalized_inverse(&p, &[2.0])[0], Crossing::RightCensored(5.0));
    }

    #[test]
    fn later_smaller_atom_is_not_a_record() {
        let p = build_from_atoms(window(0.0, 3.0), &[(1.0, 5.0), (2.0, 3.0)], 0.0, f64::NEG_INFINITY, None);
        assert_eq!(p.records, vec![(1.0, 5.0)]);
        assert_eq!(p.value(0.5), f64::NEG_INFINITY);
        assert_eq!(p.value(1.0), 5.0);
        assert_eq!(p.value(2.5), 5.0);
    }

    #[test]
    fn drift_and_floor() {
        let floor = Floor { slope: 1.0, intercept: 1.0 };
        let p = build_from_atoms(window(-1.0, 3.0), &[(-1.0, 3.0)], 1.0, f64::NEG_INFINITY, Some(floor));
        for t in [-1.0, -0.5, 0.0, 0.999, 1.0, 1.5, 3.0] {
            assert_eq!(p.value(t), (t + 1.0f64).max(2.0), "t = {t}");
        }
        // crossing of 2.5 is through the floor at t = 1.5
        assert_eq!(generalized_inverse(&p, &[2.5])[0], Crossing::Inside(1.5));
    }

    #[test]
    fn equal_times_keep_max() {
        let p = build_from_atoms(window(0.0, 2.0), &[(1.0, 4.0), (1.0, 3.0)], 0.0, 0.0, None);
        assert_eq!(p.records, vec![(1.0, 4.0)]);
        let q = build_from_atoms(window(0.0, 2.0), &[(1.0, 3.0), (1.0, 4.0)], 0.0, 0.0, None);
        assert_eq!(q.records, vec![(1.0, 4.0)]);
    }

    fn arb_path() -> impl Strategy<Value = ExtremalPath> {
        (
            prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 0..30),
            -1.0f64..3.0,
            0.0f64..1.0,
            prop::bool::ANY,
        )
            .prop_map(|(mut atoms, init, drift, with_floor)| {
                atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
                let floor = with_floor.then_some(Floor { slope: drift.max(0.1), intercept: 0.5 });
                build_from_atoms(window(0.0, 10.0), &atoms, drift, init, floor)
            })
    }

    proptest! {
        #[test]
        fn paths_are_nondecreasing(p in arb_path(), a in 0.0f64..10.0, b in 0.0f64..10.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(p.value(lo) <= p.value(hi));
        }

        #[test]
        fn galois_property(p in arb_path(), y in -1.0f64..20.0, x in 0.0f64..10.0) {
            match generalized_inverse(&p, &[y])[0] {
                Crossing::Inside(c) => {
                    if x > c { prop_assert!(p.value(x) > y); }
                    if x < c { prop_assert!(p.value(x) <= y); }
                }
                Crossing::LeftCensored(_) => prop_assert!(p.value(x) > y),
                Crossing::RightCensored(_) => prop_assert!(p.value(x) <= y),
            }
        }

        #[test]
        fn inverse_is_nondecreasing_in_level(p in arb_path(), a in -1.0f64..20.0, b in -1.0f64..20.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let c = generalized_inverse(&p, &[lo, hi]);
            prop_assert!(c[0].time() <= c[1].time());
        }
    }
}
