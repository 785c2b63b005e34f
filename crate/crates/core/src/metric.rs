//! Orbit comparison: score every cyclic alignment of a test orbit against a
//! reference orbit and read off the pose difference in generator steps.
//!
//! For a test orbit that is the reference advanced by `m` steps
//! (`test[k] = p^m·ref[k]`), the forward profile is
//! `M(δ) = K·c²·cos((m − δ)·Δθ)`, peaking at `δ = m`, so the estimated step
//! count can be added directly to the reference pose.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::error::{Error, Result};
use crate::group::GroupParams;
use crate::model::Orbit;

const DEGENERATE_NORM: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Test orbit shifted back by δ before comparison.
    Forward,
    /// Test orbit shifted ahead by δ; the inverse rotation.
    Backward,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftProfile {
    /// `scores[δ]` for `δ` in `0..K`.
    pub scores: Vec<f64>,
    pub direction: Direction,
}

impl ShiftProfile {
    /// Index of the highest score; the smallest index wins ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &s) in self.scores.iter().enumerate() {
            if s > self.scores[best] {
                best = i;
            }
        }
        best
    }

    /// Peak score minus the best score at any other shift.
    pub fn margin(&self) -> f64 {
        let best = self.argmax();
        let runner_up = self
            .scores
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != best)
            .map(|(_, &s)| s)
            .fold(f64::NEG_INFINITY, f64::max);
        self.scores[best] - runner_up
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseDifference {
    pub delta_steps: usize,
    /// `delta_steps · Δθ`, radians.
    pub delta_angle: f64,
    pub peak_score: f64,
    /// Peak minus runner-up score; a confidence signal.
    pub margin: f64,
}

impl PoseDifference {
    fn from_profile(profile: &ShiftProfile, steps: usize, group: GroupParams) -> Self {
        Self {
            delta_steps: steps,
            delta_angle: steps as f64 * group.delta_theta(),
            peak_score: profile.scores[steps],
            margin: profile.margin(),
        }
    }
}

fn check_pair(reference: &Orbit, test: &Orbit) -> Result<GroupParams> {
    if reference.len() != test.len() {
        return Err(Error::DimensionMismatch {
            context: "orbit length",
            expected: reference.len(),
            actual: test.len(),
        });
    }
    GroupParams::new(reference.len())
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// `Σ_k ⟨ref[k], test[k − δ]⟩`, indices mod K.
///
/// For an exact orbit, `test[k − δ] = p_δ⁻¹·test[k]`, so the shift stands in
/// for rotating every test element.
pub fn directed_score(reference: &Orbit, test: &Orbit, delta: usize) -> Result<f64> {
    let group = check_pair(reference, test)?;
    if delta >= group.order() {
        return Err(Error::InvalidParam(format!(
            "shift {delta} outside 0..{}",
            group.order()
        )));
    }
    Ok(score(reference, test, -(delta as i64)))
}

fn score(reference: &Orbit, test: &Orbit, offset: i64) -> f64 {
    let k = reference.len() as i64;
    (0..k)
        .map(|i| dot(reference.get(i as usize), test.get((i + offset).rem_euclid(k) as usize)))
        .sum()
}

/// Scores for all K shifts in the given direction.
pub fn shift_profile(reference: &Orbit, test: &Orbit, direction: Direction) -> Result<ShiftProfile> {
    let group = check_pair(reference, test)?;
    let sign = match direction {
        Direction::Forward => -1,
        Direction::Backward => 1,
    };
    let scores = (0..group.order() as i64)
        .map(|d| score(reference, test, sign * d))
        .collect();
    Ok(ShiftProfile { scores, direction })
}

fn check_degenerate(orbit: &Orbit) -> Result<()> {
    let norm = orbit.rms_norm();
    if norm < DEGENERATE_NORM {
        return Err(Error::DegenerateOrbit { norm });
    }
    Ok(())
}

/// Steps the test pose lies ahead of the reference pose.
pub fn estimate_shift_directed(reference: &Orbit, test: &Orbit) -> Result<PoseDifference> {
    let group = check_pair(reference, test)?;
    check_degenerate(reference)?;
    check_degenerate(test)?;
    let profile = shift_profile(reference, test, Direction::Forward)?;
    Ok(PoseDifference::from_profile(&profile, profile.argmax(), group))
}

/// `min{argmax M(δ), argmax M(−δ)}`, taken literally.
///
/// The minimum over the two directions loses the sign of the difference:
/// a forward shift of 30 steps (K = 36) is reported as 6.
pub fn estimate_shift_symmetric(reference: &Orbit, test: &Orbit) -> Result<PoseDifference> {
    let group = check_pair(reference, test)?;
    check_degenerate(reference)?;
    check_degenerate(test)?;
    let forward = shift_profile(reference, test, Direction::Forward)?;
    let backward = shift_profile(reference, test, Direction::Backward)?;
    let (f, b) = (forward.argmax(), backward.argmax());
    Ok(if f <= b {
        PoseDifference::from_profile(&forward, f, group)
    } else {
        PoseDifference::from_profile(&backward, b, group)
    })
}

/// `(θ_ref + Δδ·Δθ) mod 2π`
pub fn gauge_absolute_pose(theta_ref: f64, diff: &PoseDifference, group: GroupParams) -> f64 {
    (theta_ref + diff.delta_steps as f64 * group.delta_theta()).rem_euclid(TAU)
}

/// Orbit as CSV: header `k,x,y`, then one row per element.
pub fn orbit_to_csv(orbit: &Orbit) -> String {
    let mut out = String::from("k,x,y\n");
    for (k, p) in orbit.points().iter().enumerate() {
        writeln!(out, "{k},{:e},{:e}", p[0], p[1]).expect("writing to a String");
    }
    out
}

pub fn orbit_from_csv<R: Read>(reader: R) -> Result<Orbit> {
    let bad = |detail: String| Error::format("orbit csv", detail);
    let mut lines = BufReader::new(reader).lines();
    let header = lines
        .next()
        .ok_or_else(|| bad("empty file".into()))?
        .map_err(|e| bad(e.to_string()))?;
    if header.trim() != "k,x,y" {
        return Err(bad(format!("expected header `k,x,y`, got `{}`", header.trim())));
    }
    let mut points = Vec::new();
    for (row, line) in lines.enumerate() {
        let line = line.map_err(|e| bad(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 3 {
            return Err(bad(format!("row {row}: expected 3 fields")));
        }
        let k: usize = fields[0]
            .parse()
            .map_err(|_| bad(format!("row {row}: bad index `{}`", fields[0])))?;
        if k != points.len() {
            return Err(bad(format!("row {row}: index {k} out of order")));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| bad(format!("row {row}: bad number `{s}`")))
        };
        points.push([parse(fields[1])?, parse(fields[2])?]);
    }
    Orbit::from_points(points)
}

pub fn read_orbit_csv(path: impl AsRef<Path>) -> Result<Orbit> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    orbit_from_csv(file)
}

pub fn write_orbit_csv(orbit: &Orbit, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, orbit_to_csv(orbit)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{mat2_apply, LatentGenerator};
    use crate::model::generate_orbit;
    use proptest::prelude::*;

    fn ideal(m: i64) -> Orbit {
        let g = GroupParams::default();
        let p = LatentGenerator::new(g);
        generate_orbit(p.apply_power(m, [0.8, 0.0]), g)
    }

    /// Score by explicitly rotating each test element with `p_δ⁻¹`.
    fn direct_score(reference: &Orbit, test: &Orbit, delta: i64) -> f64 {
        let p = LatentGenerator::new(GroupParams::new(reference.len()).unwrap());
        let inv = p.power(-delta);
        (0..reference.len())
            .map(|k| dot(reference.get(k), mat2_apply(inv, test.get(k))))
            .sum()
    }

    #[test]
    fn self_score_examples() {
        let a = ideal(0);
        let brute: f64 = a.points().iter().map(|p| dot(*p, *p)).sum();
        assert!((directed_score(&a, &a, 0).unwrap() - 23.04).abs() < 1e-9);
        assert!((brute - 23.04).abs() < 1e-9);
        assert!((directed_score(&a, &a, 18).unwrap() + 23.04).abs() < 1e-9);
        assert!(directed_score(&a, &a, 36).is_err());
    }

    #[test]
    fn profile_is_sinusoid_over_all_shift_pairs() {
        let reference = ideal(0);
        for m in 0..36 {
            let test = ideal(m);
            for delta in 0..36 {
                let brute: f64 = (0..36)
                    .map(|k| dot(reference.get(k), test.get((k + 36 - delta) % 36)))
                    .sum();
                let closed = 36.0 * 0.64 * ((m - delta as i64) as f64 * 10f64.to_radians()).cos();
                let got = directed_score(&reference, &test, delta).unwrap();
                assert!((got - closed).abs() < 1e-9);
                assert!((brute - closed).abs() < 1e-9);
            }
            assert_eq!(estimate_shift_directed(&reference, &test).unwrap().delta_steps, m as usize);
        }
    }

    #[test]
    fn directed_examples() {
        let a = ideal(3);
        let same = estimate_shift_directed(&a, &a).unwrap();
        assert_eq!(same.delta_steps, 0);
        assert!(same.margin > 0.0);
        let seven = estimate_shift_directed(&a, &a.advanced(7)).unwrap();
        assert_eq!(seven.delta_steps, 7);
        assert!((seven.delta_angle - 70f64.to_radians()).abs() < 1e-12);
        let profile = shift_profile(&a, &a, Direction::Forward).unwrap();
        assert_eq!(profile.scores.len(), 36);
        assert_eq!(profile.argmax(), 0);
    }

    #[test]
    fn symmetric_examples() {
        let a = ideal(0);
        assert_eq!(estimate_shift_symmetric(&a, &a).unwrap().delta_steps, 0);
        let b = a.advanced(7);
        assert_eq!(shift_profile(&a, &b, Direction::Forward).unwrap().argmax(), 7);
        assert_eq!(shift_profile(&a, &b, Direction::Backward).unwrap().argmax(), 29);
        assert_eq!(estimate_shift_symmetric(&a, &b).unwrap().delta_steps, 7);
        let c = a.advanced(30);
        assert_eq!(shift_profile(&a, &c, Direction::Forward).unwrap().argmax(), 30);
        assert_eq!(shift_profile(&a, &c, Direction::Backward).unwrap().argmax(), 6);
        assert_eq!(estimate_shift_symmetric(&a, &c).unwrap().delta_steps, 6);
    }

    #[test]
    fn asymmetry_and_shift_equivariance() {
        let a = ideal(5);
        for m in 0..36 {
            let b = a.advanced(m);
            assert_eq!(estimate_shift_directed(&a, &b).unwrap().delta_steps, m as usize);
            let back = estimate_shift_directed(&b, &a).unwrap().delta_steps;
            assert_eq!(back, (36 - m as usize) % 36);
            let next = estimate_shift_directed(&a, &b.advanced(1)).unwrap().delta_steps;
            assert_eq!(next, (m as usize + 1) % 36);
        }
    }

    #[test]
    fn degenerate_and_mismatched_orbits_rejected() {
        let zero = generate_orbit([0.0, 0.0], GroupParams::default());
        let a = ideal(0);
        assert!(matches!(
            estimate_shift_directed(&a, &zero),
            Err(Error::DegenerateOrbit { .. })
        ));
        assert!(estimate_shift_symmetric(&zero, &a).is_err());
        let short = generate_orbit([0.8, 0.0], GroupParams::new(12).unwrap());
        assert!(matches!(
            estimate_shift_directed(&a, &short),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(directed_score(&a, &short, 0).is_err());
    }

    #[test]
    fn ties_go_to_smallest_shift() {
        let profile = ShiftProfile {
            scores: vec![1.0, 3.0, 3.0, 2.0],
            direction: Direction::Forward,
        };
        assert_eq!(profile.argmax(), 1);
        assert_eq!(profile.margin(), 0.0);
    }

    #[test]
    fn gauge_examples() {
        let g = GroupParams::default();
        let diff = |steps: usize| PoseDifference {
            delta_steps: steps,
            delta_angle: steps as f64 * g.delta_theta(),
            peak_score: 0.0,
            margin: 0.0,
        };
        let deg = |r: f64| r.to_degrees();
        assert!((deg(gauge_absolute_pose(30f64.to_radians(), &diff(4), g)) - 70.0).abs() < 1e-9);
        assert!((deg(gauge_absolute_pose(350f64.to_radians(), &diff(3), g)) - 20.0).abs() < 1e-9);
        let t = 1.234;
        assert_eq!(gauge_absolute_pose(t, &diff(0), g), t);
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let a = ideal(4);
        let text = orbit_to_csv(&a);
        assert_eq!(text.lines().count(), 37);
        let back = orbit_from_csv(text.as_bytes()).unwrap();
        assert_eq!(back, a);
        assert!(orbit_from_csv("x,y\n0,1,2\n".as_bytes()).is_err());
        assert!(orbit_from_csv("k,x,y\n1,1,2\n".as_bytes()).is_err());
        assert!(orbit_from_csv("k,x,y\n0,1\n".as_bytes()).is_err());
        assert!(orbit_from_csv("k,x,y\n0,1,nan\n1,0,0\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn forward_backward_duality_and_rotation_invariance(
            pts in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 36),
            pts2 in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 36),
            rot in 0i64..36,
        ) {
            let a = Orbit::from_points(pts.iter().map(|&(x, y)| [x, y]).collect()).unwrap();
            let b = Orbit::from_points(pts2.iter().map(|&(x, y)| [x, y]).collect()).unwrap();
            let fwd = shift_profile(&a, &b, Direction::Forward).unwrap();
            let bwd = shift_profile(&b, &a, Direction::Backward).unwrap();
            for (x, y) in fwd.scores.iter().zip(&bwd.scores) {
                prop_assert!((x - y).abs() < 1e-12);
            }

            let p = LatentGenerator::new(GroupParams::default());
            let turn = |o: &Orbit| Orbit::from_points(
                o.points().iter().map(|&v| p.apply_power(rot, v)).collect()).unwrap();
            let turned = shift_profile(&turn(&a), &turn(&b), Direction::Forward).unwrap();
            for (x, y) in fwd.scores.iter().zip(&turned.scores) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }

        #[test]
        fn cyclic_index_equals_explicit_rotation(x in -1.0f64..1.0, y in -1.0f64..1.0,
                                                 u in -1.0f64..1.0, v in -1.0f64..1.0) {
            let g = GroupParams::default();
            let a = generate_orbit([x, y], g);
            let b = generate_orbit([u, v], g);
            for delta in 0..36 {
                let fast = directed_score(&a, &b, delta).unwrap();
                prop_assert!((fast - direct_score(&a, &b, delta as i64)).abs() < 1e-9);
            }
        }
    }
}
