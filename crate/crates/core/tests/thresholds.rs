mod common;

use orbitrips::metric::EPS;
use orbitrips::thresholds::{
    ball_check, diameter_action_check, distance_check, distance_threshold, nerve_action_check, ScanOptions,
};
use orbitrips::{threshold_scan, ActionProperty, IsometricAction, QuotientSpace, Uniqueness};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{circle, random_case, random_scales, shift_quotient};

fn tuples(order: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0]];
    for _ in 1..len {
        out = out
            .into_iter()
            .flat_map(|t| (0..order).map(move |g| [t.clone(), vec![g]].concat()))
            .collect();
    }
    out
}

fn subsets(n: usize, max: usize) -> Vec<Vec<usize>> {
    (1u32..(1 << n))
        .map(|mask| (0..n).filter(|&i| mask & (1 << i) != 0).collect::<Vec<_>>())
        .filter(|s| s.len() <= max)
        .collect()
}

/// Direct reading of the diameter condition over every subset.
fn diameter_oracle(q: &QuotientSpace, r: f64, k_max: usize) -> bool {
    let (qm, base, g) = (q.metric(), q.base(), q.action());
    let diam = |m: &orbitrips::FiniteMetricSpace, pts: &[usize]| {
        pts.iter()
            .flat_map(|&a| pts.iter().map(move |&b| m.d(a, b)))
            .fold(0.0, f64::max)
    };
    let mut configs: Vec<Vec<usize>> = subsets(qm.len(), k_max + 1);
    configs.extend((0..qm.len()).map(|a| vec![a, a]));
    configs.into_iter().all(|orbits| {
        let qd = if orbits.len() == 2 && orbits[0] == orbits[1] {
            0.0
        } else {
            diam(qm, &orbits)
        };
        if qd >= r - EPS {
            return true;
        }
        let points: Vec<usize> = orbits.iter().map(|&a| q.reps()[a]).collect();
        let achieving = tuples(g.order(), points.len())
            .into_iter()
            .filter(|t| {
                let lifted: Vec<usize> = points.iter().zip(t).map(|(&p, &h)| g.apply(h, p)).collect();
                diam(base, &lifted) <= qd + EPS
            })
            .count();
        achieving == 1
    })
}

/// Direct reading of the nerve condition over every subset.
fn nerve_oracle(q: &QuotientSpace, r: f64, k_max: usize) -> bool {
    let (qm, base, g) = (q.metric(), q.base(), q.action());
    let lt = |d: f64| d < r - EPS;
    let mut configs: Vec<Vec<usize>> = subsets(qm.len(), k_max + 1);
    configs.extend((0..qm.len()).map(|a| vec![a, a]));
    configs.into_iter().all(|orbits| {
        if !(0..qm.len()).any(|w| orbits.iter().all(|&a| lt(qm.d(a, w)))) {
            return true;
        }
        let points: Vec<usize> = orbits.iter().map(|&a| q.reps()[a]).collect();
        let lifts = tuples(g.order(), points.len())
            .into_iter()
            .filter(|t| {
                let lifted: Vec<usize> = points.iter().zip(t).map(|(&p, &h)| g.apply(h, p)).collect();
                (0..base.len()).any(|y| lifted.iter().all(|&p| lt(base.d(p, y))))
            })
            .count();
        lifts == 1
    })
}

fn small_case(seed: u64) -> common::RandomCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_case(&mut rng, 12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn diameter_check_matches_direct_reading(seed in any::<u64>(), k_max in 1usize..3) {
        let case = small_case(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        for r in random_scales(&mut rng, case.quotient.metric(), 3) {
            let fast = diameter_action_check(&case.quotient, r, k_max, Uniqueness::Tuple).unwrap();
            prop_assert_eq!(fast.passed(), diameter_oracle(&case.quotient, r, k_max), "r = {}", r);
            if let Some(w) = fast.witness() {
                prop_assert!(w.replay(&case.quotient, r));
            }
        }
    }

    #[test]
    fn nerve_check_matches_direct_reading(seed in any::<u64>(), k_max in 1usize..3) {
        let case = small_case(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        for r in random_scales(&mut rng, case.quotient.metric(), 3) {
            let fast = nerve_action_check(&case.quotient, r, k_max, Uniqueness::Tuple).unwrap();
            prop_assert_eq!(fast.passed(), nerve_oracle(&case.quotient, r, k_max), "r = {}", r);
            if let Some(w) = fast.witness() {
                prop_assert!(w.replay(&case.quotient, r));
            }
        }
    }

    #[test]
    fn distance_implications(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let case = random_case(&mut rng, 25);
        let q = &case.quotient;
        for r in random_scales(&mut rng, q.base(), 4) {
            if distance_check(q.base(), q.action(), 2.0 * r).passed() {
                prop_assert!(ball_check(q.base(), q.action(), r).passed());
                prop_assert!(diameter_action_check(q, r, 1, Uniqueness::Tuple).unwrap().passed());
            }
        }
    }

    #[test]
    fn scans_are_monotone_and_witnesses_replay(seed in any::<u64>()) {
        let case = small_case(seed);
        let q = &case.quotient;
        let options = ScanOptions { exhaustive: true, ..Default::default() };
        for kind in [ActionProperty::Diameter, ActionProperty::Nerve, ActionProperty::Distance, ActionProperty::Ball] {
            let report = threshold_scan(q, kind, 2, options).unwrap();
            if let (Some(p), Some(f)) = (report.passes_at, report.fails_at) {
                prop_assert!(p < f);
            }
            if let (Some(w), Some(f)) = (&report.witness, report.fails_at) {
                prop_assert!(w.replay(q, f), "{:?} witness does not replay", kind);
            }
        }
    }
}

#[test]
fn trivial_group_is_vacuous_everywhere() {
    let c = circle(10, 1.0);
    let q = orbitrips::build_quotient(&c, &IsometricAction::trivial(10)).unwrap();
    for r in c.critical_values() {
        for k in 1..4 {
            assert!(diameter_action_check(&q, r, k, Uniqueness::Tuple).unwrap().passed());
            assert!(nerve_action_check(&q, r, k, Uniqueness::Tuple).unwrap().passed());
        }
    }
    for kind in [
        ActionProperty::Distance,
        ActionProperty::Ball,
        ActionProperty::Diameter,
        ActionProperty::Nerve,
    ] {
        let report = threshold_scan(&q, kind, 2, ScanOptions::default()).unwrap();
        assert!(report.vacuous);
        assert_eq!(report.passes_at, Some(f64::INFINITY));
    }
}

#[test]
fn circle_diameter_thresholds_sit_below_distance_thresholds() {
    let cases = [
        shift_quotient(&circle(12, 1.0), 6),
        shift_quotient(&circle(24, 1.0), 12),
        shift_quotient(&circle(30, 3.0), 10),
        shift_quotient(&circle(36, 1.0), 12),
    ];
    for q in &cases {
        let diameter = threshold_scan(q, ActionProperty::Diameter, 2, ScanOptions::default()).unwrap();
        let distance = distance_threshold(q.base(), q.action());
        assert!(diameter.passes_at.unwrap() <= distance.passes_at.unwrap() + EPS);
    }
}

#[test]
fn z3_circle_distance_threshold_is_one() {
    // circumference 3, unit rotation, 30 points
    let q = shift_quotient(&circle(30, 3.0), 10);
    let report = distance_threshold(q.base(), q.action());
    assert!((report.passes_at.unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn scan_report_carries_grid_resolution() {
    let q = shift_quotient(&circle(48, 1.0), 24);
    let report = threshold_scan(&q, ActionProperty::Nerve, 1, ScanOptions::default()).unwrap();
    assert!((report.resolution.unwrap() - 1.0 / 48.0).abs() < 1e-12);
}

#[test]
fn swapping_two_points_is_a_diameter_action_at_every_scale() {
    let s = orbitrips::FiniteMetricSpace::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let g = orbitrips::close_group(2, &[vec![1, 0]], 2).unwrap();
    let q = orbitrips::build_quotient(&s, &g).unwrap();
    assert!((distance_threshold(&s, &g).passes_at.unwrap() - 1.0).abs() < 1e-12);
    for r in [0.5, 1.0, 2.0, 10.0] {
        assert!(diameter_action_check(&q, r, 2, Uniqueness::Tuple).unwrap().passed());
    }
}
