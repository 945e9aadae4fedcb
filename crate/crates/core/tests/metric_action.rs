mod common;

use orbitrips::action::{antipodal_pairs, cyclic_shift, twelve_circles_generators};
use orbitrips::metric::{cyclic_planar_orbits, EPS};
use orbitrips::{build_quotient, close_group, generate_space, verify_isometric, FiniteMetricSpace, ShapeSpec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn planar(points: &[(f64, f64)]) -> FiniteMetricSpace {
    FiniteMetricSpace::from_fn(points.len(), |i, j| {
        let (a, b) = (points[i], points[j]);
        (a.0 - b.0).hypot(a.1 - b.1)
    })
}

fn cloud() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3..14)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn critical_values_are_increasing_and_bounded(points in cloud()) {
        let s = planar(&points);
        let cv = s.critical_values();
        prop_assert!(cv.len() <= s.len() * (s.len() - 1) / 2);
        prop_assert!(cv.first().is_none_or(|&c| c > 0.0));
        prop_assert!(cv.windows(2).all(|w| w[1] > w[0] + EPS));
        for i in 0..s.len() {
            for j in 0..i {
                prop_assert!(cv.iter().any(|&c| (c - s.d(i, j)).abs() <= EPS));
            }
        }
    }

    #[test]
    fn sphere_samples_are_reproducible_and_bounded(seed in any::<u64>(), m in 3usize..30, paired in any::<bool>()) {
        let spec = ShapeSpec::GeodesicSphere { dim: 2, m, antipodal_paired: paired, seed };
        let a = generate_space(&spec).unwrap();
        let b = generate_space(&spec).unwrap();
        prop_assert_eq!(a.matrix(), b.matrix());
        prop_assert!(a.matrix().iter().all(|&d| (0.0..=0.5).contains(&d)));
        prop_assert!(a.validate_metric().ok);
        if paired {
            let g = close_group(a.len(), &[antipodal_pairs(m)], 10).unwrap();
            prop_assert!(verify_isometric(&a, &g).unwrap().is_none());
        }
    }

    #[test]
    fn quotient_metric_is_a_metric_below_the_base(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let case = common::random_case(&mut rng, 25);
        let q = &case.quotient;
        prop_assert!(q.validation().ok);
        let orbits = q.action().orbits();
        prop_assert_eq!(orbits.len(), q.orbit_count());
        let mut covered: Vec<usize> = orbits.iter().flatten().copied().collect();
        covered.sort_unstable();
        prop_assert_eq!(covered, (0..case.space.len()).collect::<Vec<_>>());
        for (a, orbit) in orbits.iter().enumerate() {
            prop_assert_eq!(q.reps()[a], orbit[0]);
            prop_assert!(orbit.iter().all(|&x| q.proj()[x] == a));
        }
        for x in 0..case.space.len() {
            for y in 0..case.space.len() {
                prop_assert!(q.metric().d(q.proj()[x], q.proj()[y]) <= case.space.d(x, y) + EPS);
            }
        }
    }

    #[test]
    fn validation_matches_a_naive_scan(points in cloud(), bumps in prop::collection::vec((0usize..14, 0usize..14, -1.0f64..1.0), 0..4), skew in any::<bool>()) {
        let base = planar(&points);
        let n = base.len();
        let mut full = base.matrix().to_vec();
        for &(i, j, delta) in &bumps {
            let (i, j) = (i % n, j % n);
            if i != j {
                full[i * n + j] = (full[i * n + j] + delta).abs();
                if !skew {
                    full[j * n + i] = full[i * n + j];
                }
            }
        }
        let s = FiniteMetricSpace::from_full(n, full).unwrap();
        let mut naive = 0;
        for i in 0..n {
            for k in (i + 1)..n {
                for j in (0..n).filter(|&j| j != i && j != k) {
                    if s.d(i, k) - (s.d(i, j) + s.d(j, k)) > EPS {
                        naive += 1;
                    }
                }
            }
        }
        let report = s.validate_metric();
        let triangles = report.violations.iter().filter(|v| matches!(v, orbitrips::metric::Violation::Triangle { .. })).count();
        if report.truncated {
            prop_assert!(triangles <= naive);
        } else {
            prop_assert_eq!(triangles, naive);
        }
        let asymmetric = (0..n).any(|i| (0..n).any(|j| s.d(i, j) != s.d(j, i)));
        prop_assert_eq!(report.ok, naive == 0 && !asymmetric);
    }

    #[test]
    fn rotated_clouds_are_exactly_invariant(seed in any::<u64>(), order in 1usize..7, k in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::Rng;
        let points: Vec<[f64; 2]> = (0..k).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
        let s = cyclic_planar_orbits(&points, order);
        let shift = cyclic_shift(s.len(), k);
        for i in 0..s.len() {
            for j in 0..s.len() {
                prop_assert_eq!(s.d(i, j), s.d(shift[i] as usize, shift[j] as usize));
            }
        }
    }
}

#[test]
fn trivial_quotient_is_the_base() {
    let c = common::circle(7, 1.0);
    let q = build_quotient(&c, &orbitrips::IsometricAction::trivial(7)).unwrap();
    assert_eq!(q.metric().matrix(), c.matrix());
    assert_eq!(q.reps(), &[0, 1, 2, 3, 4, 5, 6]);
}

#[test]
fn twelve_circles_quotient_matches_a_single_circle_orbit_count() {
    let m = 6;
    let s = generate_space(&ShapeSpec::TwelveCircles { m }).unwrap();
    let g = close_group(s.len(), &twelve_circles_generators(m), 100).unwrap();
    assert_eq!(g.order(), 12);
    let q = build_quotient(&s, &g).unwrap();
    assert_eq!(q.orbit_count(), m);
}

#[test]
fn closure_order_is_word_length_then_lexicographic() {
    let g = close_group(6, &[cyclic_shift(6, 1)], 10).unwrap();
    let expected: Vec<Vec<u32>> = (0..6).map(|s| cyclic_shift(6, s)).collect();
    assert_eq!(g.elements(), &expected[..]);
}
