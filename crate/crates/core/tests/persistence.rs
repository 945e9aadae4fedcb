use orbitrips::complex::vr_filtration;
use orbitrips::persistence::{betti_of_complex, bottleneck_distance};
use orbitrips::{betti_at, homology_oracle, reduce, vr_complex, Budget, Convention, FiniteMetricSpace};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stability tolerance on bar endpoints.
const DELTA: f64 = 1e-3;

fn planar(points: &[(f64, f64)]) -> FiniteMetricSpace {
    FiniteMetricSpace::from_fn(points.len(), |i, j| {
        let (a, b) = (points[i], points[j]);
        (a.0 - b.0).hypot(a.1 - b.1).max(1e-3)
    })
}

fn cloud(max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3..=max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sparse_ranks_match_dense_oracle(points in cloud(16), t in 0.0f64..1.0) {
        let s = planar(&points);
        let complex = vr_complex(&s, t * s.diameter(), Convention::Leq, 3, Budget::default()).unwrap();
        prop_assert_eq!(betti_of_complex(&complex).values, homology_oracle(&complex).unwrap().values);
    }

    #[test]
    fn barcode_agrees_with_fixed_scale_betti(points in cloud(14)) {
        let s = planar(&points);
        let barcode = reduce(&vr_filtration(&s, 3, Budget::default()).unwrap());
        prop_assert_eq!(barcode.intervals[0].iter().filter(|b| b.is_infinite()).count(), 1);
        for r in s.critical_values() {
            let b = betti_at(&s, r, Convention::Leq, 3, Budget::default()).unwrap();
            prop_assert_eq!(barcode.betti_at(r), b.values.clone(), "r = {}", r);
        }
        for bars in &barcode.intervals {
            prop_assert!(bars.iter().all(|b| b.birth < b.death));
        }
    }

    #[test]
    fn euler_characteristic_when_cap_exceeds_top(points in cloud(10), t in 0.0f64..0.4) {
        let s = planar(&points);
        let complex = vr_complex(&s, t * s.diameter(), Convention::Leq, 6, Budget::default()).unwrap();
        let b = betti_of_complex(&complex);
        if b.euler_checked {
            let alternating: i64 = b.values.iter().enumerate().map(|(k, &v)| if k % 2 == 0 { v as i64 } else { -(v as i64) }).sum();
            prop_assert_eq!(alternating, complex.euler_characteristic());
        }
    }
}

#[test]
fn perturbations_move_bars_by_at_most_delta() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x57ab);
    for _ in 0..10 {
        let points: Vec<(f64, f64)> = (0..30)
            .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let s = planar(&points);
        let noisy = FiniteMetricSpace::from_fn(30, |i, j| s.d(i, j) + rng.random_range(-DELTA..DELTA));
        let a = reduce(&vr_filtration(&s, 2, Budget::default()).unwrap());
        let b = reduce(&vr_filtration(&noisy, 2, Budget::default()).unwrap());
        for k in 0..2 {
            let d = bottleneck_distance(&a.intervals[k], &b.intervals[k]);
            assert!(d <= DELTA + 1e-12, "dimension {k}: bottleneck {d}");
        }
    }
}

#[test]
fn filtration_hash_is_stable() {
    let s = planar(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]);
    let a = reduce(&vr_filtration(&s, 2, Budget::default()).unwrap());
    let b = reduce(&vr_filtration(&s, 2, Budget::default()).unwrap());
    assert_eq!(a.filtration_hash, b.filtration_hash);
    assert_eq!(a.filtration_hash.len(), 64);
}
