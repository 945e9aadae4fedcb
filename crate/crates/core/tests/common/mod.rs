#![allow(dead_code)]

use orbitrips::action::{build_quotient, close_group, cyclic_shift};
use orbitrips::metric::cyclic_planar_orbits;
use orbitrips::{FiniteMetricSpace, QuotientSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random planar cloud glued from `order` rotated copies of `k` points,
/// with the rotation by `2π / order` as a cyclic isometric action.
pub struct RandomCase {
    pub order: usize,
    pub space: FiniteMetricSpace,
    pub quotient: QuotientSpace,
}

pub fn random_case(rng: &mut ChaCha8Rng, max_points: usize) -> RandomCase {
    let order = rng.random_range(1..=6usize);
    let k = rng.random_range(1..=(max_points / order).max(1));
    let k = if order * k < 3 { 3 } else { k };
    let points: Vec<[f64; 2]> = (0..k)
        .map(|_| {
            let radius = rng.random_range(0.2..1.0);
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            [radius * angle.cos(), radius * angle.sin()]
        })
        .collect();
    let space = cyclic_planar_orbits(&points, order);
    let action = close_group(space.len(), &[cyclic_shift(space.len(), k % space.len())], 10).unwrap();
    let quotient = build_quotient(&space, &action).unwrap();
    RandomCase { order, space, quotient }
}

pub fn random_cases(seed: u64, count: usize, max_points: usize) -> Vec<RandomCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_case(&mut rng, max_points)).collect()
}

/// `count` critical values drawn with replacement.
pub fn random_scales(rng: &mut ChaCha8Rng, space: &FiniteMetricSpace, count: usize) -> Vec<f64> {
    let values = space.critical_values();
    if values.is_empty() {
        return Vec::new();
    }
    (0..count).map(|_| values[rng.random_range(0..values.len())]).collect()
}

pub fn circle(n: usize, circumference: f64) -> FiniteMetricSpace {
    orbitrips::generate_space(&orbitrips::ShapeSpec::EvenlySpacedCircle { n, circumference }).unwrap()
}

pub fn shift_quotient(space: &FiniteMetricSpace, shift: usize) -> QuotientSpace {
    let action = close_group(space.len(), &[cyclic_shift(space.len(), shift)], 100).unwrap();
    build_quotient(space, &action).unwrap()
}
