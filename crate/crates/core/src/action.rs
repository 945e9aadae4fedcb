//! Finite groups acting on point indices, and the quotient metric they induce.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{FiniteMetricSpace, Provenance, ValidationReport, EPS};

/// Default cap on the number of group elements produced by [`close_group`].
pub const DEFAULT_GROUP_CAP: usize = 10_000;

/// A finite permutation group on `{0, …, n-1}`, closed under composition.
///
/// Element `0` is the identity. `mult[a * order + b]` is the index of
/// `a ∘ b` (apply `b` first), so `g·(h·x) = (gh)·x`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsometricAction {
    n: usize,
    elements: Vec<Vec<u32>>,
    mult: Vec<u32>,
    inverse: Vec<u32>,
    generator_indices: Vec<usize>,
}

impl IsometricAction {
    pub fn trivial(n: usize) -> Self {
        close_group(n, &[], DEFAULT_GROUP_CAP).expect("trivial group")
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Vec<u32>] {
        &self.elements
    }

    pub fn generator_indices(&self) -> &[usize] {
        &self.generator_indices
    }

    /// The generators as permutations (the action file payload).
    pub fn generators(&self) -> Vec<Vec<u32>> {
        self.generator_indices
            .iter()
            .map(|&g| self.elements[g].clone())
            .collect()
    }

    /// `g · x`.
    #[inline]
    pub fn apply(&self, g: usize, x: usize) -> usize {
        self.elements[g][x] as usize
    }

    #[inline]
    pub fn compose(&self, a: usize, b: usize) -> usize {
        self.mult[a * self.order() + b] as usize
    }

    #[inline]
    pub fn inverse(&self, g: usize) -> usize {
        self.inverse[g] as usize
    }

    /// Sorted orbit of `i`.
    pub fn orbit_of(&self, i: usize) -> Result<Vec<usize>> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, n: self.n });
        }
        let mut orbit: Vec<usize> = self.elements.iter().map(|g| g[i] as usize).collect();
        orbit.sort_unstable();
        orbit.dedup();
        Ok(orbit)
    }

    /// All orbits, ordered by their minimum element.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for i in 0..self.n {
            if seen[i] {
                continue;
            }
            let orbit = self.orbit_of(i).expect("in range");
            for &x in &orbit {
                seen[x] = true;
            }
            out.push(orbit);
        }
        out
    }

    /// Non-identity elements fixing `x`.
    pub fn stabilizer(&self, x: usize) -> Vec<usize> {
        (1..self.order()).filter(|&g| self.apply(g, x) == x).collect()
    }
}

fn is_permutation(p: &[u32], n: usize) -> bool {
    if p.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &v in p {
        let v = v as usize;
        if v >= n || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    true
}

fn compose_perm(a: &[u32], b: &[u32]) -> Vec<u32> {
    b.iter().map(|&x| a[x as usize]).collect()
}

/// Breadth-first closure of `generators` under composition.
///
/// Elements are ordered by word length, ties broken lexicographically on the
/// permutation vectors; the identity is element 0.
pub fn close_group(n: usize, generators: &[Vec<u32>], cap: usize) -> Result<IsometricAction> {
    for (index, g) in generators.iter().enumerate() {
        if !is_permutation(g, n) {
            return Err(Error::NotPermutation { index, n });
        }
    }
    let identity: Vec<u32> = (0..n as u32).collect();
    let mut index: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut elements = vec![identity.clone()];
    index.insert(identity, 0);
    let mut frontier = vec![0usize];
    while !frontier.is_empty() {
        let mut next: Vec<Vec<u32>> = Vec::new();
        for &e in &frontier {
            for g in generators {
                let candidate = compose_perm(g, &elements[e]);
                if !index.contains_key(&candidate) {
                    next.push(candidate);
                }
            }
        }
        next.sort();
        next.dedup();
        let mut new_frontier = Vec::with_capacity(next.len());
        for p in next {
            if elements.len() >= cap {
                return Err(Error::GroupTooLarge { cap });
            }
            index.insert(p.clone(), elements.len());
            new_frontier.push(elements.len());
            elements.push(p);
        }
        frontier = new_frontier;
    }
    let order = elements.len();
    let mut mult = vec![0u32; order * order];
    for a in 0..order {
        for b in 0..order {
            let c = compose_perm(&elements[a], &elements[b]);
            mult[a * order + b] = index[&c] as u32;
        }
    }
    let inverse: Vec<u32> = (0..order)
        .map(|a| (0..order).find(|&b| mult[a * order + b] == 0).expect("finite group") as u32)
        .collect();
    let generator_indices = generators.iter().map(|g| index[g]).collect();
    Ok(IsometricAction {
        n,
        elements,
        mult,
        inverse,
        generator_indices,
    })
}

/// Largest isometry defect found by [`verify_isometric`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsometryCounterexample {
    pub g: usize,
    pub x: usize,
    pub y: usize,
    pub delta: f64,
}

/// `Ok(None)` when every element preserves every distance within [`EPS`],
/// otherwise the worst violation.
pub fn verify_isometric(space: &FiniteMetricSpace, action: &IsometricAction) -> Result<Option<IsometryCounterexample>> {
    if action.n() != space.len() {
        return Err(Error::SizeMismatch {
            action: action.n(),
            space: space.len(),
        });
    }
    let n = space.len();
    let worst = (1..action.order())
        .into_par_iter()
        .map(|g| {
            let perm = &action.elements()[g];
            let mut best: Option<IsometryCounterexample> = None;
            for x in 0..n {
                let gx = perm[x] as usize;
                let row = space.row(x);
                let grow = space.row(gx);
                for y in (x + 1)..n {
                    let delta = (grow[perm[y] as usize] - row[y]).abs();
                    if delta > EPS && best.is_none_or(|b| delta > b.delta) {
                        best = Some(IsometryCounterexample { g, x, y, delta });
                    }
                }
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .fold(None::<IsometryCounterexample>, |acc, c| match acc {
            Some(a) if a.delta >= c.delta => Some(a),
            _ => Some(c),
        });
    Ok(worst)
}

/// The orbit space `X/G` with its quotient metric
/// `d([x], [x']) = min_g d(x, g·x')`.
#[derive(Debug, Clone)]
pub struct QuotientSpace {
    base: FiniteMetricSpace,
    action: IsometricAction,
    /// Minimum index of each orbit, ascending.
    reps: Vec<usize>,
    /// Point index -> orbit index.
    proj: Vec<usize>,
    metric: FiniteMetricSpace,
    validation: ValidationReport,
}

impl QuotientSpace {
    pub fn base(&self) -> &FiniteMetricSpace {
        &self.base
    }

    pub fn action(&self) -> &IsometricAction {
        &self.action
    }

    pub fn reps(&self) -> &[usize] {
        &self.reps
    }

    pub fn proj(&self) -> &[usize] {
        &self.proj
    }

    /// The quotient metric as a space in its own right; point `a` is orbit `a`.
    pub fn metric(&self) -> &FiniteMetricSpace {
        &self.metric
    }

    pub fn validation(&self) -> &ValidationReport {
        &self.validation
    }

    pub fn orbit_count(&self) -> usize {
        self.reps.len()
    }
}

/// Builds the quotient space. Fails if the action is not isometric; a
/// quotient metric that fails validation is returned with its report attached.
pub fn build_quotient(space: &FiniteMetricSpace, action: &IsometricAction) -> Result<QuotientSpace> {
    if let Some(c) = verify_isometric(space, action)? {
        return Err(Error::NotIsometric {
            g: c.g,
            x: c.x,
            y: c.y,
            delta: c.delta,
        });
    }
    let orbits = action.orbits();
    let reps: Vec<usize> = orbits.iter().map(|o| o[0]).collect();
    let mut proj = vec![0usize; space.len()];
    for (a, orbit) in orbits.iter().enumerate() {
        for &x in orbit {
            proj[x] = a;
        }
    }
    let k = reps.len();
    let rows: Vec<Vec<f64>> = (0..k)
        .into_par_iter()
        .map(|a| {
            let x = reps[a];
            (0..k)
                .map(|b| {
                    if a == b {
                        return 0.0;
                    }
                    orbits[b].iter().map(|&y| space.d(x, y)).fold(f64::INFINITY, f64::min)
                })
                .collect()
        })
        .collect();
    // Symmetrize from the upper triangle so the matrix is exactly symmetric.
    let metric = FiniteMetricSpace::from_fn(k, |a, b| rows[a][b]).with_provenance(Provenance::explicit("quotient"));
    let validation = metric.validate_metric();
    Ok(QuotientSpace {
        base: space.clone(),
        action: action.clone(),
        reps,
        proj,
        metric,
        validation,
    })
}

/// Rotation of an `n`-cycle by `shift` positions.
pub fn cyclic_shift(n: usize, shift: usize) -> Vec<u32> {
    (0..n).map(|i| ((i + shift) % n) as u32).collect()
}

/// The involution `i <-> i + m` on `2m` points.
pub fn antipodal_pairs(m: usize) -> Vec<u32> {
    (0..2 * m).map(|i| ((i + m) % (2 * m)) as u32).collect()
}

/// Rotation by 60° on the six-circles sample with `m` points per circle.
pub fn six_circles_rotation(m: usize) -> Vec<u32> {
    (0..6 * m).map(|p| (((p / m + 1) % 6) * m + p % m) as u32).collect()
}

/// The two generators of the order-14 translation group on the `k × k`
/// flat torus grid: shift by `2π/7` in `y` and by `π` in `x`.
pub fn torus_z14_generators(k: usize) -> Result<Vec<Vec<u32>>> {
    if !k.is_multiple_of(14) {
        return Err(Error::InvalidSpec(format!(
            "torus grid size {k} must be divisible by 14"
        )));
    }
    let shift = |di: usize, dj: usize| -> Vec<u32> {
        (0..k * k)
            .map(|p| {
                let (i, j) = (p / k, p % k);
                (((i + di) % k) * k + (j + dj) % k) as u32
            })
            .collect()
    };
    Ok(vec![shift(0, k / 7), shift(k / 2, 0)])
}

/// Generators of the tetrahedral rotation group acting on the twelve-circles sample.
pub fn twelve_circles_generators(m: usize) -> Vec<Vec<u32>> {
    let perms = crate::metric::a4_permutations();
    // (0 1 2) and (0 1)(2 3) generate A4.
    let gens = [[1, 2, 0, 3], [1, 0, 3, 2]];
    gens.iter()
        .map(|gp| {
            let g = perms.iter().position(|p| p == gp).expect("even permutation");
            (0..12 * m)
                .map(|p| (crate::metric::a4_compose(&perms, g, p / m) * m + p % m) as u32)
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{generate_space, ShapeSpec};

    fn circle(n: usize) -> FiniteMetricSpace {
        generate_space(&ShapeSpec::EvenlySpacedCircle { n, circumference: 1.0 }).unwrap()
    }

    #[test]
    fn involution_closes_to_two_elements() {
        let g = close_group(12, &[cyclic_shift(12, 6)], DEFAULT_GROUP_CAP).unwrap();
        assert_eq!(g.order(), 2);
        assert_eq!(g.elements()[0], (0..12).collect::<Vec<u32>>());
    }

    #[test]
    fn six_circle_rotation_has_order_six() {
        let g = close_group(60, &[six_circles_rotation(10)], DEFAULT_GROUP_CAP).unwrap();
        assert_eq!(g.order(), 6);
    }

    #[test]
    fn torus_group_has_order_fourteen() {
        let gens = torus_z14_generators(42).unwrap();
        let g = close_group(42 * 42, &gens, DEFAULT_GROUP_CAP).unwrap();
        assert_eq!(g.order(), 14);
        assert!(torus_z14_generators(40).is_err());
    }

    #[test]
    fn twelve_circles_group_is_a4_and_isometric() {
        let m = 4;
        let space = generate_space(&ShapeSpec::TwelveCircles { m }).unwrap();
        let g = close_group(12 * m, &twelve_circles_generators(m), DEFAULT_GROUP_CAP).unwrap();
        assert_eq!(g.order(), 12);
        assert_eq!(verify_isometric(&space, &g).unwrap(), None);
        let q = build_quotient(&space, &g).unwrap();
        assert_eq!(q.orbit_count(), m);
    }

    #[test]
    fn closure_order_is_deterministic() {
        let a = close_group(6, &[cyclic_shift(6, 1)], 100).unwrap();
        let b = close_group(6, &[cyclic_shift(6, 1)], 100).unwrap();
        assert_eq!(a, b);
        // word length 1 then 2, ...
        assert_eq!(a.elements()[1], cyclic_shift(6, 1));
        assert_eq!(a.elements()[2], cyclic_shift(6, 2));
    }

    #[test]
    fn closure_errors() {
        assert!(matches!(
            close_group(3, &[vec![0, 0, 1]], 10),
            Err(Error::NotPermutation { index: 0, .. })
        ));
        assert!(matches!(
            close_group(10, &[cyclic_shift(10, 1)], 5),
            Err(Error::GroupTooLarge { cap: 5 })
        ));
    }

    #[test]
    fn composition_and_inverse_tables() {
        let g = close_group(7, &[cyclic_shift(7, 1)], 100).unwrap();
        for a in 0..g.order() {
            assert_eq!(g.compose(a, g.inverse(a)), 0);
            for x in 0..7 {
                for b in 0..g.order() {
                    assert_eq!(g.apply(g.compose(a, b), x), g.apply(a, g.apply(b, x)));
                }
            }
        }
    }

    #[test]
    fn isometry_checks() {
        let c12 = circle(12);
        let anti = close_group(12, &[cyclic_shift(12, 6)], 10).unwrap();
        assert_eq!(verify_isometric(&c12, &anti).unwrap(), None);

        let c6 = circle(6);
        let swap = close_group(6, &[vec![1, 0, 2, 3, 4, 5]], 10).unwrap();
        let bad = verify_isometric(&c6, &swap)
            .unwrap()
            .expect("transposition breaks distances");
        assert_eq!(bad.g, 1);
        assert!(bad.delta > 0.1);

        assert_eq!(verify_isometric(&c6, &IsometricAction::trivial(6)).unwrap(), None);
        assert!(verify_isometric(&c12, &IsometricAction::trivial(5)).is_err());
    }

    #[test]
    fn antipodal_quotient_of_circle12() {
        let c12 = circle(12);
        let anti = close_group(12, &[cyclic_shift(12, 6)], 10).unwrap();
        let q = build_quotient(&c12, &anti).unwrap();
        assert_eq!(q.reps(), &[0, 1, 2, 3, 4, 5]);
        for i in 0..6usize {
            for j in 0..6 {
                let steps = i.abs_diff(j).min(6 - i.abs_diff(j));
                assert_eq!(q.metric().d(i, j), steps as f64 / 12.0);
            }
        }
        assert!(q.validation().ok);
    }

    #[test]
    fn trivial_quotient_is_identity() {
        let c = circle(9);
        let q = build_quotient(&c, &IsometricAction::trivial(9)).unwrap();
        assert_eq!(q.metric().matrix(), c.matrix());
    }

    #[test]
    fn six_circles_quotient_is_one_circle() {
        let m = 10;
        let space = generate_space(&ShapeSpec::SixCircles { m }).unwrap();
        let g = close_group(6 * m, &[six_circles_rotation(m)], 10).unwrap();
        let q = build_quotient(&space, &g).unwrap();
        assert_eq!(q.orbit_count(), m);
        for a in 0..m {
            for b in 0..m {
                let t = std::f64::consts::TAU * (a as f64 - b as f64) / m as f64;
                let chord = 2.0 * (t / 2.0).sin().abs();
                assert!((q.metric().d(a, b) - chord).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rejects_non_isometric_quotient() {
        let c6 = circle(6);
        let swap = close_group(6, &[vec![1, 0, 2, 3, 4, 5]], 10).unwrap();
        assert!(matches!(build_quotient(&c6, &swap), Err(Error::NotIsometric { .. })));
    }

    #[test]
    fn orbits() {
        let anti = close_group(12, &[cyclic_shift(12, 6)], 10).unwrap();
        assert_eq!(anti.orbit_of(3).unwrap(), vec![3, 9]);
        assert!(anti.orbit_of(12).is_err());
        let t = IsometricAction::trivial(4);
        assert_eq!(t.orbit_of(2).unwrap(), vec![2]);
        let m = 5;
        let g = close_group(6 * m, &[six_circles_rotation(m)], 10).unwrap();
        assert_eq!(g.orbit_of(2).unwrap(), vec![2, 7, 12, 17, 22, 27]);
    }
}
