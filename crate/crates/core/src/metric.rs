//! Finite metric spaces: construction, validation and the example geometries.
//!
//! Distances are stored as a dense row-major `n × n` matrix of `f64`. Every
//! generator below computes each distance from a single integer-indexed
//! formula, so distances that agree mathematically under the natural group
//! action are bit-identical and the action is an exact isometry.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used for every distance comparison.
pub const EPS: f64 = 1e-9;

/// Maximum number of violations recorded by [`FiniteMetricSpace::validate_metric`].
pub const MAX_VIOLATIONS: usize = 100;

/// Parameters for the built-in geometries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ShapeSpec {
    /// `n` evenly spaced points on a circle, arc-length metric.
    EvenlySpacedCircle {
        n: usize,
        #[serde(default = "default_circumference")]
        circumference: f64,
    },
    /// Uniform sample of `S^dim` with the geodesic metric normalized so that
    /// great circles have circumference one. When `antipodal_paired` is set
    /// the sample has `2m` points with `x_{i+m} = -x_i`.
    GeodesicSphere {
        dim: usize,
        m: usize,
        #[serde(default)]
        antipodal_paired: bool,
        seed: u64,
    },
    /// `k × k` grid on the flat torus `[0, 2π)²`. Point `(i, j)` has index `i·k + j`.
    FlatTorusGrid { k: usize },
    /// Six unit circles centred at the vertices of a regular hexagon of
    /// circumradius 4, `m` points each. Point `j` of circle `c` has index `c·m + j`.
    SixCircles { m: usize },
    /// The twelve-circle orbit of a small circle under the rotation group of a
    /// regular tetrahedron, `m` points per circle.
    TwelveCircles { m: usize },
    /// A user-supplied full distance matrix.
    ExplicitMatrix { rows: Vec<Vec<f64>> },
}

fn default_circumference() -> f64 {
    1.0
}

impl ShapeSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ShapeSpec::EvenlySpacedCircle { .. } => "evenly-spaced-circle",
            ShapeSpec::GeodesicSphere { .. } => "geodesic-sphere",
            ShapeSpec::FlatTorusGrid { .. } => "flat-torus-grid",
            ShapeSpec::SixCircles { .. } => "six-circles",
            ShapeSpec::TwelveCircles { .. } => "twelve-circles",
            ShapeSpec::ExplicitMatrix { .. } => "explicit-matrix",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            ShapeSpec::GeodesicSphere { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

/// Where a space came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<ShapeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl Provenance {
    pub fn explicit(source: impl Into<String>) -> Self {
        Provenance {
            shape: None,
            seed: None,
            source: Some(source.into()),
        }
    }
}

/// A finite set of points with a dense distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    n: usize,
    dist: Vec<f64>,
    labels: Option<Vec<String>>,
    provenance: Provenance,
}

/// One violated metric axiom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axiom", rename_all = "kebab-case")]
pub enum Violation {
    NonFinite {
        i: usize,
        j: usize,
    },
    Diagonal {
        i: usize,
        value: f64,
    },
    Asymmetric {
        i: usize,
        j: usize,
        forward: f64,
        backward: f64,
    },
    /// Two distinct indices at distance `≤ 0`.
    NotDistinct {
        i: usize,
        j: usize,
        value: f64,
    },
    /// `d(i, j) + d(j, k) < d(i, k) - ε`.
    Triangle {
        i: usize,
        j: usize,
        k: usize,
        excess: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
    /// True when more than [`MAX_VIOLATIONS`] violations existed.
    pub truncated: bool,
}

impl FiniteMetricSpace {
    /// Builds a space from a full row-major matrix. Only the shape is checked;
    /// use [`validate_metric`](Self::validate_metric) for the axioms.
    pub fn from_full(n: usize, dist: Vec<f64>) -> Result<Self> {
        if dist.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "distance matrix has {} entries, expected {}",
                dist.len(),
                n * n
            )));
        }
        Ok(FiniteMetricSpace {
            n,
            dist,
            labels: None,
            provenance: Provenance::default(),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut dist = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            dist.extend_from_slice(row);
        }
        Self::from_full(n, dist)
    }

    /// Builds a symmetric space from the strict lower triangle, row-major:
    /// `d(1,0), d(2,0), d(2,1), d(3,0), …`. A lower triangle that includes the
    /// diagonal is also accepted.
    pub fn from_lower_triangle(n: usize, values: &[f64]) -> Result<Self> {
        let strict = n * n.saturating_sub(1) / 2;
        let with_diag = n * (n + 1) / 2;
        let include_diag = if values.len() == strict {
            false
        } else if values.len() == with_diag {
            true
        } else {
            return Err(Error::InvalidInput(format!(
                "lower triangle for n = {n} needs {strict} (or {with_diag} with diagonal) values, got {}",
                values.len()
            )));
        };
        let mut dist = vec![0.0; n * n];
        let mut it = values.iter();
        for i in 0..n {
            let upto = if include_diag { i + 1 } else { i };
            for j in 0..upto {
                let v = *it.next().expect("length checked");
                dist[i * n + j] = v;
                dist[j * n + i] = v;
            }
        }
        Self::from_full(n, dist)
    }

    /// Builds a space by evaluating `f(i, j)` for `i < j` and mirroring.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                dist[i * n + j] = v;
                dist[j * n + i] = v;
            }
        }
        FiniteMetricSpace {
            n,
            dist,
            labels: None,
            provenance: Provenance::default(),
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} points",
                labels.len(),
                self.n
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.dist
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Strict lower triangle, row-major.
    pub fn lower_triangle(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n * self.n.saturating_sub(1) / 2);
        for i in 0..self.n {
            for j in 0..i {
                out.push(self.d(i, j));
            }
        }
        out
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// The subspace on `indices` (in the given order).
    pub fn subspace(&self, indices: &[usize]) -> Self {
        let m = indices.len();
        let mut dist = Vec::with_capacity(m * m);
        for &a in indices {
            for &b in indices {
                dist.push(self.d(a, b));
            }
        }
        let labels = self
            .labels
            .as_ref()
            .map(|l| indices.iter().map(|&i| l[i].clone()).collect());
        FiniteMetricSpace {
            n: m,
            dist,
            labels,
            provenance: Provenance::explicit("subspace"),
        }
    }

    /// Checks the metric axioms with tolerance [`EPS`].
    pub fn validate_metric(&self) -> ValidationReport {
        self.validate_metric_with_tolerance(EPS)
    }

    pub fn validate_metric_with_tolerance(&self, eps: f64) -> ValidationReport {
        let n = self.n;
        let mut violations = Vec::new();
        let mut total = 0usize;
        let mut push = |v: Violation, violations: &mut Vec<Violation>| {
            total += 1;
            if violations.len() < MAX_VIOLATIONS {
                violations.push(v);
            }
        };
        let mut finite = true;
        let mut unrecorded = 0usize;
        for i in 0..n {
            for j in 0..n {
                if !self.d(i, j).is_finite() {
                    finite = false;
                    push(Violation::NonFinite { i, j }, &mut violations);
                }
            }
        }
        for i in 0..n {
            let v = self.d(i, i);
            if v != 0.0 {
                push(Violation::Diagonal { i, value: v }, &mut violations);
            }
        }
        let mut symmetric = true;
        for i in 0..n {
            for j in (i + 1)..n {
                let (f, b) = (self.d(i, j), self.d(j, i));
                if f != b {
                    symmetric = false;
                    push(
                        Violation::Asymmetric {
                            i,
                            j,
                            forward: f,
                            backward: b,
                        },
                        &mut violations,
                    );
                }
                if f <= 0.0 || b <= 0.0 {
                    push(Violation::NotDistinct { i, j, value: f.min(b) }, &mut violations);
                }
            }
        }
        if finite {
            let per_row: Vec<(usize, Vec<Violation>)> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let (mut count, mut found) = (0, Vec::new());
                    let ri = self.row(i);
                    for k in (i + 1)..n {
                        let dik = ri[k];
                        // With a symmetric matrix d(j, k) is row k, and the
                        // worst j is found by one pass over both rows.
                        if symmetric && dik - min_pair_sum(ri, self.row(k)) <= eps {
                            continue;
                        }
                        for j in 0..n {
                            if j == i || j == k {
                                continue;
                            }
                            let excess = dik - (ri[j] + self.d(j, k));
                            if excess > eps {
                                count += 1;
                                if found.len() < MAX_VIOLATIONS {
                                    found.push(Violation::Triangle { i, j, k, excess });
                                }
                            }
                        }
                    }
                    (count, found)
                })
                .collect();
            for (count, found) in per_row {
                unrecorded += count - found.len();
                for v in found {
                    push(v, &mut violations);
                }
            }
        }
        ValidationReport {
            ok: total + unrecorded == 0,
            truncated: total + unrecorded > violations.len(),
            violations,
        }
    }

    /// Distinct pairwise distances, ascending. Values within [`EPS`] of the
    /// previously kept value are merged into it.
    pub fn critical_values(&self) -> Vec<f64> {
        let mut all = self.lower_triangle();
        all.retain(|v| *v > 0.0);
        dedup_sorted(all)
    }
}

/// `min_j a[j] + b[j]`, in independent lanes so that it vectorizes.
fn min_pair_sum(a: &[f64], b: &[f64]) -> f64 {
    let mut lanes = [f64::INFINITY; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..8 {
            let s = x[l] + y[l];
            lanes[l] = if s < lanes[l] { s } else { lanes[l] };
        }
    }
    let mut m = lanes.iter().copied().fold(f64::INFINITY, f64::min);
    for (x, y) in ra.iter().zip(rb) {
        m = m.min(x + y);
    }
    m
}

/// Sorts ascending and merges runs of values closer than [`EPS`].
pub fn dedup_sorted(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::new();
    for v in values {
        match out.last() {
            Some(&last) if v - last <= EPS => {}
            _ => out.push(v),
        }
    }
    out
}

/// Builds the space described by `spec`. Deterministic in `spec` (the
/// sphere sampler is seeded from the spec).
pub fn generate_space(spec: &ShapeSpec) -> Result<FiniteMetricSpace> {
    let space = match spec {
        ShapeSpec::EvenlySpacedCircle { n, circumference } => {
            check_count("n", *n)?;
            if !(circumference.is_finite() && *circumference > 0.0) {
                return Err(Error::InvalidSpec("circumference must be positive".into()));
            }
            circle(*n, *circumference)
        }
        ShapeSpec::GeodesicSphere {
            dim,
            m,
            antipodal_paired,
            seed,
        } => {
            if *dim < 1 {
                return Err(Error::InvalidSpec("sphere dimension must be at least 1".into()));
            }
            let total = if *antipodal_paired { 2 * m } else { *m };
            check_count("point count", total)?;
            if *antipodal_paired && *m < 2 {
                return Err(Error::InvalidSpec("antipodal pairing needs at least two pairs".into()));
            }
            geodesic_sphere(*dim, *m, *antipodal_paired, *seed)
        }
        ShapeSpec::FlatTorusGrid { k } => {
            check_count("k", *k)?;
            flat_torus(*k)
        }
        ShapeSpec::SixCircles { m } => {
            check_count("m", *m)?;
            six_circles(*m)
        }
        ShapeSpec::TwelveCircles { m } => {
            check_count("m", *m)?;
            twelve_circles(*m)
        }
        ShapeSpec::ExplicitMatrix { rows } => FiniteMetricSpace::from_rows(rows)?,
    };
    Ok(space.with_provenance(Provenance {
        shape: match spec {
            ShapeSpec::ExplicitMatrix { .. } => None,
            other => Some(other.clone()),
        },
        seed: spec.seed(),
        source: match spec {
            ShapeSpec::ExplicitMatrix { .. } => Some("explicit-matrix".into()),
            _ => None,
        },
    }))
}

fn check_count(what: &str, count: usize) -> Result<()> {
    if count < 3 {
        return Err(Error::InvalidSpec(format!("{what} must be at least 3, got {count}")));
    }
    Ok(())
}

fn circle(n: usize, circumference: f64) -> FiniteMetricSpace {
    FiniteMetricSpace::from_fn(n, |i, j| {
        let diff = j - i;
        let steps = diff.min(n - diff);
        steps as f64 * circumference / n as f64
    })
}

/// Great-circle distance normalized to circumference one.
fn sphere_distance(x: &[f64], y: &[f64]) -> f64 {
    let mut diff = 0.0;
    let mut sum = 0.0;
    for (a, b) in x.iter().zip(y) {
        diff += (a - b) * (a - b);
        sum += (a + b) * (a + b);
    }
    2.0 * diff.sqrt().atan2(sum.sqrt()) / TAU
}

/// Unit vectors drawn from normalized Gaussians.
pub fn sample_sphere(dim: usize, m: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(m);
    while points.len() < m {
        let v: Vec<f64> = (0..=dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            continue;
        }
        points.push(v.into_iter().map(|x| x / norm).collect());
    }
    points
}

fn geodesic_sphere(dim: usize, m: usize, paired: bool, seed: u64) -> FiniteMetricSpace {
    let points = sample_sphere(dim, m, seed);
    if !paired {
        return FiniteMetricSpace::from_fn(m, |i, j| sphere_distance(&points[i], &points[j]));
    }
    // d(x, -y) = 1/2 - d(x, y) holds exactly on the sphere; using it here makes
    // the antipodal involution i <-> i + m an exact isometry of the sample.
    let base = FiniteMetricSpace::from_fn(m, |i, j| sphere_distance(&points[i], &points[j]));
    FiniteMetricSpace::from_fn(2 * m, |i, j| {
        let (a, sa) = (i % m, i >= m);
        let (b, sb) = (j % m, j >= m);
        if a == b {
            0.5
        } else if sa == sb {
            base.d(a, b)
        } else {
            0.5 - base.d(a, b)
        }
    })
}

fn flat_torus(k: usize) -> FiniteMetricSpace {
    let step = TAU / k as f64;
    FiniteMetricSpace::from_fn(k * k, |p, q| {
        let (pi, pj) = (p / k, p % k);
        let (qi, qj) = (q / k, q % k);
        let dx = pi.abs_diff(qi);
        let dy = pj.abs_diff(qj);
        let a = dx.min(k - dx);
        let b = dy.min(k - dy);
        step * ((a * a + b * b) as f64).sqrt()
    })
}

/// Distances of a space that is the free orbit of `m` base points under a
/// finite rotation group. `rotations[h]` is the matrix of element `h`, `mul`
/// and `inv` describe the group. Point `(c, j)` has index `c·m + j` and lies
/// at `rotations[c] · base[j]`.
///
/// `d((c, j), (c', j')) = |base[j] - R_{c⁻¹c'} base[j']|`, evaluated once per
/// unordered triple so the result is exactly symmetric and exactly invariant
/// under left multiplication.
fn rotated_orbit_space(
    base: &[Vector3<f64>],
    rotations: &[Matrix3<f64>],
    mul: &dyn Fn(usize, usize) -> usize,
    inv: &dyn Fn(usize) -> usize,
) -> FiniteMetricSpace {
    let m = base.len();
    let order = rotations.len();
    // table[(j * order + h) * m + j2] = |base[j] - R_h base[j2]|
    let mut table = vec![f64::NAN; m * order * m];
    for j in 0..m {
        for h in 0..order {
            for j2 in 0..m {
                let key = (j, h, j2);
                let mirror = (j2, inv(h), j);
                let idx = (j * order + h) * m + j2;
                if key <= mirror {
                    table[idx] = (base[j] - rotations[h] * base[j2]).norm();
                }
            }
        }
    }
    for j in 0..m {
        for h in 0..order {
            for j2 in 0..m {
                let idx = (j * order + h) * m + j2;
                if table[idx].is_nan() {
                    table[idx] = table[(j2 * order + inv(h)) * m + j];
                }
            }
        }
    }
    FiniteMetricSpace::from_fn(order * m, |p, q| {
        let (c, j) = (p / m, p % m);
        let (c2, j2) = (q / m, q % m);
        let h = mul(inv(c), c2);
        table[(j * order + h) * m + j2]
    })
}

fn planar_rotation(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// The union of the orbits of `points` under rotation of the plane by
/// multiples of `2π / order`. Point `c·k + j` is `points[j]` rotated `c` times,
/// so the shift by `k = points.len()` indices is an exact isometry.
pub fn cyclic_planar_orbits(points: &[[f64; 2]], order: usize) -> FiniteMetricSpace {
    let base: Vec<Vector3<f64>> = points.iter().map(|p| Vector3::new(p[0], p[1], 0.0)).collect();
    let rotations: Vec<Matrix3<f64>> = (0..order)
        .map(|h| planar_rotation(TAU * h as f64 / order as f64))
        .collect();
    rotated_orbit_space(&base, &rotations, &|a, b| (a + b) % order, &|a| (order - a) % order)
}

fn six_circles(m: usize) -> FiniteMetricSpace {
    let base: Vec<Vector3<f64>> = (0..m)
        .map(|j| {
            let t = TAU * j as f64 / m as f64;
            Vector3::new(4.0 + t.cos(), t.sin(), 0.0)
        })
        .collect();
    let rotations: Vec<Matrix3<f64>> = (0..6).map(|h| planar_rotation(PI / 3.0 * h as f64)).collect();
    rotated_orbit_space(&base, &rotations, &|a, b| (a + b) % 6, &|a| (6 - a) % 6)
}

/// The even permutations of four symbols in lexicographic order (identity first).
pub fn a4_permutations() -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    let distinct = (0..4).all(|i| (0..i).all(|j| p[i] != p[j]));
                    if distinct && parity(&p) == 0 {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

fn parity(p: &[usize; 4]) -> usize {
    let mut inversions = 0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    inversions % 2
}

/// Index of `p ∘ q` in [`a4_permutations`].
pub fn a4_compose(perms: &[[usize; 4]], p: usize, q: usize) -> usize {
    let (a, b) = (perms[p], perms[q]);
    let composed = [a[b[0]], a[b[1]], a[b[2]], a[b[3]]];
    perms
        .iter()
        .position(|x| *x == composed)
        .expect("A4 is closed under composition")
}

fn twelve_circles(m: usize) -> FiniteMetricSpace {
    let h = 2f64.sqrt() / 4.0;
    let vertices = [
        Vector3::new(0.5, 0.0, -h),
        Vector3::new(-0.5, 0.0, -h),
        Vector3::new(0.0, 0.5, h),
        Vector3::new(0.0, -0.5, h),
    ];
    let perms = a4_permutations();
    let source = Matrix3::from_columns(&[vertices[0], vertices[1], vertices[2]]);
    let source_inv = source.try_inverse().expect("tetrahedron vertices span R^3");
    let rotations: Vec<Matrix3<f64>> = perms
        .iter()
        .map(|p| Matrix3::from_columns(&[vertices[p[0]], vertices[p[1]], vertices[p[2]]]) * source_inv)
        .collect();
    let center = Vector3::new(5.0 / 8.0, 3.0 / 8.0, -(2f64.sqrt()) / 8.0);
    let u = Vector3::new(1.0, -1.0, 0.0) / 2f64.sqrt();
    let v = Vector3::new(0.0, 0.0, 1.0);
    let base: Vec<Vector3<f64>> = (0..m)
        .map(|j| {
            let t = TAU * j as f64 / m as f64;
            center + (u * t.cos() + v * t.sin()) * 0.2
        })
        .collect();
    let inverse: Vec<usize> = (0..perms.len())
        .map(|p| {
            (0..perms.len())
                .find(|&q| a4_compose(&perms, p, q) == 0)
                .expect("group")
        })
        .collect();
    rotated_orbit_space(&base, &rotations, &|a, b| a4_compose(&perms, a, b), &|a| inverse[a])
}
