//! Z/2 persistent homology of Vietoris–Rips filtrations, fixed-scale Betti
//! numbers, and an independent dense homology oracle.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::complex::{vr_complex, Budget, Convention, SimplicialComplex, VRFiltration};
use crate::error::{Error, Result};
use crate::metric::{FiniteMetricSpace, EPS};

/// Largest complex the dense oracle accepts.
pub const ORACLE_LIMIT: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub birth: f64,
    #[serde(with = "crate::scale")]
    pub death: f64,
}

impl Interval {
    pub fn is_infinite(&self) -> bool {
        self.death.is_infinite()
    }

    /// Alive in the closed-convention complex at `r`.
    pub fn alive_at(&self, r: f64) -> bool {
        self.birth <= r + EPS && r + EPS < self.death
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Barcode {
    /// `intervals[k]` are the bars of `H_k`, sorted by `(birth, death)`.
    pub intervals: Vec<Vec<Interval>>,
    pub dim_cap: usize,
    pub field: String,
    pub filtration_hash: String,
}

impl Barcode {
    /// Bars alive at `r`, per homology dimension.
    pub fn betti_at(&self, r: f64) -> Vec<usize> {
        self.intervals
            .iter()
            .map(|bars| bars.iter().filter(|b| b.alive_at(r)).count())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BettiVector {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<Convention>,
    pub dim_cap: usize,
    /// `b_0, …, b_{dim_cap - 1}` over Z/2.
    pub values: Vec<usize>,
    /// Whether the Euler characteristic identity was checked; it only applies
    /// when the complex has no simplices in the cap dimension.
    pub euler_checked: bool,
}

/// Adds column `b` into `a` over Z/2 (both sorted ascending).
fn add_into(a: &mut Vec<usize>, b: &[usize]) {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    *a = out;
}

/// Left-to-right column reduction. Returns the pivot (lowest row) of each
/// reduced column; skipped columns are left untouched and report `None`.
fn reduce_columns(columns: &mut [Vec<usize>], skip: impl Fn(usize) -> bool, rows: usize) -> Vec<Option<usize>> {
    let mut owner: Vec<Option<usize>> = vec![None; rows];
    let mut lows = vec![None; columns.len()];
    for j in 0..columns.len() {
        if skip(j) {
            continue;
        }
        while let Some(&low) = columns[j].last() {
            match owner[low] {
                Some(k) => {
                    let (left, right) = columns.split_at_mut(j);
                    add_into(&mut right[0], &left[k]);
                }
                None => {
                    owner[low] = Some(j);
                    lows[j] = Some(low);
                    break;
                }
            }
        }
    }
    lows
}

/// Face indices (into the `d - 1` list) of a `d`-simplex.
fn faces(simplex: &[u32], lookup: impl Fn(&[u32]) -> usize) -> Vec<usize> {
    let mut face = Vec::with_capacity(simplex.len() - 1);
    (0..simplex.len())
        .map(|skip| {
            face.clear();
            face.extend(simplex.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v));
            lookup(&face)
        })
        .collect()
}

pub fn filtration_hash(filtration: &VRFiltration) -> String {
    hex::encode(Sha256::digest(filtration.to_tsv().as_bytes()))
}

/// Standard persistence over Z/2 with clearing: dimensions are reduced from
/// the top down, and columns of simplices already paired as creators are
/// skipped (they would reduce to zero).
pub fn reduce(filtration: &VRFiltration) -> Barcode {
    let cap = filtration.dim_cap();
    let lists = filtration.lists();
    // Lists are sorted by (value, lexicographic), so list position is
    // filtration order within a dimension.
    let index: Vec<HashMap<&[u32], usize>> = lists
        .iter()
        .map(|l| (0..l.len()).map(|i| (l.get(i), i)).collect())
        .collect();
    let mut intervals: Vec<Vec<Interval>> = vec![Vec::new(); cap];
    let mut creator: Vec<Vec<bool>> = lists.iter().map(|l| vec![false; l.len()]).collect();
    let mut destroyer: Vec<Vec<bool>> = lists.iter().map(|l| vec![false; l.len()]).collect();
    for d in (1..=cap).rev() {
        let list = &lists[d];
        let below = &index[d - 1];
        let cleared = &creator[d];
        let mut columns: Vec<Vec<usize>> = (0..list.len())
            .map(|j| {
                if cleared[j] {
                    return Vec::new();
                }
                let mut c = faces(list.get(j), |f| below[f]);
                c.sort_unstable();
                c
            })
            .collect();
        let lows = reduce_columns(&mut columns, |j| cleared[j], lists[d - 1].len());
        for (j, low) in lows.into_iter().enumerate() {
            if let Some(i) = low {
                creator[d - 1][i] = true;
                destroyer[d][j] = true;
                let (birth, death) = (lists[d - 1].value(i), list.value(j));
                if death - birth > EPS {
                    intervals[d - 1].push(Interval { birth, death });
                }
            }
        }
    }
    for (d, bars) in intervals.iter_mut().enumerate() {
        for j in 0..lists[d].len() {
            if !creator[d][j] && !destroyer[d][j] {
                bars.push(Interval {
                    birth: lists[d].value(j),
                    death: f64::INFINITY,
                });
            }
        }
        bars.sort_by(|a, b| a.birth.total_cmp(&b.birth).then(a.death.total_cmp(&b.death)));
    }
    Barcode {
        intervals,
        dim_cap: cap,
        field: "Z/2".into(),
        filtration_hash: filtration_hash(filtration),
    }
}

/// Betti numbers `b_0..b_{cap-1}` of a fixed complex via sparse ranks of its
/// boundary operators.
pub fn betti_of_complex(complex: &SimplicialComplex) -> BettiVector {
    let cap = complex.dim_cap();
    let counts = complex.counts();
    let mut ranks = vec![0usize; cap + 2];
    for d in 1..=cap {
        let below = complex.simplices(d - 1);
        let mut columns: Vec<Vec<usize>> = complex
            .simplices(d)
            .iter()
            .map(|s| {
                let mut c = faces(s, |f| below.index_of(f).expect("complex is downward closed"));
                c.sort_unstable();
                c
            })
            .collect();
        ranks[d] = reduce_columns(&mut columns, |_| false, below.len())
            .iter()
            .flatten()
            .count();
    }
    let values: Vec<usize> = (0..cap).map(|k| counts[k] - ranks[k] - ranks[k + 1]).collect();
    let euler_checked = counts[cap] == 0;
    if euler_checked {
        let alternating: i64 = values
            .iter()
            .enumerate()
            .map(|(k, &b)| if k % 2 == 0 { b as i64 } else { -(b as i64) })
            .sum();
        debug_assert_eq!(alternating, complex.euler_characteristic());
    }
    BettiVector {
        scale: Some(complex.scale()),
        convention: Some(complex.convention()),
        dim_cap: cap,
        values,
        euler_checked,
    }
}

/// Betti numbers of `VR(space; r)` under `convention`, with simplices up to
/// `dim_cap` (so `b_0..b_{dim_cap-1}` are exact).
pub fn betti_at(
    space: &FiniteMetricSpace,
    r: f64,
    convention: Convention,
    dim_cap: usize,
    budget: Budget,
) -> Result<BettiVector> {
    let complex = vr_complex(space, r, convention, dim_cap, budget)?;
    Ok(betti_of_complex(&complex))
}

/// Dense bit-packed Gaussian elimination; shares no code with [`reduce`] or
/// [`betti_of_complex`].
pub fn homology_oracle(complex: &SimplicialComplex) -> Result<BettiVector> {
    let total = complex.total();
    if total > ORACLE_LIMIT {
        return Err(Error::InstanceTooLarge {
            simplices: total,
            limit: ORACLE_LIMIT,
        });
    }
    let cap = complex.dim_cap();
    let mut ranks = vec![0usize; cap + 2];
    for d in 1..=cap {
        let rows: Vec<Vec<u32>> = complex.simplices(d - 1).to_tuples();
        let row_of: HashMap<Vec<u32>, usize> = rows.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let words = rows.len().div_ceil(64);
        let mut matrix: Vec<Vec<u64>> = complex
            .simplices(d)
            .iter()
            .map(|s| {
                let mut bits = vec![0u64; words];
                for skip in 0..s.len() {
                    let mut face = s.to_vec();
                    face.remove(skip);
                    let i = row_of[&face];
                    bits[i / 64] ^= 1 << (i % 64);
                }
                bits
            })
            .collect();
        ranks[d] = dense_rank(&mut matrix, rows.len());
    }
    let counts = complex.counts();
    let values: Vec<usize> = (0..cap).map(|k| counts[k] - ranks[k] - ranks[k + 1]).collect();
    Ok(BettiVector {
        scale: Some(complex.scale()),
        convention: Some(complex.convention()),
        dim_cap: cap,
        values,
        euler_checked: false,
    })
}

/// Rank over Z/2 of the vectors in `matrix`, each `bits` long.
fn dense_rank(matrix: &mut [Vec<u64>], bits: usize) -> usize {
    let mut rank = 0;
    for bit in 0..bits {
        let (w, mask) = (bit / 64, 1u64 << (bit % 64));
        let Some(p) = (rank..matrix.len()).find(|&i| matrix[i][w] & mask != 0) else {
            continue;
        };
        matrix.swap(rank, p);
        let (pivot, rest) = matrix[rank..].split_first_mut().expect("nonempty");
        for row in rest {
            if row[w] & mask != 0 {
                for (x, y) in row[w..].iter_mut().zip(&pivot[w..]) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
        if rank == matrix.len() {
            break;
        }
    }
    rank
}

/// Bottleneck distance between two diagrams of one dimension. Infinite bars
/// are matched among themselves by sorted birth.
pub fn bottleneck_distance(a: &[Interval], b: &[Interval]) -> f64 {
    let split = |bars: &[Interval]| -> (Vec<Interval>, Vec<f64>) {
        let finite = bars.iter().copied().filter(|i| !i.is_infinite()).collect();
        let mut births: Vec<f64> = bars.iter().filter(|i| i.is_infinite()).map(|i| i.birth).collect();
        births.sort_by(f64::total_cmp);
        (finite, births)
    };
    let (fa, ia) = split(a);
    let (fb, ib) = split(b);
    if ia.len() != ib.len() {
        return f64::INFINITY;
    }
    let essential = ia.iter().zip(&ib).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let linf = |p: &Interval, q: &Interval| (p.birth - q.birth).abs().max((p.death - q.death).abs());
    let diag = |p: &Interval| (p.death - p.birth) / 2.0;
    let mut candidates: Vec<f64> = vec![0.0];
    candidates.extend(fa.iter().map(diag));
    candidates.extend(fb.iter().map(diag));
    for p in &fa {
        candidates.extend(fb.iter().map(|q| linf(p, q)));
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    // Left side: points of `fa` then diagonal copies of `fb`; right side:
    // points of `fb` then diagonal copies of `fa`.
    let (n, m) = (fa.len(), fb.len());
    let feasible = |eps: f64| {
        let size = n + m;
        let adj: Vec<Vec<usize>> = (0..size)
            .map(|l| {
                (0..size)
                    .filter(|&r| match (l < n, r < m) {
                        (true, true) => linf(&fa[l], &fb[r]) <= eps,
                        (true, false) => r - m == l && diag(&fa[l]) <= eps,
                        (false, true) => l - n == r && diag(&fb[r]) <= eps,
                        (false, false) => true,
                    })
                    .collect()
            })
            .collect();
        perfect_matching(&adj, size)
    };
    let mut lo = 0;
    let mut hi = candidates.len() - 1;
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo].max(essential)
}

fn perfect_matching(adj: &[Vec<usize>], size: usize) -> bool {
    fn augment(l: usize, adj: &[Vec<usize>], seen: &mut [bool], right: &mut [Option<usize>]) -> bool {
        for &r in &adj[l] {
            if !seen[r] {
                seen[r] = true;
                if right[r].is_none_or(|o| augment(o, adj, seen, right)) {
                    right[r] = Some(l);
                    return true;
                }
            }
        }
        false
    }
    let mut right = vec![None; size];
    (0..size).all(|l| augment(l, adj, &mut vec![false; size], &mut right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{vr_filtration, ComplexKind};
    use crate::metric::{generate_space, ShapeSpec};

    fn circle(n: usize) -> FiniteMetricSpace {
        generate_space(&ShapeSpec::EvenlySpacedCircle { n, circumference: 1.0 }).unwrap()
    }

    fn bars(b: &Barcode, k: usize) -> Vec<(f64, f64)> {
        b.intervals[k].iter().map(|i| (i.birth, i.death)).collect()
    }

    #[test]
    fn collinear_points() {
        let s = FiniteMetricSpace::from_rows(&[vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]]).unwrap();
        let b = reduce(&vr_filtration(&s, 2, Budget::default()).unwrap());
        assert_eq!(bars(&b, 0), vec![(0.0, 1.0), (0.0, 1.0), (0.0, f64::INFINITY)]);
        assert!(b.intervals[1].is_empty());
    }

    #[test]
    fn circle_barcodes() {
        let b = reduce(&vr_filtration(&circle(4), 3, Budget::default()).unwrap());
        assert_eq!(bars(&b, 1), vec![(0.25, 0.5)]);
        let b = reduce(&vr_filtration(&circle(6), 3, Budget::default()).unwrap());
        assert_eq!(bars(&b, 1), vec![(1.0 / 6.0, 1.0 / 3.0)]);
        assert_eq!(bars(&b, 2), vec![(1.0 / 3.0, 0.5)]);
        assert_eq!(b.betti_at(1.0 / 3.0), vec![1, 0, 1]);
        assert_eq!(b.field, "Z/2");
    }

    #[test]
    fn betti_examples() {
        let c = circle(6);
        let at = |r| betti_at(&c, r, Convention::Leq, 3, Budget::default()).unwrap().values;
        assert_eq!(at(0.1), vec![6, 0, 0]);
        assert_eq!(at(1.0 / 6.0), vec![1, 1, 0]);
        assert_eq!(at(1.0 / 3.0), vec![1, 0, 1]);
        assert_eq!(at(0.5), vec![1, 0, 0]);
    }

    #[test]
    fn oracle_examples() {
        let c = circle(6);
        let octa = vr_complex(&c, 1.0 / 3.0, Convention::Leq, 3, Budget::default()).unwrap();
        assert_eq!(homology_oracle(&octa).unwrap().values, vec![1, 0, 1]);
        let hex = vr_complex(&c, 1.0 / 6.0, Convention::Leq, 2, Budget::default()).unwrap();
        assert_eq!(homology_oracle(&hex).unwrap().values, vec![1, 1]);
        // full 4-simplex capped at dimension 2: b_2 counts unfilled 2-cycles
        let five = circle(5);
        let full = vr_complex(&five, 1.0, Convention::Leq, 2, Budget::default()).unwrap();
        let oracle = homology_oracle(&full).unwrap();
        assert_eq!(oracle.values, vec![1, 0]);
        let capped = SimplicialComplex::from_lists(
            5,
            ComplexKind::Vr,
            Convention::Leq,
            1.0,
            3,
            full.lists().iter().map(|l| l.to_tuples()).collect(),
        );
        assert_eq!(homology_oracle(&capped).unwrap().values, vec![1, 0, 4]);
        assert_eq!(betti_of_complex(&capped).values, vec![1, 0, 4]);
    }

    #[test]
    fn oracle_refuses_large_instances() {
        let c = circle(40);
        let k = vr_complex(&c, 1.0, Convention::Leq, 3, Budget::default()).unwrap();
        assert!(matches!(homology_oracle(&k), Err(Error::InstanceTooLarge { .. })));
    }

    #[test]
    fn bottleneck_basics() {
        let a = [
            Interval { birth: 0.0, death: 1.0 },
            Interval {
                birth: 0.0,
                death: f64::INFINITY,
            },
        ];
        let b = [
            Interval {
                birth: 0.1,
                death: 1.05,
            },
            Interval {
                birth: 0.0,
                death: f64::INFINITY,
            },
        ];
        assert!((bottleneck_distance(&a, &b) - 0.1).abs() < 1e-12);
        assert_eq!(bottleneck_distance(&a, &a), 0.0);
        let small = [Interval { birth: 0.0, death: 0.2 }];
        assert!((bottleneck_distance(&small, &[]) - 0.1).abs() < 1e-12);
        assert_eq!(bottleneck_distance(&a, &small), f64::INFINITY);
    }

    #[test]
    fn barcode_json_writes_inf() {
        let b = reduce(&vr_filtration(&circle(4), 2, Budget::default()).unwrap());
        let text = serde_json::to_string(&b).unwrap();
        assert!(text.contains("\"inf\""));
        assert_eq!(serde_json::from_str::<Barcode>(&text).unwrap(), b);
    }
}
