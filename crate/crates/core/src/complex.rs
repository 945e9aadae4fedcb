//! Vietoris–Rips and Čech complexes of finite metric spaces, and the
//! Vietoris–Rips filtration.
//!
//! Every complex is built by ordered neighbor-intersection expansion of a
//! neighborhood graph, so simplices come out lexicographically sorted within
//! each dimension. Root vertices are expanded in parallel and concatenated
//! in root order, which reproduces the sequential order exactly.

use std::cmp::Ordering;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{FiniteMetricSpace, EPS};

/// Default maximum number of simplices in one complex.
pub const DEFAULT_BUDGET: usize = 10_000_000;

/// Default top simplex dimension.
pub const DEFAULT_DIM_CAP: usize = 3;

/// Whether the scale bound is inclusive (`≤ r`) or strict (`< r`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Leq,
    Lt,
}

impl Convention {
    /// `d ≤ r` or `d < r`, with tolerance [`EPS`] on the boundary.
    #[inline]
    pub fn admits(self, d: f64, r: f64) -> bool {
        match self {
            Convention::Leq => d <= r + EPS,
            Convention::Lt => d < r - EPS,
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::Leq => "leq",
            Convention::Lt => "lt",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComplexKind {
    Vr,
    Cech,
}

impl fmt::Display for ComplexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ComplexKind::Vr => "vr",
            ComplexKind::Cech => "cech",
        })
    }
}

/// Cap on the total number of simplices enumerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget(pub usize);

impl Default for Budget {
    fn default() -> Self {
        Budget(DEFAULT_BUDGET)
    }
}

/// The simplices of one dimension, stored flat, lexicographically sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplexList {
    dim: usize,
    verts: Vec<u32>,
}

impl SimplexList {
    pub fn new(dim: usize) -> Self {
        SimplexList { dim, verts: Vec::new() }
    }

    /// Builds a list from tuples, sorting and deduplicating them.
    pub fn from_tuples(dim: usize, mut tuples: Vec<Vec<u32>>) -> Self {
        tuples.sort();
        tuples.dedup();
        let mut verts = Vec::with_capacity(tuples.len() * (dim + 1));
        for t in tuples {
            assert_eq!(t.len(), dim + 1);
            verts.extend(t);
        }
        SimplexList { dim, verts }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.verts.len() / (self.dim + 1)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> &[u32] {
        let w = self.dim + 1;
        &self.verts[i * w..(i + 1) * w]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        self.verts.chunks_exact(self.dim + 1)
    }

    /// Position of a sorted tuple, by binary search.
    pub fn index_of(&self, simplex: &[u32]) -> Option<usize> {
        if simplex.len() != self.dim + 1 {
            return None;
        }
        let (mut lo, mut hi) = (0usize, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.get(mid).cmp(simplex) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    #[inline]
    pub fn contains(&self, simplex: &[u32]) -> bool {
        self.index_of(simplex).is_some()
    }

    pub fn to_tuples(&self) -> Vec<Vec<u32>> {
        self.iter().map(|s| s.to_vec()).collect()
    }
}

/// An explicit simplicial complex up to a dimension cap.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialComplex {
    n_vertices: usize,
    kind: ComplexKind,
    convention: Convention,
    scale: f64,
    dim_cap: usize,
    lists: Vec<SimplexList>,
}

impl SimplicialComplex {
    /// Assembles a complex from per-dimension lists (`lists[d]` holds
    /// `d`-simplices). Lists are re-sorted.
    pub fn from_lists(
        n_vertices: usize,
        kind: ComplexKind,
        convention: Convention,
        scale: f64,
        dim_cap: usize,
        lists: Vec<Vec<Vec<u32>>>,
    ) -> Self {
        let mut out: Vec<SimplexList> = lists
            .into_iter()
            .enumerate()
            .map(|(d, t)| SimplexList::from_tuples(d, t))
            .collect();
        while out.len() <= dim_cap {
            out.push(SimplexList::new(out.len()));
        }
        SimplicialComplex {
            n_vertices,
            kind,
            convention,
            scale,
            dim_cap,
            lists: out,
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn kind(&self) -> ComplexKind {
        self.kind
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn dim_cap(&self) -> usize {
        self.dim_cap
    }

    pub fn simplices(&self, dim: usize) -> &SimplexList {
        &self.lists[dim]
    }

    pub fn lists(&self) -> &[SimplexList] {
        &self.lists
    }

    pub fn counts(&self) -> Vec<usize> {
        self.lists.iter().map(SimplexList::len).collect()
    }

    pub fn total(&self) -> usize {
        self.lists.iter().map(SimplexList::len).sum()
    }

    /// Highest dimension with at least one simplex.
    pub fn top_dim(&self) -> Option<usize> {
        self.lists.iter().rposition(|l| !l.is_empty())
    }

    pub fn contains(&self, simplex: &[u32]) -> bool {
        match simplex.len() {
            0 => false,
            k if k - 1 <= self.dim_cap => self.lists[k - 1].contains(simplex),
            _ => false,
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.lists
            .iter()
            .enumerate()
            .map(|(d, l)| if d % 2 == 0 { l.len() as i64 } else { -(l.len() as i64) })
            .sum()
    }

    /// True iff every codimension-one face of every simplex is present.
    pub fn is_downward_closed(&self) -> bool {
        self.lists.iter().skip(1).all(|list| {
            list.iter().all(|s| {
                (0..s.len()).all(|skip| {
                    let face: Vec<u32> = s
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .map(|(_, &v)| v)
                        .collect();
                    self.lists[list.dim() - 1].contains(&face)
                })
            })
        })
    }

    /// Connected components of the 1-skeleton, each sorted, ordered by minimum vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.n_vertices).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        if self.dim_cap >= 1 {
            for e in self.lists[1].iter() {
                let a = find(&mut parent, e[0] as usize);
                let b = find(&mut parent, e[1] as usize);
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for v in 0..self.n_vertices {
            let root = find(&mut parent, v);
            groups.entry(root).or_default().push(v);
        }
        let mut out: Vec<Vec<usize>> = groups.into_values().collect();
        out.sort_by_key(|c| c[0]);
        out
    }
}

/// Sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborhoodGraph {
    adj: Vec<Vec<u32>>,
}

impl NeighborhoodGraph {
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[v]
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    fn upper(&self) -> Vec<Vec<u32>> {
        self.adj
            .iter()
            .enumerate()
            .map(|(v, n)| n.iter().copied().filter(|&u| u as usize > v).collect())
            .collect()
    }
}

/// Edge `{i, j}` iff `d(i, j) ≤ r` (or `< r`).
pub fn neighborhood_graph(space: &FiniteMetricSpace, r: f64, convention: Convention) -> NeighborhoodGraph {
    let n = space.len();
    let adj = (0..n)
        .into_par_iter()
        .map(|i| {
            let row = space.row(i);
            (0..n)
                .filter(|&j| j != i && convention.admits(row[j], r))
                .map(|j| j as u32)
                .collect()
        })
        .collect();
    NeighborhoodGraph { adj }
}

/// Per-clique state threaded through the expansion.
trait CliqueVisitor: Sync {
    type State: Send;
    fn root(&self, v: u32) -> Self::State;
    fn extend(&self, state: &Self::State, clique: &[u32], v: u32) -> Option<Self::State>;
    fn value(&self, _state: &Self::State) -> f64 {
        0.0
    }
}

struct Expansion {
    verts: Vec<Vec<u32>>,
    values: Vec<Vec<f64>>,
}

struct Walk<'a, V: CliqueVisitor> {
    visitor: &'a V,
    upper: &'a [Vec<u32>],
    max_size: usize,
    budget: usize,
    counter: &'a AtomicUsize,
    keep_values: bool,
}

impl<V: CliqueVisitor> Walk<'_, V> {
    fn emit(&self, out: &mut Expansion, clique: &[u32], value: f64) -> std::result::Result<(), usize> {
        let dim = clique.len() - 1;
        out.verts[dim].extend_from_slice(clique);
        if self.keep_values {
            out.values[dim].push(value);
        }
        if self.counter.fetch_add(1, AtomicOrdering::Relaxed) + 1 > self.budget {
            return Err(dim);
        }
        Ok(())
    }

    fn dfs(
        &self,
        out: &mut Expansion,
        clique: &mut Vec<u32>,
        state: &V::State,
        candidates: &[u32],
    ) -> std::result::Result<(), usize> {
        if clique.len() == self.max_size {
            return Ok(());
        }
        for (idx, &v) in candidates.iter().enumerate() {
            let Some(next_state) = self.visitor.extend(state, clique, v) else {
                continue;
            };
            clique.push(v);
            self.emit(out, clique, self.visitor.value(&next_state))?;
            if clique.len() < self.max_size {
                let next = intersect_sorted(&candidates[idx + 1..], &self.upper[v as usize]);
                self.dfs(out, clique, &next_state, &next)?;
            }
            clique.pop();
        }
        Ok(())
    }
}

fn intersect_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// All cliques of `graph` with at most `dim_cap + 1` vertices accepted by
/// `visitor`, in lexicographic order per dimension.
fn expand<V: CliqueVisitor>(
    graph: &NeighborhoodGraph,
    visitor: &V,
    dim_cap: usize,
    budget: Budget,
    keep_values: bool,
) -> Result<(Vec<Vec<u32>>, Vec<Vec<f64>>)> {
    let upper = graph.upper();
    let counter = AtomicUsize::new(0);
    let walk = Walk {
        visitor,
        upper: &upper,
        max_size: dim_cap + 1,
        budget: budget.0,
        counter: &counter,
        keep_values,
    };
    let parts: Vec<std::result::Result<Expansion, usize>> = (0..graph.len() as u32)
        .into_par_iter()
        .map(|root| {
            let mut out = Expansion {
                verts: vec![Vec::new(); dim_cap + 1],
                values: vec![Vec::new(); dim_cap + 1],
            };
            let state = visitor.root(root);
            let mut clique = vec![root];
            walk.emit(&mut out, &clique, visitor.value(&state))?;
            walk.dfs(&mut out, &mut clique, &state, &upper[root as usize])?;
            Ok(out)
        })
        .collect();
    let mut verts = vec![Vec::new(); dim_cap + 1];
    let mut values = vec![Vec::new(); dim_cap + 1];
    let mut overflow: Option<usize> = None;
    for part in parts {
        match part {
            Ok(p) => {
                for d in 0..=dim_cap {
                    verts[d].extend_from_slice(&p.verts[d]);
                    values[d].extend_from_slice(&p.values[d]);
                }
            }
            Err(dim) => overflow = Some(overflow.map_or(dim, |o: usize| o.max(dim))),
        }
    }
    if let Some(dim) = overflow {
        return Err(Error::BudgetExceeded { dim, budget: budget.0 });
    }
    Ok((verts, values))
}

struct FlagVisitor;

impl CliqueVisitor for FlagVisitor {
    type State = ();
    fn root(&self, _v: u32) {}
    fn extend(&self, _state: &(), _clique: &[u32], _v: u32) -> Option<()> {
        Some(())
    }
}

/// Vietoris–Rips complex: all cliques of the neighborhood graph.
pub fn vr_complex(
    space: &FiniteMetricSpace,
    r: f64,
    convention: Convention,
    dim_cap: usize,
    budget: Budget,
) -> Result<SimplicialComplex> {
    let graph = neighborhood_graph(space, r, convention);
    let (verts, _) = expand(&graph, &FlagVisitor, dim_cap, budget, false)?;
    Ok(assemble(space.len(), ComplexKind::Vr, convention, r, dim_cap, verts))
}

fn assemble(
    n: usize,
    kind: ComplexKind,
    convention: Convention,
    scale: f64,
    dim_cap: usize,
    verts: Vec<Vec<u32>>,
) -> SimplicialComplex {
    let lists = verts
        .into_iter()
        .enumerate()
        .map(|(dim, verts)| SimplexList { dim, verts })
        .collect();
    SimplicialComplex {
        n_vertices: n,
        kind,
        convention,
        scale,
        dim_cap,
        lists,
    }
}

/// Bitset of the sample points inside each ball.
struct WitnessVisitor {
    words: usize,
    balls: Vec<Vec<u64>>,
}

impl CliqueVisitor for WitnessVisitor {
    type State = Vec<u64>;

    fn root(&self, v: u32) -> Vec<u64> {
        self.balls[v as usize].clone()
    }

    fn extend(&self, state: &Vec<u64>, _clique: &[u32], v: u32) -> Option<Vec<u64>> {
        let ball = &self.balls[v as usize];
        let mut any = false;
        let next: Vec<u64> = (0..self.words)
            .map(|w| {
                let x = state[w] & ball[w];
                any |= x != 0;
                x
            })
            .collect();
        any.then_some(next)
    }
}

/// Čech complex with intrinsic witnesses: a simplex is present iff some
/// sample point lies within `r` of every vertex. Candidates are the cliques
/// of the `2r` neighborhood graph.
pub fn cech_complex(
    space: &FiniteMetricSpace,
    r: f64,
    convention: Convention,
    dim_cap: usize,
    budget: Budget,
) -> Result<SimplicialComplex> {
    let n = space.len();
    let words = n.div_ceil(64);
    let balls: Vec<Vec<u64>> = (0..n)
        .map(|i| {
            let mut bits = vec![0u64; words];
            for (j, &d) in space.row(i).iter().enumerate() {
                if convention.admits(d, r) {
                    bits[j / 64] |= 1 << (j % 64);
                }
            }
            bits
        })
        .collect();
    let visitor = WitnessVisitor { words, balls };
    let graph = neighborhood_graph(space, 2.0 * r, convention);
    let (verts, _) = expand(&graph, &visitor, dim_cap, budget, false)?;
    let mut complex = assemble(n, ComplexKind::Cech, convention, r, dim_cap, verts);
    // Vertices belong to the complex even when their own ball is empty (r = 0, strict).
    complex.lists[0] = SimplexList {
        dim: 0,
        verts: (0..n as u32).collect(),
    };
    Ok(complex)
}

pub fn build_complex(
    kind: ComplexKind,
    space: &FiniteMetricSpace,
    r: f64,
    convention: Convention,
    dim_cap: usize,
    budget: Budget,
) -> Result<SimplicialComplex> {
    match kind {
        ComplexKind::Vr => vr_complex(space, r, convention, dim_cap, budget),
        ComplexKind::Cech => cech_complex(space, r, convention, dim_cap, budget),
    }
}

/// Simplices of one dimension with filtration values, sorted by
/// `(value, lexicographic)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredList {
    dim: usize,
    verts: Vec<u32>,
    values: Vec<f64>,
}

impl FilteredList {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> &[u32] {
        let w = self.dim + 1;
        &self.verts[i * w..(i + 1) * w]
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u32], f64)> + '_ {
        self.verts.chunks_exact(self.dim + 1).zip(self.values.iter().copied())
    }
}

/// The Vietoris–Rips filtration: every simplex up to `dim_cap`, valued by
/// its diameter.
#[derive(Debug, Clone, PartialEq)]
pub struct VRFiltration {
    n_vertices: usize,
    dim_cap: usize,
    max_scale: Option<f64>,
    lists: Vec<FilteredList>,
}

impl VRFiltration {
    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn dim_cap(&self) -> usize {
        self.dim_cap
    }

    /// Truncation scale, if the filtration was cut off.
    pub fn max_scale(&self) -> Option<f64> {
        self.max_scale
    }

    pub fn simplices(&self, dim: usize) -> &FilteredList {
        &self.lists[dim]
    }

    pub fn lists(&self) -> &[FilteredList] {
        &self.lists
    }

    pub fn total(&self) -> usize {
        self.lists.iter().map(FilteredList::len).sum()
    }

    /// Edges sorted by length.
    pub fn edges(&self) -> &FilteredList {
        &self.lists[1.min(self.dim_cap)]
    }

    /// All simplices in filtration order `(value, dimension, lexicographic)`.
    pub fn ordered(&self) -> Vec<(usize, usize)> {
        let mut order: Vec<(usize, usize)> = self
            .lists
            .iter()
            .flat_map(|l| (0..l.len()).map(move |i| (l.dim, i)))
            .collect();
        order.sort_by(|&(da, ia), &(db, ib)| {
            self.lists[da].values[ia]
                .total_cmp(&self.lists[db].values[ib])
                .then(da.cmp(&db))
                .then_with(|| self.lists[da].get(ia).cmp(self.lists[db].get(ib)))
        });
        order
    }

    /// TSV rows `dim, value, v0 … vk` in filtration order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (d, i) in self.ordered() {
            out.push_str(&format!("{d}\t{}", self.lists[d].values[i]));
            for v in self.lists[d].get(i) {
                out.push_str(&format!("\t{v}"));
            }
            out.push('\n');
        }
        out
    }
}

struct DiameterVisitor<'a> {
    space: &'a FiniteMetricSpace,
}

impl CliqueVisitor for DiameterVisitor<'_> {
    type State = f64;

    fn root(&self, _v: u32) -> f64 {
        0.0
    }

    fn extend(&self, state: &f64, clique: &[u32], v: u32) -> Option<f64> {
        let row = self.space.row(v as usize);
        Some(clique.iter().fold(*state, |m, &u| m.max(row[u as usize])))
    }

    fn value(&self, state: &f64) -> f64 {
        *state
    }
}

pub fn vr_filtration(space: &FiniteMetricSpace, dim_cap: usize, budget: Budget) -> Result<VRFiltration> {
    filtration_inner(space, dim_cap, None, budget)
}

/// The filtration restricted to simplices of diameter `≤ max_scale`.
pub fn vr_filtration_upto(
    space: &FiniteMetricSpace,
    dim_cap: usize,
    max_scale: f64,
    budget: Budget,
) -> Result<VRFiltration> {
    filtration_inner(space, dim_cap, Some(max_scale), budget)
}

fn filtration_inner(
    space: &FiniteMetricSpace,
    dim_cap: usize,
    max_scale: Option<f64>,
    budget: Budget,
) -> Result<VRFiltration> {
    let graph = neighborhood_graph(space, max_scale.unwrap_or(f64::INFINITY), Convention::Leq);
    let (verts, values) = expand(&graph, &DiameterVisitor { space }, dim_cap, budget, true)?;
    let lists = verts
        .into_iter()
        .zip(values)
        .enumerate()
        .map(|(dim, (verts, values))| {
            let w = dim + 1;
            let mut order: Vec<usize> = (0..values.len()).collect();
            // stable: ties keep lexicographic order
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            FilteredList {
                dim,
                verts: order
                    .iter()
                    .flat_map(|&i| verts[i * w..(i + 1) * w].iter().copied())
                    .collect(),
                values: order.iter().map(|&i| values[i]).collect(),
            }
        })
        .collect();
    Ok(VRFiltration {
        n_vertices: space.len(),
        dim_cap,
        max_scale,
        lists,
    })
}
