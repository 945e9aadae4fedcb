//! The four quantitative action properties (distance, ball, diameter, nerve),
//! decided at a single scale and maximized over the critical values.
//!
//! Ball and nerve intersections use intrinsic witnesses: two balls meet iff
//! some sample point lies strictly inside both. Hypotheses are strict
//! (`diam < r`, `d < r`) and compared with tolerance [`EPS`].

use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::action::{IsometricAction, QuotientSpace};
use crate::complex::{neighborhood_graph, Convention};
use crate::error::{Error, Result};
use crate::lift::for_each_lift;
use crate::metric::{dedup_sorted, FiniteMetricSpace, EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionProperty {
    Distance,
    Ball,
    Diameter,
    Nerve,
}

impl std::fmt::Display for ActionProperty {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ActionProperty::Distance => "distance",
            ActionProperty::Ball => "ball",
            ActionProperty::Diameter => "diameter",
            ActionProperty::Nerve => "nerve",
        })
    }
}

/// How uniqueness of lifts is counted.
///
/// `Tuple` counts element tuples `(g_1, …, g_k)` with `g_0 = e`; `Set`
/// counts the distinct lifted point sets, which differs only when some point
/// has a nontrivial stabilizer.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Uniqueness {
    #[default]
    Tuple,
    Set,
}

/// Why a configuration of orbits failed to lift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum LiftFailure {
    /// No lift tuple satisfies the condition.
    NoLift,
    /// Two distinct lift tuples (element indices, identity first) satisfy it.
    TwoLifts { first: Vec<usize>, second: Vec<usize> },
}

/// A counterexample to one of the action properties at a given scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "property", rename_all = "kebab-case")]
pub enum Witness {
    /// `d(x, g·x) < r` with `g ≠ e`.
    Distance {
        g: usize,
        x: usize,
        image: usize,
        distance: f64,
    },
    /// `y` lies in `B(x, r) ∩ g·B(x, r)` with `g ≠ e`.
    Ball { g: usize, x: usize, y: usize, reach: f64 },
    /// Quotient points `orbits` (lifted from `points`) have quotient diameter
    /// `< r` but no unique lift realizes it.
    Diameter {
        orbits: Vec<usize>,
        points: Vec<usize>,
        quotient_diameter: f64,
        failure: LiftFailure,
    },
    /// Quotient balls around `orbits` share a witness, but the upstairs balls
    /// do not have a unique intersecting lift.
    Nerve {
        orbits: Vec<usize>,
        points: Vec<usize>,
        failure: LiftFailure,
    },
}

impl Witness {
    /// Re-checks the counterexample against the definitions by exhaustive
    /// enumeration (no pruning). True iff it still fails at scale `r`.
    pub fn replay(&self, quotient: &QuotientSpace, r: f64) -> bool {
        let space = quotient.base();
        let action = quotient.action();
        let lt = Convention::Lt;
        match self {
            Witness::Distance { g, x, .. } => *g != 0 && lt.admits(space.d(*x, action.apply(*g, *x)), r),
            Witness::Ball { g, x, y, .. } => {
                *g != 0 && lt.admits(space.d(*x, *y), r) && lt.admits(space.d(action.apply(*g, *x), *y), r)
            }
            Witness::Diameter {
                orbits,
                points,
                failure,
                ..
            } => {
                let qm = quotient.metric();
                let qdiam = diameter_of(qm, orbits);
                if !lt.admits(qdiam, r) || !points_match(quotient, orbits, points) {
                    return false;
                }
                let achieving: Vec<Vec<usize>> = all_tuples(action, points.len())
                    .into_iter()
                    .filter(|t| {
                        let lifted = apply_tuple(action, points, t);
                        diameter_of(space, &lifted) <= qdiam + EPS
                    })
                    .collect();
                match failure {
                    LiftFailure::NoLift => achieving.is_empty(),
                    LiftFailure::TwoLifts { first, second } => {
                        first != second && achieving.contains(first) && achieving.contains(second)
                    }
                }
            }
            Witness::Nerve {
                orbits,
                points,
                failure,
            } => {
                let qm = quotient.metric();
                let shared = (0..qm.len()).any(|w| orbits.iter().all(|&a| lt.admits(qm.d(a, w), r)));
                if !shared || !points_match(quotient, orbits, points) {
                    return false;
                }
                let has_witness = |t: &Vec<usize>| {
                    let lifted = apply_tuple(action, points, t);
                    (0..space.len()).any(|y| lifted.iter().all(|&p| lt.admits(space.d(p, y), r)))
                };
                match failure {
                    LiftFailure::NoLift => !all_tuples(action, points.len()).iter().any(has_witness),
                    LiftFailure::TwoLifts { first, second } => {
                        first != second && first[0] == 0 && second[0] == 0 && has_witness(first) && has_witness(second)
                    }
                }
            }
        }
    }
}

fn points_match(quotient: &QuotientSpace, orbits: &[usize], points: &[usize]) -> bool {
    orbits.len() == points.len() && orbits.iter().zip(points).all(|(&a, &p)| quotient.proj()[p] == a)
}

fn apply_tuple(action: &IsometricAction, points: &[usize], tuple: &[usize]) -> Vec<usize> {
    points.iter().zip(tuple).map(|(&p, &g)| action.apply(g, p)).collect()
}

/// Every tuple with first entry the identity.
fn all_tuples(action: &IsometricAction, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0usize]];
    for _ in 1..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..action.order()).map(move |g| {
                    let mut t = t.clone();
                    t.push(g);
                    t
                })
            })
            .collect();
    }
    out
}

fn diameter_of(space: &FiniteMetricSpace, points: &[usize]) -> f64 {
    let mut diam: f64 = 0.0;
    for (i, &a) in points.iter().enumerate() {
        for &b in &points[i + 1..] {
            diam = diam.max(space.d(a, b));
        }
    }
    diam
}

#[derive(Debug, Clone, PartialEq)]
pub enum CheckOutcome {
    Pass,
    Fail(Witness),
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, CheckOutcome::Pass)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            CheckOutcome::Pass => None,
            CheckOutcome::Fail(w) => Some(w),
        }
    }
}

/// Result of maximizing one property over the critical values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub kind: ActionProperty,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    /// Largest critical value at which the check passes; `+∞` when vacuous.
    #[serde(with = "crate::scale::opt")]
    pub passes_at: Option<f64>,
    /// Smallest critical value at which the check fails.
    #[serde(with = "crate::scale::opt")]
    pub fails_at: Option<f64>,
    /// The group is trivial and the condition holds at every scale.
    pub vacuous: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// `fails_at - passes_at`: the continuum threshold lies in between.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
}

impl ThresholdReport {
    fn new(
        kind: ActionProperty,
        k_max: Option<usize>,
        passes_at: Option<f64>,
        fails_at: Option<f64>,
        witness: Option<Witness>,
    ) -> Self {
        let resolution = match (passes_at, fails_at) {
            (Some(p), Some(f)) if p.is_finite() => Some(f - p),
            _ => None,
        };
        ThresholdReport {
            kind,
            k_max,
            passes_at,
            fails_at,
            vacuous: false,
            witness,
            resolution,
        }
    }

    fn vacuous(kind: ActionProperty, k_max: Option<usize>) -> Self {
        ThresholdReport {
            kind,
            k_max,
            passes_at: Some(f64::INFINITY),
            fails_at: None,
            vacuous: true,
            witness: None,
            resolution: None,
        }
    }
}

/// Lexicographically least `(g, x)` with `g ≠ e` and `d(x, g·x) < r`.
pub fn distance_check(space: &FiniteMetricSpace, action: &IsometricAction, r: f64) -> CheckOutcome {
    for g in 1..action.order() {
        for x in 0..space.len() {
            let image = action.apply(g, x);
            let distance = space.d(x, image);
            if Convention::Lt.admits(distance, r) {
                return CheckOutcome::Fail(Witness::Distance { g, x, image, distance });
            }
        }
    }
    CheckOutcome::Pass
}

/// Lexicographically least `(g, x, y)` with `g ≠ e`, `d(x, y) < r` and `d(g·x, y) < r`.
pub fn ball_check(space: &FiniteMetricSpace, action: &IsometricAction, r: f64) -> CheckOutcome {
    for g in 1..action.order() {
        for x in 0..space.len() {
            let gx = action.apply(g, x);
            let (row, grow) = (space.row(x), space.row(gx));
            for y in 0..space.len() {
                if Convention::Lt.admits(row[y], r) && Convention::Lt.admits(grow[y], r) {
                    return CheckOutcome::Fail(Witness::Ball {
                        g,
                        x,
                        y,
                        reach: row[y].max(grow[y]),
                    });
                }
            }
        }
    }
    CheckOutcome::Pass
}

fn first_value_above(values: &[f64], threshold: f64) -> Option<f64> {
    values.iter().copied().find(|&c| c > threshold + EPS)
}

/// `min_{g ≠ e, x} d(x, g·x)`: the action is an `r`-distance action exactly
/// for `r` up to this value.
pub fn distance_threshold(space: &FiniteMetricSpace, action: &IsometricAction) -> ThresholdReport {
    if action.order() == 1 {
        return ThresholdReport::vacuous(ActionProperty::Distance, None);
    }
    let threshold = (1..action.order())
        .flat_map(|g| (0..space.len()).map(move |x| (g, x)))
        .map(|(g, x)| space.d(x, action.apply(g, x)))
        .fold(f64::INFINITY, f64::min);
    let fails_at = first_value_above(&space.critical_values(), threshold);
    let witness = fails_at.and_then(|r| distance_check(space, action, r).witness().cloned());
    ThresholdReport::new(ActionProperty::Distance, None, Some(threshold), fails_at, witness)
}

/// `min_{g ≠ e, x, y} max(d(x, y), d(g·x, y))`: the action is an `r`-ball
/// action exactly for `r` up to this value.
pub fn ball_threshold(space: &FiniteMetricSpace, action: &IsometricAction) -> ThresholdReport {
    if action.order() == 1 {
        return ThresholdReport::vacuous(ActionProperty::Ball, None);
    }
    let n = space.len();
    let threshold = (1..action.order())
        .into_par_iter()
        .map(|g| {
            let mut best = f64::INFINITY;
            for x in 0..n {
                let (row, grow) = (space.row(x), space.row(action.apply(g, x)));
                for y in 0..n {
                    best = best.min(row[y].max(grow[y]));
                }
            }
            best
        })
        .reduce(|| f64::INFINITY, f64::min);
    let fails_at = first_value_above(&space.critical_values(), threshold);
    let witness = fails_at.and_then(|r| ball_check(space, action, r).witness().cloned());
    ThresholdReport::new(ActionProperty::Ball, None, Some(threshold), fails_at, witness)
}

/// Sequential lexicographic clique walk over an upper adjacency structure.
/// `extend` decides whether a vertex may join (and computes the new state);
/// `visit` sees every accepted clique.
fn walk_cliques<S, E, V>(
    upper: &[Vec<u32>],
    max_size: usize,
    root: impl Fn(usize) -> S,
    extend: E,
    mut visit: V,
) -> ControlFlow<Witness>
where
    E: Fn(&S, usize) -> Option<S>,
    V: FnMut(&[usize]) -> ControlFlow<Witness>,
{
    fn go<S, E, V>(
        upper: &[Vec<u32>],
        max_size: usize,
        clique: &mut Vec<usize>,
        state: &S,
        candidates: &[u32],
        extend: &E,
        visit: &mut V,
    ) -> ControlFlow<Witness>
    where
        E: Fn(&S, usize) -> Option<S>,
        V: FnMut(&[usize]) -> ControlFlow<Witness>,
    {
        if clique.len() == max_size {
            return ControlFlow::Continue(());
        }
        for (i, &v) in candidates.iter().enumerate() {
            let v = v as usize;
            let Some(next) = extend(state, v) else { continue };
            clique.push(v);
            visit(clique)?;
            let rest: Vec<u32> = candidates[i + 1..]
                .iter()
                .copied()
                .filter(|u| upper[v].binary_search(u).is_ok())
                .collect();
            go(upper, max_size, clique, &next, &rest, extend, visit)?;
            clique.pop();
        }
        ControlFlow::Continue(())
    }
    for a in 0..upper.len() {
        let mut clique = vec![a];
        visit(&clique)?;
        let state = root(a);
        go(upper, max_size, &mut clique, &state, &upper[a], &extend, &mut visit)?;
    }
    ControlFlow::Continue(())
}

fn upper_adjacency(space: &FiniteMetricSpace, r: f64) -> Vec<Vec<u32>> {
    let g = neighborhood_graph(space, r, Convention::Lt);
    (0..space.len())
        .map(|v| g.neighbors(v).iter().copied().filter(|&u| u as usize > v).collect())
        .collect()
}

/// Counts lifts of `points` accepted by `viable` until two distinct ones
/// (per `uniqueness`) are found.
fn classify_lifts<P>(
    action: &IsometricAction,
    points: &[usize],
    viable: P,
    uniqueness: Uniqueness,
) -> Option<LiftFailure>
where
    P: FnMut(&[usize]) -> bool,
{
    let mut found: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for_each_lift(action, points, viable, |elements, lifted| {
        let key = match uniqueness {
            Uniqueness::Tuple => elements.to_vec(),
            Uniqueness::Set => {
                let mut s = lifted.to_vec();
                s.sort_unstable();
                s.dedup();
                s
            }
        };
        if !found.iter().any(|(k, _)| *k == key) {
            found.push((key, elements.to_vec()));
        }
        if found.len() >= 2 {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    match found.len() {
        0 => Some(LiftFailure::NoLift),
        1 => None,
        _ => Some(LiftFailure::TwoLifts {
            first: found[0].1.clone(),
            second: found[1].1.clone(),
        }),
    }
}

/// Decides the diameter-action condition at scale `r` for every set of at
/// most `k_max + 1` quotient points with quotient diameter `< r`: some lift
/// with `g_0 = e` realizes the quotient diameter, and exactly one does.
///
/// In tuple mode the repeated configuration `([x], [x])` is included, which
/// fails exactly when some point has a nontrivial stabilizer.
pub fn diameter_action_check(
    quotient: &QuotientSpace,
    r: f64,
    k_max: usize,
    uniqueness: Uniqueness,
) -> Result<CheckOutcome> {
    if k_max < 1 {
        return Err(Error::InvalidKMax);
    }
    let qm = quotient.metric();
    let base = quotient.base();
    let action = quotient.action();
    let reps = quotient.reps();
    let upper = upper_adjacency(qm, r);
    let flow = walk_cliques(
        &upper,
        k_max + 1,
        |_| (),
        |_, _| Some(()),
        |clique| {
            let (orbits, target): (Vec<usize>, f64) = if clique.len() == 1 {
                if uniqueness == Uniqueness::Set {
                    return ControlFlow::Continue(());
                }
                (vec![clique[0], clique[0]], 0.0)
            } else {
                (clique.to_vec(), diameter_of(qm, clique))
            };
            let points: Vec<usize> = orbits.iter().map(|&a| reps[a]).collect();
            let viable = |lifted: &[usize]| {
                let (&new, prev) = lifted.split_last().expect("nonempty");
                let row = base.row(new);
                prev.iter().all(|&p| row[p] <= target + EPS)
            };
            match classify_lifts(action, &points, viable, uniqueness) {
                None => ControlFlow::Continue(()),
                Some(failure) => ControlFlow::Break(Witness::Diameter {
                    orbits,
                    points,
                    quotient_diameter: target,
                    failure,
                }),
            }
        },
    );
    Ok(match flow {
        ControlFlow::Continue(()) => CheckOutcome::Pass,
        ControlFlow::Break(w) => CheckOutcome::Fail(w),
    })
}

fn ball_bitsets(space: &FiniteMetricSpace, r: f64) -> Vec<Vec<u64>> {
    let words = space.len().div_ceil(64);
    (0..space.len())
        .map(|i| {
            let mut bits = vec![0u64; words];
            for (j, &d) in space.row(i).iter().enumerate() {
                if Convention::Lt.admits(d, r) {
                    bits[j / 64] |= 1 << (j % 64);
                }
            }
            bits
        })
        .collect()
}

fn intersect_nonempty(a: &[u64], b: &[u64]) -> Option<Vec<u64>> {
    let out: Vec<u64> = a.iter().zip(b).map(|(x, y)| x & y).collect();
    out.iter().any(|&w| w != 0).then_some(out)
}

/// Decides the nerve-action condition at scale `r` for every family of at
/// most `k_max + 1` quotient balls of radius `r` with a common quotient
/// witness: exactly one lift with `g_0 = e` has a common upstairs witness.
pub fn nerve_action_check(
    quotient: &QuotientSpace,
    r: f64,
    k_max: usize,
    uniqueness: Uniqueness,
) -> Result<CheckOutcome> {
    if k_max < 1 {
        return Err(Error::InvalidKMax);
    }
    let qm = quotient.metric();
    let base = quotient.base();
    let action = quotient.action();
    let reps = quotient.reps();
    let qballs = ball_bitsets(qm, r);
    let upstairs = ball_bitsets(base, r);
    let upper = upper_adjacency(qm, 2.0 * r);
    let flow = walk_cliques(
        &upper,
        k_max + 1,
        |a| qballs[a].clone(),
        |state: &Vec<u64>, v| intersect_nonempty(state, &qballs[v]),
        |clique| {
            let orbits: Vec<usize> = if clique.len() == 1 {
                if uniqueness == Uniqueness::Set {
                    return ControlFlow::Continue(());
                }
                vec![clique[0], clique[0]]
            } else {
                clique.to_vec()
            };
            // A singleton ball always has a witness; multi-ball families were
            // filtered by the walk.
            let points: Vec<usize> = orbits.iter().map(|&a| reps[a]).collect();
            let viable = |lifted: &[usize]| {
                let mut acc = upstairs[lifted[0]].clone();
                for &p in &lifted[1..] {
                    match intersect_nonempty(&acc, &upstairs[p]) {
                        Some(next) => acc = next,
                        None => return false,
                    }
                }
                acc.iter().any(|&w| w != 0)
            };
            match classify_lifts(action, &points, viable, uniqueness) {
                None => ControlFlow::Continue(()),
                Some(failure) => ControlFlow::Break(Witness::Nerve {
                    orbits,
                    points,
                    failure,
                }),
            }
        },
    );
    Ok(match flow {
        ControlFlow::Continue(()) => CheckOutcome::Pass,
        ControlFlow::Break(w) => CheckOutcome::Fail(w),
    })
}

/// Runs one check at one scale.
pub fn check(
    quotient: &QuotientSpace,
    kind: ActionProperty,
    r: f64,
    k_max: usize,
    uniqueness: Uniqueness,
) -> Result<CheckOutcome> {
    match kind {
        ActionProperty::Distance => Ok(distance_check(quotient.base(), quotient.action(), r)),
        ActionProperty::Ball => Ok(ball_check(quotient.base(), quotient.action(), r)),
        ActionProperty::Diameter => diameter_action_check(quotient, r, k_max, uniqueness),
        ActionProperty::Nerve => nerve_action_check(quotient, r, k_max, uniqueness),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScanOptions {
    pub uniqueness: Uniqueness,
    /// Evaluate every critical value instead of stopping at the first
    /// failure, and verify that no pass follows a failure.
    pub exhaustive: bool,
}

/// Maximizes `kind` over the critical values of the quotient metric (or of
/// the base space for the distance and ball properties, whose thresholds
/// have closed forms).
pub fn threshold_scan(
    quotient: &QuotientSpace,
    kind: ActionProperty,
    k_max: usize,
    options: ScanOptions,
) -> Result<ThresholdReport> {
    match kind {
        ActionProperty::Distance => return Ok(distance_threshold(quotient.base(), quotient.action())),
        ActionProperty::Ball => return Ok(ball_threshold(quotient.base(), quotient.action())),
        _ => {}
    }
    if k_max < 1 {
        return Err(Error::InvalidKMax);
    }
    if quotient.action().order() == 1 {
        return Ok(ThresholdReport::vacuous(kind, Some(k_max)));
    }
    let values = dedup_sorted(quotient.metric().critical_values());
    let mut passes_at = None;
    let mut failure: Option<(f64, Witness)> = None;
    for &r in &values {
        let outcome = check(quotient, kind, r, k_max, options.uniqueness)?;
        match (outcome, &failure) {
            (CheckOutcome::Pass, None) => passes_at = Some(r),
            (CheckOutcome::Pass, Some((f, _))) => {
                return Err(Error::Inconsistent(format!(
                    "{kind} check fails at {f} but passes at larger scale {r}"
                )))
            }
            (CheckOutcome::Fail(w), None) => {
                failure = Some((r, w));
                if !options.exhaustive {
                    break;
                }
            }
            (CheckOutcome::Fail(_), Some(_)) => {}
        }
    }
    let (fails_at, witness) = match failure {
        Some((r, w)) => (Some(r), Some(w)),
        None => (None, None),
    };
    Ok(ThresholdReport::new(kind, Some(k_max), passes_at, fails_at, witness))
}
