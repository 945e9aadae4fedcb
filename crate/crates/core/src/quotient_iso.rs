//! Induced actions on complexes, quotient complexes, and certificates for the
//! canonical map from `K(X; r)/G` to `K(X/G; r)`.

use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::action::{IsometricAction, QuotientSpace};
use crate::complex::{build_complex, Budget, ComplexKind, Convention, SimplicialComplex};
use crate::error::{Error, Result};
use crate::lift::for_each_lift;

fn image(action: &IsometricAction, g: usize, simplex: &[u32]) -> Vec<u32> {
    let mut out: Vec<u32> = simplex.iter().map(|&v| action.apply(g, v as usize) as u32).collect();
    out.sort_unstable();
    out
}

/// Checks that every generator maps every simplex of `complex` onto a simplex.
/// Closure under the generators gives closure under the whole group.
pub fn induced_action(complex: &SimplicialComplex, action: &IsometricAction) -> Result<()> {
    if complex.n_vertices() != action.n() {
        return Err(Error::SizeMismatch {
            action: action.n(),
            space: complex.n_vertices(),
        });
    }
    for &g in action.generator_indices() {
        for list in complex.lists() {
            let bad = list
                .iter()
                .collect::<Vec<_>>()
                .into_par_iter()
                .find_first(|s| !list.contains(&image(action, g, s)));
            if let Some(s) = bad {
                return Err(Error::NotSimplicial { g, simplex: s.to_vec() });
            }
        }
    }
    Ok(())
}

/// One orbit of simplices under the induced action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplexOrbit {
    /// Lexicographically least member.
    pub representative: Vec<u32>,
    pub size: usize,
    /// Sorted vertex orbits of the representative, duplicates removed.
    pub projection: Vec<u32>,
    /// Two vertices of the representative lie in the same vertex orbit.
    pub degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct QuotientComplex {
    dim_cap: usize,
    orbits: Vec<Vec<SimplexOrbit>>,
    orbit_of: Vec<Vec<u32>>,
}

impl QuotientComplex {
    pub fn dim_cap(&self) -> usize {
        self.dim_cap
    }

    pub fn orbits(&self, dim: usize) -> &[SimplexOrbit] {
        &self.orbits[dim]
    }

    /// Orbit id of the `i`-th `dim`-simplex of the base complex.
    pub fn orbit_of(&self, dim: usize, i: usize) -> usize {
        self.orbit_of[dim][i] as usize
    }

    pub fn counts(&self) -> Vec<usize> {
        self.orbits.iter().map(Vec::len).collect()
    }

    /// Least degenerate orbit by dimension, then representative.
    pub fn first_degenerate(&self) -> Option<&SimplexOrbit> {
        self.orbits.iter().flatten().find(|o| o.degenerate)
    }

    pub fn has_degenerate(&self) -> bool {
        self.first_degenerate().is_some()
    }
}

/// Simplex orbits of `complex` under `action`, with canonical representatives.
pub fn quotient_complex(
    complex: &SimplicialComplex,
    action: &IsometricAction,
    proj: &[usize],
) -> Result<QuotientComplex> {
    induced_action(complex, action)?;
    let mut orbits = Vec::with_capacity(complex.lists().len());
    let mut orbit_of = Vec::with_capacity(complex.lists().len());
    for list in complex.lists() {
        let mut ids = vec![u32::MAX; list.len()];
        let mut found = Vec::new();
        for i in 0..list.len() {
            if ids[i] != u32::MAX {
                continue;
            }
            let id = found.len() as u32;
            let rep = list.get(i).to_vec();
            let mut size = 0;
            for g in 0..action.order() {
                let j = list
                    .index_of(&image(action, g, &rep))
                    .ok_or_else(|| Error::NotSimplicial {
                        g,
                        simplex: rep.clone(),
                    })?;
                if ids[j] == u32::MAX {
                    ids[j] = id;
                    size += 1;
                }
            }
            let mut projection: Vec<u32> = rep.iter().map(|&v| proj[v as usize] as u32).collect();
            projection.sort_unstable();
            projection.dedup();
            let degenerate = projection.len() < rep.len();
            found.push(SimplexOrbit {
                representative: rep,
                size,
                projection,
                degenerate,
            });
        }
        orbits.push(found);
        orbit_of.push(ids);
    }
    Ok(QuotientComplex {
        dim_cap: complex.dim_cap(),
        orbits,
        orbit_of,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IsoVerdict {
    Isomorphic,
    NotSurjective,
    NotInjective,
    Degenerate,
}

impl std::fmt::Display for IsoVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            IsoVerdict::Isomorphic => "isomorphic",
            IsoVerdict::NotSurjective => "not-surjective",
            IsoVerdict::NotInjective => "not-injective",
            IsoVerdict::Degenerate => "degenerate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum IsoCounterexample {
    /// A simplex of the quotient-space complex (on orbit indices) no lift of
    /// which is a simplex upstairs.
    NoLift { quotient_simplex: Vec<u32> },
    /// Two upstairs simplices over the same quotient simplex that no group
    /// element maps onto each other.
    DistinctLifts {
        quotient_simplex: Vec<u32>,
        first: Vec<u32>,
        second: Vec<u32>,
    },
    /// An upstairs simplex with two vertices in one orbit.
    DegenerateOrbit { simplex: Vec<u32>, orbits: Vec<u32> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoCertificate {
    pub verdict: IsoVerdict,
    pub kind: ComplexKind,
    pub convention: Convention,
    pub scale: f64,
    pub dim_cap: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<IsoCounterexample>,
    /// Simplex counts of the complex of the quotient space.
    pub quotient_space_counts: Vec<usize>,
    /// Orbit counts of the quotient of the upstairs complex.
    pub orbit_counts: Vec<usize>,
    /// Simplex counts of the upstairs complex.
    pub base_counts: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl IsoCertificate {
    pub fn is_isomorphic(&self) -> bool {
        self.verdict == IsoVerdict::Isomorphic
    }

    /// Rebuilds both complexes and re-verifies the verdict by brute force.
    pub fn replay(&self, quotient: &QuotientSpace, budget: Budget) -> Result<bool> {
        let base = build_complex(
            self.kind,
            quotient.base(),
            self.scale,
            self.convention,
            self.dim_cap,
            budget,
        )?;
        let kq = build_complex(
            self.kind,
            quotient.metric(),
            self.scale,
            self.convention,
            self.dim_cap,
            budget,
        )?;
        let action = quotient.action();
        let proj = quotient.proj();
        Ok(match (&self.verdict, &self.counterexample) {
            (IsoVerdict::Isomorphic, None) => {
                let q = quotient_complex(&base, action, proj)?;
                !q.has_degenerate() && q.counts() == kq.counts()
            }
            (IsoVerdict::Degenerate, Some(IsoCounterexample::DegenerateOrbit { simplex, .. })) => {
                let mut seen: Vec<usize> = simplex.iter().map(|&v| proj[v as usize]).collect();
                seen.sort_unstable();
                seen.dedup();
                base.contains(simplex) && seen.len() < simplex.len()
            }
            (IsoVerdict::NotSurjective, Some(IsoCounterexample::NoLift { quotient_simplex })) => {
                kq.contains(quotient_simplex) && {
                    let fibres: Vec<Vec<usize>> = quotient_simplex
                        .iter()
                        .map(|&a| action.orbit_of(quotient.reps()[a as usize]))
                        .collect::<Result<_>>()?;
                    !any_choice_is_simplex(&fibres, &base)
                }
            }
            (
                IsoVerdict::NotInjective,
                Some(IsoCounterexample::DistinctLifts {
                    quotient_simplex,
                    first,
                    second,
                }),
            ) => {
                let projects = |s: &[u32]| {
                    let mut p: Vec<u32> = s.iter().map(|&v| proj[v as usize] as u32).collect();
                    p.sort_unstable();
                    p == *quotient_simplex
                };
                kq.contains(quotient_simplex)
                    && base.contains(first)
                    && base.contains(second)
                    && projects(first)
                    && projects(second)
                    && (0..action.order()).all(|g| image(action, g, first) != *second)
            }
            _ => false,
        })
    }
}

fn any_choice_is_simplex(fibres: &[Vec<usize>], base: &SimplicialComplex) -> bool {
    fn go(fibres: &[Vec<usize>], chosen: &mut Vec<u32>, base: &SimplicialComplex) -> bool {
        if chosen.len() == fibres.len() {
            let mut s = chosen.clone();
            s.sort_unstable();
            return base.contains(&s);
        }
        for &x in &fibres[chosen.len()] {
            chosen.push(x as u32);
            if go(fibres, chosen, base) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    go(fibres, &mut Vec::new(), base)
}

enum SimplexVerdict {
    Lifts,
    NoLift,
    Distinct(Vec<u32>, Vec<u32>),
}

/// Anchored lifts of one quotient simplex: zero, one or several orbits.
fn classify(
    quotient: &QuotientSpace,
    base: &SimplicialComplex,
    q: &QuotientComplex,
    simplex: &[u32],
) -> SimplexVerdict {
    let points: Vec<usize> = simplex.iter().map(|&a| quotient.reps()[a as usize]).collect();
    let dim = simplex.len() - 1;
    let mut first: Option<(usize, Vec<u32>)> = None;
    let mut second: Option<Vec<u32>> = None;
    let sorted = |lifted: &[usize]| {
        let mut s: Vec<u32> = lifted.iter().map(|&v| v as u32).collect();
        s.sort_unstable();
        s
    };
    for_each_lift(
        quotient.action(),
        &points,
        |lifted| base.contains(&sorted(lifted)),
        |_, lifted| {
            let s = sorted(lifted);
            let id = q.orbit_of(dim, base.simplices(dim).index_of(&s).expect("lift is a simplex"));
            match &first {
                None => {
                    first = Some((id, s));
                    ControlFlow::Continue(())
                }
                Some((seen, _)) if *seen == id => ControlFlow::Continue(()),
                Some(_) => {
                    second = Some(s);
                    ControlFlow::Break(())
                }
            }
        },
    );
    match (first, second) {
        (None, _) => SimplexVerdict::NoLift,
        (Some(_), None) => SimplexVerdict::Lifts,
        (Some((_, a)), Some(b)) => SimplexVerdict::Distinct(a, b),
    }
}

/// Certifies or refutes that `x ↦ [x]` induces an isomorphism
/// `K(X; r)/G ≅ K(X/G; r)` up to `dim_cap`.
pub fn iso_check(
    quotient: &QuotientSpace,
    r: f64,
    convention: Convention,
    kind: ComplexKind,
    dim_cap: usize,
    budget: Budget,
) -> Result<IsoCertificate> {
    let base = build_complex(kind, quotient.base(), r, convention, dim_cap, budget)?;
    let kq = build_complex(kind, quotient.metric(), r, convention, dim_cap, budget)?;
    let q = quotient_complex(&base, quotient.action(), quotient.proj())?;
    let mut cert = IsoCertificate {
        verdict: IsoVerdict::Isomorphic,
        kind,
        convention,
        scale: r,
        dim_cap,
        counterexample: None,
        quotient_space_counts: kq.counts(),
        orbit_counts: q.counts(),
        base_counts: base.counts(),
        note: None,
    };
    if let Some(o) = q.first_degenerate() {
        cert.verdict = IsoVerdict::Degenerate;
        cert.counterexample = Some(IsoCounterexample::DegenerateOrbit {
            simplex: o.representative.clone(),
            orbits: o.projection.clone(),
        });
        cert.note = Some(
            "an upstairs simplex meets one orbit twice, so the quotient complex is not simplicial over the orbits"
                .into(),
        );
        return Ok(cert);
    }
    let mut no_lift: Option<Vec<u32>> = None;
    let mut distinct: Option<IsoCounterexample> = None;
    for list in kq.lists() {
        let simplices: Vec<&[u32]> = list.iter().collect();
        let verdicts: Vec<SimplexVerdict> = simplices.par_iter().map(|s| classify(quotient, &base, &q, s)).collect();
        for (s, v) in simplices.iter().zip(verdicts) {
            match v {
                SimplexVerdict::Lifts => {}
                SimplexVerdict::NoLift => {
                    no_lift.get_or_insert_with(|| s.to_vec());
                }
                SimplexVerdict::Distinct(first, second) => {
                    distinct.get_or_insert_with(|| IsoCounterexample::DistinctLifts {
                        quotient_simplex: s.to_vec(),
                        first,
                        second,
                    });
                }
            }
        }
        if no_lift.is_some() {
            break;
        }
    }
    if let Some(s) = no_lift {
        cert.verdict = IsoVerdict::NotSurjective;
        cert.counterexample = Some(IsoCounterexample::NoLift { quotient_simplex: s });
        cert.note = Some(
            "quotient simplices without a lift have every lift of strictly larger diameter or without a common witness"
                .into(),
        );
        return Ok(cert);
    }
    if let Some(c) = distinct {
        cert.verdict = IsoVerdict::NotInjective;
        cert.counterexample = Some(c);
        return Ok(cert);
    }
    // Surjective and injective; every orbit must project onto a simplex of K(X/G).
    for (dim, orbits) in q.orbits.iter().enumerate() {
        if let Some(o) = orbits.iter().find(|o| !kq.contains(&o.projection)) {
            return Err(Error::Inconsistent(format!(
                "orbit of {:?} projects to {:?}, which is not a {dim}-simplex of the quotient-space complex",
                o.representative, o.projection
            )));
        }
    }
    if cert.orbit_counts != cert.quotient_space_counts {
        return Err(Error::Inconsistent(format!(
            "bijective on lifts but counts differ: {:?} vs {:?}",
            cert.orbit_counts, cert.quotient_space_counts
        )));
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::{build_quotient, close_group, cyclic_shift, six_circles_rotation};
    use crate::complex::vr_complex;
    use crate::metric::{generate_space, FiniteMetricSpace, ShapeSpec};

    fn circle(n: usize) -> FiniteMetricSpace {
        generate_space(&ShapeSpec::EvenlySpacedCircle { n, circumference: 1.0 }).unwrap()
    }

    fn antipodal(n: usize) -> QuotientSpace {
        let c = circle(n);
        let g = close_group(n, &[cyclic_shift(n, n / 2)], 10).unwrap();
        build_quotient(&c, &g).unwrap()
    }

    #[test]
    fn induced_action_on_hexagon_and_octahedron() {
        let q = antipodal(6);
        for r in [1.0 / 6.0, 1.0 / 3.0] {
            let k = vr_complex(q.base(), r, Convention::Leq, 3, Budget::default()).unwrap();
            induced_action(&k, q.action()).unwrap();
        }
        // a non-isometric permutation breaks the hexagon
        let k = vr_complex(q.base(), 1.0 / 6.0, Convention::Leq, 2, Budget::default()).unwrap();
        let bad = close_group(6, &[vec![1, 0, 2, 3, 4, 5]], 10).unwrap();
        assert!(matches!(induced_action(&k, &bad), Err(Error::NotSimplicial { .. })));
    }

    #[test]
    fn quotient_complex_examples() {
        let q = antipodal(12);
        let k = vr_complex(q.base(), 1.0 / 6.0, Convention::Leq, 3, Budget::default()).unwrap();
        let qc = quotient_complex(&k, q.action(), q.proj()).unwrap();
        assert_eq!(&qc.counts()[..3], &[6, 12, 6]);
        assert!(!qc.has_degenerate());
        for orbits in &qc.orbits {
            for o in orbits {
                let canon = (0..q.action().order())
                    .map(|g| image(q.action(), g, &o.representative))
                    .min()
                    .unwrap();
                assert_eq!(canon, o.representative);
            }
        }

        let q = antipodal(6);
        let k = vr_complex(q.base(), 0.5, Convention::Leq, 2, Budget::default()).unwrap();
        let qc = quotient_complex(&k, q.action(), q.proj()).unwrap();
        let d = qc.first_degenerate().unwrap();
        assert_eq!(d.representative, vec![0, 3]);
    }

    #[test]
    fn hexagon_edges_under_antipodal_with_step_two() {
        // VR at 1/12 on circle(12) is the 12-cycle; orbits: 6 vertices, 6 edges
        let q = antipodal(12);
        let k = vr_complex(q.base(), 1.0 / 12.0, Convention::Leq, 2, Budget::default()).unwrap();
        let qc = quotient_complex(&k, q.action(), q.proj()).unwrap();
        assert_eq!(qc.counts(), vec![6, 6, 0]);
    }

    #[test]
    fn circle6_not_surjective_at_one_sixth() {
        let q = antipodal(6);
        let cert = iso_check(&q, 1.0 / 6.0, Convention::Leq, ComplexKind::Vr, 2, Budget::default()).unwrap();
        assert_eq!(cert.verdict, IsoVerdict::NotSurjective);
        assert_eq!(
            cert.counterexample,
            Some(IsoCounterexample::NoLift {
                quotient_simplex: vec![0, 1, 2]
            })
        );
        assert!(cert.replay(&q, Budget::default()).unwrap());
    }

    #[test]
    fn circle12_boundary() {
        let q = antipodal(12);
        let iso = iso_check(&q, 0.16, Convention::Lt, ComplexKind::Vr, 3, Budget::default()).unwrap();
        assert!(iso.is_isomorphic());
        assert!(iso.replay(&q, Budget::default()).unwrap());
        let cert = iso_check(&q, 1.0 / 6.0, Convention::Leq, ComplexKind::Vr, 3, Budget::default()).unwrap();
        assert_eq!(cert.verdict, IsoVerdict::NotSurjective);
        assert_eq!(
            cert.counterexample,
            Some(IsoCounterexample::NoLift {
                quotient_simplex: vec![0, 2, 4]
            })
        );
        assert!(cert.replay(&q, Budget::default()).unwrap());
    }

    #[test]
    fn trivial_group_is_isomorphic() {
        let c = circle(9);
        let q = build_quotient(&c, &IsometricAction::trivial(9)).unwrap();
        for kind in [ComplexKind::Vr, ComplexKind::Cech] {
            let cert = iso_check(&q, 0.3, Convention::Leq, kind, 3, Budget::default()).unwrap();
            assert!(cert.is_isomorphic());
            assert_eq!(cert.base_counts, cert.orbit_counts);
        }
    }

    #[test]
    fn six_circles_isomorphic_below_gap() {
        let m = 10;
        let s = generate_space(&ShapeSpec::SixCircles { m }).unwrap();
        let g = close_group(s.len(), &[six_circles_rotation(m)], 10).unwrap();
        let q = build_quotient(&s, &g).unwrap();
        let cert = iso_check(&q, 1.0, Convention::Leq, ComplexKind::Vr, 3, Budget::default()).unwrap();
        assert!(cert.is_isomorphic());
        let base = vr_complex(q.base(), 1.0, Convention::Leq, 3, Budget::default()).unwrap();
        assert_eq!(base.components().len(), 6);
    }

    #[test]
    fn not_injective_example() {
        // p, q, -p, -q in the plane under x -> -x: the two edge orbits {p,q} and
        // {p,-q} both project onto the single quotient edge
        let pts = [(1.5f64, 0.0f64), (0.3, 1.4), (-1.5, 0.0), (-0.3, -1.4)];
        let s = FiniteMetricSpace::from_fn(4, |i, j| {
            let (a, b) = (pts[i], pts[j]);
            ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
        });
        let g = close_group(4, &[vec![2, 3, 0, 1]], 10).unwrap();
        let q = build_quotient(&s, &g).unwrap();
        let r = s.d(0, 3).max(s.d(0, 1)) + 0.01;
        let cert = iso_check(&q, r, Convention::Lt, ComplexKind::Vr, 2, Budget::default()).unwrap();
        assert_eq!(cert.verdict, IsoVerdict::NotInjective);
        assert!(cert.replay(&q, Budget::default()).unwrap());
    }
}
