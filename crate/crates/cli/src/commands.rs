use std::path::Path;

use orbitrips::action::{
    antipodal_pairs, cyclic_shift, six_circles_rotation, torus_z14_generators, twelve_circles_generators,
    DEFAULT_GROUP_CAP,
};
use orbitrips::complex::vr_filtration_upto;
use orbitrips::io::{barcode_tsv, read_action, read_space, ActionFile, BettiFile, ComplexFile, SpaceFile};
use orbitrips::metric::Violation;
use orbitrips::persistence::betti_of_complex;
use orbitrips::quotient_iso::IsoCounterexample;
use orbitrips::thresholds::{check as check_property, LiftFailure, ScanOptions};
use orbitrips::{
    betti_at, build_complex, build_quotient, close_group, generate_space, homology_oracle, reduce, threshold_scan,
    vr_complex, vr_filtration, ActionProperty, Budget, FiniteMetricSpace, IsoCertificate, QuotientSpace, ShapeSpec,
    Uniqueness, Witness,
};
use serde::Serialize;

use crate::manifest::{write_json, write_text, RunManifest};
use crate::{
    BarcodeFormat, BettiArgs, CheckArgs, ComplexArgs, Failure, GenerateArgs, IsoArgs, PersistenceArgs, QuotientArgs,
    Shape, ThresholdArgs,
};

const BUDGET_VAR: &str = "ORBITRIPS_BUDGET";

pub fn budget() -> Result<Budget, Failure> {
    match std::env::var(BUDGET_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Budget)
            .map_err(|_| Failure::Usage(format!("{BUDGET_VAR}={v:?} is not a simplex count"))),
        Err(_) => Ok(Budget::default()),
    }
}

fn describe(v: &Violation) -> String {
    match v {
        Violation::NonFinite { i, j } => format!("d({i},{j}) is not finite"),
        Violation::Diagonal { i, value } => format!("d({i},{i}) = {value} is not zero"),
        Violation::Asymmetric {
            i,
            j,
            forward,
            backward,
        } => format!("d({i},{j}) = {forward} but d({j},{i}) = {backward}"),
        Violation::NotDistinct { i, j, value } => format!("distinct points {i} and {j} at distance {value}"),
        Violation::Triangle { i, j, k, excess } => format!("triangle inequality fails for ({i},{j},{k}) by {excess:e}"),
    }
}

fn load_space(path: &Path, manifest: &mut RunManifest) -> Result<FiniteMetricSpace, Failure> {
    manifest.record_input(path)?;
    let space = read_space(path)?;
    let report = space.validate_metric();
    if let Some(v) = report.violations.first() {
        return Err(Failure::Invalid(format!(
            "{}: not a metric space ({} violation(s)); first: {}, Definition metric space",
            path.display(),
            report.violations.len(),
            describe(v)
        )));
    }
    if manifest.seed.is_none() {
        manifest.seed = space.provenance().seed;
    }
    Ok(space)
}

fn load_quotient(space: &Path, action: &Path, manifest: &mut RunManifest) -> Result<QuotientSpace, Failure> {
    let space = load_space(space, manifest)?;
    manifest.record_input(action)?;
    let action = read_action(action)?;
    let q = build_quotient(&space, &action)?;
    if let Some(v) = q.validation().violations.first() {
        return Err(Failure::Invalid(format!(
            "quotient metric invalid: {}, Definition quotient metric",
            describe(v)
        )));
    }
    Ok(q)
}

fn required(value: Option<usize>, flag: &str, shape: &str) -> Result<usize, Failure> {
    value.ok_or_else(|| Failure::Usage(format!("--{flag} is required for --shape {shape}")))
}

pub fn generate(a: GenerateArgs) -> Result<(), Failure> {
    let mut manifest = RunManifest::new("generate");
    let (spec, generators) = match a.shape {
        Shape::Circle => {
            let n = required(a.n, "n", "circle")?;
            let spec = ShapeSpec::EvenlySpacedCircle {
                n,
                circumference: a.circumference,
            };
            (spec, vec![cyclic_shift(n, a.shift.unwrap_or(n / 2) % n.max(1))])
        }
        Shape::Sphere => {
            let m = required(a.m, "m", "sphere")?;
            manifest.seed = Some(a.seed);
            let spec = ShapeSpec::GeodesicSphere {
                dim: a.dim,
                m,
                antipodal_paired: a.antipodal,
                seed: a.seed,
            };
            let gens = if a.antipodal {
                vec![antipodal_pairs(m)]
            } else {
                Vec::new()
            };
            (spec, gens)
        }
        Shape::Torus => {
            let k = required(a.k, "k", "torus")?;
            let gens = if a.action_out.is_some() {
                torus_z14_generators(k)?
            } else {
                Vec::new()
            };
            (ShapeSpec::FlatTorusGrid { k }, gens)
        }
        Shape::SixCircles => {
            let m = required(a.m, "m", "six-circles")?;
            (ShapeSpec::SixCircles { m }, vec![six_circles_rotation(m)])
        }
        Shape::TwelveCircles => {
            let m = required(a.m, "m", "twelve-circles")?;
            (ShapeSpec::TwelveCircles { m }, twelve_circles_generators(m))
        }
    };
    let space = generate_space(&spec)?;
    if let Some(path) = &a.action_out {
        if generators.is_empty() {
            return Err(Failure::Usage("--action-out for a sphere needs --antipodal".into()));
        }
        let action = close_group(space.len(), &generators, DEFAULT_GROUP_CAP)?;
        write_json(Some(path), &manifest, &ActionFile::from_action(&action))?;
    }
    write_json(a.out.as_deref(), &manifest, &SpaceFile::from_space(&space))
}

pub fn quotient(a: QuotientArgs) -> Result<(), Failure> {
    let mut manifest = RunManifest::new("quotient");
    let q = load_quotient(&a.space, &a.action, &mut manifest)?;
    write_json(a.out.as_deref(), &manifest, &SpaceFile::from_quotient(&q))
}

pub fn thresholds(a: ThresholdArgs) -> Result<(), Failure> {
    let mut manifest = RunManifest::new("thresholds");
    let q = load_quotient(&a.space, &a.action, &mut manifest)?;
    let options = ScanOptions {
        uniqueness: a.lift.uniqueness(),
        exhaustive: a.exhaustive,
    };
    let report = threshold_scan(&q, a.kind.into(), a.lift.kmax, options)?;
    write_json(a.out.as_deref(), &manifest, &report)
}

#[derive(Serialize)]
struct CheckFile {
    kind: ActionProperty,
    r: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    k_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    uniqueness: Option<Uniqueness>,
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnostic: Option<String>,
}

fn lift_failure(failure: &LiftFailure) -> &'static str {
    match failure {
        LiftFailure::NoLift => "existence",
        LiftFailure::TwoLifts { .. } => "uniqueness",
    }
}

fn witness_diagnostic(w: &Witness, r: f64) -> String {
    match w {
        Witness::Distance { g, x, image, distance } => {
            format!("distance-action failed: element {g} moves {x} to {image} at distance {distance} < {r}, Definition r-distance")
        }
        Witness::Ball { g, x, y, .. } => {
            format!("ball-action failed: point {y} lies in B({x}, {r}) and in its image under element {g}, Definition r-ball")
        }
        Witness::Diameter { orbits, failure, .. } => {
            format!(
                "diameter-action {} failed for orbits {orbits:?}, Definition r-diameter",
                lift_failure(failure)
            )
        }
        Witness::Nerve { orbits, failure, .. } => {
            format!(
                "nerve-action {} failed for orbits {orbits:?}, Definition r-nerve",
                lift_failure(failure)
            )
        }
    }
}

pub fn check(a: CheckArgs) -> Result<(), Failure> {
    let mut manifest = RunManifest::new("check");
    let q = load_quotient(&a.space, &a.action, &mut manifest)?;
    let kind: ActionProperty = a.kind.into();
    let outcome = check_property(&q, kind, a.r, a.lift.kmax, a.lift.uniqueness())?;
    let lifted = matches!(kind, ActionProperty::Diameter | ActionProperty::Nerve);
    let diagnostic = outcome.witness().map(|w| witness_diagnostic(w, a.r));
    let file = CheckFile {
        kind,
        r: a.r,
        k_max: lifted.then_some(a.lift.kmax),
        uniqueness: lifted.then(|| a.lift.uniqueness()),
        passed: outcome.passed(),
        witness: outcome.witness().cloned(),
        diagnostic: diagnostic.clone(),
    };
    write_json(a.out.as_deref(), &manifest, &file)?;
    match diagnostic {
        Some(d) => Err(Failure::Invalid(d)),
        None => Ok(()),
    }
}

pub fn complex(a: ComplexArgs) -> Result<(), Failure> {
    let mut manifest = RunManifest::new("complex");
    let space = load_space(&a.space, &mut manifest)?;
    let budget = budget()?;
    let k = build_complex(a.kind.into(), &space, a.r, a.cmp.into(), a.dim_cap, budget)?;
    if let Some(path) = &a.filtration {
        let f = vr_filtration_upto(&space, a.dim_cap, a.r, budget)?;
        write_text(Some(path), &(manifest.comment() + &f.to_tsv()))?;
    }
    write_json(a.out.as_deref(), &manifest, &ComplexFile::from_complex(&k))
}

fn iso_diagnostic(cert: &IsoCertificate) -> Option<String> {
    let detail = match cert.counterexample.as_ref()? {
        IsoCounterexample::NoLift { quotient_simplex } => {
            format!("quotient simplex {quotient_simplex:?} has no lift to a simplex")
        }
        IsoCounterexample::DistinctLifts {
            quotient_simplex,
            first,
            second,
        } => {
            format!("quotient simplex {quotient_simplex:?} has lifts {first:?} and {second:?} in different orbits")
        }
        IsoCounterexample::DegenerateOrbit { simplex, orbits } => {
            format!("simplex {simplex:?} has several vertices in orbit(s) {orbits:?}")
        }
    };
    Some(format!(
        "{} complex at r = {} ({}): quotient map is {}: {detail}",
        cert.kind, cert.scale, cert.convention, cert.verdict
    ))
}

pub fn iso_check(a: IsoArgs) -> Result<(), Failure> {
    let mut manifest = RunManifest::new("iso-check");
    let q = load_quotient(&a.space, &a.action, &mut manifest)?;
    let cert = orbitrips::iso_check(&q, a.r, a.cmp.into(), a.kind.into(), a.dim_cap, budget()?)?;
    write_json(a.out.as_deref(), &manifest, &cert)?;
    match iso_diagnostic(&cert) {
        Some(d) => Err(Failure::Invalid(d)),
        None => Ok(()),
    }
}

pub fn persistence(a: PersistenceArgs) -> Result<(), Failure> {
    let mut manifest = RunManifest::new("persistence");
    let space = load_space(&a.space, &mut manifest)?;
    let filtration = match a.max_scale {
        Some(m) => vr_filtration_upto(&space, a.dim_cap, m, budget()?)?,
        None => vr_filtration(&space, a.dim_cap, budget()?)?,
    };
    let barcode = reduce(&filtration);
    match a.format {
        BarcodeFormat::Tsv => write_text(a.out.as_deref(), &(manifest.comment() + &barcode_tsv(&barcode))),
        BarcodeFormat::Json => write_json(a.out.as_deref(), &manifest, &barcode),
    }
}

pub fn betti(a: BettiArgs) -> Result<(), Failure> {
    let mut manifest = RunManifest::new("betti");
    let space = load_space(&a.space, &mut manifest)?;
    let budget = budget()?;
    let b = if a.oracle {
        let complex = vr_complex(&space, a.r, a.cmp.into(), a.dim_cap, budget)?;
        let fast = betti_of_complex(&complex);
        let dense = homology_oracle(&complex)?;
        if fast.values != dense.values {
            return Err(Failure::Io(format!(
                "sparse ranks {:?} disagree with the oracle {:?}",
                fast.values, dense.values
            )));
        }
        fast
    } else {
        betti_at(&space, a.r, a.cmp.into(), a.dim_cap, budget)?
    };
    write_json(a.out.as_deref(), &manifest, &BettiFile::new(&b, a.r, a.cmp.into()))
}
