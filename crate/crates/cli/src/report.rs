use std::f64::consts::PI;
use std::fmt::Write as _;

use orbitrips::action::{antipodal_pairs, cyclic_shift, six_circles_rotation, torus_z14_generators};
use orbitrips::complex::vr_filtration_upto;
use orbitrips::persistence::betti_of_complex;
use orbitrips::thresholds::ScanOptions;
use orbitrips::{
    betti_at, build_quotient, close_group, generate_space, iso_check, reduce, threshold_scan, vr_complex,
    ActionProperty, Budget, ComplexKind, Convention, QuotientSpace, ShapeSpec,
};

use crate::commands::budget;
use crate::manifest::{write_text, RunManifest};
use crate::{Failure, ReportArgs};

const TOL: f64 = 1e-9;

struct Finding {
    statement: &'static str,
    ok: bool,
    detail: String,
}

fn quotient(spec: ShapeSpec, generators: Vec<Vec<u32>>) -> Result<QuotientSpace, Failure> {
    let space = generate_space(&spec)?;
    let action = close_group(space.len(), &generators, 100)?;
    Ok(build_quotient(&space, &action)?)
}

fn octahedron(budget: Budget) -> Result<Finding, Failure> {
    let c = generate_space(&ShapeSpec::EvenlySpacedCircle {
        n: 6,
        circumference: 1.0,
    })?;
    let k = vr_complex(&c, 1.0 / 3.0, Convention::Leq, 3, budget)?;
    let b = betti_of_complex(&k).values;
    Ok(Finding {
        statement: "VR of 6 evenly spaced circle points at r = 1/3 (closed) is the octahedron, a 2-sphere",
        ok: k.counts() == [6, 12, 8, 0] && b == [1, 0, 1],
        detail: format!("counts {:?}, betti {b:?}", k.counts()),
    })
}

fn antipodal_circle(budget: Budget) -> Result<Finding, Failure> {
    let q = quotient(
        ShapeSpec::EvenlySpacedCircle {
            n: 12,
            circumference: 1.0,
        },
        vec![cyclic_shift(12, 6)],
    )?;
    let report = threshold_scan(&q, ActionProperty::Diameter, 2, ScanOptions::default())?;
    let passes = report.passes_at.unwrap_or(f64::NAN);
    let below = iso_check(&q, 0.16, Convention::Lt, ComplexKind::Vr, 3, budget)?;
    let at = iso_check(&q, 1.0 / 6.0, Convention::Leq, ComplexKind::Vr, 3, budget)?;
    Ok(Finding {
        statement: "The antipodal action on a circle of circumference 1 is a 1/6-diameter action and no more",
        ok: (passes - 1.0 / 6.0).abs() < TOL && below.is_isomorphic() && !at.is_isomorphic(),
        detail: format!(
            "12 points: passes_at = {passes}, quotient VR at 0.16 (open) {}, at 1/6 (closed) {}",
            below.verdict, at.verdict
        ),
    })
}

fn six_circles(budget: Budget) -> Result<Finding, Failure> {
    let m = 20;
    let q = quotient(ShapeSpec::SixCircles { m }, vec![six_circles_rotation(m)])?;
    let cert = iso_check(&q, 1.0, Convention::Leq, ComplexKind::Vr, 3, budget)?;
    let components = vr_complex(q.base(), 1.0, Convention::Leq, 3, budget)?
        .components()
        .len();
    let quotient_betti = betti_at(q.metric(), 1.0, Convention::Leq, 3, budget)?.values;
    Ok(Finding {
        statement: "Six circles under Z/6 at r = 1: VR(X)/G ≅ VR(X/G) and VR(X) is six copies of it",
        ok: cert.is_isomorphic() && components == 6,
        detail: format!(
            "{} components, quotient betti {quotient_betti:?}, verdict {}",
            components, cert.verdict
        ),
    })
}

fn torus() -> Result<Finding, Failure> {
    let k = 42;
    let q = quotient(ShapeSpec::FlatTorusGrid { k }, torus_z14_generators(k)?)?;
    let report = threshold_scan(&q, ActionProperty::Diameter, 2, ScanOptions::default())?;
    let passes = report.passes_at.unwrap_or(f64::NAN);
    let target = 2.0 * PI / 21.0;
    Ok(Finding {
        statement: "Z/14 on the flat torus [0,2π]² is a 2π/21-diameter action, not a (2π/21 + ε)-diameter action",
        ok: (passes - target).abs() < TOL && report.witness.is_some(),
        detail: format!(
            "42×42 grid: passes_at = {passes} (2π/21 = {target}), fails_at = {}",
            report.fails_at.map_or("none".into(), |f| f.to_string())
        ),
    })
}

fn projective_plane(budget: Budget) -> Result<Finding, Failure> {
    let m = 150;
    let spec = ShapeSpec::GeodesicSphere {
        dim: 2,
        m,
        antipodal_paired: true,
        seed: 1,
    };
    let q = quotient(spec, vec![antipodal_pairs(m)])?;
    let cert = iso_check(&q, 0.12, Convention::Lt, ComplexKind::Vr, 3, budget)?;
    let barcode = reduce(&vr_filtration_upto(q.metric(), 3, 0.13, budget)?);
    let rp2 = q
        .metric()
        .critical_values()
        .into_iter()
        .filter(|&r| (0.08..=0.13).contains(&r))
        .find(|&r| barcode.betti_at(r) == [1, 1, 1]);
    Ok(Finding {
        statement:
            "Antipodal S² sample: VR(S²)/Z₂ ≅ VR(RP²) at small scale, and the quotient has the Z/2 homology of RP²",
        ok: cert.is_isomorphic() && rp2.is_some(),
        detail: format!(
            "300 points, seed 1: verdict at 0.12 (open) {}, betti (1,1,1) {}",
            cert.verdict,
            rp2.map_or("not reached".into(), |r| format!("at r = {r:.4}"))
        ),
    })
}

pub fn run(a: ReportArgs) -> Result<(), Failure> {
    let manifest = RunManifest::new("report");
    let budget = budget()?;
    let findings = [
        octahedron(budget)?,
        antipodal_circle(budget)?,
        six_circles(budget)?,
        torus()?,
        projective_plane(budget)?,
    ];
    let mut text = manifest.comment();
    for f in &findings {
        let _ = writeln!(
            text,
            "[{}] {}\n       {}",
            if f.ok { "ok" } else { "FAIL" },
            f.statement,
            f.detail
        );
    }
    let failed = findings.iter().filter(|f| !f.ok).count();
    let _ = writeln!(
        text,
        "{} of {} statements confirmed",
        findings.len() - failed,
        findings.len()
    );
    write_text(a.out.as_deref(), &text)?;
    if failed > 0 {
        return Err(Failure::Invalid(format!("{failed} statement(s) not confirmed")));
    }
    Ok(())
}
