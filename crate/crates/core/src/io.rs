//! File formats: space, action, quotient, complex, barcode and Betti files.
//!
//! JSON floats use shortest round-trip formatting, as does every TSV writer.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::action::{close_group, IsometricAction, QuotientSpace, DEFAULT_GROUP_CAP};
use crate::complex::{ComplexKind, Convention, SimplicialComplex};
use crate::error::{Error, Result};
use crate::metric::{FiniteMetricSpace, Provenance};
use crate::persistence::{Barcode, BettiVector};

/// A metric space on disk. `matrix` is the strict lower triangle in
/// row-major order (`d(1,0), d(2,0), d(2,1), …`); readers also accept the
/// triangle including the zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceFile {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub matrix: Vec<f64>,
    #[serde(default)]
    pub provenance: Provenance,
    /// Quotient exports only: orbit index of every base point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proj: Option<Vec<usize>>,
    /// Quotient exports only: base index representing every orbit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reps: Option<Vec<usize>>,
}

impl SpaceFile {
    pub fn from_space(space: &FiniteMetricSpace) -> Self {
        SpaceFile {
            n: space.len(),
            labels: space.labels().map(<[String]>::to_vec),
            matrix: space.lower_triangle(),
            provenance: space.provenance().clone(),
            proj: None,
            reps: None,
        }
    }

    pub fn from_quotient(quotient: &QuotientSpace) -> Self {
        let mut file = SpaceFile::from_space(quotient.metric());
        file.proj = Some(quotient.proj().to_vec());
        file.reps = Some(quotient.reps().to_vec());
        file
    }

    pub fn to_space(&self) -> Result<FiniteMetricSpace> {
        let space =
            FiniteMetricSpace::from_lower_triangle(self.n, &self.matrix)?.with_provenance(self.provenance.clone());
        match &self.labels {
            Some(labels) => space.with_labels(labels.clone()),
            None => Ok(space),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionFile {
    pub n: usize,
    pub generators: Vec<Vec<u32>>,
}

impl ActionFile {
    pub fn from_action(action: &IsometricAction) -> Self {
        ActionFile {
            n: action.n(),
            generators: action.generators(),
        }
    }

    pub fn to_action(&self) -> Result<IsometricAction> {
        close_group(self.n, &self.generators, DEFAULT_GROUP_CAP)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexFile {
    pub kind: ComplexKind,
    pub convention: Convention,
    pub r: f64,
    pub dim_cap: usize,
    pub n_vertices: usize,
    pub counts: Vec<usize>,
    /// Keyed by dimension.
    pub simplices: BTreeMap<String, Vec<Vec<u32>>>,
}

impl ComplexFile {
    pub fn from_complex(complex: &SimplicialComplex) -> Self {
        ComplexFile {
            kind: complex.kind(),
            convention: complex.convention(),
            r: complex.scale(),
            dim_cap: complex.dim_cap(),
            n_vertices: complex.n_vertices(),
            counts: complex.counts(),
            simplices: complex
                .lists()
                .iter()
                .enumerate()
                .map(|(d, l)| (d.to_string(), l.to_tuples()))
                .collect(),
        }
    }

    pub fn to_complex(&self) -> Result<SimplicialComplex> {
        let mut lists = Vec::new();
        for d in 0..=self.dim_cap {
            lists.push(self.simplices.get(&d.to_string()).cloned().unwrap_or_default());
        }
        Ok(SimplicialComplex::from_lists(
            self.n_vertices,
            self.kind,
            self.convention,
            self.r,
            self.dim_cap,
            lists,
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BettiFile {
    pub r: f64,
    pub convention: Convention,
    pub dim_cap: usize,
    pub betti: Vec<usize>,
    pub euler_checked: bool,
}

impl BettiFile {
    pub fn new(betti: &BettiVector, r: f64, convention: Convention) -> Self {
        BettiFile {
            r,
            convention,
            dim_cap: betti.dim_cap,
            betti: betti.values.clone(),
            euler_checked: betti.euler_checked,
        }
    }
}

/// Rows `dim<TAB>birth<TAB>death`, with `inf` for essential classes.
pub fn barcode_tsv(barcode: &Barcode) -> String {
    let mut out = String::from("dim\tbirth\tdeath\n");
    for (k, bars) in barcode.intervals.iter().enumerate() {
        for b in bars {
            if b.is_infinite() {
                let _ = writeln!(out, "{k}\t{}\tinf", b.birth);
            } else {
                let _ = writeln!(out, "{k}\t{}\t{}", b.birth, b.death);
            }
        }
    }
    out
}

/// Reads a lower triangle from CSV, one row per line: either rows
/// `1..n` of the strict triangle (`d(i,0), …, d(i,i-1)`) or rows `0..n`
/// including the zero diagonal. Blank lines are ignored.
pub fn read_lower_triangle_csv<R: Read>(reader: R) -> Result<FiniteMetricSpace> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in csv.records() {
        let record = record?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| Error::InvalidInput(format!("bad number {f:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let with_diagonal = rows.first().is_some_and(|r| r.len() == 1 && r[0] == 0.0);
    let n = if with_diagonal { rows.len() } else { rows.len() + 1 };
    let offset = usize::from(with_diagonal);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != i + 1 {
            return Err(Error::InvalidInput(format!(
                "row {} has {} entries, expected {}",
                i + 1 - offset,
                row.len(),
                i + 1
            )));
        }
    }
    let values: Vec<f64> = rows.into_iter().flatten().collect();
    FiniteMetricSpace::from_lower_triangle(n, &values)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

/// Reads a space from `.json` (space file) or `.csv` (lower triangle).
pub fn read_space(path: &Path) -> Result<FiniteMetricSpace> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let space = read_lower_triangle_csv(std::fs::File::open(path)?)?;
        return Ok(space.with_provenance(Provenance::explicit(path.display().to_string())));
    }
    read_json::<SpaceFile>(path)?.to_space()
}

pub fn read_action(path: &Path) -> Result<IsometricAction> {
    read_json::<ActionFile>(path)?.to_action()
}
