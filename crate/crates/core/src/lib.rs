//! Finite metric spaces with isometric group actions: quotients, the
//! quantitative action properties, Vietoris–Rips and Čech complexes of
//! quotients versus quotients of complexes, and Z/2 persistence.

pub mod action;
pub mod complex;
pub mod error;
pub mod io;
pub mod lift;
pub mod metric;
pub mod persistence;
pub mod quotient_iso;
pub mod scale;
pub mod thresholds;

pub use action::{build_quotient, close_group, verify_isometric, IsometricAction, QuotientSpace};
pub use complex::{
    build_complex, cech_complex, vr_complex, vr_filtration, Budget, ComplexKind, Convention, SimplicialComplex,
    VRFiltration,
};
pub use error::{Error, Result};
pub use metric::{generate_space, FiniteMetricSpace, ShapeSpec, EPS};
pub use persistence::{betti_at, homology_oracle, reduce, Barcode, BettiVector};
pub use quotient_iso::{iso_check, quotient_complex, IsoCertificate, IsoVerdict};
pub use thresholds::{threshold_scan, ActionProperty, CheckOutcome, ThresholdReport, Uniqueness, Witness};
