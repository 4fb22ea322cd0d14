//! p-adic q-expansions of Hilbert modular forms over real quadratic fields:
//! the operator algebra on truncated expansions, Hecke root data and Euler
//! factors, symbolic identity checks, and Lambda-adic families.

pub mod error;
pub mod family;
pub mod hecke_spectral;
pub mod padic;
pub mod pipeline;
pub mod qexpansion;
pub mod quad_field;
pub mod suites;
pub mod symbolic;

pub use error::{Error, Result};
pub use padic::{Coeff, PadicNum, QuadExt, RootPair};
pub use quad_field::{FieldTag, PrimeSplit, QuadElement, QuadField, QuadInt, QuadRat};

/// Tag carried by every JSON document the crate emits.
pub const SCHEMA: &str = "hqx/1";

/// Quadratic extension of the p-adic base ring.
pub type QuadExtNum = QuadExt<PadicNum>;
/// Two stacked quadratic extensions, for pairs of nonsplit root pairs.
pub type Tower = QuadExt<QuadExt<PadicNum>>;
/// Field elements with exact rational coordinates.
pub type QuadElem = QuadRat;
/// Hilbert q-expansion with base-ring coefficients.
pub type HilbertQExp = qexpansion::HilbertQExpansion<PadicNum>;
/// Elliptic q-expansion with base-ring coefficients.
pub type ModularQExp = qexpansion::ModularQExpansion<PadicNum>;
pub type LaurentPoly = symbolic::LaurentPoly;
pub type GroupAlgebraElem = symbolic::GroupAlgebraElem;
