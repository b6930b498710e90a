//! Analysis of vectorial Boolean functions over GF(2^m): differential and
//! Walsh spectra, APN / AB / crookedness tests, group-algebra ideal
//! dimensions as CCZ invariants, a catalog of known APN families and an
//! exhaustive APN binomial search.

pub mod catalog;
pub mod error;
pub mod field;
pub mod function;
pub mod invariants;
pub mod search;
pub mod spectra;

pub use error::{Error, Result};
pub use field::{build_field, FieldSpec};
pub use function::{LinearMap, VectorialFunction};
