//! Deformed numbers, combinatorics, special functions and discrete
//! probability distributions, together with a numerical audit of the
//! identities that tie them together.
//!
//! The entry point is [`DeformationSpec`]: pick one of the predefined
//! deformation kinds (or supply a custom evaluator), then feed it to the
//! combinatorial operations, the exponential series, and the four
//! distribution families.  Everything is pure `f64` computation over
//! immutable values, safe to share across threads.
//!
//! ```
//! use rpq::DeformationSpec;
//!
//! let d = DeformationSpec::arik_coon(0.5).unwrap();
//! assert_eq!(d.number(3.0), 1.75);
//! ```
//!
//! The [`audit`] module evaluates every supported identity on a default
//! parameter grid and reports per-identity residuals; the CLI exposes it as
//! the `verify` subcommand.

pub mod audit;
pub mod combinatorics;
pub mod deformation;
pub mod distributions;
mod error;
pub mod special_functions;

pub use deformation::{DeformationDescriptor, DeformationKind, DeformationSpec, Polynomial};
pub use error::{Error, Result};
