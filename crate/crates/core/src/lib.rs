//! Spectral gaps of averaging operators for finite gate sets in PU(d).
//!
//! The crate is organised bottom-up:
//!
//! - [`weightlat`] enumerates the highest weights of PU(d) irreps that occur in
//!   `(U ⊗ Ū)^{⊗t}` together with their dimensions and Frobenius-Schur indicators.
//! - [`irrep`] realises those irreps as explicit unitary matrices in a
//!   Gelfand-Tsetlin basis.
//! - [`avgop`] assembles the averaging operator block by block and computes the
//!   spectral gap at a finite scale `t`.
//! - [`constants`] evaluates the explicit constants (`t0`, `alpha`, `beta`, ...)
//!   of the calculable lower bound and regenerates the reference tables.
//! - [`bounds`] combines measured gaps with those constants into lower bounds,
//!   and evaluates the ε-net word-length bounds.
//! - [`gates`] holds the gate-set data model, file I/O, Haar sampling, the
//!   projective distance and empirical ε-net experiments.

pub mod avgop;
pub mod bounds;
pub mod constants;
pub mod error;
pub mod gates;
pub mod irrep;
pub mod linalg;
pub mod weightlat;

pub use error::{GapError, Result};

/// Library version recorded in machine-readable reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
