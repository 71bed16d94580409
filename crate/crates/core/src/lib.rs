//! Factor any trace-zero complex matrix A as a commutator A = BC - CB with a
//! normal B whose spectrum lies in the closed unit square, and emit
//! machine-checkable certificates (exact residuals, per-level norm bounds,
//! pavings, lower-bound witnesses) alongside the factors.
//!
//! Modules mirror the pipeline: [`mat`] holds dense complex matrices and
//! norms, [`zerodiag`] the unitary reduction to zero diagonal, [`lattice`]
//! the self-similar spectra, [`sylvester`] the separated-spectrum solvers,
//! [`factor`] the recursive constructions, [`paving`] the paving search and
//! witnesses, and [`mmio`]/[`report`] the file formats.

pub mod error;
pub mod factor;
pub mod lattice;
pub mod mat;
pub mod mmio;
pub mod paving;
pub mod report;
pub mod sylvester;
pub mod zerodiag;

pub use error::{Error, Result};
pub use mat::ComplexMatrix;
