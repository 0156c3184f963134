//! Numerical laboratory for boundary traces of harmonic functions below a
//! periodic graph `y = h(x)`.
//!
//! The crate computes the Dirichlet-to-Neumann operator and the boundary
//! derivative traces of the harmonic extension by two independent backends
//! (a conformal-map spectral method for d = 1 and a terrain-following
//! finite-difference solver for d in {1, 2}), evaluates the exact flux
//! identities and the trace inequalities these satisfy, and searches for
//! extremal configurations over trigonometric surface/data families.
//!
//! With the default `parallel` feature, batch evaluation and the inner
//! loops of the finite-difference solver run on rayon; disabling the
//! feature yields a fully sequential build with identical results.

pub mod batch;
pub mod checks;
pub mod conformal;
pub mod dtn;
pub mod error;
pub mod explorer;
pub mod field;
pub(crate) mod par;
pub mod spectral;
pub mod surface;

pub use error::{CoreError, Result};
pub use field::{FourierMode, FourierSpec, PeriodicGrid, SampledField, Spectrum};
