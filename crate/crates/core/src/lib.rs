//! Robin Laplacians on sharp infinite cones.
//!
//! The crate discretizes the Robin Laplacian on the cone
//! `{(x1, x') : x' ∈ ε x1 ω}` in stretched coordinates `(s, t)` with
//! `x = (s, ε s t)`, computes its lowest eigenvalues with a sparse
//! shift-invert Lanczos solver, and checks the small-ε law
//!
//! ```text
//! E_j ≈ -N_ω² / ((2j + n - 2)² ε²),   N_ω = |∂ω| / |ω|
//! ```
//!
//! against closed-form and semi-analytic reference values.
//!
//! Module map:
//! - [`geometry`]: cross-section catalog, `N_ω`, `R`, boundary facets.
//! - [`assembly`]: graded meshes and exactly integrated P1 forms.
//! - [`eigensolve`]: generalized symmetric eigensolver with certification.
//! - [`oracles`]: reference eigenvalues.
//! - [`asymptotics`]: ε-sweeps, fits, truncation and convergence studies.
//! - [`cli`]: command-line front end and result writers.
//! - [`verify`]: the bundled acceptance checks.

pub mod assembly;
pub mod asymptotics;
pub mod cli;
pub mod eigensolve;
mod error;
pub mod geometry;
pub mod oracles;
pub mod quadrature;
pub mod sparse;
pub mod verify;

pub use error::{Error, Result};
