//! Numerical laboratory for the one-dimensional Gross-Pitaevskii equation
//!
//! ```text
//! i Ψ_t + Ψ_xx = Ψ (|Ψ|² − 1),    |Ψ| → 1 as |x| → ∞
//! ```
//!
//! Maps of the energy space are represented as an analytic background (a
//! modulus-one constant or a member of the traveling-wave family) plus a
//! decaying perturbation sampled on a uniform periodic grid.  On top of
//! that representation the crate provides the conserved functionals, a
//! Strang-split spectral integrator for the perturbation equation,
//! constrained gradient flows for the energy at fixed momentum, and the
//! orbital stability experiments for the black soliton.

pub mod dynamics;
pub mod error;
pub mod field;
pub mod functionals;
pub mod grid;
pub mod lab;
pub mod profiles;
pub mod spectral;
pub mod variational;

pub use error::{Error, Result};
pub use field::{Background, Field};
pub use grid::GridSpec;
pub use profiles::SolitonParams;

pub use num_complex::Complex64;
