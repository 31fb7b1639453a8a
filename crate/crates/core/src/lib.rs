//! Poisson structures on spaces of surface-group representations.
//!
//! The crate builds the extended moduli space of a surface with boundary,
//! its closed 2-form and momentum maps, the parabolic twisted cohomology of a
//! representation via Fox calculus, the alcove geometry governing where the
//! exponential map is regular, and a numerical Poisson bracket on the
//! representation space.
//!
//! Numerics are generic over [`Scalar`] (`f32`, `f64`); alcove classification
//! is additionally available over exact rationals.

pub mod error;
pub mod linalg;
pub mod scalar;

pub mod cartan_alcove;
pub mod conventions;
pub mod lie_core;
pub mod moduli_forms;
pub mod numdiff;
pub mod poisson_moduli;
pub mod quadrature;
pub mod surface_words;
pub mod twisted_cohomology;

pub use error::{Error, Result};
pub use scalar::{AlcoveCoord, Scalar};

pub type LieGroup64 = lie_core::LieGroup<f64>;
pub type LieGroup32 = lie_core::LieGroup<f32>;
pub type GroupElement64 = lie_core::GroupElement<f64>;
pub type AlgebraElement64 = lie_core::AlgebraElement<f64>;
