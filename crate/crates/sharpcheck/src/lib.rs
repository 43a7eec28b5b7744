//! Numerical verification of a sharp Onofri-type trace inequality on the
//! upper half-space, its extremal functions, and the associated Liouville
//! system with nonlinear Neumann boundary condition.
//!
//! The crate is organised bottom-up: [`kernels`] holds the pointwise
//! formulas, [`extremals`] the closed-form families, [`quadrature`] the
//! integrators, and [`functionals`], [`pde_checks`], [`asymptotics`] and
//! [`limit_study`] the checks built on top of them.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod expr;
pub mod extremals;
pub mod fields;
pub mod fixtures;
pub mod functionals;
pub mod geometry;
pub mod kernels;
pub mod limit_study;
pub mod pde_checks;
pub mod quadrature;
pub mod report;
pub mod sampling;
pub mod special;
pub mod testfields;

pub use error::{Error, Result};
pub use fields::{ScalarField, SharedField, Tail};
pub use geometry::{Dimension, HalfSpacePoint, Matrix, SpaceVector};
pub use quadrature::{QuadratureResult, QuadratureSpec};
