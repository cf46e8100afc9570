//! Numerical core for studying finite-dimensional controls of the 2D Euler
//! equations on the torus.
//!
//! The crate is organised bottom-up:
//!
//! * [`field`], [`ops`] and [`holder`]: periodic grid functions, spectral
//!   calculus, discrete Hölder norms and random Hölder-ball samples.
//! * [`solver`]: strong solutions of the Euler system driven by a shift `z`
//!   and a force `f`, with a semi-Lagrangian transport scheme and a
//!   pseudospectral reference integrator.
//! * [`control`]: finite-dimensional control spaces, piecewise-constant
//!   control paths and the endpoint map `K(y, z) = y + S_T(z)`.
//! * [`entropy`]: packing/covering estimates of ε-entropy on finite metric
//!   clouds and the step-function ε-net for `W^{1,1}` balls.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod entropy;
pub mod error;
pub mod field;
pub mod grid;
pub mod holder;
pub mod io;
pub mod ops;
pub mod rng;
pub mod solver;
mod spectral;

pub use error::{Error, Result};
pub use field::{FieldLike, ScalarField2D, VectorField2D};
pub use grid::TorusGrid;
pub use holder::{holder_norm, sample_holder_ball, HolderIndex};
