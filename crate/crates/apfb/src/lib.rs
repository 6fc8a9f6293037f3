//! Numerical laboratory for the Alt-Phillips free boundary problem with
//! negative-power potentials `W(u) = u^-gamma / gamma`.
//!
//! * [`apcore`]: parameters, grid fields, the energy functional, residuals, scalings
//! * [`ode1d`]: one-dimensional, angular and radial profiles
//! * [`minimize`]: discrete minimization with an explicit zero branch
//! * [`fbanalysis`]: free boundary extraction and radius-indexed diagnostics
//! * [`barriers`]: comparison functions, touching tests, the linearized problem
//! * [`gammalimit`]: rescaled energies and the perimeter limit as `gamma -> 2`

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod apcore;
pub mod barriers;
pub mod error;
pub mod fbanalysis;
pub mod fit;
pub mod gammalimit;
pub mod minimize;
pub mod ode1d;
pub mod par;
pub mod quad;

pub use apcore::{make_params, Grid, Params, Region, ScalarField};
pub use error::{Error, Result};
