//! Parameters, fields, the energy functional, residuals and scalings.

pub mod energy;
pub mod field;
pub mod params;
pub mod residual;
pub mod scaling;

pub use energy::{energy, energy_with, w_with_ghosts, EnergyBreakdown, Quadrature};
pub use field::{Grid, Region, ScalarField};
pub use params::{make_params, potential_value, Params};
pub use residual::{el_residual, max_defined, w_residual};
pub use scaling::{blowup_rescale, u_w_transform, Direction};
