//! Parameters, state, the nondimensional vector field, and its Jacobian.

pub mod field;
pub mod params;
pub mod state;

pub use field::{jacobian, rhs, rhs_into};
pub use params::{DimensionalParams, Params, RateAxis, PARAM_KEYS};
pub use state::{Matrix7, State, DIM};
