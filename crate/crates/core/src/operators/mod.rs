//! Fractional averages and dyadic fractional maximal operators on set
//! fields, with a scalar reference implementation.

mod exponents;
mod grid;
mod maximal;

pub use exponents::ExponentConfig;
pub use grid::{cube_family, cubes_at_level, DyadicCube, Translation};
pub use maximal::{
    dyadic_frac_maximal, frac_average, full_maximal_envelope, maximal_norm_values, scalar_frac_maximal,
    sublinearity_check, MaximalEnvelope, SublinearityVerdict,
};
