//! Simple set-valued functions on the dyadic cells of `[0,1)^n`.

mod domain;
mod field;
mod norms;

pub use domain::{DyadicDomain, MAX_LEVEL};
pub use field::{
    aumann_integral, aumann_integral_all, magnitude_bound_check, random_simple_field, SetField,
};
pub use norms::{
    cell_values, distribution, dp_distance, lp_norm, lp_of_values, weak_norm, DistributionTable,
    NormField,
};
