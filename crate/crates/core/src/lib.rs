//! Numerical machinery for convex-set valued Lebesgue spaces.
//!
//! Values of set-valued functions are symmetric convex polytopes in `R^d`
//! (`1 <= d <= 3`), fields are piecewise constant on the dyadic cells of
//! `[0,1)^n`, and every norm in the library is evaluated exactly on that
//! representation wherever a closed form exists.
//!
//! - [`convex_body`]: bodies, seminorms, gauges, duals and Hausdorff distances.
//! - [`matrix_calculus`]: SPD powers, weighted geometric means, matrix fields.
//! - [`set_field`]: dyadic domains, simple set-valued fields, Aumann integrals,
//!   `L^p`, weak `L^p` and distribution functions.
//! - [`operators`]: fractional averages and (translated) dyadic fractional
//!   maximal operators, with an independent scalar oracle.
//! - [`weights`]: matrix `A_p` characteristics and the reverse factorization
//!   construction.

#![forbid(unsafe_code)]
// `!(x > 0.0)` style checks also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convex_body;
mod error;
pub mod matrix_calculus;
pub mod numeric;
pub mod operators;
pub mod set_field;
pub mod weights;

pub use error::{Error, Result};
