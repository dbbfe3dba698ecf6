//! Bernstein-gamma functions and the law of exponential functionals of
//! killed Lévy processes.

// Guards written as !(x > a) also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod bernstein;
pub mod bgamma;
pub mod catalog;
pub mod density;
pub mod error;
pub mod expr;
pub mod levy;
pub mod mc;
pub mod mellin;
pub mod lgamma;
pub mod quad;

pub use bernstein::{Abscissae, BernsteinFunction, LevyMeasureSpec, PhiKind};
pub use error::{Error, Result};
pub use levy::{Family, LevyExponent, StripParams, Support};
pub use num_complex::Complex64;
