//! Numerical building blocks shared by the analytic modules: error functions,
//! two-sided series, adaptive quadrature and bracketed scalar minimization.
//!
//! Everything here is a pure function of its inputs.

mod optimize;
mod quad;
mod series;
mod special;

pub use optimize::{argmin_scalar, ScalarMinimum};
pub use quad::{integrate, integrate_scaled, QuadratureSpec};
pub use series::{sum_symmetric_series, SeriesSpec};
pub use special::{erf, erfc};
