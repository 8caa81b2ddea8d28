//! Floating-point helpers shared by the numerical modules.

mod linalg;
mod ode;
mod quad;
mod roots;

pub use linalg::{char_poly, eigenvalues, inverse, lu_solve, mat_mul, mat_norm, singular_values, CMat};
pub use ode::{dopri5, OdeOptions, OdeStats};
pub use quad::{gauss_jacobi, gauss_kronrod_adaptive, gauss_legendre, QuadResult};
pub use roots::{poly_eval, poly_roots};
