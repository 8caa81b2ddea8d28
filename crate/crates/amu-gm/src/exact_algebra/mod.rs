//! Exact arithmetic: rationals, univariate and sparse multivariate polynomials,
//! resultants, the ∂_{s0} Weyl algebra with first-order ∂_{s'} terms, and local expansions.

pub mod diffop;
pub mod multipoly;
pub mod numfield;
pub mod polymat;
pub mod rational;
pub mod resultant;
pub mod series;
pub mod upoly;

pub use diffop::DiffOp;
pub use multipoly::MultiPoly;
pub use rational::Q;
pub use upoly::UPoly;
