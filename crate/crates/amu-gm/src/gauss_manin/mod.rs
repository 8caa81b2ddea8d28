//! The s0-direction Gauss–Manin system of the versal A_μ family.
//!
//! `K_i(s) = ∫ z^i (F(z,s') + s0)^λ dz` satisfies `S ∂K/∂s0 = (L + V) K`, obtained here
//! by eliminating the higher periods from the relation matrix Σ.

mod connection;
mod logfields;
mod sigma;
mod strata;

pub use connection::{derive_connection, derive_shifted_connection, discriminant, taylor_at, ConnectionSystem, Shift};
pub use logfields::{log_fields, lie_bracket, module_membership, LogVectorField};
pub use sigma::{build_sigma, SigmaSystem};
pub use strata::{stratum_of, stratum_of_f64, StratumLabel};
