//! Gauss–Manin system of the versal A_μ deformation `z^{μ+1} + s_{μ-1} z^{μ-1} + … + s_1 z + s_0`:
//! exact construction of the connection, its annihilating operators and exponents,
//! the multiplicity bounds, and numerical period integrals that check all of it.

pub mod bounds;
pub mod error;
pub mod exact_algebra;
pub mod fuchs;
pub mod gauss_manin;
pub mod numerics;
pub mod par;
pub mod periods;

pub use error::{Error, Result};

/// Largest μ accepted anywhere in the crate.
pub const MAX_MU: usize = 8;

pub(crate) fn check_mu(mu: usize) -> Result<()> {
    if (2..=MAX_MU).contains(&mu) {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("mu = {mu}, supported range is 2..={MAX_MU}")))
    }
}
