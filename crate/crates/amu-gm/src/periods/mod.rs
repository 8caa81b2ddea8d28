//! Numerical period integrals over vanishing cycles, and the checks they feed:
//! connection residuals, exponent fits and monodromy.

mod curve;
mod fd;
mod fit;
mod integrate;
mod monodromy;
mod residual;

pub use curve::{critical_values, roots_of_fiber, CurveConfig, FiberRoots};
pub use fd::{annihilator_fd_residual, fornberg_weights, FdReport};
pub use fit::{fit_exponent, FitCoefficient, FitCycle, FitOptions, FitResult, LadderPoint};
pub use integrate::{period, period_derivative, period_with, pochhammer_factor, CyclePath, PathKind, PeriodOptions, PeriodSample, Weight};
pub use monodromy::{composite_loop, monodromy, shift_loop, singular_points, CompositeReport, LassoReport, MonodromyOptions, MonodromyReport, ShiftLoopReport};
pub use residual::{connection_residual, eval_system, system_weights, widest_segment, ResidualReport};

use num::complex::Complex64;
use serde::ser::{SerializeSeq, Serializer};

// complex numbers go out as `[re, im]`
pub(crate) fn ser_c<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&[z.re, z.im], s)
}

pub(crate) fn ser_c_pair<S: Serializer>(p: &(Complex64, Complex64), s: S) -> Result<S::Ok, S::Error> {
    ser_c_vec(&[p.0, p.1], s)
}

pub(crate) fn ser_c_vec<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}
