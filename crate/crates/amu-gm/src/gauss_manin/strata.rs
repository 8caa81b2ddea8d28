use num::complex::Complex64;
use num::traits::Zero;
use serde::Serialize;

use super::connection::ConnectionSystem;
use crate::exact_algebra::polymat::{mat_eval, rank_q};
use crate::exact_algebra::rational::{q_to_f64, Q};
use crate::exact_algebra::upoly::UPoly;
use crate::numerics::{poly_roots, singular_values, CMat};
use crate::{Error, Result};

/// Position of a point of the discriminant in the stratification by the rank of `S`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StratumLabel {
    /// `μ - 1 - rank S`, or `-1` off the discriminant
    pub k: i32,
    pub rank: usize,
    /// largest multiplicity of a root of `F(z,s') + s0`
    pub root_order: usize,
    /// vanishing order of `Δ(·, s')` at this `s0`
    pub s0_multiplicity: usize,
    /// several critical points share the critical value
    pub maxwell: bool,
}

/// `F(z,s') + s0` as a polynomial in `z`.
fn fiber_poly(point: &[Q]) -> UPoly {
    let mu = point.len();
    let mut c = point.to_vec();
    c.push(Q::zero());
    c.push(Q::from_integer(1.into()));
    debug_assert_eq!(c.len(), mu + 2);
    UPoly::new(c)
}

fn label(mu: usize, rank: usize, root_order: usize, mult: usize) -> StratumLabel {
    let k_root = root_order as i32 - 2;
    StratumLabel { k: mu as i32 - 1 - rank as i32, rank, root_order, s0_multiplicity: mult, maxwell: mult as i32 > k_root + 1 }
}

/// Exact query; `point = (s0, s1, …, s_{μ-1})` must satisfy `Δ = 0`.
pub fn stratum_of(cs: &ConnectionSystem, delta: &crate::exact_algebra::MultiPoly, point: &[Q]) -> Result<StratumLabel> {
    let mu = cs.mu;
    if point.len() != mu {
        return Err(Error::OutOfRange(format!("point has {} coordinates, expected {mu}", point.len())));
    }
    if !delta.eval(point).is_zero() {
        return Err(Error::NotOnDiscriminant(format!("Δ = {} at the point", delta.eval(point))));
    }
    let rank = rank_q(&mat_eval(&cs.s, point));
    let root_order = fiber_poly(point).squarefree().iter().map(|(_, m)| *m).max().unwrap_or(1);
    let line = delta.specialize_from(1, &point[1..]).to_upoly(0).expect("Δ restricted to a line");
    let mult = line.order_at(&point[0]).unwrap_or(0);
    Ok(label(mu, rank, root_order, mult))
}

/// Floating-point query: relative tolerance 1e-9 on the singular values of `S` and on `Δ`.
pub fn stratum_of_f64(cs: &ConnectionSystem, delta: &crate::exact_algebra::MultiPoly, point: &[f64]) -> Result<StratumLabel> {
    const TOL: f64 = 1e-9;
    let mu = cs.mu;
    if point.len() != mu {
        return Err(Error::OutOfRange(format!("point has {} coordinates, expected {mu}", point.len())));
    }
    let pc: Vec<Complex64> = point.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    // Δ relative to the size of its terms at the point
    let scale: f64 = delta
        .terms()
        .map(|(e, c)| q_to_f64(c).abs() * e.iter().zip(point).map(|(&k, x)| x.abs().powi(k as i32)).product::<f64>())
        .sum();
    let dv = delta.eval_c(&pc).norm();
    if dv > TOL * scale.max(1e-300) {
        return Err(Error::NotOnDiscriminant(format!("|Δ| = {dv:.3e} relative {:.3e}", dv / scale)));
    }
    let m = CMat::from_fn(mu, mu, |i, j| cs.s[i][j].eval_c(&pc));
    let sv = singular_values(&m);
    let smax = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&x| x > TOL * smax.max(1e-300)).count();
    // fiber roots, clustered
    let mut fc: Vec<Complex64> = pc.clone();
    fc.push(Complex64::new(0.0, 0.0));
    fc.push(Complex64::new(1.0, 0.0));
    let roots = poly_roots(&fc);
    let rscale = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let cl = 1e-4 * rscale;
    let root_order = roots.iter().map(|a| roots.iter().filter(|b| (*a - **b).norm() < cl).count()).max().unwrap_or(1);
    // critical values of F with multiplicity
    let mut dpoly: Vec<Complex64> = (1..mu).map(|j| pc[j] * j as f64).collect();
    dpoly.push(Complex64::new(0.0, 0.0));
    dpoly.push(Complex64::new((mu + 1) as f64, 0.0));
    let crit = poly_roots(&dpoly);
    let fval = |z: Complex64| fc.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c);
    let vscale = crit.iter().map(|&c| fval(c).norm()).fold(point[0].abs(), f64::max).max(1e-300);
    let mult = crit.iter().filter(|&&c| fval(c).norm() < 1e-6 * vscale.max(1.0)).count();
    Ok(label(mu, rank, root_order, mult))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_algebra::rational::{q, qi};
    use crate::gauss_manin::{derive_connection, discriminant};

    #[test]
    fn a2_origin_is_deepest() {
        let cs = derive_connection(2, 2, 1).unwrap();
        let d = discriminant(2).unwrap();
        let l = stratum_of(&cs, &d, &[qi(0), qi(0)]).unwrap();
        assert_eq!((l.k, l.rank, l.root_order), (1, 0, 3));
        assert!(!l.maxwell);
    }

    #[test]
    fn morse_point_mu2() {
        let cs = derive_connection(2, 2, 1).unwrap();
        let d = discriminant(2).unwrap();
        let l = stratum_of(&cs, &d, &[qi(2), qi(-3)]).unwrap();
        assert_eq!((l.k, l.root_order, l.s0_multiplicity), (0, 2, 1));
        let lf = stratum_of_f64(&cs, &d, &[2.0, -3.0]).unwrap();
        assert_eq!(lf, l);
        assert!(stratum_of(&cs, &d, &[qi(1), qi(-3)]).is_err());
    }

    #[test]
    fn generic_point_mu3_from_parametrization() {
        // (z-a)^2 (z^2 + 2az + d): s2 = d - 3a^2, s1 = 2a(a^2 - d), s0 = a^2 d
        let cs = derive_connection(3, 2, 1).unwrap();
        let d = discriminant(3).unwrap();
        let (a, dd) = (qi(1), qi(2));
        let pt = [&a * &a * &dd, qi(2) * &a * (&a * &a - &dd), &dd - qi(3) * &a * &a];
        let l = stratum_of(&cs, &d, &pt).unwrap();
        assert_eq!((l.k, l.root_order, l.maxwell), (0, 2, false));
    }

    #[test]
    fn maxwell_point_mu3() {
        // s1 = 0, s0 = s2^2/4: F + s0 = (z^2 + s2/2)^2, two critical points share a value
        let cs = derive_connection(3, 2, 1).unwrap();
        let d = discriminant(3).unwrap();
        let pt = [q(1, 4), qi(0), qi(-1)];
        let l = stratum_of(&cs, &d, &pt).unwrap();
        assert_eq!((l.k, l.rank, l.root_order, l.s0_multiplicity), (1, 1, 2, 2));
        assert!(l.maxwell);
    }
}
