//! Applies an annihilating operator to a quadrature period by finite differences on a
//! tensor stencil in `(s0, s_j)`. This deliberately avoids the analytic `∂/∂s0` so it
//! tests the operator and the quadrature independently of the connection matrices.

use num::complex::Complex64;
use serde::Serialize;

use super::curve::{critical_values, roots_of_fiber, CurveConfig};
use super::integrate::{period_with, CyclePath, PeriodOptions, Weight};
use super::residual::widest_segment;
use crate::exact_algebra::rational::q_to_f64;
use crate::fuchs::FuchsOperator;
use crate::par::{self, Exec};
use crate::{Error, Result};

/// Fornberg's weights for derivatives `0..=m` at `x0` from the nodes `xs`; `w[k][i]`.
pub fn fornberg_weights(x0: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

#[derive(Clone, Debug, Serialize)]
pub struct FdReport {
    /// `|𝒫K| / Σ |terms|`
    pub residual: f64,
    pub terms_abs_sum: f64,
    pub h_s0: f64,
    pub stencil_points: usize,
    pub cycle: CyclePath,
}

const HALF: i32 = 4;

/// `𝒫 K` at `cfg.s` for `K = ∫ (z − x0)^k (F+s0)^λ dz` on `cycle` (or the widest segment).
pub fn annihilator_fd_residual(op: &FuchsOperator, cfg: &CurveConfig, cycle: Option<CyclePath>, exec: Exec) -> Result<FdReport> {
    if op.mu != cfg.mu {
        return Err(Error::VarMismatch(op.mu, cfg.mu));
    }
    let weight = match (&op.x0, op.k) {
        (Some(x0), Some(k)) => Weight::shifted(k, q_to_f64(x0)),
        _ => Weight::z(0),
    };
    let roots = roots_of_fiber(cfg)?;
    if !roots.is_simple() {
        return Err(Error::Numerical("base point is on the discriminant".into()));
    }
    let cycle = match cycle {
        Some(c) => c,
        None => widest_segment(&roots)?,
    };
    let (za, zb) = (roots.roots[cycle.a], roots.roots[cycle.b]);
    let anchor = cfg.fiber(0.5 * (za + zb)).ln().im;
    let scale = cfg.scale().max(0.5);
    let s0 = cfg.s[0];
    let room = critical_values(cfg).iter().map(|(_, t)| (t - s0).norm()).fold(f64::INFINITY, f64::min);
    let h0 = (0.01 * scale.powi(cfg.mu as i32 + 1)).min(room / (16.0 * HALF as f64));
    // the same relative step in every weighted direction, so a clipped s0 step clips the rest
    let rel = h0 / scale.powi(cfg.mu as i32 + 1);
    let hs: Vec<f64> = (0..cfg.mu).map(|j| rel * scale.powi((cfg.mu + 1 - j) as i32)).collect();

    let offsets: Vec<f64> = (-HALF..=HALF).map(|k| k as f64).collect();
    let max_b = op.order;
    let w0 = fornberg_weights(0.0, &offsets, max_b);
    let w1 = fornberg_weights(0.0, &offsets, 1);

    // stencil nodes: (direction j or none, index along s_j, index along s0)
    let mut dirs: Vec<Option<usize>> = vec![None];
    for ((j, _), _) in op.body.terms() {
        if let Some(j) = j {
            if !dirs.contains(&Some(*j)) {
                dirs.push(Some(*j));
            }
        }
    }
    let mut nodes: Vec<(Option<usize>, i32, i32)> = Vec::new();
    for d in &dirs {
        let inner: Vec<i32> = if d.is_some() { (-HALF..=HALF).collect() } else { vec![0] };
        for &a in &inner {
            for b in -HALF..=HALF {
                nodes.push((*d, a, b));
            }
        }
    }
    let values = par::map(exec, &nodes, |&(d, a, b)| -> Result<Complex64> {
        let mut c = cfg.clone();
        c.s[0] += hs[0] * b as f64;
        if let Some(j) = d {
            c.s[j] += hs[j] * a as f64;
        }
        let r = roots_of_fiber(&c)?;
        let near = |w: Complex64, skip: Option<usize>| -> usize {
            (0..r.roots.len()).filter(|&i| Some(i) != skip).min_by(|&i, &k| (r.roots[i] - w).norm().total_cmp(&(r.roots[k] - w).norm())).unwrap()
        };
        let ia = near(za, None);
        let ib = near(zb, Some(ia));
        let po = PeriodOptions { anchor: Some(anchor), ..PeriodOptions::default() };
        Ok(period_with(&c, &r, CyclePath { a: ia, b: ib, kind: cycle.kind }, weight, c.lambda(), &po)?.value)
    });
    let values: Vec<Complex64> = values.into_iter().collect::<Result<_>>()?;
    let lookup = |d: Option<usize>, a: i32, b: i32| -> Complex64 {
        let i = nodes.iter().position(|&n| n == (d, a, b)).expect("stencil node");
        values[i]
    };
    let mut total = Complex64::new(0.0, 0.0);
    let mut abs_sum = 0.0;
    for ((j, beta), coef) in op.body.terms() {
        let cv = coef.eval_c(&cfg.s);
        let beta = *beta as usize;
        let mut deriv = Complex64::new(0.0, 0.0);
        for (ib, b) in (-HALF..=HALF).enumerate() {
            let wb = w0[beta][ib] / hs[0].powi(beta as i32);
            match j {
                None => deriv += lookup(None, 0, b) * wb,
                Some(j) => {
                    for (ia, a) in (-HALF..=HALF).enumerate() {
                        deriv += lookup(Some(*j), a, b) * wb * (w1[1][ia] / hs[*j]);
                    }
                }
            }
        }
        let t = cv * deriv;
        total += t;
        abs_sum += t.norm();
    }
    if abs_sum == 0.0 {
        return Err(Error::Numerical("every term vanished".into()));
    }
    Ok(FdReport { residual: total.norm() / abs_sum, terms_abs_sum: abs_sum, h_s0: hs[0], stencil_points: nodes.len(), cycle })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuchs::build_annihilator;
    use crate::gauss_manin::derive_connection;

    #[test]
    fn weights_reproduce_polynomials() {
        let xs: Vec<f64> = (-4..=4).map(|k| k as f64).collect();
        let w = fornberg_weights(0.0, &xs, 3);
        // third derivative of x^3 is 6, of x^2 is 0
        let d3: f64 = xs.iter().zip(&w[3]).map(|(x, w)| x.powi(3) * w).sum();
        let d3b: f64 = xs.iter().zip(&w[3]).map(|(x, w)| x.powi(2) * w).sum();
        assert!((d3 - 6.0).abs() < 1e-10 && d3b.abs() < 1e-10);
        let d1: f64 = xs.iter().zip(&w[1]).map(|(x, w)| x.powi(7) * w).sum();
        assert!(d1.abs() < 1e-9);
    }

    #[test]
    fn mu2_operator_kills_k0() {
        let cs = derive_connection(2, 2, 1).unwrap();
        let op = build_annihilator(&cs).unwrap();
        let cfg = CurveConfig::real(2, 2, 1, &[0.25, -1.0]).unwrap();
        let r = annihilator_fd_residual(&op, &cfg, None, Exec::Auto).unwrap();
        assert!(r.residual < 1e-6, "{r:?}");
        // the operator for λ = 1/2 must not kill the λ = 1/3 period
        let other = CurveConfig::real(2, 3, 1, &[0.25, -1.0]).unwrap();
        let bad = annihilator_fd_residual(&op, &other, None, Exec::Auto).unwrap();
        assert!(bad.residual > 1e-2, "{bad:?}");
    }
}
