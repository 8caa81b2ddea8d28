use num::complex::Complex64;
use serde::Serialize;

use super::curve::{roots_of_fiber, CurveConfig, FiberRoots};
use super::integrate::{period_with, CyclePath, PathKind, PeriodOptions, Weight};
use crate::exact_algebra::rational::q_to_f64;
use crate::gauss_manin::ConnectionSystem;
use crate::numerics::{mat_norm, singular_values, CMat};
use crate::{Error, Result};

/// `S` and `R = L + V` at a complex parameter point.
pub fn eval_system(cs: &ConnectionSystem, s: &[Complex64]) -> (CMat, CMat) {
    let n = cs.size();
    let r = cs.r();
    let sm = CMat::from_fn(n, n, |i, j| cs.s[i][j].eval_c(s));
    let rm = CMat::from_fn(n, n, |i, j| r[i][j].eval_c(s));
    (sm, rm)
}

/// The integrand weights matching the unknowns of `cs`: `z^i`, or `(z − x0)^{k+i}` when shifted.
pub fn system_weights(cs: &ConnectionSystem) -> Vec<Weight> {
    match &cs.shift {
        None => (0..cs.size()).map(Weight::z).collect(),
        Some(sh) => (0..cs.size()).map(|i| Weight::shifted(sh.k + i, q_to_f64(&sh.x0))).collect(),
    }
}

fn check_match(cs: &ConnectionSystem, cfg: &CurveConfig) -> Result<()> {
    if cs.mu != cfg.mu {
        return Err(Error::VarMismatch(cs.mu, cfg.mu));
    }
    if (cs.nu as i64) * cfg.m != (cfg.nu as i64) * cs.m {
        return Err(Error::Shape(format!("system has λ = {}/{}, curve has {}/{}", cs.m, cs.nu, cfg.m, cfg.nu)));
    }
    Ok(())
}

/// The segment whose other roots stay farthest away, relative to its length.
pub fn widest_segment(roots: &FiberRoots) -> Result<CyclePath> {
    let r = &roots.roots;
    let mut best: Option<(f64, usize, usize)> = None;
    for a in 0..r.len() {
        for b in a + 1..r.len() {
            let len = (r[b] - r[a]).norm();
            if len == 0.0 {
                continue;
            }
            let clear = (0..r.len())
                .filter(|&j| j != a && j != b)
                .map(|j| seg_dist(r[j], r[a], r[b]))
                .fold(f64::INFINITY, f64::min);
            let score = clear / len;
            if best.is_none_or(|(s, _, _)| score > s) {
                best = Some((score, a, b));
            }
        }
    }
    best.map(|(_, a, b)| CyclePath::segment(a, b)).ok_or_else(|| Error::Numerical("no two distinct roots".into()))
}

fn seg_dist(w: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let t = ((w - a) * d.conj()).re / d.norm_sqr();
    (w - (a + d * t.clamp(0.0, 1.0))).norm()
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    /// `‖S ∂K − (L+V) K‖ / ‖(L+V) K‖`
    pub residual: f64,
    /// ratio of extreme singular values of `S`
    pub cond_s: f64,
    /// quadrature error pushed through the same ratio
    pub error_bound: f64,
    pub cycle: CyclePath,
    #[serde(serialize_with = "super::ser_c_vec")]
    pub k: Vec<Complex64>,
}

/// Checks `S ∂K/∂s0 = (L+V) K` with `∂K = λ K^{λ−1}` computed by quadrature.
/// A segment is promoted to the double loop when `λ − 1 ≤ −1`.
pub fn connection_residual(cs: &ConnectionSystem, cfg: &CurveConfig, cycle: Option<CyclePath>) -> Result<ResidualReport> {
    check_match(cs, cfg)?;
    let roots = roots_of_fiber(cfg)?;
    if !roots.is_simple() {
        return Err(Error::Numerical("fiber has a multiple root: the point is on the discriminant".into()));
    }
    let mut cycle = match cycle {
        Some(c) => c,
        None => widest_segment(&roots)?,
    };
    let lam = cfg.lambda();
    if lam - 1.0 <= -1.0 && lam != 0.0 {
        cycle.kind = PathKind::Pochhammer;
    }
    let opts = PeriodOptions::default();
    let weights = system_weights(cs);
    let n = weights.len();
    let mut k = Vec::with_capacity(n);
    let mut dk = Vec::with_capacity(n);
    let (mut ek, mut edk) = (0.0f64, 0.0f64);
    for &w in &weights {
        let p = period_with(cfg, &roots, cycle, w, lam, &opts)?;
        ek = ek.max(p.error);
        k.push(p.value);
        if lam == 0.0 {
            dk.push(Complex64::new(0.0, 0.0));
        } else {
            let d = period_with(cfg, &roots, cycle, w, lam - 1.0, &opts)?;
            edk = edk.max(d.error * lam.abs());
            dk.push(d.value * lam);
        }
    }
    let (s, r) = eval_system(cs, &cfg.s);
    let kv = CMat::from_column_slice(n, 1, &k);
    let dkv = CMat::from_column_slice(n, 1, &dk);
    let rk = &r * &kv;
    let lhs = &s * &dkv;
    let denom = mat_norm(&rk);
    if denom == 0.0 {
        return Err(Error::Numerical("(L+V)K vanishes on this cycle".into()));
    }
    let residual = mat_norm(&(lhs - &rk)) / denom;
    let sv = singular_values(&s);
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let rt = (n as f64).sqrt();
    let error_bound = (mat_norm(&s) * edk * rt + mat_norm(&r) * ek * rt) / denom;
    Ok(ResidualReport { residual, cond_s: smax / smin, error_bound, cycle, k })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_algebra::rational::q;
    use crate::gauss_manin::{derive_connection, derive_shifted_connection};

    #[test]
    fn example_point_mu2() {
        let cs = derive_connection(2, 2, 1).unwrap();
        let cfg = CurveConfig::real(2, 2, 1, &[0.25, -1.0]).unwrap();
        let rep = connection_residual(&cs, &cfg, None).unwrap();
        assert!(rep.residual < 1e-8, "{rep:?}");
        assert_eq!(rep.cycle.kind, PathKind::Segment);
    }

    #[test]
    fn negative_exponent_uses_the_double_loop() {
        let cs = derive_connection(3, 3, -1).unwrap();
        let cfg = CurveConfig::new(3, 3, -1, vec![Complex64::new(0.3, 0.1), Complex64::new(-1.0, 0.2), Complex64::new(0.1, 0.0)]).unwrap();
        let rep = connection_residual(&cs, &cfg, None).unwrap();
        assert_eq!(rep.cycle.kind, PathKind::Pochhammer);
        assert!(rep.residual < 1e-8, "{rep:?}");
    }

    #[test]
    fn shifted_system() {
        let cs = derive_shifted_connection(2, 2, 1, 1, &q(1, 3)).unwrap();
        let cfg = CurveConfig::real(2, 2, 1, &[0.25, -1.0]).unwrap();
        let rep = connection_residual(&cs, &cfg, None).unwrap();
        assert_eq!(rep.k.len(), 3);
        assert!(rep.residual < 1e-8, "{rep:?}");
    }

    #[test]
    fn mismatched_lambda() {
        let cs = derive_connection(2, 2, 1).unwrap();
        let cfg = CurveConfig::real(2, 3, 1, &[0.25, -1.0]).unwrap();
        assert!(connection_residual(&cs, &cfg, None).is_err());
    }
}
