use num::complex::Complex64;
use serde::Serialize;

use crate::exact_algebra::rational::{q, q_to_f64, Q};
use crate::numerics::{poly_eval, poly_roots};
use crate::{Error, Result};

/// `x^{μ+1} + s_{μ-1}x^{μ-1} + … + s_1 x − y^ν + s0 = 0` with `λ = m/ν`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveConfig {
    pub mu: usize,
    pub nu: u32,
    pub m: i64,
    /// `(s0, s1, …, s_{μ-1})`
    pub s: Vec<Complex64>,
}

impl CurveConfig {
    pub fn new(mu: usize, nu: u32, m: i64, s: Vec<Complex64>) -> Result<Self> {
        crate::check_mu(mu)?;
        if nu < 2 {
            return Err(Error::OutOfRange(format!("ν = {nu}, need ν ≥ 2")));
        }
        if s.len() != mu {
            return Err(Error::Shape(format!("{} parameters, expected μ = {mu}", s.len())));
        }
        let c = CurveConfig { mu, nu, m, s };
        if c.lambda() <= -1.0 {
            return Err(Error::OutOfRange(format!("λ = {}/{} ≤ −1 is not integrable at simple roots", m, nu)));
        }
        Ok(c)
    }

    pub fn real(mu: usize, nu: u32, m: i64, s: &[f64]) -> Result<Self> {
        Self::new(mu, nu, m, s.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn lambda_q(&self) -> Q {
        q(self.m, self.nu as i64)
    }

    pub fn lambda(&self) -> f64 {
        q_to_f64(&self.lambda_q())
    }

    pub fn with_s0(&self, s0: Complex64) -> Self {
        let mut c = self.clone();
        c.s[0] = s0;
        c
    }

    /// Ascending coefficients of `F(z, s') + s0`.
    pub fn fiber_coeffs(&self) -> Vec<Complex64> {
        let mut c = self.s.clone();
        c.push(Complex64::new(0.0, 0.0));
        c.push(Complex64::new(1.0, 0.0));
        c
    }

    pub fn fiber(&self, z: Complex64) -> Complex64 {
        poly_eval(&self.fiber_coeffs(), z).0
    }

    /// Size of the parameters in the quasihomogeneous sense, so `|z| ~ scale` for the roots.
    pub fn scale(&self) -> f64 {
        let mu = self.mu;
        self.s.iter().enumerate().map(|(j, v)| v.norm().powf(1.0 / (mu + 1 - j) as f64)).fold(0.0, f64::max)
    }
}

/// Critical points `c` of `F(·, s')` with their critical values `t = −F(c, s')`,
/// i.e. the `s0` where the fiber acquires a multiple root.
pub fn critical_values(cfg: &CurveConfig) -> Vec<(Complex64, Complex64)> {
    let f = cfg.with_s0(Complex64::new(0.0, 0.0)).fiber_coeffs();
    let df: Vec<Complex64> = f.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect();
    let f0 = cfg.with_s0(Complex64::new(0.0, 0.0));
    poly_roots(&df).into_iter().map(|c| (c, -f0.fiber(c))).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct FiberRoots {
    #[serde(serialize_with = "crate::periods::ser_c_vec")]
    pub roots: Vec<Complex64>,
    /// indices of roots that coincide within the cluster radius
    pub clusters: Vec<Vec<usize>>,
    pub max_residual: f64,
}

impl FiberRoots {
    pub fn is_simple(&self) -> bool {
        self.clusters.iter().all(|c| c.len() == 1)
    }
}

/// Roots of `F(z,s') + s0`, sorted by real then imaginary part.
///
/// Roots closer than `1e-6·scale` form a cluster (a multiple root); a pair in the
/// ambiguous band up to `1e-4·scale` is an error, since the fiber is then too close to
/// the discriminant to decide.
pub fn roots_of_fiber(cfg: &CurveConfig) -> Result<FiberRoots> {
    let coeffs = cfg.fiber_coeffs();
    let mut roots = poly_roots(&coeffs);
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let scale = cfg.scale().max(1e-300);
    let mut max_residual = 0.0f64;
    for z in &roots {
        // residual relative to the size of the terms
        let terms: f64 = coeffs.iter().enumerate().map(|(k, c)| c.norm() * z.norm().powi(k as i32)).sum();
        max_residual = max_residual.max(cfg.fiber(*z).norm() / terms.max(scale.powi(cfg.mu as i32 + 1)));
    }
    if max_residual > 1e-10 {
        return Err(Error::Numerical(format!("root residual {max_residual:.2e}")));
    }
    let (tight, loose) = (1e-6 * scale, 1e-4 * scale);
    let n = roots.len();
    let mut cluster_of: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            let d = (roots[i] - roots[j]).norm();
            if d <= tight {
                let (a, b) = (cluster_of[i], cluster_of[j]);
                for c in cluster_of.iter_mut() {
                    if *c == b {
                        *c = a;
                    }
                }
            } else if d <= loose {
                return Err(Error::Numerical(format!("roots {i} and {j} are {d:.2e} apart: cannot decide whether they coincide")));
            }
        }
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        match clusters.iter_mut().find(|c| cluster_of[c[0]] == cluster_of[i]) {
            Some(c) => c.push(i),
            None => clusters.push(vec![i]),
        }
    }
    // report each cluster at its centroid
    for c in clusters.iter().filter(|c| c.len() > 1) {
        let mid = c.iter().map(|&i| roots[i]).sum::<Complex64>() / c.len() as f64;
        for &i in c {
            roots[i] = mid;
        }
    }
    Ok(FiberRoots { roots, clusters, max_residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fiber_examples() {
        let r = roots_of_fiber(&CurveConfig::real(2, 2, 1, &[0.0, 0.0]).unwrap()).unwrap();
        assert_eq!(r.clusters, vec![vec![0, 1, 2]]);
        let r = roots_of_fiber(&CurveConfig::real(2, 2, 1, &[2.0, -3.0]).unwrap()).unwrap();
        assert_eq!(r.clusters.len(), 2);
        assert!((r.roots[0].re + 2.0).abs() < 1e-12);
        assert!((r.roots[1] - r.roots[2]).norm() == 0.0 && (r.roots[1].re - 1.0).abs() < 1e-7);
        let r = roots_of_fiber(&CurveConfig::real(2, 2, 1, &[0.0, -1.0]).unwrap()).unwrap();
        assert!(r.is_simple());
        for (z, w) in r.roots.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((z.re - w).abs() < 1e-14 && z.im.abs() < 1e-14);
        }
    }

    #[test]
    fn near_collision_is_reported() {
        // roots 1 ± 1e-5: inside the ambiguous band
        let d = 1e-5f64;
        // (z − 1 − d)(z − 1 + d)(z + 2) = z^3 − (3 + d²) z + 2 − 2d²
        let cfg = CurveConfig::real(2, 2, 1, &[2.0 - 2.0 * d * d, -(3.0 + d * d)]).unwrap();
        assert!(matches!(roots_of_fiber(&cfg), Err(Error::Numerical(_))));
    }

    #[test]
    fn critical_values_of_the_cubic() {
        // z^3 − 3z: critical points ±1, values ∓(−2)
        let cv = critical_values(&CurveConfig::real(2, 2, 1, &[0.0, -3.0]).unwrap());
        for (c, t) in cv {
            assert!((t - Complex64::new(2.0 * c.re, 0.0)).norm() < 1e-12, "{c} {t}");
        }
    }

    #[test]
    fn lambda_must_be_integrable() {
        assert!(CurveConfig::real(2, 2, -2, &[0.0, -1.0]).is_err());
        assert!(CurveConfig::real(2, 3, -2, &[0.0, -1.0]).is_ok());
    }
}
