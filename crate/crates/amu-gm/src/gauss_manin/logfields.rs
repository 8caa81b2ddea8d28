use crate::exact_algebra::multipoly::MultiPoly;
use crate::exact_algebra::polymat::det_bareiss;

use super::connection::ConnectionSystem;

/// `ξ_i = Σ_j σ_{i,j} ∂/∂s_j`, one per row of `S`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogVectorField {
    pub index: usize,
    pub coeffs: Vec<MultiPoly>,
}

impl LogVectorField {
    pub fn apply(&self, p: &MultiPoly) -> MultiPoly {
        let mut acc = MultiPoly::zero(p.nvars());
        for (j, c) in self.coeffs.iter().enumerate() {
            acc = &acc + &(c * &p.derivative(j));
        }
        acc
    }
}

pub fn log_fields(cs: &ConnectionSystem) -> Vec<LogVectorField> {
    cs.s.iter().take(cs.mu).enumerate().map(|(i, row)| LogVectorField { index: i, coeffs: row[..cs.mu].to_vec() }).collect()
}

/// Coefficients of `[a, b]` in the basis `∂/∂s_j`.
pub fn lie_bracket(a: &LogVectorField, b: &LogVectorField) -> Vec<MultiPoly> {
    (0..a.coeffs.len()).map(|j| &a.apply(&b.coeffs[j]) - &b.apply(&a.coeffs[j])).collect()
}

/// Polynomial coefficients `c` with `Σ_i c_i ξ_i = target`, if they exist (Cramer's rule plus exact division).
pub fn module_membership(fields: &[LogVectorField], target: &[MultiPoly]) -> Option<Vec<MultiPoly>> {
    let n = fields.len();
    // column i of the system matrix holds the coefficients of ξ_i
    let m: Vec<Vec<MultiPoly>> = (0..n).map(|j| (0..n).map(|i| fields[i].coeffs[j].clone()).collect()).collect();
    let d = det_bareiss(&m);
    if d.is_zero() {
        return None;
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut mi = m.clone();
        for (j, row) in mi.iter_mut().enumerate() {
            row[i] = target[j].clone();
        }
        out.push(det_bareiss(&mi).div_exact(&d)?);
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss_manin::{derive_connection, discriminant};

    #[test]
    fn tangent_to_the_discriminant() {
        for mu in 2..=4 {
            let cs = derive_connection(mu, 2, 1).unwrap();
            let d = discriminant(mu).unwrap();
            for xi in log_fields(&cs) {
                assert!(xi.apply(&d).div_exact(&d).is_some(), "mu={mu} field {}", xi.index);
            }
        }
    }

    #[test]
    fn coefficient_determinant_is_delta() {
        for mu in 2..=3 {
            let cs = derive_connection(mu, 2, 1).unwrap();
            let f = log_fields(&cs);
            let m: Vec<Vec<MultiPoly>> = f.iter().map(|x| x.coeffs.clone()).collect();
            assert_eq!(det_bareiss(&m), discriminant(mu).unwrap());
        }
    }

    #[test]
    fn involutive_mu2() {
        let cs = derive_connection(2, 2, 1).unwrap();
        let f = log_fields(&cs);
        let br = lie_bracket(&f[0], &f[1]);
        assert!(module_membership(&f, &br).is_some());
    }
}
