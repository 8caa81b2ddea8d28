use num::traits::Zero;

use crate::exact_algebra::multipoly::MultiPoly;
use crate::exact_algebra::polymat::{det_bareiss, PolyMat};
use crate::exact_algebra::rational::{qi, Q};
use crate::Result;

/// Relation matrix on the unknowns `(∂K_0, …, ∂K_{2μ})`, `∂ = ∂/∂s0`.
///
/// Rows `0..μ` come from `∫ z^i (F+s0)·(F+s0)^{λ-1}`, rows `μ..=2μ` from integrating
/// `d(z^{j+1} (F+s0)^λ)` for `j = -1..μ-1`. Row `r` has right-hand side `rhs[r] · K`.
#[derive(Clone, Debug)]
pub struct SigmaSystem {
    pub mu: usize,
    pub lambda: Q,
    pub sigma: PolyMat,
    /// `rhs[r][i]` is the coefficient of `K_i` on row `r`
    pub rhs: Vec<Vec<Q>>,
}

impl SigmaSystem {
    pub fn det(&self) -> MultiPoly {
        det_bareiss(&self.sigma)
    }

    /// Pattern `(λ, …, λ, 0, -1, -2, …, -μ)` read off the diagonal of `rhs`.
    pub fn rhs_weights(&self) -> Vec<Q> {
        self.rhs.iter().map(|r| r.iter().find(|c| !c.is_zero()).cloned().unwrap_or_else(Q::zero)).collect()
    }
}

pub fn build_sigma(mu: usize, lambda: &Q) -> Result<SigmaSystem> {
    crate::check_mu(mu)?;
    let n = 2 * mu + 1;
    let z = || MultiPoly::zero(mu);
    let s = |l: usize| MultiPoly::var(mu, l);
    let mut sigma: PolyMat = Vec::with_capacity(n);
    let mut rhs = Vec::with_capacity(n);
    for i in 0..mu {
        let mut row = vec![z(); n];
        for l in 0..mu {
            row[l + i] = s(l);
        }
        row[mu + 1 + i] = MultiPoly::one(mu);
        let mut a = vec![Q::zero(); mu];
        a[i] = lambda.clone();
        sigma.push(row);
        rhs.push(a);
    }
    for j in -1..mu as isize {
        let mut row = vec![z(); n];
        for l in 1..mu {
            let c = l as isize + j;
            if c >= 0 {
                row[c as usize] = s(l).scale(&qi(l as i64));
            }
        }
        row[(mu as isize + 1 + j) as usize] = MultiPoly::constant(mu, qi(mu as i64 + 1));
        let mut a = vec![Q::zero(); mu];
        if j >= 0 {
            a[j as usize] = qi(-(j + 1) as i64);
        }
        sigma.push(row);
        rhs.push(a);
    }
    Ok(SigmaSystem { mu, lambda: lambda.clone(), sigma, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_algebra::rational::q;

    #[test]
    fn mu2_layout() {
        let sy = build_sigma(2, &q(1, 2)).unwrap();
        let txt: Vec<String> = sy.sigma[0].iter().map(|p| p.to_string()).collect();
        assert_eq!(txt, ["s0", "s1", "0", "1", "0"]);
        let txt: Vec<String> = sy.sigma[2].iter().map(|p| p.to_string()).collect();
        assert_eq!(txt, ["s1", "0", "3", "0", "0"]);
        assert_eq!(sy.rhs_weights(), vec![q(1, 2), q(1, 2), qi(0), qi(-1), qi(-2)]);
        assert!(build_sigma(9, &q(1, 2)).is_err());
    }
}
