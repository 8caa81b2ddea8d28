//! Truncated local expansions `Σ_{j<N} Σ_k a_{j,k} u^{ρ+b+j} log^k u`, `u = s0 - t`.
//!
//! The exponent offset `ρ` is formal: every coefficient is a polynomial in `ρ`,
//! so a single expansion stands for the whole family and a numerical value of
//! `ρ` is an evaluation away.

use num::traits::Zero;

use super::diffop::{DiffOp, OrdinaryOp};
use super::rational::{qi, Q};
use super::upoly::UPoly;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct LocalExpansion {
    pub t: Q,
    /// rational shift `b` added to the formal exponent
    pub base: Q,
    /// `a[j][k]`, polynomials in ρ
    pub a: Vec<Vec<UPoly>>,
    /// coefficients with `j >= order` are unknown
    pub order: usize,
}

impl LocalExpansion {
    /// `u^{ρ}` exactly (known to all orders up to `order`).
    pub fn power(t: Q, order: usize) -> Self {
        let mut a = vec![vec![]; order];
        if order > 0 {
            a[0] = vec![UPoly::one()];
        }
        LocalExpansion { t, base: Q::zero(), a, order }
    }

    /// `u^{r}` for a fixed rational `r`; the formal ρ is set to zero.
    pub fn fixed_power(t: Q, r: Q, order: usize) -> Self {
        let mut e = Self::power(t, order);
        e.base = r;
        e
    }

    pub fn log_rank(&self) -> usize {
        self.a.iter().map(|v| v.len()).max().unwrap_or(0)
    }

    pub fn coeff(&self, j: usize, k: usize) -> Result<UPoly> {
        if j >= self.order {
            return Err(Error::Truncation(format!("coefficient {j} requested, expansion known below {}", self.order)));
        }
        Ok(self.a[j].get(k).cloned().unwrap_or_default())
    }

    /// Lowest index `j` with a nonzero coefficient, if any within the truncation.
    pub fn valuation(&self) -> Option<usize> {
        self.a.iter().position(|v| v.iter().any(|p| !p.is_zero()))
    }

    fn trim(v: &mut Vec<UPoly>) {
        while v.last().is_some_and(|p| p.is_zero()) {
            v.pop();
        }
    }

    pub fn derivative(&self) -> Self {
        let mut out = vec![vec![]; self.order];
        for (j, row) in self.a.iter().enumerate() {
            let e = UPoly::new(vec![&self.base + qi(j as i64), Q::from_integer(1.into())]);
            let mut r = vec![UPoly::zero(); row.len()];
            for (k, c) in row.iter().enumerate() {
                r[k] = &r[k] + &(&e * c);
                if k > 0 {
                    r[k - 1] = &r[k - 1] + &c.scale(&qi(k as i64));
                }
            }
            Self::trim(&mut r);
            out[j] = r;
        }
        LocalExpansion { t: self.t.clone(), base: &self.base - qi(1), a: out, order: self.order }
    }

    /// Product with the polynomial `p(s0)` expanded at `t`.
    pub fn mul_poly(&self, p: &UPoly) -> Self {
        let tc = p.taylor_shift(&self.t);
        let mut out: Vec<Vec<UPoly>> = vec![vec![]; self.order];
        for (j, row) in self.a.iter().enumerate() {
            for (i, ci) in tc.coeffs().iter().enumerate() {
                if j + i >= self.order || ci.is_zero() {
                    continue;
                }
                let dst = &mut out[j + i];
                if dst.len() < row.len() {
                    dst.resize(row.len(), UPoly::zero());
                }
                for (k, c) in row.iter().enumerate() {
                    dst[k] = &dst[k] + &c.scale(ci);
                }
            }
        }
        for r in out.iter_mut() {
            Self::trim(r);
        }
        LocalExpansion { t: self.t.clone(), base: self.base.clone(), a: out, order: self.order }
    }

    /// Sum of two expansions at the same point whose bases differ by an integer.
    pub fn add(&self, o: &Self) -> Result<Self> {
        if self.t != o.t {
            return Err(Error::Shape("expansions at different points".into()));
        }
        let d = &self.base - &o.base;
        if !d.is_integer() {
            return Err(Error::Shape("exponent offsets differ by a non-integer".into()));
        }
        let (lo, hi) = if d <= Q::zero() { (self, o) } else { (o, self) };
        let shift = (&hi.base - &lo.base).to_integer().try_into().unwrap_or(usize::MAX);
        let order = lo.order.min(hi.order.saturating_add(shift));
        let mut out: Vec<Vec<UPoly>> = vec![vec![]; order];
        for (j, row) in lo.a.iter().enumerate().take(order) {
            out[j] = row.clone();
        }
        for (j, row) in hi.a.iter().enumerate() {
            let jj = j + shift;
            if jj >= order {
                break;
            }
            let dst = &mut out[jj];
            if dst.len() < row.len() {
                dst.resize(row.len(), UPoly::zero());
            }
            for (k, c) in row.iter().enumerate() {
                dst[k] = &dst[k] + c;
            }
            Self::trim(dst);
        }
        Ok(LocalExpansion { t: lo.t.clone(), base: lo.base.clone(), a: out, order })
    }

    /// Drops leading zero rows into the base offset.
    pub fn normalized(mut self) -> Self {
        let z = self.a.iter().take_while(|r| r.is_empty()).count();
        if z > 0 && z < self.order {
            self.a.drain(..z);
            self.base += qi(z as i64);
            self.order -= z;
        }
        self
    }

    /// Evaluates every coefficient at a numeric ρ.
    pub fn at_rho(&self, rho: &Q) -> Vec<Vec<Q>> {
        self.a.iter().map(|r| r.iter().map(|p| p.eval(rho)).collect()).collect()
    }
}

/// Applies an ordinary operator to a local expansion, exactly.
pub fn apply_ordinary(op: &OrdinaryOp, e: &LocalExpansion) -> Result<LocalExpansion> {
    let mut d = e.clone();
    let mut acc: Option<LocalExpansion> = None;
    for c in op.coeffs() {
        if !c.is_zero() {
            let term = d.mul_poly(c);
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term)?,
            });
        }
        d = d.derivative();
    }
    Ok(acc.map(LocalExpansion::normalized).unwrap_or_else(|| LocalExpansion {
        t: e.t.clone(),
        base: e.base.clone(),
        a: vec![vec![]; e.order],
        order: e.order,
    }))
}

/// `apply_op`: restrict `op` to `s' = sp` and apply it to `e`.
pub fn apply_op(op: &DiffOp, sp: &[Q], e: &LocalExpansion) -> Result<LocalExpansion> {
    apply_ordinary(&op.to_ordinary(sp)?, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_algebra::multipoly::MultiPoly;
    use crate::exact_algebra::rational::q;

    #[test]
    fn power_rule() {
        let e = LocalExpansion::power(q(1, 3), 3);
        let d = apply_ordinary(&OrdinaryOp::new(vec![UPoly::zero(), UPoly::one()]), &e).unwrap();
        assert_eq!(d.base, qi(-1));
        assert_eq!(d.coeff(0, 0).unwrap(), UPoly::x());
    }

    #[test]
    fn euler_eigenfunction() {
        let op = DiffOp::term(2, MultiPoly::var(2, 0), None, 1);
        let e = LocalExpansion::power(Q::zero(), 4);
        let r = apply_op(&op, &[qi(5)], &e).unwrap();
        assert_eq!(r.base, Q::zero());
        assert_eq!(r.coeff(0, 0).unwrap(), UPoly::x());
        assert!(r.coeff(1, 0).unwrap().is_zero());
        assert!(r.coeff(4, 0).is_err());
    }

    #[test]
    fn logs_differentiate() {
        // d/du (u^r log u) = r u^{r-1} log u + u^{r-1}
        let mut e = LocalExpansion::fixed_power(Q::zero(), q(1, 2), 2);
        e.a[0] = vec![UPoly::zero(), UPoly::one()];
        let d = e.derivative();
        let v = d.at_rho(&Q::zero());
        assert_eq!(v[0], vec![qi(1), q(1, 2)]);
    }
}
