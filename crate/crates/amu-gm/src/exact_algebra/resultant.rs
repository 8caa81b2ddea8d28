//! Resultants over Q[s0, …] by the subresultant pseudo-remainder sequence.

use num::traits::{One, Zero};

use super::multipoly::MultiPoly;
use super::rational::{qi, Q};
use crate::{Error, Result};

/// Polynomial in an auxiliary variable `z` with `MultiPoly` coefficients, ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct ZPoly {
    pub c: Vec<MultiPoly>,
}

impl ZPoly {
    pub fn new(mut c: Vec<MultiPoly>) -> Self {
        while c.last().is_some_and(|p| p.is_zero()) {
            c.pop();
        }
        ZPoly { c }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn lc(&self) -> &MultiPoly {
        self.c.last().expect("lc of zero polynomial")
    }

    pub fn derivative(&self) -> Self {
        Self::new(self.c.iter().enumerate().skip(1).map(|(k, p)| p.scale(&qi(k as i64))).collect())
    }

    fn nvars(&self) -> usize {
        self.c[0].nvars()
    }

    /// `lc(b)^{deg a - deg b + 1} a mod b`
    pub fn prem(&self, b: &ZPoly) -> ZPoly {
        let db = b.degree().expect("prem by zero");
        let da = match self.degree() {
            Some(d) if d >= db => d,
            _ => return self.clone(),
        };
        let lb = b.lc().clone();
        let mut r = self.c.clone();
        let mut count = 0;
        while r.len() > db {
            let top = r.last().unwrap().clone();
            let shift = r.len() - 1 - db;
            for p in r.iter_mut() {
                *p = &*p * &lb;
            }
            for (j, bj) in b.c.iter().enumerate() {
                r[shift + j] = &r[shift + j] - &(&top * bj);
            }
            r.pop();
            while r.last().is_some_and(|p| p.is_zero()) {
                r.pop();
            }
            count += 1;
        }
        let mut out = ZPoly::new(r);
        let extra = lb.pow((da - db + 1 - count) as u32);
        for p in out.c.iter_mut() {
            *p = &*p * &extra;
        }
        out
    }
}

fn pow(p: &MultiPoly, k: usize) -> MultiPoly {
    p.pow(k as u32)
}

fn odd(d: usize) -> bool {
    d % 2 == 1
}

/// `Res_z(a, b)`; zero inputs are rejected.
pub fn resultant(a: &ZPoly, b: &ZPoly) -> Result<MultiPoly> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::Unsupported("resultant of a zero polynomial".into()));
    }
    let n = a.nvars();
    let (mut a, mut b) = (a.clone(), b.clone());
    let mut s = Q::one();
    if a.degree() < b.degree() {
        if odd(a.degree().unwrap()) && odd(b.degree().unwrap()) {
            s = -s;
        }
        std::mem::swap(&mut a, &mut b);
    }
    if b.degree() == Some(0) {
        return Ok(pow(b.lc(), a.degree().unwrap()).scale(&s));
    }
    let mut g = MultiPoly::one(n);
    let mut h = MultiPoly::one(n);
    loop {
        let da = a.degree().unwrap();
        let db = b.degree().unwrap();
        let delta = da - db;
        if odd(da) && odd(db) {
            s = -s;
        }
        let r = a.prem(&b);
        a = b;
        let den = &g * &pow(&h, delta);
        b = ZPoly::new(r.c.iter().map(|p| p.div_exact(&den).expect("subresultant division")).collect());
        g = a.lc().clone();
        h = if delta == 0 {
            h
        } else {
            pow(&g, delta).div_exact(&pow(&h, delta - 1)).expect("subresultant h update")
        };
        if b.is_zero() {
            return Ok(MultiPoly::zero(n));
        }
        let dbn = b.degree().unwrap();
        if dbn == 0 {
            let da = a.degree().unwrap();
            let num = pow(b.lc(), da);
            let h = if da == 0 { num } else { num.div_exact(&pow(&h, da - 1)).expect("subresultant tail") };
            return Ok(h.scale(&s));
        }
    }
}

/// The versal polynomial `z^{μ+1} + s_{μ-1} z^{μ-1} + … + s_1 z + s_0` in `z`.
pub fn versal(mu: usize) -> ZPoly {
    let mut c = Vec::with_capacity(mu + 2);
    for j in 0..mu {
        c.push(MultiPoly::var(mu, j));
    }
    c.push(MultiPoly::zero(mu));
    c.push(MultiPoly::one(mu));
    ZPoly::new(c)
}

/// `Res_z(F + s0, ∂F/∂z)` for the versal A_μ family.
pub fn resultant_s0_oracle(mu: usize) -> Result<MultiPoly> {
    crate::check_mu(mu)?;
    let f = versal(mu);
    resultant(&f, &f.derivative())
}

/// Divides by the coefficient of the top power of `s0`.
pub fn monic_in_s0(p: &MultiPoly) -> Option<MultiPoly> {
    let cs = p.coeffs_in(0);
    let top = cs.last()?.as_constant()?;
    if top.is_zero() {
        return None;
    }
    Some(p.scale(&(Q::one() / top)))
}
