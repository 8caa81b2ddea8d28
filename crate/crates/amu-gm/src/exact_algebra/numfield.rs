//! Arithmetic in Q[x]/(g) for exact work at algebraic points.
//!
//! `g` need not be irreducible. An operation that meets a zero divisor
//! reports the factor of `g` it found, and the caller retries in the smaller ring.

use num::traits::{One, Zero};

use super::rational::Q;
use super::upoly::UPoly;

#[derive(Clone, Debug, PartialEq)]
pub struct NumberField {
    modulus: UPoly,
}

/// A nontrivial monic factor of the modulus, discovered while inverting.
#[derive(Clone, Debug, PartialEq)]
pub struct Split(pub UPoly);

impl NumberField {
    pub fn new(g: &UPoly) -> Self {
        assert!(g.degree().unwrap_or(0) >= 1, "modulus must have positive degree");
        NumberField { modulus: g.monic() }
    }

    /// The field Q, presented as Q[x]/(x - t) so that `gen() = t`.
    pub fn rational(t: &Q) -> Self {
        Self::new(&UPoly::linear_root(t))
    }

    pub fn modulus(&self) -> &UPoly {
        &self.modulus
    }

    pub fn degree(&self) -> usize {
        self.modulus.degree().unwrap()
    }

    pub fn reduce(&self, a: &UPoly) -> UPoly {
        a.div_rem(&self.modulus).1
    }

    pub fn gen(&self) -> UPoly {
        self.reduce(&UPoly::x())
    }

    pub fn constant(&self, q: Q) -> UPoly {
        UPoly::constant(q)
    }

    pub fn mul(&self, a: &UPoly, b: &UPoly) -> UPoly {
        self.reduce(&(a * b))
    }

    pub fn is_zero(&self, a: &UPoly) -> bool {
        self.reduce(a).is_zero()
    }

    pub fn as_rational(&self, a: &UPoly) -> Option<Q> {
        let r = self.reduce(a);
        match r.degree() {
            None => Some(Q::zero()),
            Some(0) => Some(r.coeff(0)),
            _ => None,
        }
    }

    pub fn inv(&self, a: &UPoly) -> Result<UPoly, Split> {
        let a = self.reduce(a);
        assert!(!a.is_zero(), "inverse of zero");
        // extended Euclid on (a, g), tracking the coefficient of a
        let (mut r0, mut r1) = (a, self.modulus.clone());
        let (mut s0, mut s1) = (UPoly::one(), UPoly::zero());
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            let s = &s0 - &(&q * &s1);
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
        }
        if r0.degree() != Some(0) {
            return Err(Split(r0.monic()));
        }
        let c = Q::one() / r0.coeff(0);
        Ok(self.reduce(&s0.scale(&c)))
    }

    /// Trace of multiplication by `a` on the basis `1, x, …, x^{d-1}`.
    pub fn trace(&self, a: &UPoly) -> Q {
        let mut xi = UPoly::one();
        let mut t = Q::zero();
        for i in 0..self.degree() {
            t += self.mul(a, &xi).coeff(i);
            xi = self.mul(&xi, &UPoly::x());
        }
        t
    }

    /// `p(at)` for `p ∈ Q[s]`.
    pub fn eval(&self, p: &UPoly, at: &UPoly) -> UPoly {
        let mut acc = UPoly::zero();
        for c in p.coeffs().iter().rev() {
            acc = self.reduce(&(&(&acc * at) + &UPoly::constant(c.clone())));
        }
        acc
    }

    /// Coefficients of `p(at + u)` in powers of `u`.
    pub fn taylor(&self, p: &UPoly, at: &UPoly) -> Vec<UPoly> {
        let mut out = Vec::new();
        let mut d = p.clone();
        let mut fact = Q::one();
        let mut k = 0u64;
        while !d.is_zero() {
            out.push(self.eval(&d, at).scale(&(Q::one() / &fact)));
            d = d.derivative();
            k += 1;
            fact *= Q::from_integer(k.into());
        }
        out
    }

    /// Vanishing order of `p` at `at`.
    pub fn order_at(&self, p: &UPoly, at: &UPoly) -> Option<usize> {
        if p.is_zero() {
            return None;
        }
        self.taylor(p, at).iter().position(|c| !self.is_zero(c))
    }
}
