use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::complex::Complex64;
use num::integer::Integer;
use num::traits::{One, Signed, Zero};

use super::rational::{fmt_q, q_to_f64, qi, rationalize, Q};
use crate::numerics::poly_roots;

/// Dense univariate polynomial over Q, ascending coefficients, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct UPoly {
    c: Vec<Q>,
}

impl UPoly {
    pub fn new(mut c: Vec<Q>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        UPoly { c }
    }

    pub fn zero() -> Self {
        UPoly { c: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn constant(v: Q) -> Self {
        Self::new(vec![v])
    }

    pub fn x() -> Self {
        Self::new(vec![Q::zero(), Q::one()])
    }

    /// `x - a`
    pub fn linear_root(a: &Q) -> Self {
        Self::new(vec![-a.clone(), Q::one()])
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&v| qi(v)).collect())
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> Q {
        self.c.get(i).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn lc(&self) -> Q {
        self.c.last().cloned().unwrap_or_else(Q::zero)
    }

    pub fn scale(&self, k: &Q) -> Self {
        Self::new(self.c.iter().map(|v| v * k).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&(Q::one() / self.lc()))
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut acc = Q::zero();
        for v in self.c.iter().rev() {
            acc = acc * x + v;
        }
        acc
    }

    pub fn eval_c(&self, x: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for v in self.c.iter().rev() {
            acc = acc * x + q_to_f64(v);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, v)| v * qi(i as i64))
                .collect(),
        )
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Coefficients of `p(a + u)` as a polynomial in `u`.
    pub fn taylor_shift(&self, a: &Q) -> Self {
        let mut acc = Self::zero();
        let base = Self::new(vec![a.clone(), Q::one()]);
        for v in self.c.iter().rev() {
            acc = &(&acc * &base) + &Self::constant(v.clone());
        }
        acc
    }

    /// `p(k x)`
    pub fn rescale(&self, k: &Q) -> Self {
        let mut f = Q::one();
        let mut out = Vec::with_capacity(self.c.len());
        for v in &self.c {
            out.push(v * &f);
            f *= k;
        }
        Self::new(out)
    }

    /// Vanishing order at `x = a`.
    pub fn order_at(&self, a: &Q) -> Option<usize> {
        if self.is_zero() {
            return None;
        }
        let s = self.taylor_shift(a);
        s.c.iter().position(|v| !v.is_zero())
    }

    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.c.len() - 1;
        let inv = Q::one() / d.lc();
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut qv = vec![Q::zero(); r.len() - dd];
        for i in (0..qv.len()).rev() {
            let t = &r[i + dd] * &inv;
            if !t.is_zero() {
                for (j, dv) in d.c.iter().enumerate() {
                    r[i + j] -= &t * dv;
                }
            }
            qv[i] = t;
        }
        r.truncate(dd);
        (Self::new(qv), Self::new(r))
    }

    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        let (q, r) = self.div_rem(d);
        r.is_zero().then_some(q)
    }

    pub fn gcd(a: &Self, b: &Self) -> Self {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Clears denominators and the integer content; the sign makes the leading coefficient positive.
    pub fn primitive_integer(&self) -> Vec<BigInt> {
        if self.is_zero() {
            return Vec::new();
        }
        let mut l = BigInt::one();
        for v in &self.c {
            l = l.lcm(v.denom());
        }
        let mut ints: Vec<BigInt> = self.c.iter().map(|v| (v * Q::from_integer(l.clone())).to_integer()).collect();
        let mut g = BigInt::zero();
        for v in &ints {
            g = g.gcd(v);
        }
        if self.lc().is_negative() {
            g = -g;
        }
        for v in ints.iter_mut() {
            *v = &*v / &g;
        }
        ints
    }

    /// Yun's square-free decomposition: returns `(f_i, i)` with `p = lc * Π f_i^i`.
    pub fn squarefree(&self) -> Vec<(UPoly, usize)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let f = self.monic();
        let df = f.derivative();
        let a = Self::gcd(&f, &df);
        let mut b = f.div_exact(&a).unwrap();
        let mut c = df.div_exact(&a).unwrap();
        let mut d = &c - &b.derivative();
        let mut i = 1;
        loop {
            let g = Self::gcd(&b, &d);
            if g.degree().unwrap_or(0) > 0 {
                out.push((g.clone(), i));
            }
            b = b.div_exact(&g).unwrap();
            if b.degree().unwrap_or(0) == 0 {
                break;
            }
            c = d.div_exact(&g).unwrap();
            d = &c - &b.derivative();
            i += 1;
        }
        out
    }

    /// Rational roots with multiplicity plus the cofactor carrying every non-rational root.
    pub fn rational_roots(&self) -> (Vec<(Q, usize)>, UPoly) {
        let mut roots: Vec<(Q, usize)> = Vec::new();
        let mut rest = Self::one();
        for (f, mult) in self.squarefree() {
            let mut g = f.clone();
            let ints = g.primitive_integer();
            let lead = ints.last().cloned().unwrap_or_else(BigInt::one).abs();
            let max_den = if lead.bits() < 60 {
                lead.to_string().parse::<u64>().unwrap_or(u64::MAX)
            } else {
                u64::MAX
            };
            let cs: Vec<Complex64> = g.c.iter().map(|v| Complex64::new(q_to_f64(v), 0.0)).collect();
            for z in poly_roots(&cs) {
                if z.im.abs() > 1e-6 * (1.0 + z.re.abs()) {
                    continue;
                }
                for cand in candidate_rationals(z.re, max_den) {
                    if (q_to_f64(&cand) - z.re).abs() > 1e-6 * (1.0 + z.re.abs()) {
                        continue;
                    }
                    if g.eval(&cand).is_zero() {
                        g = g.div_exact(&Self::linear_root(&cand)).unwrap();
                        roots.push((cand, mult));
                        break;
                    }
                }
            }
            if g.degree().unwrap_or(0) > 0 {
                rest = &rest * &g.pow(mult as u32);
            }
        }
        roots.sort_by(|a, b| a.0.cmp(&b.0));
        (roots, rest)
    }

    pub fn fmt_in(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, v) in self.c.iter().enumerate().rev() {
            if v.is_zero() {
                continue;
            }
            let neg = v.is_negative();
            let a = v.abs();
            if s.is_empty() {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            if mono.is_empty() {
                s.push_str(&fmt_q(&a));
            } else if a.is_one() {
                s.push_str(&mono);
            } else {
                s.push_str(&format!("{}*{}", fmt_q(&a), mono));
            }
        }
        s
    }

    /// Falling factorial `r (r-1) ... (r-n+1)` as a polynomial in `r`.
    pub fn falling(n: usize) -> Self {
        let mut acc = Self::one();
        for i in 0..n {
            acc = &acc * &Self::new(vec![qi(-(i as i64)), Q::one()]);
        }
        acc
    }

    /// Substitute `r -> a r + b`.
    pub fn compose_affine(&self, a: &Q, b: &Q) -> Self {
        let lin = Self::new(vec![b.clone(), a.clone()]);
        let mut acc = Self::zero();
        for v in self.c.iter().rev() {
            acc = &(&acc * &lin) + &Self::constant(v.clone());
        }
        acc
    }
}

fn candidate_rationals(x: f64, max_den: u64) -> Vec<Q> {
    let mut v = Vec::new();
    let r = x.round();
    if r.abs() < 1e15 {
        v.push(qi(r as i64));
    }
    if let Some(c) = rationalize(x, max_den.min(1 << 40)) {
        v.push(c);
    }
    v
}

impl fmt::Display for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_in("x"))
    }
}

impl Add for &UPoly {
    type Output = UPoly;
    fn add(self, o: &UPoly) -> UPoly {
        let n = self.c.len().max(o.c.len());
        UPoly::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }
}

impl Sub for &UPoly {
    type Output = UPoly;
    fn sub(self, o: &UPoly) -> UPoly {
        let n = self.c.len().max(o.c.len());
        UPoly::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }
}

impl Neg for &UPoly {
    type Output = UPoly;
    fn neg(self) -> UPoly {
        UPoly::new(self.c.iter().map(|v| -v).collect())
    }
}

impl Mul for &UPoly {
    type Output = UPoly;
    fn mul(self, o: &UPoly) -> UPoly {
        if self.is_zero() || o.is_zero() {
            return UPoly::zero();
        }
        let mut out = vec![Q::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UPoly::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_algebra::rational::q;

    #[test]
    fn division_and_gcd() {
        let a = UPoly::from_ints(&[-1, 0, 1]);
        let b = UPoly::from_ints(&[1, 1]);
        assert_eq!(a.div_exact(&b), Some(UPoly::from_ints(&[-1, 1])));
        let g = UPoly::gcd(&a, &UPoly::from_ints(&[-1, 1]));
        assert_eq!(g, UPoly::from_ints(&[-1, 1]));
    }

    #[test]
    fn roots_with_multiplicity() {
        // 3 r (r-1)^2 (2r-5/3)
        let p = &(&UPoly::from_ints(&[0, 3]) * &UPoly::from_ints(&[-1, 1]).pow(2)) * &UPoly::new(vec![q(-5, 3), qi(2)]);
        let (roots, rest) = p.rational_roots();
        assert_eq!(roots, vec![(qi(0), 1), (q(5, 6), 1), (qi(1), 2)]);
        assert_eq!(rest, UPoly::one());
    }

    #[test]
    fn irrational_factor_kept() {
        let p = &UPoly::from_ints(&[-2, 0, 1]) * &UPoly::from_ints(&[-3, 1]);
        let (roots, rest) = p.rational_roots();
        assert_eq!(roots, vec![(qi(3), 1)]);
        assert_eq!(rest.monic(), UPoly::from_ints(&[-2, 0, 1]));
    }

    #[test]
    fn nearby_integer_is_not_taken_for_a_fraction() {
        // r (r-1)(r-4/3): rounding 4/3 gives the other root 1
        let p = UPoly::new(vec![qi(0), q(4, 3), q(-7, 3), qi(1)]);
        let (roots, rest) = p.rational_roots();
        assert_eq!(roots, vec![(qi(0), 1), (qi(1), 1), (q(4, 3), 1)]);
        assert_eq!(rest, UPoly::one());
    }

    #[test]
    fn taylor_shift_matches_eval() {
        let p = UPoly::from_ints(&[1, -2, 0, 5]);
        let s = p.taylor_shift(&q(1, 3));
        assert_eq!(s.eval(&q(2, 7)), p.eval(&(q(1, 3) + q(2, 7))));
    }

    #[test]
    fn falling_factorial() {
        assert_eq!(UPoly::falling(3).eval(&qi(5)), qi(60));
        assert_eq!(UPoly::falling(0), UPoly::one());
    }
}
