use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::complex::Complex64;
use num::traits::{One, Signed, Zero};

use super::rational::{fmt_q, parse_q, q_to_f64, Q};
use super::upoly::UPoly;
use crate::{Error, Result};

/// Sparse polynomial over Q in `s0, …, s_{n-1}`.
///
/// Terms live in a `BTreeMap` keyed by exponent vectors, so two equal
/// polynomials are structurally equal. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MultiPoly {
    n: usize,
    terms: BTreeMap<Vec<u32>, Q>,
}

impl MultiPoly {
    pub fn zero(n: usize) -> Self {
        MultiPoly { n, terms: BTreeMap::new() }
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, Q::one())
    }

    pub fn constant(n: usize, c: Q) -> Self {
        Self::monomial(n, vec![0; n], c)
    }

    pub fn var(n: usize, i: usize) -> Self {
        assert!(i < n, "variable s{i} outside a ring of {n} variables");
        let mut e = vec![0; n];
        e[i] = 1;
        Self::monomial(n, e, Q::one())
    }

    pub fn monomial(n: usize, exps: Vec<u32>, c: Q) -> Self {
        assert_eq!(exps.len(), n);
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        MultiPoly { n, terms }
    }

    pub fn from_terms(n: usize, it: impl IntoIterator<Item = (Vec<u32>, Q)>) -> Self {
        let mut p = Self::zero(n);
        for (e, c) in it {
            assert_eq!(e.len(), n);
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Vec<u32>, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Vec<u32>, &Q)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &[u32]) -> Q {
        self.terms.get(e).cloned().unwrap_or_else(Q::zero)
    }

    pub fn constant_term(&self) -> Q {
        self.coeff(&vec![0; self.n])
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&k| k == 0))
    }

    pub fn as_constant(&self) -> Option<Q> {
        self.is_constant().then(|| self.constant_term())
    }

    /// Lex-largest term.
    pub fn leading_term(&self) -> Option<(&Vec<u32>, &Q)> {
        self.terms.iter().next_back()
    }

    fn check(&self, o: &Self) -> Result<()> {
        if self.n == o.n {
            Ok(())
        } else {
            Err(Error::VarMismatch(self.n, o.n))
        }
    }

    pub fn try_add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c.clone());
        }
        Ok(r)
    }

    pub fn try_sub(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), -c.clone());
        }
        Ok(r)
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let mut r = Self::zero(self.n);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                r.add_term(e, c1 * c2);
            }
        }
        Ok(r)
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(self.n);
        }
        MultiPoly { n: self.n, terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect() }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut r = Self::one(self.n);
        let mut b = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                r = &r * &b;
            }
            k >>= 1;
            if k > 0 {
                b = &b * &b;
            }
        }
        r
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut r = Self::zero(self.n);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut e2 = e.clone();
                e2[i] -= 1;
                r.add_term(e2, c * Q::from_integer(e[i].into()));
            }
        }
        r
    }

    pub fn degree_in(&self, i: usize) -> Option<u32> {
        self.terms.keys().map(|e| e[i]).max()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Weighted degree if every term has the same one.
    pub fn weighted_degree(&self, w: &[u32]) -> Option<u32> {
        let mut it = self.terms.keys().map(|e| e.iter().zip(w).map(|(a, b)| a * b).sum::<u32>());
        let d = it.next()?;
        it.all(|x| x == d).then_some(d)
    }

    /// Coefficients of `s_i^k`, k = 0..=deg, each a polynomial free of `s_i`.
    pub fn coeffs_in(&self, i: usize) -> Vec<MultiPoly> {
        let d = self.degree_in(i).unwrap_or(0) as usize;
        let mut out = vec![Self::zero(self.n); d + 1];
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            let k = e2[i] as usize;
            e2[i] = 0;
            out[k].add_term(e2, c.clone());
        }
        out
    }

    pub fn eval(&self, x: &[Q]) -> Q {
        assert_eq!(x.len(), self.n);
        let mut acc = Q::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t *= num::pow(xi.clone(), k as usize);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_c(&self, x: &[Complex64]) -> Complex64 {
        assert_eq!(x.len(), self.n);
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut t = Complex64::new(q_to_f64(c), 0.0);
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t *= xi.powu(k);
                }
            }
            acc += t;
        }
        acc
    }

    /// Substitute `s_i = v`; the ring keeps its variable count.
    pub fn specialize(&self, i: usize, v: &Q) -> Self {
        let mut r = Self::zero(self.n);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            let k = e2[i];
            e2[i] = 0;
            r.add_term(e2, c * num::pow(v.clone(), k as usize));
        }
        r
    }

    /// Substitute `s_j = values[j-from]` for every `j >= from`.
    pub fn specialize_from(&self, from: usize, values: &[Q]) -> Self {
        let mut r = self.clone();
        for (j, v) in values.iter().enumerate() {
            r = r.specialize(from + j, v);
        }
        r
    }

    pub fn subst(&self, i: usize, p: &MultiPoly) -> Self {
        let cs = self.coeffs_in(i);
        let mut acc = Self::zero(self.n);
        for c in cs.iter().rev() {
            acc = &(&acc * p) + c;
        }
        acc
    }

    /// Exact quotient, or `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &MultiPoly) -> Option<MultiPoly> {
        let (de, dc) = d.leading_term()?;
        let (de, dc) = (de.clone(), dc.clone());
        let mut rem = self.clone();
        let mut quo = Self::zero(self.n);
        while let Some((e, c)) = rem.leading_term() {
            if e.iter().zip(&de).any(|(a, b)| a < b) {
                return None;
            }
            let qe: Vec<u32> = e.iter().zip(&de).map(|(a, b)| a - b).collect();
            let t = Self::monomial(self.n, qe, c / &dc);
            rem = &rem - &(&t * d);
            quo = &quo + &t;
        }
        Some(quo)
    }

    /// True when `self` divides `p`.
    pub fn divides(&self, p: &MultiPoly) -> bool {
        p.div_exact(self).is_some()
    }

    /// Polynomial in `s_i` alone (other variables must be absent).
    pub fn to_upoly(&self, i: usize) -> Option<UPoly> {
        let d = self.degree_in(i).unwrap_or(0) as usize;
        let mut c = vec![Q::zero(); d + 1];
        for (e, v) in &self.terms {
            if e.iter().enumerate().any(|(j, &k)| j != i && k > 0) {
                return None;
            }
            c[e[i] as usize] = v.clone();
        }
        Some(UPoly::new(c))
    }

    pub fn from_upoly(n: usize, i: usize, p: &UPoly) -> Self {
        let mut r = Self::zero(n);
        for (k, c) in p.coeffs().iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = k as u32;
            r.add_term(e, c.clone());
        }
        r
    }

    /// Same polynomial read in a ring with `m >= n` variables.
    pub fn embed(&self, m: usize) -> Self {
        assert!(m >= self.n);
        MultiPoly {
            n: m,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e2 = e.clone();
                    e2.resize(m, 0);
                    (e2, c.clone())
                })
                .collect(),
        }
    }

    /// `p(τ^{w_0} s_0, …)` for a rational τ.
    pub fn weighted_scale(&self, tau: &Q, w: &[u32]) -> Self {
        MultiPoly {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let d: u32 = e.iter().zip(w).map(|(a, b)| a * b).sum();
                    (e.clone(), c * num::pow(tau.clone(), d as usize))
                })
                .collect(),
        }
    }

    pub fn map_coeffs(&self, f: impl Fn(&Q) -> Q) -> Self {
        Self::from_terms(self.n, self.terms.iter().map(|(e, c)| (e.clone(), f(c))))
    }

    pub fn parse(n: usize, s: &str) -> Result<Self> {
        let toks = lex(s)?;
        let mut p = Parser { toks, pos: 0, n };
        let r = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(Error::Parse(format!("trailing input in {s:?}")));
        }
        Ok(r)
    }
}

fn fmt_monomial(e: &[u32]) -> String {
    let mut parts = Vec::new();
    for (i, &k) in e.iter().enumerate() {
        match k {
            0 => {}
            1 => parts.push(format!("s{i}")),
            _ => parts.push(format!("s{i}^{k}")),
        }
    }
    parts.join("*")
}

impl fmt::Display for MultiPoly {
    /// Canonical text: terms in descending lex order, e.g. `27*s0^2 + 4*s1^3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let a = c.abs();
            let mono = fmt_monomial(e);
            let body = if mono.is_empty() {
                fmt_q(&a)
            } else if a.is_one() {
                mono
            } else {
                format!("{}*{}", fmt_q(&a), mono)
            };
            match (first, neg) {
                (true, false) => write!(f, "{body}")?,
                (true, true) => write!(f, "-{body}")?,
                (false, false) => write!(f, " + {body}")?,
                (false, true) => write!(f, " - {body}")?,
            }
            first = false;
        }
        Ok(())
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, o: &MultiPoly) -> MultiPoly {
        self.try_add(o).expect("MultiPoly add")
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, o: &MultiPoly) -> MultiPoly {
        self.try_sub(o).expect("MultiPoly sub")
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, o: &MultiPoly) -> MultiPoly {
        self.try_mul(o).expect("MultiPoly mul")
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(&-Q::one())
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Var(usize),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<Tok>> {
    let b: Vec<char> = s.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < b.len() {
        let c = b[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let st = i;
            while i < b.len() && (b[i].is_ascii_digit() || b[i] == '.') {
                i += 1;
            }
            out.push(Tok::Num(b[st..i].iter().collect()));
        } else if c == 's' {
            i += 1;
            let st = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            if st == i {
                return Err(Error::Parse(format!("bare 's' in {s:?}")));
            }
            let idx: usize = b[st..i].iter().collect::<String>().parse().map_err(|_| Error::Parse(s.into()))?;
            out.push(Tok::Var(idx));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected {c:?} in {s:?}")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    n: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<MultiPoly> {
        let mut acc = if self.eat('-') {
            -&self.term()?
        } else {
            self.eat('+');
            self.term()?
        };
        loop {
            if self.eat('+') {
                acc = &acc + &self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<MultiPoly> {
        let mut acc = self.power()?;
        loop {
            if self.eat('*') {
                acc = &acc * &self.power()?;
            } else if self.eat('/') {
                let d = self.power()?;
                let c = d.as_constant().filter(|c| !c.is_zero()).ok_or_else(|| Error::Parse("division by a non-constant".into()))?;
                acc = acc.scale(&(Q::one() / c));
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Result<MultiPoly> {
        let b = self.atom()?;
        if self.eat('^') {
            match self.toks.get(self.pos).cloned() {
                Some(Tok::Num(s)) => {
                    self.pos += 1;
                    let k: u32 = s.parse().map_err(|_| Error::Parse(format!("bad exponent {s}")))?;
                    Ok(b.pow(k))
                }
                _ => Err(Error::Parse("exponent must be a nonnegative integer".into())),
            }
        } else {
            Ok(b)
        }
    }

    fn atom(&mut self) -> Result<MultiPoly> {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(s)) => {
                self.pos += 1;
                Ok(MultiPoly::constant(self.n, parse_q(&s)?))
            }
            Some(Tok::Var(i)) => {
                self.pos += 1;
                if i >= self.n {
                    return Err(Error::Parse(format!("s{i} outside a ring of {} variables", self.n)));
                }
                Ok(MultiPoly::var(self.n, i))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::Parse("unbalanced parenthesis".into()));
                }
                Ok(e)
            }
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(-&self.power()?)
            }
            t => Err(Error::Parse(format!("unexpected token {t:?}"))),
        }
    }
}
