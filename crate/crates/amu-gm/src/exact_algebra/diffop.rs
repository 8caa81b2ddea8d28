use std::collections::BTreeMap;
use std::fmt;

use super::multipoly::MultiPoly;
use num::traits::One;

use super::rational::{binom, Q};
use super::upoly::UPoly;
use crate::{Error, Result};

/// Key of a normal-ordered monomial `∂_{s_j}^{[j given]} ∂_{s0}^β`.
pub type OpKey = (Option<usize>, u32);

/// Differential operator `Σ c(s) ∂_{s'}^α ∂_{s0}^β` with `|α| ≤ 1`, all derivatives on the right.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DiffOp {
    mu: usize,
    terms: BTreeMap<OpKey, MultiPoly>,
}

impl DiffOp {
    pub fn zero(mu: usize) -> Self {
        DiffOp { mu, terms: BTreeMap::new() }
    }

    pub fn coef(p: MultiPoly) -> Self {
        let mu = p.nvars();
        Self::term(mu, p, None, 0)
    }

    pub fn one(mu: usize) -> Self {
        Self::coef(MultiPoly::one(mu))
    }

    /// `∂_{s0}^k`
    pub fn d0(mu: usize, k: u32) -> Self {
        Self::term(mu, MultiPoly::one(mu), None, k)
    }

    /// `∂_{s_j}` for `j >= 1`.
    pub fn ds(mu: usize, j: usize) -> Self {
        assert!(j >= 1 && j < mu, "∂_s{j} is not a primed direction for mu = {mu}");
        Self::term(mu, MultiPoly::one(mu), Some(j), 0)
    }

    pub fn term(mu: usize, c: MultiPoly, ds: Option<usize>, k: u32) -> Self {
        assert_eq!(c.nvars(), mu);
        let mut d = Self::zero(mu);
        d.push((ds, k), c);
        d
    }

    fn push(&mut self, key: OpKey, c: MultiPoly) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(key).or_insert_with(|| MultiPoly::zero(self.mu));
        *slot = &*slot + &c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OpKey, &MultiPoly)> {
        self.terms.iter()
    }

    pub fn coeff(&self, key: OpKey) -> MultiPoly {
        self.terms.get(&key).cloned().unwrap_or_else(|| MultiPoly::zero(self.mu))
    }

    /// Coefficient of `∂_{s0}^k` in the part free of `∂_{s'}`.
    pub fn coeff_d0(&self, k: u32) -> MultiPoly {
        self.coeff((None, k))
    }

    /// Total order, counting a `∂_{s'}` factor as one.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|(a, b)| b + a.is_some() as u32).max()
    }

    pub fn has_primed(&self) -> bool {
        self.terms.keys().any(|(a, _)| a.is_some())
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (k, c) in &o.terms {
            r.push(*k, c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        DiffOp { mu: self.mu, terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect() }
    }

    /// Left multiplication by a polynomial.
    pub fn lmul_poly(&self, p: &MultiPoly) -> Self {
        let mut r = Self::zero(self.mu);
        for (k, c) in &self.terms {
            r.push(*k, p * c);
        }
        r
    }

    pub fn scale(&self, q: &Q) -> Self {
        let mut r = Self::zero(self.mu);
        for (k, c) in &self.terms {
            r.push(*k, c.scale(q));
        }
        r
    }

    /// Normal-ordered product `self · o`.
    pub fn weyl_mul(&self, o: &Self) -> Result<Self> {
        if self.mu != o.mu {
            return Err(Error::VarMismatch(self.mu, o.mu));
        }
        let mut r = Self::zero(self.mu);
        for (&(a1, b1), c1) in &self.terms {
            for (&(a2, b2), c2) in &o.terms {
                if a1.is_some() && a2.is_some() {
                    return Err(Error::Unsupported("product would carry a second-order ∂_{s'} term".into()));
                }
                // ∂0^{b1} c2 = Σ_k C(b1,k) (∂0^k c2) ∂0^{b1-k}
                let mut dk = c2.clone();
                for k in 0..=b1 {
                    if dk.is_zero() {
                        break;
                    }
                    let coef = &dk.scale(&binom(b1 as u64, k as u64)) * c1;
                    let rest = b1 - k + b2;
                    match a1 {
                        None => r.push((a2, rest), coef),
                        Some(j) => {
                            // c1 ∂_j (d ∂0^rest) with d = C(b1,k) ∂0^k c2
                            let d = dk.scale(&binom(b1 as u64, k as u64));
                            r.push((None, rest), c1 * &d.derivative(j));
                            r.push((Some(j), rest), c1 * &d);
                        }
                    }
                    dk = dk.derivative(0);
                }
            }
        }
        Ok(r)
    }

    /// Applies the operator to a polynomial in `s`.
    pub fn apply_poly(&self, f: &MultiPoly) -> MultiPoly {
        let mut acc = MultiPoly::zero(self.mu);
        for (&(a, b), c) in &self.terms {
            let mut g = f.clone();
            for _ in 0..b {
                g = g.derivative(0);
            }
            if let Some(j) = a {
                g = g.derivative(j);
            }
            acc = &acc + &(c * &g);
        }
        acc
    }

    /// Substitutes `s_j = v_j` for `j >= 1` in every coefficient.
    pub fn specialize(&self, sp: &[Q]) -> Self {
        let mut r = Self::zero(self.mu);
        for (k, c) in &self.terms {
            r.push(*k, c.specialize_from(1, sp));
        }
        r
    }

    /// Writes `self = T' ∂_{s0}` (right division); fails if a term has no `∂_{s0}` on the right.
    pub fn right_divide_d0(&self) -> Result<Self> {
        let mut r = Self::zero(self.mu);
        for (&(a, b), c) in &self.terms {
            if b == 0 {
                return Err(Error::Shape(format!("term with key ({a:?}, 0) is not right-divisible by ∂_s0")));
            }
            r.push((a, b - 1), c.clone());
        }
        Ok(r)
    }

    /// Terms with `|α| = 1` collected per direction `j`.
    pub fn primed_parts(&self) -> BTreeMap<usize, Vec<(u32, MultiPoly)>> {
        let mut m: BTreeMap<usize, Vec<(u32, MultiPoly)>> = BTreeMap::new();
        for (&(a, b), c) in &self.terms {
            if let Some(j) = a {
                m.entry(j).or_default().push((b, c.clone()));
            }
        }
        m
    }

    pub fn to_vec(&self) -> Vec<(OpKey, MultiPoly)> {
        self.terms.iter().map(|(k, c)| (*k, c.clone())).collect()
    }

    pub fn from_vec(mu: usize, v: impl IntoIterator<Item = (OpKey, MultiPoly)>) -> Self {
        let mut r = Self::zero(mu);
        for (k, c) in v {
            r.push(k, c);
        }
        r
    }
}

fn key_text(&(a, b): &OpKey) -> String {
    let mut s = Vec::new();
    if let Some(j) = a {
        s.push(format!("d{j}"));
    }
    match b {
        0 => {}
        1 => s.push("d0".into()),
        _ => s.push(format!("d0^{b}")),
    }
    s.join("*")
}

impl fmt::Display for DiffOp {
    /// Highest derivative first, e.g. `(s0^2)*d0^2 + (s0)*d0`; `dj` stands for `∂/∂s_j`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut keys: Vec<&OpKey> = self.terms.keys().collect();
        keys.sort_by(|x, y| (y.1 + y.0.is_some() as u32, y.0).cmp(&(x.1 + x.0.is_some() as u32, x.0)).then(y.1.cmp(&x.1)));
        let parts: Vec<String> = keys
            .into_iter()
            .map(|k| {
                let c = &self.terms[k];
                let kt = key_text(k);
                if kt.is_empty() {
                    format!("({c})")
                } else {
                    format!("({c})*{kt}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Ordinary operator `Σ_k c_k(s0) ∂_{s0}^k` in one variable.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct OrdinaryOp {
    c: Vec<UPoly>,
}

impl OrdinaryOp {
    pub fn new(mut c: Vec<UPoly>) -> Self {
        while c.last().is_some_and(|p| p.is_zero()) {
            c.pop();
        }
        OrdinaryOp { c }
    }

    pub fn coeffs(&self) -> &[UPoly] {
        &self.c
    }

    pub fn coeff(&self, k: usize) -> UPoly {
        self.c.get(k).cloned().unwrap_or_default()
    }

    pub fn order(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn leading(&self) -> UPoly {
        self.c.last().cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        Self::new((0..n).map(|k| &self.coeff(k) + &o.coeff(k)).collect())
    }

    pub fn scale(&self, q: &Q) -> Self {
        Self::new(self.c.iter().map(|p| p.scale(q)).collect())
    }

    pub fn lmul(&self, p: &UPoly) -> Self {
        Self::new(self.c.iter().map(|c| p * c).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = vec![UPoly::zero(); (self.c.len() + o.c.len()).saturating_sub(1)];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                let mut d = b.clone();
                for k in 0..=i {
                    if d.is_zero() {
                        break;
                    }
                    let t = &(a * &d).scale(&binom(i as u64, k as u64)) + &out[i - k + j];
                    out[i - k + j] = t;
                    d = d.derivative();
                }
            }
        }
        Self::new(out)
    }

    pub fn apply(&self, f: &UPoly) -> UPoly {
        let mut acc = UPoly::zero();
        let mut d = f.clone();
        for c in &self.c {
            acc = &acc + &(c * &d);
            d = d.derivative();
        }
        acc
    }

    /// Divides out the gcd of the coefficients and makes the leading coefficient's top term 1.
    pub fn normalize(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut g = UPoly::zero();
        for c in &self.c {
            g = UPoly::gcd(&g, c);
        }
        let s: Vec<UPoly> = self.c.iter().map(|c| c.div_exact(&g).unwrap()).collect();
        let lc = s.last().unwrap().lc();
        Self::new(s.iter().map(|c| c.scale(&(Q::one() / &lc))).collect())
    }

    /// Operator in the variable `t` with `s0 = a t + b`, so `∂_{s0} = a^{-1} ∂_t`.
    pub fn change_variable(&self, a: &Q, b: &Q) -> Self {
        let inv = Q::one() / a;
        let mut f = Q::one();
        let mut out = Vec::with_capacity(self.c.len());
        for c in &self.c {
            out.push(c.compose_affine(a, b).scale(&f));
            f *= &inv;
        }
        Self::new(out)
    }

    pub fn fmt_in(&self, var: &str) -> String {
        if self.c.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .c
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => format!("({})", c.fmt_in(var)),
                1 => format!("({})*D", c.fmt_in(var)),
                _ => format!("({})*D^{k}", c.fmt_in(var)),
            })
            .collect();
        parts.join(" + ")
    }
}

impl DiffOp {
    /// Restricts to a line `s' = sp` when no `∂_{s'}` term is present.
    pub fn to_ordinary(&self, sp: &[Q]) -> Result<OrdinaryOp> {
        if self.has_primed() {
            return Err(Error::Unsupported("operator still carries ∂_{s'} terms".into()));
        }
        let s = self.specialize(sp);
        let ord = s.order().unwrap_or(0) as usize;
        let mut c = vec![UPoly::zero(); ord + 1];
        for (&(_, b), p) in &s.terms {
            c[b as usize] = p.to_upoly(0).ok_or_else(|| Error::Shape("coefficient still depends on s'".into()))?;
        }
        Ok(OrdinaryOp::new(c))
    }
}
