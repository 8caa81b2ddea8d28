//! Matrices over Q[s] and Q, and a small field of univariate rational functions.

use num::traits::{One, Zero};

use super::multipoly::MultiPoly;
use super::rational::Q;
use super::upoly::UPoly;

pub type PolyMat = Vec<Vec<MultiPoly>>;

/// Fraction-free (Bareiss) determinant, exact divisions only.
pub fn det_bareiss(m: &PolyMat) -> MultiPoly {
    let n = m.len();
    assert!(m.iter().all(|r| r.len() == n), "square matrix expected");
    if n == 0 {
        panic!("determinant of an empty matrix");
    }
    let nv = m[0][0].nvars();
    let mut a = m.clone();
    let mut sign = false;
    let mut prev = MultiPoly::one(nv);
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(p) => {
                    a.swap(k, p);
                    sign = !sign;
                }
                None => return MultiPoly::zero(nv),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &(&a[i][j] * &a[k][k]) - &(&a[i][k] * &a[k][j]);
                a[i][j] = t.div_exact(&prev).expect("Bareiss division is exact");
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign {
        -&d
    } else {
        d
    }
}

pub fn mat_eval(m: &PolyMat, x: &[Q]) -> Vec<Vec<Q>> {
    m.iter().map(|r| r.iter().map(|p| p.eval(x)).collect()).collect()
}

/// Reduced row echelon form over Q; returns the pivot columns.
pub fn rref_q(a: &mut [Vec<Q>]) -> Vec<usize> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut piv = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let inv = Q::one() / &a[r][c];
        for v in a[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let t = &f * &a[r][j];
                    a[i][j] -= t;
                }
            }
        }
        piv.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    piv
}

pub fn rank_q(a: &[Vec<Q>]) -> usize {
    let mut m = a.to_vec();
    rref_q(&mut m).len()
}

/// Solves `a x = b` over Q when the system is consistent (any solution).
pub fn solve_q(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let n = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<Q>> = a.iter().zip(b).map(|(r, v)| r.iter().cloned().chain([v.clone()]).collect()).collect();
    let piv = rref_q(&mut m);
    if piv.contains(&n) {
        return None;
    }
    let mut x = vec![Q::zero(); n];
    for (r, &c) in piv.iter().enumerate() {
        x[c] = m[r][n].clone();
    }
    Some(x)
}

/// Element of Q(x), kept reduced with a monic denominator.
#[derive(Clone, Debug, PartialEq)]
pub struct RatFunc {
    pub num: UPoly,
    pub den: UPoly,
}

impl RatFunc {
    pub fn new(num: UPoly, den: UPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return Self::zero();
        }
        let g = UPoly::gcd(&num, &den);
        let mut n = num.div_exact(&g).unwrap();
        let mut d = den.div_exact(&g).unwrap();
        let l = d.lc();
        n = n.scale(&(Q::one() / &l));
        d = d.scale(&(Q::one() / &l));
        RatFunc { num: n, den: d }
    }

    pub fn zero() -> Self {
        RatFunc { num: UPoly::zero(), den: UPoly::one() }
    }

    pub fn from_poly(p: UPoly) -> Self {
        RatFunc { num: p, den: UPoly::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(&(&self.num * &o.den) + &(&o.num * &self.den), &self.den * &o.den)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(&(&self.num * &o.den) - &(&o.num * &self.den), &self.den * &o.den)
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(&self.num * &o.num, &self.den * &o.den)
    }

    pub fn div(&self, o: &Self) -> Self {
        assert!(!o.is_zero(), "division by zero in Q(x)");
        Self::new(&self.num * &o.den, &self.den * &o.num)
    }
}

/// One nonzero kernel vector of a matrix over Q(x), if the kernel is nontrivial.
pub fn kernel_vector_rat(a: &[Vec<RatFunc>]) -> Option<Vec<RatFunc>> {
    let rows = a.len();
    let cols = a.first()?.len();
    let mut m = a.to_vec();
    let mut piv: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = RatFunc::from_poly(UPoly::one()).div(&m[r][c]);
        for v in m[r].iter_mut() {
            *v = v.mul(&inv);
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let t = f.mul(&m[r][j]);
                    m[i][j] = m[i][j].sub(&t);
                }
            }
        }
        piv.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    let free = (0..cols).find(|c| !piv.contains(c))?;
    let mut x = vec![RatFunc::zero(); cols];
    x[free] = RatFunc::from_poly(UPoly::one());
    for (row, &c) in piv.iter().enumerate() {
        x[c] = RatFunc::zero().sub(&m[row][free]);
    }
    Some(x)
}
