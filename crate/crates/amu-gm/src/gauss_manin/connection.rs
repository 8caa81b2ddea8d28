use num::traits::{One, Zero};

use super::sigma::build_sigma;
use crate::exact_algebra::multipoly::MultiPoly;
use crate::exact_algebra::polymat::{det_bareiss, PolyMat};
use crate::exact_algebra::rational::{binom, q, qi, Q};
use crate::exact_algebra::resultant::monic_in_s0;
use crate::{Error, Result};

/// Base point and index shift of the system for `K_{k+i,x0} = ∫ (z-x0)^{k+i} (F+s0)^λ dz`.
#[derive(Clone, Debug, PartialEq)]
pub struct Shift {
    pub k: usize,
    pub x0: Q,
    /// `s̃0 = -F(x0, s')`, the extra singular value
    pub s0_tilde: MultiPoly,
}

/// `S ∂K/∂s0 = (L + V) K`. Entries are polynomials in `s0, …, s_{μ-1}`.
///
/// `V` is stored expanded: whatever constant prefactor one prefers to pull out is already absorbed.
#[derive(Clone, Debug)]
pub struct ConnectionSystem {
    pub mu: usize,
    pub nu: u32,
    pub m: i64,
    pub lambda: Q,
    pub s: PolyMat,
    pub l: Vec<Q>,
    pub v: PolyMat,
    pub shift: Option<Shift>,
}

impl ConnectionSystem {
    pub fn size(&self) -> usize {
        self.s.len()
    }

    /// `L + V`
    pub fn r(&self) -> PolyMat {
        let n = self.size();
        let mut r = self.v.clone();
        for (i, row) in r.iter_mut().enumerate().take(n) {
            row[i] = &row[i] + &MultiPoly::constant(self.mu, self.l[i].clone());
        }
        r
    }

    pub fn det_s(&self) -> MultiPoly {
        det_bareiss(&self.s)
    }

    /// `S - s0·Id`
    pub fn c_part(&self) -> PolyMat {
        let mut c = self.s.clone();
        for (i, row) in c.iter_mut().enumerate() {
            row[i] = &row[i] - &MultiPoly::var(self.mu, 0);
        }
        c
    }

    /// Restricts every entry to `s' = sp` (entries keep the full variable set).
    pub fn specialize(&self, sp: &[Q]) -> ConnectionSystem {
        let f = |m: &PolyMat| m.iter().map(|r| r.iter().map(|p| p.specialize_from(1, sp)).collect()).collect();
        ConnectionSystem { s: f(&self.s), v: f(&self.v), ..self.clone() }
    }
}

#[derive(Clone)]
struct Lin {
    d: Vec<MultiPoly>,
    k: Vec<MultiPoly>,
}

/// Eliminates the higher unknowns: block-2 rows have the constant pivot `μ+1` at column `n + j`
/// and no entries to its right, so each new unknown is a combination of the earlier ones.
fn eliminate(mu: usize, n: usize, rows1: &[Vec<MultiPoly>], rhs1: &[Vec<Q>], rows2: &[Vec<MultiPoly>], rhs2: &[Vec<Q>]) -> Result<(PolyMat, PolyMat)> {
    let total = n + rows2.len();
    let zero = MultiPoly::zero(mu);
    let mut expr: Vec<Lin> = (0..n)
        .map(|c| {
            let mut d = vec![zero.clone(); n];
            d[c] = MultiPoly::one(mu);
            Lin { d, k: vec![zero.clone(); n] }
        })
        .collect();
    for (j, (row, a)) in rows2.iter().zip(rhs2).enumerate() {
        let tgt = n + j;
        let piv = row[tgt].as_constant().filter(|c| !c.is_zero()).ok_or_else(|| Error::Shape(format!("pivot at column {tgt} is not a nonzero constant")))?;
        if row[tgt + 1..].iter().any(|p| !p.is_zero()) {
            return Err(Error::Shape(format!("row for unknown {tgt} reaches past its pivot")));
        }
        let inv = Q::one() / piv;
        let mut e = Lin { d: vec![zero.clone(); n], k: a.iter().map(|c| MultiPoly::constant(mu, c * &inv)).collect() };
        for (c, coef) in row.iter().enumerate().take(tgt) {
            if coef.is_zero() {
                continue;
            }
            let f = coef.scale(&inv);
            for i in 0..n {
                e.d[i] = &e.d[i] - &(&f * &expr[c].d[i]);
                e.k[i] = &e.k[i] - &(&f * &expr[c].k[i]);
            }
        }
        expr.push(e);
    }
    debug_assert_eq!(expr.len(), total);
    let mut s = Vec::with_capacity(n);
    let mut r = Vec::with_capacity(n);
    for (row, a) in rows1.iter().zip(rhs1) {
        let mut sd = vec![zero.clone(); n];
        let mut rk: Vec<MultiPoly> = a.iter().map(|c| MultiPoly::constant(mu, c.clone())).collect();
        for (c, coef) in row.iter().enumerate() {
            if coef.is_zero() {
                continue;
            }
            for i in 0..n {
                sd[i] = &sd[i] + &(coef * &expr[c].d[i]);
                rk[i] = &rk[i] - &(coef * &expr[c].k[i]);
            }
        }
        s.push(sd);
        r.push(rk);
    }
    Ok((s, r))
}

/// Splits `R` into its constant diagonal `L` and the rest `V`, and checks the expected shape.
fn split_and_check(mu: usize, s: &PolyMat, r: &PolyMat, l_expected: &[Q], v_free_of: &[usize]) -> Result<(Vec<Q>, PolyMat)> {
    let n = s.len();
    let s0 = MultiPoly::var(mu, 0);
    for (i, row) in s.iter().enumerate() {
        for (j, p) in row.iter().enumerate() {
            let c = if i == j { p - &s0 } else { p.clone() };
            if c.degree_in(0).unwrap_or(0) > 0 {
                return Err(Error::Shape(format!("S - s0·Id depends on s0 at ({i},{j})")));
            }
        }
    }
    let mut v = r.clone();
    let mut l = Vec::with_capacity(n);
    for i in 0..n {
        let d = r[i][i].as_constant().ok_or_else(|| Error::Shape(format!("diagonal of L+V not constant at {i}")))?;
        if d != l_expected[i] {
            return Err(Error::Shape(format!("L[{i}] = {d}, expected {}", l_expected[i])));
        }
        l.push(d);
        v[i][i] = MultiPoly::zero(mu);
    }
    for (i, row) in v.iter().enumerate() {
        for (j, p) in row.iter().enumerate() {
            if j >= i && !p.is_zero() {
                return Err(Error::Shape(format!("V not strictly lower triangular at ({i},{j})")));
            }
            for &x in v_free_of {
                if p.degree_in(x).unwrap_or(0) > 0 {
                    return Err(Error::Shape(format!("V[{i}][{j}] depends on s{x}")));
                }
            }
        }
    }
    Ok((l, v))
}

fn lambda_of(nu: u32, m: i64) -> Result<Q> {
    if nu == 0 {
        return Err(Error::OutOfRange("nu must be positive".into()));
    }
    let lam = q(m, nu as i64);
    if lam.is_integer() && lam < Q::zero() {
        return Err(Error::OutOfRange(format!("lambda = {lam} is a negative integer")));
    }
    Ok(lam)
}

pub fn derive_connection(mu: usize, nu: u32, m: i64) -> Result<ConnectionSystem> {
    crate::check_mu(mu)?;
    let lambda = lambda_of(nu, m)?;
    let sy = build_sigma(mu, &lambda)?;
    let (s, r) = eliminate(mu, mu, &sy.sigma[..mu], &sy.rhs[..mu], &sy.sigma[mu..], &sy.rhs[mu..])?;
    let l_expected: Vec<Q> = (0..mu).map(|i| &lambda + q(i as i64 + 1, mu as i64 + 1)).collect();
    let (l, v) = split_and_check(mu, &s, &r, &l_expected, &[0, 1])?;
    Ok(ConnectionSystem { mu, nu, m, lambda, s, l, v, shift: None })
}

/// Taylor coefficients `f_ℓ = F^{(ℓ)}(x0)/ℓ!`, `ℓ = 0..=μ+1`, with `s0` added to `f_0`.
pub fn taylor_at(mu: usize, x0: &Q) -> Vec<MultiPoly> {
    // F = z^{μ+1} + Σ_{j=1}^{μ-1} s_j z^j
    let mut f = vec![MultiPoly::zero(mu); mu + 2];
    for (l, fl) in f.iter_mut().enumerate() {
        let mut acc = MultiPoly::constant(mu, binom(mu as u64 + 1, l as u64) * num::pow(x0.clone(), mu + 1 - l));
        for j in 1..mu {
            if j >= l {
                let c = binom(j as u64, l as u64) * num::pow(x0.clone(), j - l);
                acc = &acc + &MultiPoly::var(mu, j).scale(&c);
            }
        }
        *fl = acc;
    }
    f[0] = &f[0] + &MultiPoly::var(mu, 0);
    f
}

/// The (μ+1)-sized system for `K_{k+i,x0}`, `i = 0..=μ`.
pub fn derive_shifted_connection(mu: usize, nu: u32, m: i64, k: usize, x0: &Q) -> Result<ConnectionSystem> {
    crate::check_mu(mu)?;
    let lambda = lambda_of(nu, m)?;
    let f = taylor_at(mu, x0);
    let n = mu + 1;
    let cols = 2 * mu + 2;
    let zero = MultiPoly::zero(mu);
    let mut rows1 = Vec::new();
    let mut rhs1 = Vec::new();
    for i in 0..n {
        let mut row = vec![zero.clone(); cols];
        for (l, fl) in f.iter().enumerate().take(mu + 1) {
            row[l + i] = fl.clone();
        }
        row[mu + 1 + i] = MultiPoly::one(mu);
        let mut a = vec![Q::zero(); n];
        a[i] = lambda.clone();
        rows1.push(row);
        rhs1.push(a);
    }
    let mut rows2 = Vec::new();
    let mut rhs2 = Vec::new();
    for j in 0..n {
        let mut row = vec![zero.clone(); cols];
        for (l, fl) in f.iter().enumerate().take(mu + 1).skip(1) {
            row[l + j] = fl.scale(&qi(l as i64));
        }
        row[mu + 1 + j] = MultiPoly::constant(mu, qi(mu as i64 + 1));
        let mut a = vec![Q::zero(); n];
        a[j] = qi(-((k + j + 1) as i64));
        rows2.push(row);
        rhs2.push(a);
    }
    let (s, r) = eliminate(mu, n, &rows1, &rhs1, &rows2, &rhs2)?;
    let l_expected: Vec<Q> = (0..n).map(|i| &lambda + q((k + i + 1) as i64, mu as i64 + 1)).collect();
    let (l, v) = split_and_check(mu, &s, &r, &l_expected, &[0])?;
    let s0_tilde = -&(&f[0] - &MultiPoly::var(mu, 0));
    Ok(ConnectionSystem { mu, nu, m, lambda, s, l, v, shift: Some(Shift { k, x0: x0.clone(), s0_tilde }) })
}

/// `Δ_μ = det S`, monic of degree μ in `s0`.
pub fn discriminant(mu: usize) -> Result<MultiPoly> {
    let cs = derive_connection(mu, 2, 1)?;
    let d = cs.det_s();
    monic_in_s0(&d).ok_or_else(|| Error::Shape("det S is not monic-normalizable in s0".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_algebra::resultant::resultant_s0_oracle;

    fn txt(m: &PolyMat) -> Vec<Vec<String>> {
        m.iter().map(|r| r.iter().map(|p| p.to_string()).collect()).collect()
    }

    #[test]
    fn mu2_half() {
        let cs = derive_connection(2, 2, 1).unwrap();
        assert_eq!(cs.l, vec![q(5, 6), q(7, 6)]);
        assert!(cs.v.iter().flatten().all(|p| p.is_zero()));
        assert_eq!(txt(&cs.s), vec![vec!["s0", "2/3*s1"], vec!["-2/9*s1^2", "s0"]]);
        assert_eq!(cs.det_s().to_string(), "s0^2 + 4/27*s1^3");
    }

    #[test]
    fn mu3_half() {
        let cs = derive_connection(3, 2, 1).unwrap();
        assert_eq!(
            txt(&cs.s),
            vec![
                vec!["s0", "3/4*s1", "1/2*s2"],
                vec!["-1/8*s1*s2", "s0 - 1/4*s2^2", "3/4*s1"],
                vec!["-3/16*s1^2", "-1/2*s1*s2", "s0 - 1/4*s2^2"],
            ]
        );
        assert_eq!(txt(&cs.v)[2][0], "1/8*s2");
    }

    #[test]
    fn mu4_v_recurrence() {
        let cs = derive_connection(4, 2, 1).unwrap();
        assert_eq!(cs.l, vec![q(7, 10), q(9, 10), q(11, 10), q(13, 10)]);
        let v = txt(&cs.v);
        assert_eq!(v[2][0], "2/25*s3");
        assert_eq!(v[3][0], "3/25*s2");
        assert_eq!(v[3][1], "4/25*s3");
        // (j+2) V[i][j] = (j+1) V[i+1][j+1] in 0-based indices
        for i in 0..3 {
            for j in 0..i {
                assert_eq!(cs.v[i][j].scale(&qi(j as i64 + 2)), cs.v[i + 1][j + 1].scale(&qi(j as i64 + 1)));
            }
        }
    }

    #[test]
    fn discriminant_matches_resultant() {
        for mu in 2..=4 {
            let d = discriminant(mu).unwrap();
            assert_eq!(Some(d), monic_in_s0(&resultant_s0_oracle(mu).unwrap()), "mu = {mu}");
        }
    }

    #[test]
    fn shifted_example_at_origin() {
        let cs = derive_shifted_connection(2, 3, 1, 0, &Q::zero()).unwrap();
        assert_eq!(txt(&cs.s), vec![vec!["s0", "2/3*s1", "0"], vec!["0", "s0", "2/3*s1"], vec!["0", "-2/9*s1^2", "s0"]]);
        assert_eq!(cs.l, vec![q(2, 3), qi(1), q(4, 3)]);
        assert_eq!(txt(&cs.v)[2][0], "2/9*s1");
    }

    #[test]
    fn shifted_taylor_and_det() {
        let f = taylor_at(2, &qi(1));
        let sp = [Q::zero()];
        let vals: Vec<Q> = f.iter().map(|p| p.specialize_from(1, &sp).specialize(0, &Q::zero()).constant_term()).collect();
        assert_eq!(vals, vec![qi(1), qi(3), qi(3), qi(1)]);
        for (mu, x0, k) in [(2, qi(1), 0), (2, q(-1, 2), 2), (3, qi(2), 1)] {
            let cs = derive_shifted_connection(mu, 2, 1, k, &x0).unwrap();
            let sh = cs.shift.clone().unwrap();
            let lhs = cs.det_s();
            let rhs = &(&MultiPoly::var(mu, 0) - &sh.s0_tilde) * &discriminant(mu).unwrap();
            assert_eq!(lhs, rhs, "mu={mu} x0={x0} k={k}");
        }
    }
}
