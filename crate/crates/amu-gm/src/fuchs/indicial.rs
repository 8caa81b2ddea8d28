//! Determining equations at finite singular points and at infinity.
//!
//! A finite point `t` is given by a polynomial `g` with `g(t) = 0`; the work is
//! done in `Q[x]/(g)`. When `g` turns out to be reducible the computation is
//! split and one equation per factor is returned, each standing for `deg` conjugate points.

use num::traits::{One, Zero};
use serde::Serialize;

use super::annihilator::FuchsOperator;
use crate::exact_algebra::diffop::OrdinaryOp;
use crate::exact_algebra::numfield::{NumberField, Split};
use crate::exact_algebra::rational::{fmt_q, Q};
use crate::exact_algebra::{MultiPoly, UPoly};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum PointLabel {
    /// a root of the given monic polynomial (its degree counts the conjugate points)
    Finite { modulus: String, degree: usize, value: Option<String> },
    Infinity,
}

#[derive(Clone, Debug)]
pub struct DeterminingEquation {
    pub point: PointLabel,
    /// modulus of the field the point lives in (`x − t` for a rational point)
    pub field: Option<NumberField>,
    pub kappa: usize,
    /// monic `Π₀(ρ)` when its coefficients are rational
    pub poly: Option<UPoly>,
    /// coefficients of the monic `Π₀` as field elements, lowest power first
    pub poly_field: Vec<UPoly>,
    /// rational roots with multiplicity
    pub roots: Vec<(Q, usize)>,
    /// degree of the part of `Π₀` without rational roots
    pub irrational_degree: usize,
}

impl DeterminingEquation {
    /// Number of conjugate points this equation stands for.
    pub fn count(&self) -> usize {
        self.field.as_ref().map_or(1, |f| f.degree())
    }

    /// Sum of the roots of `Π₀` over all conjugate points.
    pub fn exponent_sum(&self) -> Q {
        let n = self.poly_field.len() - 1;
        if n == 0 {
            return Q::zero();
        }
        let c = &self.poly_field[n - 1];
        match &self.field {
            Some(k) => -k.trace(c),
            None => -c.coeff(0),
        }
    }

    pub fn exponent_set(&self) -> ExponentSet {
        ExponentSet { point: self.point.clone(), exponents: self.roots.clone() }
    }
}

/// Exponents with their multiplicity; multiplicity `L` means log powers up to `L − 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentSet {
    pub point: PointLabel,
    #[serde(serialize_with = "ser_exps")]
    pub exponents: Vec<(Q, usize)>,
}

fn ser_exps<S: serde::Serializer>(v: &[(Q, usize)], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for (r, l) in v {
        seq.serialize_element(&(fmt_q(r), l))?;
    }
    seq.end()
}

impl ExponentSet {
    pub fn new(point: PointLabel, list: &[Q]) -> Self {
        let mut v: Vec<Q> = list.to_vec();
        v.sort();
        let mut exps: Vec<(Q, usize)> = Vec::new();
        for r in v {
            match exps.last_mut() {
                Some((x, m)) if *x == r => *m += 1,
                _ => exps.push((r, 1)),
            }
        }
        ExponentSet { point, exponents: exps }
    }

    pub fn total(&self) -> usize {
        self.exponents.iter().map(|(_, m)| m).sum()
    }

    pub fn sum(&self) -> Q {
        self.exponents.iter().map(|(r, m)| r * Q::from_integer((*m as i64).into())).sum()
    }

    /// Pairs of distinct exponents at integer distance.
    pub fn resonances(&self) -> Vec<(Q, Q)> {
        let mut out = Vec::new();
        for (i, (a, _)) in self.exponents.iter().enumerate() {
            for (b, _) in &self.exponents[i + 1..] {
                if (b - a).is_integer() {
                    out.push((a.clone(), b.clone()));
                }
            }
        }
        out
    }

    pub fn same_exponents(&self, o: &Self) -> bool {
        self.exponents == o.exponents
    }
}

/// Coefficients `c_b` of `Σ c_b ∂^b` as Taylor rows at the point, in the field.
type Rows = Vec<Vec<UPoly>>;

fn label(field: &NumberField) -> PointLabel {
    let value = field.as_rational(&field.gen()).map(|v| fmt_q(&v));
    PointLabel::Finite { modulus: field.modulus().fmt_in("t"), degree: field.degree(), value }
}

/// Runs `f` in `Q[x]/(g)`, splitting `g` on zero divisors.
fn split_run<T>(g: &UPoly, f: &dyn Fn(&NumberField) -> std::result::Result<T, SplitOr>) -> Result<Vec<T>> {
    let mut todo: Vec<UPoly> = g.squarefree().into_iter().map(|(h, _)| h).collect();
    let mut out = Vec::new();
    while let Some(h) = todo.pop() {
        let k = NumberField::new(&h);
        match f(&k) {
            Ok(v) => out.push(v),
            Err(SplitOr::Split(Split(a))) => {
                let b = h.div_exact(&a).ok_or_else(|| Error::Numerical("split factor does not divide the modulus".into()))?;
                todo.push(a);
                todo.push(b.monic());
            }
            Err(SplitOr::Err(e)) => return Err(e),
        }
    }
    Ok(out)
}

enum SplitOr {
    Split(Split),
    Err(Error),
}

impl From<Split> for SplitOr {
    fn from(s: Split) -> Self {
        SplitOr::Split(s)
    }
}

impl From<Error> for SplitOr {
    fn from(e: Error) -> Self {
        SplitOr::Err(e)
    }
}

/// Zero test that is honest in a ring with zero divisors: a nonzero element must be a unit,
/// otherwise the modulus splits.
fn is_zero_in(k: &NumberField, a: &UPoly) -> std::result::Result<bool, SplitOr> {
    if k.is_zero(a) {
        return Ok(true);
    }
    k.inv(a)?;
    Ok(false)
}

/// Order of vanishing of a Taylor row.
fn row_order(k: &NumberField, row: &[UPoly]) -> std::result::Result<Option<usize>, SplitOr> {
    for (i, c) in row.iter().enumerate() {
        if !is_zero_in(k, c)? {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

fn monic_in_field(k: &NumberField, poly: &[UPoly]) -> std::result::Result<Vec<UPoly>, SplitOr> {
    let mut top = None;
    for (i, c) in poly.iter().enumerate().rev() {
        if !is_zero_in(k, c)? {
            top = Some(i);
            break;
        }
    }
    let top = top.ok_or_else(|| Error::Shape("determining polynomial vanishes".into()))?;
    let inv = k.inv(&poly[top])?;
    Ok(poly[..=top].iter().map(|c| k.mul(c, &inv)).collect())
}

fn finish(k: &NumberField, kappa: usize, poly: Vec<UPoly>, point: PointLabel, field: Option<NumberField>) -> std::result::Result<DeterminingEquation, SplitOr> {
    let monic = monic_in_field(k, &poly)?;
    let rat: Option<Vec<Q>> = monic.iter().map(|c| k.as_rational(c)).collect();
    let (poly_q, roots, irr) = match rat {
        Some(cs) => {
            let p = UPoly::new(cs);
            let (roots, rest) = p.rational_roots();
            let d = rest.degree().unwrap_or(0);
            (Some(p), roots, d)
        }
        None => (None, Vec::new(), monic.len() - 1),
    };
    Ok(DeterminingEquation { point, field, kappa, poly: poly_q, poly_field: monic, roots, irrational_degree: irr })
}

/// `Π₀` from Taylor rows, checking the vanishing conditions on every coefficient.
fn from_rows(k: &NumberField, rows: &Rows) -> std::result::Result<(usize, Vec<UPoly>), SplitOr> {
    let m = rows.len() - 1;
    let kappa = row_order(k, &rows[m])?.ok_or_else(|| Error::Shape("leading coefficient is zero".into()))?;
    for j in 1..=m.min(kappa) {
        let need = kappa - j;
        if let Some(o) = row_order(k, &rows[m - j])? {
            if o < need {
                return Err(Error::Factorization(format!("coefficient of ∂^{} vanishes to order {o}, regularity needs {need}", m - j)).into());
            }
        }
    }
    // u^{ρ-b+i} for c_{b,i}; the lowest power is ρ - m + κ
    let e = m as i64 - kappa as i64;
    let mut poly = vec![UPoly::zero(); m + 1];
    for (b, row) in rows.iter().enumerate() {
        let i = b as i64 - e;
        if i < 0 {
            continue;
        }
        let Some(c) = row.get(i as usize) else { continue };
        for (p, f) in UPoly::falling(b).coeffs().iter().enumerate() {
            poly[p] = k.reduce(&(&poly[p] + &c.scale(f)));
        }
    }
    Ok((kappa, poly))
}

fn taylor_rows(k: &NumberField, op: &OrdinaryOp) -> Rows {
    let at = k.gen();
    op.coeffs().iter().map(|c| k.taylor(c, &at)).collect()
}

/// Determining equation(s) of an ordinary operator at the roots of `g`.
pub fn indicial_ordinary(op: &OrdinaryOp, g: &UPoly) -> Result<Vec<DeterminingEquation>> {
    if op.order().unwrap_or(0) == 0 {
        return Err(Error::Shape("operator of order zero".into()));
    }
    split_run(g, &|k| {
        let (kappa, poly) = from_rows(k, &taylor_rows(k, op))?;
        finish(k, kappa, poly, label(k), Some(k.clone()))
    })
}

/// At a rational point.
pub fn indicial_at(op: &OrdinaryOp, t: &Q) -> Result<DeterminingEquation> {
    Ok(indicial_ordinary(op, &UPoly::linear_root(t))?.remove(0))
}

/// Equation at infinity for solutions `t^{-ρ}(1 + O(1/t))`.
pub fn indicial_at_infinity(op: &OrdinaryOp) -> Result<DeterminingEquation> {
    let m = op.order().ok_or_else(|| Error::Shape("zero operator".into()))?;
    let top = op.leading().degree().unwrap() as i64 - m as i64;
    for b in 0..m {
        if let Some(d) = op.coeff(b).degree() {
            if d as i64 - b as i64 > top {
                return Err(Error::Factorization(format!("coefficient of ∂^{b} has degree {d}, regularity at infinity needs at most {}", top + b as i64)));
            }
        }
    }
    let mut poly = UPoly::zero();
    for (b, c) in op.coeffs().iter().enumerate() {
        let i = top + b as i64;
        if i < 0 {
            continue;
        }
        let v = c.coeff(i as usize);
        if !v.is_zero() {
            poly = &poly + &UPoly::falling(b).compose_affine(&-Q::one(), &Q::zero()).scale(&v);
        }
    }
    let monic = poly.monic();
    let (roots, rest) = monic.rational_roots();
    Ok(DeterminingEquation {
        point: PointLabel::Infinity,
        field: None,
        kappa: 0,
        poly_field: monic.coeffs().iter().map(|c| UPoly::constant(c.clone())).collect(),
        poly: Some(monic),
        roots,
        irrational_degree: rest.degree().unwrap_or(0),
    })
}

/// The distinct finite singular points: squarefree factors of the leading coefficient.
pub fn singular_points(op: &OrdinaryOp) -> Vec<UPoly> {
    let lead = op.leading();
    let mut out = Vec::new();
    for (f, _) in lead.squarefree() {
        let (roots, rest) = f.rational_roots();
        for (r, _) in roots {
            out.push(UPoly::linear_root(&r));
        }
        if rest.degree().unwrap_or(0) > 0 {
            out.push(rest.monic());
        }
    }
    out
}

/// Determining equation of a `FuchsOperator` on the line `s' = sp` at the roots of `g`.
///
/// A term `∂_{s_j}∂^b` acts on `(s0 − t(s'))^ρ` as `−(∂t/∂s_j) ∂^{b+1}`; the derivative of the
/// branch `t(s')` comes from the one factor of the leading coefficient vanishing at `t`, which
/// must have a simple root there.
pub fn indicial_polynomial(op: &FuchsOperator, sp: &[Q], g: &UPoly) -> Result<Vec<DeterminingEquation>> {
    if sp.len() + 1 != op.mu {
        return Err(Error::Shape(format!("{} values for s', expected {}", sp.len(), op.mu - 1)));
    }
    let spec = op.body.specialize(sp);
    let order = op.order;
    let to_u = |p: &MultiPoly| p.to_upoly(0).ok_or_else(|| Error::Shape("coefficient still depends on s'".into()));
    let mut base: Vec<UPoly> = vec![UPoly::zero(); order + 1];
    let mut primed: Vec<(usize, usize, UPoly)> = Vec::new();
    for (&(a, b), c) in spec.terms() {
        let c = to_u(c)?;
        match a {
            None => base[b as usize] = &base[b as usize] + &c,
            Some(j) => primed.push((j, b as usize + 1, c)),
        }
    }
    split_run(g, &|k| {
        let at = k.gen();
        let mut rows: Rows = base.iter().map(|c| k.taylor(c, &at)).collect();
        if !primed.is_empty() {
            let mut branch = None;
            for f in &op.factors {
                let fs = to_u(&f.specialize_from(1, sp))?;
                if k.is_zero(&k.eval(&fs, &at)) {
                    if branch.is_some() {
                        return Err(Error::Unsupported("two factors of the leading coefficient meet at this point".into()).into());
                    }
                    branch = Some(f.clone());
                }
            }
            let f = branch.ok_or_else(|| Error::Shape("point is not a root of the leading coefficient".into()))?;
            let d0 = to_u(&f.derivative(0).specialize_from(1, sp))?;
            let d0v = k.eval(&d0, &at);
            if k.is_zero(&d0v) {
                return Err(Error::Unsupported("multiple root in s0: the branch t(s') is not smooth here; use the ordinary annihilator".into()).into());
            }
            let inv = k.inv(&d0v)?;
            for (j, b, c) in &primed {
                let dj = to_u(&f.derivative(*j).specialize_from(1, sp))?;
                // −∂t/∂s_j = ∂_j f / ∂_0 f
                let w = k.mul(&k.eval(&dj, &at), &inv);
                let tc = k.taylor(c, &at);
                let row = &mut rows[*b];
                if row.len() < tc.len() {
                    row.resize(tc.len(), UPoly::zero());
                }
                for (i, v) in tc.iter().enumerate() {
                    row[i] = k.reduce(&(&row[i] + &k.mul(v, &w)));
                }
            }
        }
        let (kappa, poly) = from_rows(k, &rows)?;
        finish(k, kappa, poly, label(k), Some(k.clone()))
    })
}
