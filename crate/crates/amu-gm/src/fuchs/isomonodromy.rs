//! Sampled check of constant multiplicity along the strata of the discriminant.
//!
//! At each sample the vanishing order of every coefficient of the operator at the
//! critical value is measured on the line through the sample, compared with the
//! order the stratum predicts, and the exponents are computed. Samples on the same
//! stratum must share their exponents.

use num::traits::{One, Zero};
use serde::Serialize;

use super::annihilator::{ordinary_annihilator, FuchsOperator};
use super::indicial::{indicial_at, indicial_polynomial, ExponentSet};
use crate::exact_algebra::rational::{fmt_q, Q};
use crate::exact_algebra::UPoly;
use crate::gauss_manin::{derive_connection, discriminant, stratum_of, ConnectionSystem, StratumLabel};
use crate::par::{self, Exec};
use crate::{Error, Result};

/// A point `(s0, s1, …, s_{μ-1})` claimed to lie on `D^{(k)}`; `k = −1` means off `D`
/// (only meaningful on the extra line `s0 = s̃0` of a shifted operator).
#[derive(Clone, Debug, PartialEq)]
pub struct StratumSample {
    pub point: Vec<Q>,
    pub k: i32,
}

/// Point of `D^{(k)}` where `F + s0 = (z − a)^{k+2} G(z)`, with `G` monic of degree
/// `μ − k − 1` whose coefficients below the subleading one are `tail` (lowest first).
pub fn stratum_point(mu: usize, k: usize, a: &Q, tail: &[Q]) -> Result<StratumSample> {
    crate::check_mu(mu)?;
    if k + 2 > mu + 1 {
        return Err(Error::OutOfRange(format!("k = {k} exceeds μ − 1 = {}", mu - 1)));
    }
    let d = mu - k - 1;
    if tail.len() != d.saturating_sub(1) {
        return Err(Error::Shape(format!("{} tail coefficients, expected {}", tail.len(), d.saturating_sub(1))));
    }
    if d == 0 && !a.is_zero() {
        return Err(Error::OutOfRange("k = μ − 1 forces a = 0".into()));
    }
    // no z^μ term: subleading coefficient of G equals (k+2)a
    let g = if d == 0 {
        UPoly::one()
    } else {
        let mut c = tail.to_vec();
        c.push(Q::from_integer((k as i64 + 2).into()) * a);
        c.push(Q::one());
        UPoly::new(c)
    };
    let f = &UPoly::new(vec![-a.clone(), Q::one()]).pow(k as u32 + 2) * &g;
    Ok(StratumSample { point: (0..mu).map(|j| f.coeff(j)).collect(), k: k as i32 })
}

/// The quasihomogeneous orbit `s_j → τ^{μ+1−j} s_j`.
pub fn scale_sample(s: &StratumSample, tau: &Q) -> StratumSample {
    let mu = s.point.len();
    let point = s.point.iter().enumerate().map(|(j, v)| v * num::pow(tau.clone(), mu + 1 - j)).collect();
    StratumSample { point, k: s.k }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoefficientOrder {
    /// drop in order: the coefficient multiplies total derivative order `order − j`
    pub j: usize,
    /// `None` when the coefficient vanishes identically on the line
    pub vanishing_order: Option<usize>,
    pub required: usize,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleReport {
    #[serde(serialize_with = "ser_point")]
    pub point: Vec<Q>,
    pub claimed_k: i32,
    pub label: Option<StratumLabel>,
    /// `s0 = s̃0` for a shifted operator
    pub on_shift_line: bool,
    pub coefficients: Vec<CoefficientOrder>,
    pub factorization_holds: bool,
    /// every coefficient with a positive predicted order vanishes to exactly that order
    pub sharp: bool,
    pub exponents: Option<ExponentSet>,
    pub exponent_source: String,
    pub note: Option<String>,
}

fn ser_point<S: serde::Serializer>(v: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(fmt_q))
}

#[derive(Clone, Debug, Serialize)]
pub struct StratumGroup {
    pub k: i32,
    pub on_shift_line: bool,
    pub maxwell: bool,
    pub samples: usize,
    pub exponents: Option<ExponentSet>,
    pub exponents_agree: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IsoReport {
    pub mu: usize,
    pub order: usize,
    pub shifted: bool,
    pub samples: Vec<SampleReport>,
    pub groups: Vec<StratumGroup>,
    pub all_factorizations_hold: bool,
    pub all_groups_agree: bool,
}

/// Minimal vanishing order at `t`, over all coefficients of total order `order − j`.
fn measured_orders(op: &FuchsOperator, sp: &[Q], t: &Q) -> Result<Vec<Option<usize>>> {
    let spec = op.body.specialize(sp);
    let mut out: Vec<Option<usize>> = vec![None; op.order + 1];
    for (&(a, b), c) in spec.terms() {
        let total = b as usize + a.is_some() as usize;
        if total > op.order {
            return Err(Error::Shape(format!("term of order {total} above the operator order")));
        }
        let c = c.to_upoly(0).ok_or_else(|| Error::Shape("coefficient still depends on s'".into()))?;
        let Some(v) = c.order_at(t) else { continue };
        let j = op.order - total;
        out[j] = Some(out[j].map_or(v, |w| w.min(v)));
    }
    Ok(out)
}

/// Exponents at the sample: the operator's own determining equation when the branch
/// through the point is smooth, otherwise the line's ordinary annihilator.
fn exponents_at(cs: &ConnectionSystem, op: &FuchsOperator, sp: &[Q], t: &Q) -> (Option<ExponentSet>, String, Option<String>) {
    match indicial_polynomial(op, sp, &UPoly::linear_root(t)) {
        Ok(eqs) if eqs.len() == 1 && eqs[0].irrational_degree == 0 => (Some(eqs[0].exponent_set()), "operator".into(), None),
        Ok(_) => (None, "operator".into(), Some("irrational exponents".into())),
        Err(Error::Unsupported(why)) => {
            let fallback = ordinary_annihilator(cs, sp, 0).and_then(|o| indicial_at(&o, t));
            match fallback {
                Ok(d) => (Some(d.exponent_set()), "ordinary annihilator".into(), Some(why)),
                Err(e) => (None, "ordinary annihilator".into(), Some(e.to_string())),
            }
        }
        Err(e) => (None, "operator".into(), Some(e.to_string())),
    }
}

/// `base` is the unshifted system; its `S` carries the stratification.
fn check_sample(cs: &ConnectionSystem, base: &ConnectionSystem, op: &FuchsOperator, s: &StratumSample) -> Result<SampleReport> {
    let mu = op.mu;
    if s.point.len() != mu {
        return Err(Error::Shape(format!("sample has {} coordinates, expected {mu}", s.point.len())));
    }
    let (t, sp) = (&s.point[0], &s.point[1..]);
    let delta = discriminant(mu)?;
    let label = match stratum_of(base, &delta, &s.point) {
        Ok(l) => Some(l),
        Err(Error::NotOnDiscriminant(_)) => None,
        Err(e) => return Err(e),
    };
    let found_k = label.as_ref().map_or(-1, |l| l.k);
    if found_k != s.k {
        return Err(Error::Stratum(format!("claimed k = {}, found k = {found_k} at {:?}", s.k, s.point.iter().map(fmt_q).collect::<Vec<_>>())));
    }
    let on_shift_line = match cs.shift.as_ref() {
        Some(sh) => sh.s0_tilde.eval(&s.point) == *t,
        None => false,
    };
    if label.is_none() && !on_shift_line {
        return Err(Error::Stratum("sample is neither on the discriminant nor on s0 = s̃0".into()));
    }
    let orders = measured_orders(op, sp, t)?;
    let k = s.k;
    // predicted orders: (k+1) − j, plus one on the shift line of a shifted operator
    let extra = on_shift_line as i32;
    let req: Vec<usize> = (0..=op.order).map(|j| (k + 1 + extra - j as i32).max(0) as usize).collect();
    let coefficients = orders
        .iter()
        .zip(&req)
        .enumerate()
        .map(|(j, (o, r))| CoefficientOrder { j, vanishing_order: *o, required: *r, ok: o.is_none_or(|o| o >= *r) })
        .collect();
    let factorization_holds = orders.iter().zip(&req).all(|(o, r)| o.is_none_or(|o| o >= *r));
    let sharp = orders.iter().zip(&req).all(|(o, r)| *r == 0 || *o == Some(*r));
    let (exponents, exponent_source, note) = exponents_at(cs, op, sp, t);
    Ok(SampleReport { point: s.point.clone(), claimed_k: s.k, label, on_shift_line, coefficients, factorization_holds, sharp, exponents, exponent_source, note })
}

pub fn check_isomonodromy_factorization(cs: &ConnectionSystem, op: &FuchsOperator, samples: &[StratumSample], exec: Exec) -> Result<IsoReport> {
    if cs.mu != op.mu || cs.shift.is_some() != op.x0.is_some() {
        return Err(Error::Shape("operator does not belong to this connection system".into()));
    }
    let base = if cs.shift.is_some() { derive_connection(cs.mu, cs.nu, cs.m)? } else { cs.clone() };
    let reports: Vec<SampleReport> = par::map(exec, samples, |s| check_sample(cs, &base, op, s)).into_iter().collect::<Result<_>>()?;
    let mut groups: Vec<(StratumGroup, Vec<usize>)> = Vec::new();
    for (i, r) in reports.iter().enumerate() {
        let maxwell = r.label.as_ref().is_some_and(|l| l.maxwell);
        match groups.iter_mut().find(|(g, _)| g.k == r.claimed_k && g.on_shift_line == r.on_shift_line && g.maxwell == maxwell) {
            Some((_, v)) => v.push(i),
            None => groups.push((StratumGroup { k: r.claimed_k, on_shift_line: r.on_shift_line, maxwell, samples: 0, exponents: None, exponents_agree: true }, vec![i])),
        }
    }
    let groups: Vec<StratumGroup> = groups
        .into_iter()
        .map(|(mut g, idx)| {
            g.samples = idx.len();
            let first = reports[idx[0]].exponents.clone();
            g.exponents_agree = first.is_some() && idx.iter().all(|&i| reports[i].exponents.as_ref().zip(first.as_ref()).is_some_and(|(a, b)| a.same_exponents(b)));
            g.exponents = first;
            g
        })
        .collect();
    Ok(IsoReport {
        mu: op.mu,
        order: op.order,
        shifted: op.x0.is_some(),
        all_factorizations_hold: reports.iter().all(|r| r.factorization_holds),
        all_groups_agree: groups.iter().all(|g| g.exponents_agree),
        samples: reports,
        groups,
    })
}
