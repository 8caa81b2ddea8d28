//! Multiplicity of zeros of a Dulac series, and the upper bounds for period integrals
//! of `Π(x − x_i)^{k_i} y^m dx` at branch points and at regular points.

use std::fmt;
use std::str::FromStr;

use num::traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::exact_algebra::rational::{floor_q, fmt_q, is_integer, q, Q};
use crate::{Error, Result};

/// A coefficient of a Dulac series: exact, or fitted with an error bar.
#[derive(Clone, Debug, PartialEq)]
pub enum Coefficient {
    Exact(Q),
    Fitted { re: f64, im: f64, err: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DulacTerm {
    pub rho: Q,
    /// power of `log(t − t0)`
    pub k: u32,
    pub coeff: Coefficient,
}

/// `f(t) = Σ f_{ρ,k} (t − t0)^ρ log^k(t − t0)`.
///
/// A fitted coefficient counts as zero when `|f| ≤ max(threshold, zero_factor · err)`,
/// and as nonzero otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct DulacExpansion {
    pub t0: f64,
    pub terms: Vec<DulacTerm>,
    pub threshold: f64,
    pub zero_factor: f64,
}

pub const DEFAULT_ZERO_FACTOR: f64 = 1e3;

impl DulacExpansion {
    pub fn new(t0: f64, terms: Vec<DulacTerm>) -> Self {
        DulacExpansion { t0, terms, threshold: 0.0, zero_factor: DEFAULT_ZERO_FACTOR }
    }

    pub fn is_nonzero(&self, c: &Coefficient) -> bool {
        match c {
            Coefficient::Exact(v) => !v.is_zero(),
            Coefficient::Fitted { re, im, err } => re.hypot(*im) > self.threshold.max(self.zero_factor * err),
        }
    }

    /// `(ρ1, k1)`: the smallest exponent with a nonzero coefficient and its largest log power.
    pub fn leading(&self) -> Result<(Q, u32)> {
        let live: Vec<&DulacTerm> = self.terms.iter().filter(|t| self.is_nonzero(&t.coeff)).collect();
        let rho1 = live.iter().map(|t| &t.rho).min().cloned().ok_or_else(|| Error::Indeterminate("every coefficient is below the zero threshold".into()))?;
        let k1 = live.iter().filter(|t| t.rho == rho1).map(|t| t.k).max().unwrap_or(0);
        Ok((rho1, k1))
    }
}

/// `(k1 + 1)([ρ1] + 1)`, `[·]` the integer part (floor).
pub fn dulac_multiplicity(e: &DulacExpansion) -> Result<i64> {
    let (rho1, k1) = e.leading()?;
    let fl = floor_q(&rho1).to_i64().ok_or_else(|| Error::OutOfRange(format!("ρ1 = {rho1}")))?;
    Ok((k1 as i64 + 1) * (fl + 1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PointType {
    /// a critical value `s0^{(i)}`
    Branch,
    Regular,
}

impl FromStr for PointType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "branch" => Ok(PointType::Branch),
            "regular" => Ok(PointType::Regular),
            _ => Err(Error::Parse(format!("point type `{s}`, expected branch or regular"))),
        }
    }
}

impl fmt::Display for PointType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PointType::Branch => "branch",
            PointType::Regular => "regular",
        })
    }
}

/// Integrand `Π(x − x_i)^{k_i} y^m dx` on `x^{μ+1} + … + s_1 x − y^ν + s0 = 0`;
/// `big_k = Σ k_i`, `k1` the power at the (possibly critical) first point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundQuery {
    pub mu: usize,
    pub nu: u32,
    pub m: i64,
    pub big_k: u64,
    pub k1: u64,
    pub point: PointType,
}

impl BoundQuery {
    pub fn validate(&self) -> Result<()> {
        if self.mu < 2 || self.nu < 2 {
            return Err(Error::OutOfRange(format!("μ = {}, ν = {}; both must be at least 2", self.mu, self.nu)));
        }
        if self.k1 > self.big_k {
            return Err(Error::OutOfRange(format!("k1 = {} exceeds K = {}", self.k1, self.big_k)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundResult {
    pub bound: i64,
    pub formula: &'static str,
    /// largest exponent contribution at the point, when the case list provides one
    #[serde(serialize_with = "ser_opt_q")]
    pub rho: Option<Q>,
    /// the estimate `2ρ` (ρ integral) or `[ρ] + 1` derived from `rho`, kept apart from `bound`
    pub rho_estimate: Option<i64>,
}

fn ser_opt_q<S: serde::Serializer>(v: &Option<Q>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_some(&fmt_q(x)),
        None => s.serialize_none(),
    }
}

fn floor_i64(x: &Q) -> i64 {
    floor_q(x).to_i64().expect("bound fits in i64")
}

pub fn zero_bound(qy: &BoundQuery) -> Result<BoundResult> {
    qy.validate()?;
    let mu = qy.mu as i64;
    let m_nu = q(qy.m, qy.nu as i64);
    let (bound, formula) = match qy.point {
        PointType::Regular => (mu + qy.big_k as i64, "zero_bound.regular"),
        PointType::Branch if qy.mu.is_multiple_of(2) => (2 * floor_i64(&(&m_nu + q(qy.big_k as i64 + mu, 2))), "zero_bound.branch_even"),
        PointType::Branch if qy.k1 == 0 => ((mu - 1).max(2 * floor_i64(&(&m_nu + q(3, 2)))), "zero_bound.branch_odd"),
        PointType::Branch => return Err(Error::Uncovered(format!("μ = {} odd at a branch point with k1 = {} > 0", qy.mu, qy.k1))),
    };
    let rho = match qy.point {
        PointType::Regular => None,
        PointType::Branch => Some(classify_exponent_bound(qy.mu, qy.nu, qy.m, qy.k1, Stratum::Critical)?),
    };
    let rho_estimate = rho.as_ref().map(estimate_from_rho);
    Ok(BoundResult { bound, formula, rho, rho_estimate })
}

/// The hyperelliptic form `2[(K + m + μ)/2]`, valid for `ν = 2`, μ even.
pub fn zero_bound_hyperelliptic(mu: usize, m: i64, big_k: u64) -> i64 {
    2 * floor_i64(&q(big_k as i64 + m + mu as i64, 2))
}

/// Which kind of critical value: the one where `x^{(1)}` sits on the critical point,
/// or one of the others.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Stratum {
    Critical,
    Other,
}

impl FromStr for Stratum {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "critical" | "1" => Ok(Stratum::Critical),
            "other" | "-" => Ok(Stratum::Other),
            _ => Err(Error::Parse(format!("stratum `{s}`, expected critical or other"))),
        }
    }
}

/// Largest exponent contribution ρ at a critical value.
pub fn classify_exponent_bound(mu: usize, nu: u32, m: i64, k1: u64, stratum: Stratum) -> Result<Q> {
    let m_nu = q(m, nu as i64);
    match stratum {
        Stratum::Other => Ok(m_nu + q(1, 2)),
        Stratum::Critical if mu.is_multiple_of(2) => Ok(if k1.is_multiple_of(2) { m_nu + q(k1 as i64 + 1, 2) } else { m_nu + q(k1 as i64 + mu as i64, 2) }),
        // odd μ: only the k1 = 0 exponents are known
        Stratum::Critical if k1 == 0 => Ok(m_nu + q(1, 2)),
        Stratum::Critical => Err(Error::Uncovered(format!("μ = {mu} odd at the critical stratum with k1 = {k1}"))),
    }
}

/// `2ρ` when ρ is an integer, `[ρ] + 1` otherwise.
pub fn estimate_from_rho(rho: &Q) -> i64 {
    if is_integer(rho) {
        2 * floor_i64(rho)
    } else {
        floor_i64(rho) + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_algebra::rational::qi;

    fn exact(rho: Q, k: u32, c: i64) -> DulacTerm {
        DulacTerm { rho, k, coeff: Coefficient::Exact(qi(c)) }
    }

    #[test]
    fn multiplicity_examples() {
        let e = DulacExpansion::new(0.0, vec![exact(q(1, 2), 0, 1)]);
        assert_eq!(dulac_multiplicity(&e).unwrap(), 1);
        let e = DulacExpansion::new(0.0, vec![exact(q(3, 2), 1, 1), exact(qi(2), 0, 5)]);
        assert_eq!(dulac_multiplicity(&e).unwrap(), 4);
    }

    #[test]
    fn fitted_coefficients_use_the_threshold() {
        let small = DulacTerm { rho: qi(0), k: 0, coeff: Coefficient::Fitted { re: 1e-12, im: 0.0, err: 1e-14 } };
        let big = DulacTerm { rho: qi(1), k: 1, coeff: Coefficient::Fitted { re: 0.3, im: -0.1, err: 1e-14 } };
        let e = DulacExpansion::new(1.0, vec![small, big]);
        assert_eq!(dulac_multiplicity(&e).unwrap(), 4);
        let e = DulacExpansion::new(1.0, vec![exact(qi(1), 0, 0)]);
        assert!(matches!(dulac_multiplicity(&e), Err(Error::Indeterminate(_))));
    }

    #[test]
    fn bound_examples() {
        let b = |mu, m, big_k, k1, point| zero_bound(&BoundQuery { mu, nu: 2, m, big_k, k1, point }).unwrap().bound;
        assert_eq!(b(2, 1, 0, 0, PointType::Branch), 2);
        assert_eq!(b(3, 1, 0, 0, PointType::Branch), 4);
        assert_eq!(b(4, 1, 3, 0, PointType::Regular), 7);
        let r = zero_bound(&BoundQuery { mu: 3, nu: 2, m: 1, big_k: 2, k1: 1, point: PointType::Branch });
        assert!(matches!(r, Err(Error::Uncovered(_))));
    }

    #[test]
    fn exponent_cases() {
        assert_eq!(classify_exponent_bound(4, 3, 2, 2, Stratum::Critical).unwrap(), q(2, 3) + q(3, 2));
        assert_eq!(classify_exponent_bound(4, 3, 2, 1, Stratum::Critical).unwrap(), q(2, 3) + q(5, 2));
        assert_eq!(classify_exponent_bound(5, 3, 2, 7, Stratum::Other).unwrap(), q(2, 3) + q(1, 2));
        assert!(classify_exponent_bound(5, 3, 2, 1, Stratum::Critical).is_err());
        assert_eq!(estimate_from_rho(&qi(2)), 4);
        assert_eq!(estimate_from_rho(&q(5, 2)), 3);
        assert_eq!(estimate_from_rho(&q(-1, 2)), 0);
    }

    #[test]
    fn negative_m_floors_down() {
        let r = zero_bound(&BoundQuery { mu: 2, nu: 3, m: -4, big_k: 0, k1: 0, point: PointType::Branch }).unwrap();
        // 2[−4/3 + 1] = 2·(−1)
        assert_eq!(r.bound, -2);
    }
}
