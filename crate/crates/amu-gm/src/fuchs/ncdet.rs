//! Ordered determinant of a matrix with entries `a(s)∂_{s0} + b(s)`.
//!
//! The product in every permutation term runs over the columns with the last
//! column leftmost: `Σ_σ sgn σ · p_{σ(μ-1),μ-1} ⋯ p_{σ(0),0}`.

use std::collections::HashMap;

use crate::exact_algebra::DiffOp;
use crate::{Error, Result};

fn check_affine(p: &[Vec<DiffOp>]) -> Result<usize> {
    let n = p.len();
    for (i, row) in p.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Shape(format!("row {i} has {} entries, expected {n}", row.len())));
        }
        for (j, e) in row.iter().enumerate() {
            if e.terms().any(|(&(a, b), _)| a.is_some() || b > 1) {
                return Err(Error::Shape(format!("entry ({i},{j}) is not of the form a*d0 + b: {e}")));
            }
        }
    }
    Ok(n)
}

/// Ordered sum with `cols[slot]` placed at position `slot`, slot 0 being the rightmost factor.
///
/// Repeating a column is allowed; that is how the correction terms of the annihilator arise.
pub fn nc_determinant_slots(p: &[Vec<DiffOp>], cols: &[usize]) -> Result<DiffOp> {
    let n = check_affine(p)?;
    if n == 0 {
        return Err(Error::Shape("empty matrix".into()));
    }
    if cols.len() != n || cols.iter().any(|&c| c >= n) {
        return Err(Error::Shape(format!("slot list {cols:?} does not fit a {n}x{n} matrix")));
    }
    let mu = p[0][0].mu();
    // f[R] = ordered sum over bijections of the rows in R onto slots 0..|R|-1
    let mut f: HashMap<u32, DiffOp> = HashMap::new();
    for r in 0..n {
        f.insert(1 << r, p[r][cols[0]].clone());
    }
    for slot in 1..n {
        let mut next: HashMap<u32, DiffOp> = HashMap::new();
        for (&set, inner) in &f {
            if inner.is_zero() {
                continue;
            }
            for r in (0..n).filter(|r| set & (1 << r) == 0) {
                let entry = &p[r][cols[slot]];
                if entry.is_zero() {
                    continue;
                }
                let above = (set >> (r + 1)).count_ones();
                let mut term = entry.weyl_mul(inner)?;
                if above % 2 == 1 {
                    term = term.neg();
                }
                let key = set | (1 << r);
                let acc = next.remove(&key).unwrap_or_else(|| DiffOp::zero(mu));
                next.insert(key, acc.add(&term));
            }
        }
        f = next;
    }
    Ok(f.remove(&((1u32 << n) - 1)).unwrap_or_else(|| DiffOp::zero(mu)))
}

pub fn nc_determinant(p: &[Vec<DiffOp>]) -> Result<DiffOp> {
    let cols: Vec<usize> = (0..p.len()).collect();
    nc_determinant_slots(p, &cols)
}
