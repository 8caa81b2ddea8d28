//! Monodromy of `S ∂K/∂s0 = (L+V) K` by transporting a fundamental matrix along loops
//! in the `s0`-plane, with `s'` fixed.

use std::cell::Cell;
use std::f64::consts::PI;

use num::complex::Complex64;
use serde::Serialize;

use super::curve::{critical_values, roots_of_fiber, CurveConfig};
use super::integrate::{period_with, CyclePath, PeriodOptions};
use super::residual::system_weights;
use crate::gauss_manin::ConnectionSystem;
use crate::numerics::{dopri5, eigenvalues, lu_solve, mat_norm, singular_values, CMat, OdeOptions};
use crate::par::{self, Exec};
use crate::{Error, Result};

/// `S` and `L+V` as polynomials in `s0` alone, `s'` already substituted.
struct S0Family {
    n: usize,
    s: Vec<Vec<Complex64>>,
    r: Vec<Vec<Complex64>>,
}

impl S0Family {
    fn new(cs: &ConnectionSystem, sp: &[Complex64]) -> Self {
        let n = cs.size();
        let mut at = vec![Complex64::new(0.0, 0.0)];
        at.extend_from_slice(&sp[1..]);
        let flat = |m: &crate::exact_algebra::polymat::PolyMat| -> Vec<Vec<Complex64>> {
            m.iter().flatten().map(|p| p.coeffs_in(0).iter().map(|c| c.eval_c(&at)).collect()).collect()
        };
        S0Family { n, s: flat(&cs.s), r: flat(&cs.r()) }
    }

    fn at(&self, s0: Complex64) -> (CMat, CMat) {
        let horner = |c: &Vec<Complex64>| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &x| acc * s0 + x);
        let n = self.n;
        (CMat::from_fn(n, n, |i, j| horner(&self.s[i * n + j])), CMat::from_fn(n, n, |i, j| horner(&self.r[i * n + j])))
    }
}

#[derive(Clone, Copy, Debug)]
enum Seg {
    Line(Complex64, Complex64),
    /// center, radius, start angle, signed sweep
    Arc(Complex64, f64, f64, f64),
}

impl Seg {
    fn at(&self, t: f64) -> (Complex64, Complex64) {
        match *self {
            Seg::Line(p, q) => (p + (q - p) * t, q - p),
            Seg::Arc(c, r, th, sw) => {
                let e = Complex64::from_polar(r, th + sw * t);
                (c + e, e * Complex64::new(0.0, sw))
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct MonodromyOptions {
    /// loop radius; default half the distance to the nearest other singular value
    pub radius: Option<f64>,
    pub rtol: f64,
    pub atol: f64,
    pub exec: Exec,
}

impl Default for MonodromyOptions {
    fn default() -> Self {
        MonodromyOptions { radius: None, rtol: 1e-12, atol: 1e-14, exec: Exec::Auto }
    }
}

/// Transport matrix `Y` with `K(end) = Y K(start)` for every solution `K`.
fn transport(fam: &S0Family, path: &[Seg], o: &MonodromyOptions) -> Result<(CMat, usize)> {
    let n = fam.n;
    let mut y = CMat::identity(n, n);
    let mut steps = 0;
    for seg in path {
        let singular = Cell::new(false);
        let f = |t: f64, v: &[Complex64]| -> Vec<Complex64> {
            let (z, dz) = seg.at(t);
            let (s, r) = fam.at(z);
            let ym = CMat::from_column_slice(n, n, v);
            match lu_solve(&s, &(r * ym)) {
                Some(x) => (x * dz).as_slice().to_vec(),
                None => {
                    singular.set(true);
                    vec![Complex64::new(0.0, 0.0); n * n]
                }
            }
        };
        let opt = OdeOptions { rtol: o.rtol, atol: o.atol, h0: 1e-3, max_steps: 400_000 };
        let (v, st) = dopri5(f, 0.0, 1.0, y.as_slice(), &opt).map_err(Error::Numerical)?;
        if singular.get() {
            return Err(Error::Numerical("S is singular on the path".into()));
        }
        steps += st.accepted;
        y = CMat::from_column_slice(n, n, &v);
    }
    Ok((y, steps))
}

/// Finite singular values of the system in `s0`: the critical values and, for a
/// shifted system, `s̃0`.
pub fn singular_points(cs: &ConnectionSystem, cfg: &CurveConfig) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = Vec::new();
    for (_, t) in critical_values(cfg) {
        if !v.iter().any(|w| (w - t).norm() < 1e-9 * (1.0 + t.norm())) {
            v.push(t);
        }
    }
    if let Some(sh) = &cs.shift {
        let t = sh.s0_tilde.eval_c(&cfg.s);
        if !v.iter().any(|w| (w - t).norm() < 1e-9 * (1.0 + t.norm())) {
            v.push(t);
        }
    }
    v
}

fn ser_cmat<S: serde::Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
    serde::Serialize::serialize(&rows, s)
}

fn ser_opt_cmat<S: serde::Serializer>(m: &Option<CMat>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match m {
        Some(m) => ser_cmat(m, s),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MonodromyReport {
    #[serde(serialize_with = "super::ser_c")]
    pub t0: Complex64,
    pub radius: f64,
    #[serde(serialize_with = "super::ser_c")]
    pub base_point: Complex64,
    /// acts on solution vectors: `K ↦ M K`
    #[serde(serialize_with = "ser_cmat")]
    pub matrix: CMat,
    #[serde(serialize_with = "super::ser_c_vec")]
    pub eigenvalues: Vec<Complex64>,
    /// `1 + tr(M − I)` when `M − I` has numerical rank one; the other eigenvalues are then 1
    #[serde(serialize_with = "ser_opt_c")]
    pub rank_one_eigenvalue: Option<Complex64>,
    /// singular values of `M − I`
    pub defect_singular_values: Vec<f64>,
    /// `Φ⁻¹ M Φ` in the basis of segment cycles at the base point
    #[serde(serialize_with = "ser_opt_cmat")]
    pub period_matrix: Option<CMat>,
    pub cycles: Vec<CyclePath>,
    pub steps: usize,
}

fn ser_opt_c<S: serde::Serializer>(z: &Option<Complex64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match z {
        Some(z) => super::ser_c(z, s),
        None => s.serialize_none(),
    }
}

fn check_cfg(cs: &ConnectionSystem, cfg: &CurveConfig) -> Result<()> {
    if cs.mu != cfg.mu {
        return Err(Error::VarMismatch(cs.mu, cfg.mu));
    }
    if (cs.nu as i64) * cfg.m != (cfg.nu as i64) * cs.m {
        return Err(Error::Shape("system and curve have different λ".into()));
    }
    Ok(())
}

/// Segment cycles forming a spanning tree of the roots (shortest edges first), and the
/// period matrix whose columns are `K` over them.
fn period_basis(cs: &ConnectionSystem, cfg: &CurveConfig) -> Option<(Vec<CyclePath>, CMat)> {
    let roots = roots_of_fiber(cfg).ok()?;
    let r = &roots.roots;
    let mut in_tree = vec![false; r.len()];
    in_tree[0] = true;
    let mut cycles = Vec::new();
    for _ in 1..r.len() {
        let (a, b) = (0..r.len())
            .filter(|&i| in_tree[i])
            .flat_map(|i| (0..r.len()).filter(|&j| !in_tree[j]).map(move |j| (i, j)))
            .min_by(|&(i, j), &(k, l)| (r[i] - r[j]).norm().total_cmp(&(r[k] - r[l]).norm()))?;
        in_tree[b] = true;
        cycles.push(CyclePath::segment(a.min(b), a.max(b)));
    }
    let w = system_weights(cs);
    let mut phi = CMat::zeros(w.len(), cycles.len());
    for (j, c) in cycles.iter().enumerate() {
        for (i, &wi) in w.iter().enumerate() {
            phi[(i, j)] = period_with(cfg, &roots, *c, wi, cfg.lambda(), &PeriodOptions::default()).ok()?.value;
        }
    }
    Some((cycles, phi))
}

fn rank_one(m: &CMat) -> (Option<Complex64>, Vec<f64>) {
    let n = m.nrows();
    let d = m - CMat::identity(n, n);
    let sv = singular_values(&d);
    let tol = 1e-7 * sv[0].max(1.0);
    let est = (sv.len() < 2 || sv[1] <= tol).then(|| Complex64::new(1.0, 0.0) + d.trace());
    (est, sv)
}

fn nearest_other(points: &[Complex64], t0: Complex64) -> f64 {
    points.iter().map(|p| (p - t0).norm()).filter(|&d| d > 1e-9 * (1.0 + t0.norm())).fold(f64::INFINITY, f64::min)
}

/// Monodromy around the singular value `t0` along a positive circle based at `t0 + radius`.
pub fn monodromy(cs: &ConnectionSystem, cfg: &CurveConfig, t0: Complex64, o: &MonodromyOptions) -> Result<MonodromyReport> {
    check_cfg(cs, cfg)?;
    let pts = singular_points(cs, cfg);
    let near = pts.iter().map(|p| (p - t0).norm()).fold(f64::INFINITY, f64::min);
    let scale = cfg.scale().max(1.0).powi(cfg.mu as i32 + 1);
    if near > 1e-8 * scale {
        return Err(Error::NotOnDiscriminant(format!("s0 = {t0} is {near:.2e} from the nearest singular value")));
    }
    let room = nearest_other(&pts, t0);
    let radius = o.radius.unwrap_or(if room.is_finite() { 0.5 * room } else { 0.5 * cfg.scale().max(1.0) });
    if radius >= 0.9 * room {
        return Err(Error::OutOfRange(format!("loop radius {radius:.3e} comes within 10% of another singular value at {room:.3e}")));
    }
    let fam = S0Family::new(cs, &cfg.s);
    let (m, steps) = transport(&fam, &[Seg::Arc(t0, radius, 0.0, 2.0 * PI)], o)?;
    let base = t0 + radius;
    let (rank_one_eigenvalue, defect_singular_values) = rank_one(&m);
    let basis = period_basis(cs, &cfg.with_s0(base));
    let (cycles, period_matrix) = match basis {
        Some((c, phi)) if phi.nrows() == phi.ncols() => {
            let pm = lu_solve(&phi, &(&m * &phi));
            (c, pm)
        }
        Some((c, _)) => (c, None),
        None => (Vec::new(), None),
    };
    Ok(MonodromyReport { t0, radius, base_point: base, eigenvalues: eigenvalues(&m), matrix: m, rank_one_eigenvalue, defect_singular_values, period_matrix, cycles, steps })
}

#[derive(Clone, Debug, Serialize)]
pub struct LassoReport {
    #[serde(serialize_with = "super::ser_c")]
    pub t: Complex64,
    /// angle of `t − B` seen from the base point, measured from the outward direction
    pub angle: f64,
    #[serde(serialize_with = "super::ser_c_vec")]
    pub eigenvalues: Vec<Complex64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompositeReport {
    #[serde(serialize_with = "super::ser_c")]
    pub base_point: Complex64,
    pub big_radius: f64,
    /// lassos in traversal order
    pub lassos: Vec<LassoReport>,
    /// `‖M_∞ · M_last ⋯ M_first − I‖`, `M_∞` the loop around infinity (clockwise big circle)
    pub identity_defect: f64,
}

/// Lassos around every finite singular value, multiplied in the order that makes them
/// homotopic to the positive big circle, then closed up by the loop around ∞.
pub fn composite_loop(cs: &ConnectionSystem, cfg: &CurveConfig, o: &MonodromyOptions) -> Result<CompositeReport> {
    check_cfg(cs, cfg)?;
    let pts = singular_points(cs, cfg);
    let center = pts.iter().sum::<Complex64>() / pts.len() as f64;
    let spread = pts.iter().map(|p| (p - center).norm()).fold(0.0, f64::max).max(0.1 * cfg.scale().max(1.0));
    let big = 2.0 * spread;
    let min_sep = pts.iter().enumerate().flat_map(|(i, p)| pts[i + 1..].iter().map(move |q| (p - q).norm())).fold(f64::INFINITY, f64::min);
    let small = if min_sep.is_finite() { 0.3 * min_sep } else { 0.3 * spread };
    // an off-axis base point keeps the rays apart even when all singular values are collinear
    let mut chosen = None;
    for k in 0..16 {
        let phi = 1.0 + 0.37 * k as f64;
        let b = center + Complex64::from_polar(big, phi);
        let clear = pts.iter().enumerate().all(|(i, &p)| {
            let foot = p + (b - p) / (b - p).norm() * small;
            pts.iter().enumerate().all(|(j, &q)| j == i || seg_dist(q, b, foot) > 1.2 * small)
        });
        if clear {
            chosen = Some((b, phi));
            break;
        }
    }
    let (b, phi) = chosen.ok_or_else(|| Error::Numerical("no base point with clear rays".into()))?;
    let mut order: Vec<(f64, Complex64)> = pts
        .iter()
        .map(|&p| {
            // angle in (0, 2π) from the outward direction, positive sense
            let a = ((p - b).arg() - phi).rem_euclid(2.0 * PI);
            (a, p)
        })
        .collect();
    order.sort_by(|x, y| x.0.total_cmp(&y.0));
    let fam = S0Family::new(cs, &cfg.s);
    let lassos = par::map(o.exec, &order, |&(_, p)| {
        let dir = (b - p) / (b - p).norm();
        let foot = p + dir * small;
        transport(&fam, &[Seg::Line(b, foot), Seg::Arc(p, small, dir.arg(), 2.0 * PI), Seg::Line(foot, b)], o)
    });
    let n = fam.n;
    let mut prod = CMat::identity(n, n);
    let mut reports = Vec::new();
    for ((a, p), y) in order.iter().zip(lassos) {
        let (y, _) = y?;
        reports.push(LassoReport { t: *p, angle: *a, eigenvalues: eigenvalues(&y) });
        prod = &y * &prod;
    }
    let (around, _) = transport(&fam, &[Seg::Arc(center, big, phi, -2.0 * PI)], o)?;
    let defect = mat_norm(&(&around * &prod - CMat::identity(n, n)));
    Ok(CompositeReport { base_point: b, big_radius: big, lassos: reports, identity_defect: defect })
}

fn seg_dist(w: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let t = ((w - a) * d.conj()).re / d.norm_sqr();
    (w - (a + d * t.clamp(0.0, 1.0))).norm()
}

#[derive(Clone, Debug, Serialize)]
pub struct ShiftLoopReport {
    #[serde(serialize_with = "super::ser_c")]
    pub s0_tilde: Complex64,
    pub radius: f64,
    #[serde(serialize_with = "ser_cmat")]
    pub matrix: CMat,
    /// `‖M Φ − Φ‖ / ‖Φ‖` over the period columns
    pub period_defect: f64,
    /// `‖M − I‖` on the whole solution space
    pub full_defect: f64,
}

/// Loop around the extra singular value `s̃0` of a shifted system. The periods are
/// holomorphic there, so `M` fixes every period column.
pub fn shift_loop(cs: &ConnectionSystem, cfg: &CurveConfig, o: &MonodromyOptions) -> Result<ShiftLoopReport> {
    check_cfg(cs, cfg)?;
    let sh = cs.shift.as_ref().ok_or_else(|| Error::Unsupported("system has no shift".into()))?;
    let t = sh.s0_tilde.eval_c(&cfg.s);
    let pts = singular_points(cs, cfg);
    let room = nearest_other(&pts, t);
    let radius = o.radius.unwrap_or(0.5 * room);
    if !(radius < 0.9 * room) {
        return Err(Error::OutOfRange(format!("loop radius {radius:.3e} vs clearance {room:.3e}")));
    }
    let fam = S0Family::new(cs, &cfg.s);
    let (m, _) = transport(&fam, &[Seg::Arc(t, radius, 0.0, 2.0 * PI)], o)?;
    let (_, phi) = period_basis(cs, &cfg.with_s0(t + radius)).ok_or_else(|| Error::Numerical("no period basis at the base point".into()))?;
    let n = m.nrows();
    Ok(ShiftLoopReport {
        s0_tilde: t,
        radius,
        period_defect: mat_norm(&(&m * &phi - &phi)) / mat_norm(&phi),
        full_defect: mat_norm(&(&m - CMat::identity(n, n))),
        matrix: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_algebra::rational::q;
    use crate::gauss_manin::{derive_connection, derive_shifted_connection};

    fn morse_value() -> Complex64 {
        Complex64::new(2.0 / (3.0 * 3f64.sqrt()), 0.0)
    }

    #[test]
    fn picard_lefschetz_eigenvalue() {
        for (nu, m) in [(3, 1), (2, 1)] {
            let cs = derive_connection(2, nu, m).unwrap();
            let cfg = CurveConfig::real(2, nu, m, &[0.0, -1.0]).unwrap();
            let r = monodromy(&cs, &cfg, morse_value(), &MonodromyOptions::default()).unwrap();
            let want = Complex64::from_polar(1.0, 2.0 * PI * (m as f64 / nu as f64 + 0.5));
            let got = r.rank_one_eigenvalue.expect("rank-one defect");
            assert!((got - want).norm() < 1e-6, "{nu},{m}: {got} vs {want}");
        }
    }

    #[test]
    fn jordan_block_at_half() {
        let cs = derive_connection(2, 2, 1).unwrap();
        let cfg = CurveConfig::real(2, 2, 1, &[0.0, -1.0]).unwrap();
        let r = monodromy(&cs, &cfg, morse_value(), &MonodromyOptions::default()).unwrap();
        // unipotent but not the identity
        assert!(r.defect_singular_values[0] > 1e-2);
        let pm = r.period_matrix.unwrap();
        let n = pm.nrows();
        let nil = &pm - CMat::identity(n, n);
        assert!(mat_norm(&(&nil * &nil)) < 1e-8);
    }

    #[test]
    fn composite_is_identity() {
        let cs = derive_connection(2, 3, 1).unwrap();
        let cfg = CurveConfig::real(2, 3, 1, &[0.0, -1.0]).unwrap();
        let r = composite_loop(&cs, &cfg, &MonodromyOptions::default()).unwrap();
        assert!(r.identity_defect < 1e-6, "{}", r.identity_defect);
    }

    #[test]
    fn shift_value_is_apparent() {
        let cs = derive_shifted_connection(2, 3, 1, 1, &q(1, 2)).unwrap();
        let cfg = CurveConfig::real(2, 3, 1, &[0.1, -1.0]).unwrap();
        let r = shift_loop(&cs, &cfg, &MonodromyOptions::default()).unwrap();
        assert!(r.period_defect < 1e-7, "{r:?}");
    }
}
