//! Period integrals `∫ (z − x0)^i (F(z,s') + s0)^λ dz` over a segment between two fiber roots
//! or over the Pochhammer double loop around them.
//!
//! On the segment `z = c + h u`, `u ∈ [−1, 1]`, the integrand is
//! `h (1−u²)^λ z^i exp(λ L(u))` with `L` the logarithm of `(F+s0)/(1−u²)`, continued from
//! the principal value at the midpoint one linear factor at a time. Each factor's
//! logarithm is exact along a straight path, so no branch can be missed.

use std::f64::consts::PI;

use num::complex::Complex64;
use serde::Serialize;

use super::curve::{roots_of_fiber, CurveConfig, FiberRoots};
use crate::numerics::{gauss_jacobi, gauss_kronrod_adaptive, gauss_legendre};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PathKind {
    Segment,
    Pochhammer,
}

/// Ordered pair of root indices (into the sorted roots of the fiber).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CyclePath {
    pub a: usize,
    pub b: usize,
    pub kind: PathKind,
}

impl CyclePath {
    pub fn segment(a: usize, b: usize) -> Self {
        CyclePath { a, b, kind: PathKind::Segment }
    }
    pub fn pochhammer(a: usize, b: usize) -> Self {
        CyclePath { a, b, kind: PathKind::Pochhammer }
    }
}

/// The monomial `(z − x0)^power` in front of `(F+s0)^λ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Weight {
    pub power: u32,
    #[serde(serialize_with = "super::ser_c")]
    pub x0: Complex64,
}

impl Weight {
    pub fn z(i: usize) -> Self {
        Weight { power: i as u32, x0: Complex64::new(0.0, 0.0) }
    }
    pub fn shifted(power: usize, x0: f64) -> Self {
        Weight { power: power as u32, x0: Complex64::new(x0, 0.0) }
    }
    fn at(&self, z: Complex64) -> Complex64 {
        (z - self.x0).powu(self.power)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PeriodOptions {
    pub rel_tol: f64,
    /// target for `Im log(F+s0)` at the midpoint; the branch nearest to it is used
    pub anchor: Option<f64>,
    /// minimal distance of the other roots from the path, relative to the curve scale
    pub clearance: f64,
}

impl Default for PeriodOptions {
    fn default() -> Self {
        PeriodOptions { rel_tol: 1e-13, anchor: None, clearance: 1e-9 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PeriodSample {
    #[serde(serialize_with = "super::ser_c")]
    pub value: Complex64,
    pub error: f64,
    /// exponent of `F + s0` actually used (λ, or λ − d for derivatives)
    pub exponent: f64,
    pub weight: Weight,
    pub cycle: CyclePath,
    #[serde(serialize_with = "super::ser_c_pair")]
    pub endpoints: (Complex64, Complex64),
    /// `Im log(F+s0)` at the midpoint
    pub anchor_arg: f64,
    pub branch_certified: bool,
}

pub fn period(cfg: &CurveConfig, cycle: CyclePath, i: usize) -> Result<PeriodSample> {
    let roots = roots_of_fiber(cfg)?;
    period_with(cfg, &roots, cycle, Weight::z(i), cfg.lambda(), &PeriodOptions::default())
}

/// The analytic `∂^d/∂s0^d` of the period: `λ(λ−1)⋯(λ−d+1)` times the period with exponent `λ − d`.
pub fn period_derivative(cfg: &CurveConfig, roots: &FiberRoots, cycle: CyclePath, w: Weight, d: u32, opts: &PeriodOptions) -> Result<PeriodSample> {
    let lam = cfg.lambda();
    let mut p = period_with(cfg, roots, cycle, w, lam - d as f64, opts)?;
    let f: f64 = (0..d).map(|k| lam - k as f64).product();
    p.value *= f;
    p.error *= f.abs();
    Ok(p)
}

/// Period with an arbitrary exponent; the segment kind needs `exponent > −1`.
pub fn period_with(cfg: &CurveConfig, roots: &FiberRoots, cycle: CyclePath, w: Weight, exponent: f64, opts: &PeriodOptions) -> Result<PeriodSample> {
    let n = roots.roots.len();
    if cycle.a >= n || cycle.b >= n || cycle.a == cycle.b {
        return Err(Error::OutOfRange(format!("cycle ({}, {}) with {n} roots", cycle.a, cycle.b)));
    }
    let (za, zb) = (roots.roots[cycle.a], roots.roots[cycle.b]);
    let scale = cfg.scale().max(1e-300);
    if (za - zb).norm() <= 1e-6 * scale {
        return Err(Error::Numerical("cycle endpoints coincide".into()));
    }
    let others: Vec<Complex64> = (0..n).filter(|&j| j != cycle.a && j != cycle.b).map(|j| roots.roots[j]).collect();
    let clear = others.iter().map(|&w| dist_to_segment(w, za, zb)).fold(f64::INFINITY, f64::min);
    if clear <= opts.clearance * scale {
        return Err(Error::Numerical(format!("path clearance {clear:.2e} below {:.2e}", opts.clearance * scale)));
    }
    let c = 0.5 * (za + zb);
    let mut base = cfg.fiber(c).ln();
    if let Some(t) = opts.anchor {
        base.im += 2.0 * PI * ((t - base.im) / (2.0 * PI)).round();
    }
    let (value, error) = match cycle.kind {
        PathKind::Segment => {
            if exponent <= -1.0 {
                return Err(Error::OutOfRange(format!("exponent {exponent} ≤ −1 on a segment; use the Pochhammer kind")));
            }
            segment(za, zb, &others, base, w, exponent, opts.rel_tol)?
        }
        PathKind::Pochhammer => pochhammer(za, zb, &others, clear, base, w, exponent, opts.rel_tol)?,
    };
    let branch_certified = certify_branch(cfg, za, zb, &others, base);
    Ok(PeriodSample { value, error, exponent, weight: w, cycle, endpoints: (za, zb), anchor_arg: base.im, branch_certified })
}

fn dist_to_segment(w: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let t = ((w - a) * d.conj()).re / d.norm_sqr();
    (w - (a + d * t.clamp(0.0, 1.0))).norm()
}

/// `L(u)` minus `log(1−u²)`: `log g(0) + Σ_j Log((z(u) − z_j)/(c − z_j))`.
struct SegmentBranch<'a> {
    c: Complex64,
    h: Complex64,
    others: &'a [Complex64],
    base: Complex64,
}

impl SegmentBranch<'_> {
    fn z(&self, u: f64) -> Complex64 {
        self.c + self.h * u
    }
    fn log_g(&self, u: f64) -> Complex64 {
        let z = self.z(u);
        self.base + self.others.iter().map(|&w| ((z - w) / (self.c - w)).ln()).sum::<Complex64>()
    }
    /// smooth part `(z − x0)^p exp(λ L)` without `(1−u)^λ(1+u)^λ`
    fn smooth(&self, u: f64, w: Weight, lam: f64) -> Complex64 {
        w.at(self.z(u)) * (self.log_g(u) * lam).exp()
    }
}

fn segment(za: Complex64, zb: Complex64, others: &[Complex64], base: Complex64, w: Weight, lam: f64, tol: f64) -> Result<(Complex64, f64)> {
    let h = 0.5 * (zb - za);
    let br = SegmentBranch { c: 0.5 * (za + zb), h, others, base };
    // other roots in u-coordinates set the endpoint widths
    let us: Vec<Complex64> = others.iter().map(|&w| (w - br.c) / h).collect();
    let width = |end: f64| us.iter().map(|u| (u - end).norm()).fold(f64::INFINITY, f64::min).mul_add(0.3, 0.0).min(0.5);
    let (mut wl, mut wr) = (width(-1.0), width(1.0));
    for _ in 0..12 {
        // near u = 1: u = 1 − w(1−x)/2, (1−u)^λ = (w/2)^λ (1−x)^λ
        let right = jacobi_piece(|x| {
            let u = 1.0 - wr * (1.0 - x) / 2.0;
            br.smooth(u, w, lam) * (1.0 + u).powf(lam)
        }, (lam, 0.0), lam, wr, tol);
        let left = jacobi_piece(|x| {
            let u = -1.0 + wl * (1.0 + x) / 2.0;
            br.smooth(u, w, lam) * (1.0 - u).powf(lam)
        }, (0.0, lam), lam, wl, tol);
        match (right, left) {
            (Some((vr, er)), Some((vl, el))) => {
                let mid = gauss_kronrod_adaptive(|u| br.smooth(u, w, lam) * (1.0 - u * u).powf(lam), -1.0 + wl, 1.0 - wr, 1e-300, tol, 4000);
                let total = (vr + vl + mid.value) * h;
                let err = (er + el + mid.error) * h.norm();
                if !mid.converged && err > 1e3 * tol * total.norm() {
                    return Err(Error::Numerical(format!("interior quadrature did not converge (error {err:.2e})")));
                }
                return Ok((total, err));
            }
            (r, l) => {
                if r.is_none() {
                    wr *= 0.5;
                }
                if l.is_none() {
                    wl *= 0.5;
                }
            }
        }
    }
    Err(Error::Numerical("endpoint rule did not converge".into()))
}

/// `∫` over a piece of width `w` with weight `(1−x)^a(1+x)^b`, scaled by `(w/2)^{λ+1}`;
/// `None` when 24, 48 and 96 nodes disagree.
fn jacobi_piece<F: Fn(f64) -> Complex64>(f: F, (a, b): (f64, f64), lam: f64, w: f64, tol: f64) -> Option<(Complex64, f64)> {
    let factor = (w / 2.0).powf(lam + 1.0);
    let rule = |n: usize| {
        let (x, wt) = gauss_jacobi(n, a, b);
        x.iter().zip(&wt).map(|(&x, &w)| f(x) * w).sum::<Complex64>() * factor
    };
    let mut prev = rule(24);
    for n in [48, 96] {
        let cur = rule(n);
        let e = (cur - prev).norm();
        if e <= tol * cur.norm().max(1e-300) || e == 0.0 {
            return Some((cur, e));
        }
        prev = cur;
    }
    None
}

enum Piece {
    Line(Complex64, Complex64),
    /// center, radius, start angle, signed sweep
    Circle(Complex64, f64, f64, f64),
}

impl Piece {
    fn at(&self, t: f64) -> (Complex64, Complex64) {
        match *self {
            Piece::Line(p, q) => (p + (q - p) * t, q - p),
            Piece::Circle(c, r, th, sw) => {
                let e = Complex64::from_polar(r, th + sw * t);
                (c + e, e * Complex64::new(0.0, sw))
            }
        }
    }
}

/// Double loop from the midpoint: around `b` positively, `a` negatively, `b` negatively, `a` positively.
#[allow(clippy::too_many_arguments)]
fn pochhammer(za: Complex64, zb: Complex64, others: &[Complex64], clear: f64, base: Complex64, w: Weight, lam: f64, tol: f64) -> Result<(Complex64, f64)> {
    let c = 0.5 * (za + zb);
    let len = (zb - za).norm();
    let r = (0.25 * len).min(0.45 * clear);
    if r <= 1e-12 * len {
        return Err(Error::Numerical("no room for the double loop".into()));
    }
    let e = (zb - za) / len;
    let (pb, pa) = (zb - e * r, za + e * r);
    let (thb, tha) = ((-e).arg(), e.arg());
    let tau = 2.0 * PI;
    let mut pieces = Vec::new();
    for sign in [1.0, -1.0] {
        pieces.push(Piece::Line(c, pb));
        pieces.push(Piece::Circle(zb, r, thb, sign * tau));
        pieces.push(Piece::Line(pb, c));
        pieces.push(Piece::Line(c, pa));
        pieces.push(Piece::Circle(za, r, tha, -sign * tau));
        pieces.push(Piece::Line(pa, c));
    }
    let mut roots: Vec<Complex64> = vec![za, zb];
    roots.extend_from_slice(others);
    let run = |panels: usize| -> Complex64 {
        // per-factor logs at the current point, summing to `base` at c
        let mut logs: Vec<Complex64> = roots.iter().map(|&r| (c - r).ln()).collect();
        let shift = base - logs.iter().sum::<Complex64>();
        logs[0] += shift;
        let (gx, gw) = gauss_legendre(16);
        let mut total = Complex64::new(0.0, 0.0);
        for piece in &pieces {
            let (start, _) = piece.at(0.0);
            let local = |t: f64, z: Complex64| -> Complex64 {
                let mut s = Complex64::new(0.0, 0.0);
                for (k, &r) in roots.iter().enumerate() {
                    s += match *piece {
                        Piece::Circle(cc, _, _, sw) if cc == r => logs[k] + Complex64::new(0.0, sw * t),
                        _ => logs[k] + ((z - r) / (start - r)).ln(),
                    };
                }
                s
            };
            for p in 0..panels {
                let (t0, t1) = (p as f64 / panels as f64, (p + 1) as f64 / panels as f64);
                for (xi, wi) in gx.iter().zip(&gw) {
                    let t = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * xi;
                    let (z, dz) = piece.at(t);
                    total += w.at(z) * (local(t, z) * lam).exp() * dz * (wi * 0.5 * (t1 - t0));
                }
            }
            let (end, _) = piece.at(1.0);
            for (k, &r) in roots.iter().enumerate() {
                logs[k] += match *piece {
                    Piece::Circle(cc, _, _, sw) if cc == r => Complex64::new(0.0, sw),
                    _ => ((end - r) / (start - r)).ln(),
                };
            }
        }
        total
    };
    let mut panels = 8;
    let mut prev = run(panels);
    while panels < 1024 {
        panels *= 2;
        let cur = run(panels);
        let err = (cur - prev).norm();
        if err <= tol * cur.norm().max(1e-300) * 10.0 {
            return Ok((cur, err));
        }
        prev = cur;
    }
    Err(Error::Numerical("double-loop quadrature did not converge".into()))
}

/// The double loop equals `(1 − e^{2πiλ})(1 − e^{−2πiλ}) = 4 sin²(πλ)` times the segment.
pub fn pochhammer_factor(lam: f64) -> Complex64 {
    let e = Complex64::from_polar(1.0, 2.0 * PI * lam);
    (Complex64::new(1.0, 0.0) - e) * (Complex64::new(1.0, 0.0) - e.conj())
}

/// Continues `arg(F + s0)` along the segment by stepping, halving any step whose
/// argument jump exceeds π/4, and compares with the factor-wise logarithm.
fn certify_branch(cfg: &CurveConfig, za: Complex64, zb: Complex64, others: &[Complex64], base: Complex64) -> bool {
    let h = 0.5 * (zb - za);
    let br = SegmentBranch { c: 0.5 * (za + zb), h, others, base };
    let arg_at = |u: f64| br.log_g(u).im; // (1 − u²) > 0 adds nothing
    let p = |u: f64| cfg.fiber(br.z(u));
    let n = 256;
    let lim = 1.0 - 1e-3;
    let mut ok = true;
    for dir in [1.0, -1.0] {
        let mut theta = arg_at(0.0);
        let mut u = 0.0;
        let mut pu = p(0.0);
        let step = lim / n as f64;
        while u < lim - 1e-15 && ok {
            let mut du = step.min(lim - u);
            let mut depth = 0;
            loop {
                let pv = p(dir * (u + du));
                let jump = (pv / pu).arg();
                if jump.abs() <= PI / 4.0 {
                    theta += jump;
                    u += du;
                    pu = pv;
                    break;
                }
                du *= 0.5;
                depth += 1;
                if depth > 30 {
                    ok = false;
                    break;
                }
            }
            if ok && (theta - arg_at(dir * u)).abs() > 1e-8 {
                ok = false;
            }
        }
    }
    ok
}
