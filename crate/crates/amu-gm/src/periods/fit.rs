//! Local exponents of periods at a critical value `t0`, read off a geometric ladder
//! `s0 = t0 + ε_e·dir`, `ε_e = ε0·2^{−e}`.
//!
//! Holomorphic terms `ε^n` (`n < D`) are removed with the difference operators
//! `y_e ↦ y_{e+1} − 2^{−n} y_e`, which kill `ε^n` exactly and turn `ε^n log ε` into a
//! multiple of `ε^n`. The log-ratio `log2 |y_e / y_{e+1}|` of what is left tends to the
//! leading surviving exponent. A survivor sitting on an annihilated integer must
//! carry a logarithm; re-applying the same operator counts its power.

use std::io::Write;

use nalgebra::DMatrix;
use num::complex::Complex64;
use serde::Serialize;

use super::curve::{critical_values, roots_of_fiber, CurveConfig};
use super::integrate::{period_with, CyclePath, PeriodOptions, Weight};
use crate::bounds::{Coefficient, DulacExpansion, DulacTerm};
use crate::exact_algebra::rational::{fmt_q, q_to_f64, rationalize, Q};
use crate::par::{self, Exec};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FitCycle {
    /// the segment between the two roots that collide at `t0`
    Vanishing,
    /// a segment from a colliding root to the nearest other root
    Adjacent,
}

#[derive(Clone, Debug)]
pub struct FitOptions {
    pub cycle: FitCycle,
    pub weight: Weight,
    /// number of halvings after `ε0`
    pub ladder: usize,
    /// `ε0`; by default a tenth of the distance to the nearest other critical value
    pub eps0: Option<f64>,
    pub direction: Complex64,
    /// holomorphic orders removed before reading the exponent; default 0 for the
    /// vanishing cycle and 2 for the adjacent one
    pub hol_order: Option<u32>,
    pub exec: Exec,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            cycle: FitCycle::Vanishing,
            weight: Weight::z(0),
            ladder: 12,
            eps0: None,
            direction: Complex64::new(1.0, 0.0),
            hol_order: None,
            exec: Exec::Auto,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LadderPoint {
    pub e: usize,
    pub eps: f64,
    #[serde(serialize_with = "super::ser_c")]
    pub s0: Complex64,
    #[serde(serialize_with = "super::ser_c")]
    pub value: Complex64,
    pub error: f64,
    pub cycle: CyclePath,
}

#[derive(Clone, Debug, Serialize)]
pub struct FitCoefficient {
    pub rho: String,
    pub k: u32,
    pub re: f64,
    pub im: f64,
    pub err: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FitResult {
    #[serde(serialize_with = "super::ser_c")]
    pub t0: Complex64,
    pub cycle: FitCycle,
    pub rho: f64,
    pub rho_err: f64,
    /// small-denominator rational matching `rho` within its error, if any
    pub rho_rational: Option<String>,
    pub log_rank: u32,
    pub hol_order: u32,
    /// `log2 |y_e / y_{e+1}|` after the holomorphic part is removed
    pub ratios: Vec<f64>,
    pub coefficients: Vec<FitCoefficient>,
    pub ladder: Vec<LadderPoint>,
}

fn closest_critical(cfg: &CurveConfig, t0: Complex64) -> Result<(Complex64, f64)> {
    let cv = critical_values(cfg);
    let scale = cfg.scale().max(1.0).powi(cfg.mu as i32 + 1);
    let (c, t) = cv
        .iter()
        .min_by(|a, b| (a.1 - t0).norm().total_cmp(&(b.1 - t0).norm()))
        .copied()
        .ok_or_else(|| Error::Numerical("no critical points".into()))?;
    if (t - t0).norm() > 1e-8 * scale {
        return Err(Error::NotOnDiscriminant(format!("s0 = {t0} is {:.2e} from the nearest critical value", (t - t0).norm())));
    }
    // distance to the other critical values (those belonging to a different critical point)
    let others = cv.iter().filter(|(_, v)| (v - t).norm() > 1e-8 * scale).map(|(_, v)| (v - t0).norm()).fold(f64::INFINITY, f64::min);
    Ok((c, others))
}

/// Endpoints of the chosen cycle at each ladder level, tracked by nearest match.
fn track_cycles(cfg: &CurveConfig, t0: Complex64, crit: Complex64, eps: &[f64], opts: &FitOptions) -> Result<Vec<(CurveConfig, CyclePath, f64)>> {
    let mut out = Vec::with_capacity(eps.len());
    let mut prev: Option<(Complex64, Complex64)> = None;
    let mut anchor: Option<f64> = None;
    for &e in eps {
        let c = cfg.with_s0(t0 + opts.direction * e);
        let roots = roots_of_fiber(&c)?;
        if !roots.is_simple() {
            return Err(Error::Numerical(format!("multiple root at ε = {e:.3e}")));
        }
        let r = &roots.roots;
        let nearest = |w: Complex64, skip: Option<usize>| -> usize {
            (0..r.len()).filter(|&j| Some(j) != skip).min_by(|&i, &j| (r[i] - w).norm().total_cmp(&(r[j] - w).norm())).unwrap()
        };
        let (a, b) = match prev {
            Some((pa, pb)) => {
                let a = nearest(pa, None);
                (a, nearest(pb, Some(a)))
            }
            None => {
                // the two roots closest to the critical point collide at t0
                let p = nearest(crit, None);
                let q = nearest(crit, Some(p));
                match opts.cycle {
                    FitCycle::Vanishing => (p, q),
                    FitCycle::Adjacent => {
                        let mid = 0.5 * (r[p] + r[q]);
                        let far = (0..r.len())
                            .filter(|&j| j != p && j != q)
                            .min_by(|&i, &j| (r[i] - mid).norm().total_cmp(&(r[j] - mid).norm()))
                            .ok_or_else(|| Error::Unsupported("no root outside the colliding pair".into()))?;
                        // start from the colliding root nearer to the partner
                        let near = if (r[p] - r[far]).norm() <= (r[q] - r[far]).norm() { p } else { q };
                        (near, far)
                    }
                }
            }
        };
        prev = Some((r[a], r[b]));
        let mid = 0.5 * (r[a] + r[b]);
        let mut arg = c.fiber(mid).ln().im;
        if let Some(t) = anchor {
            arg += 2.0 * std::f64::consts::PI * ((t - arg) / (2.0 * std::f64::consts::PI)).round();
        }
        anchor = Some(arg);
        out.push((c, CyclePath::segment(a, b), arg));
    }
    Ok(out)
}

fn apply_annihilator(y: &[Complex64], n: u32) -> Vec<Complex64> {
    let f = 0.5f64.powi(n as i32);
    y.windows(2).map(|w| w[1] - w[0] * f).collect()
}

fn log_ratios(y: &[Complex64]) -> Vec<f64> {
    y.windows(2).map(|w| (w[0].norm() / w[1].norm()).log2()).collect()
}

/// Richardson with factor 2 on the tail of the ratio sequence, error from the last two steps.
fn extrapolate(r: &[f64]) -> (f64, f64) {
    match r.len() {
        0 => (f64::NAN, f64::INFINITY),
        1 => (r[0], f64::INFINITY),
        2 => (2.0 * r[1] - r[0], (r[1] - r[0]).abs()),
        n => {
            let q1 = 2.0 * r[n - 1] - r[n - 2];
            let q0 = 2.0 * r[n - 2] - r[n - 3];
            (q1, (q1 - q0).abs().max(1e-14))
        }
    }
}

pub fn fit_exponent(cfg: &CurveConfig, t0: Complex64, opts: &FitOptions) -> Result<FitResult> {
    if opts.ladder < 4 {
        return Err(Error::OutOfRange(format!("ladder of {} levels; need at least 4", opts.ladder)));
    }
    let dir = opts.direction / opts.direction.norm();
    let opts = FitOptions { direction: dir, ..opts.clone() };
    let (crit, room) = closest_critical(cfg, t0)?;
    let eps0 = opts.eps0.unwrap_or(if room.is_finite() { 0.1 * room } else { 0.1 * cfg.scale().max(1.0) });
    if room.is_finite() && eps0 > 0.5 * room {
        return Err(Error::OutOfRange(format!("ε0 = {eps0:.3e} reaches another critical value at distance {room:.3e}")));
    }
    let eps: Vec<f64> = (0..=opts.ladder).map(|e| eps0 * 0.5f64.powi(e as i32)).collect();
    let tracked = track_cycles(cfg, t0, crit, &eps, &opts)?;
    let values = par::map(opts.exec, &tracked, |(c, cyc, arg)| {
        let roots = roots_of_fiber(c)?;
        let po = PeriodOptions { anchor: Some(*arg), ..PeriodOptions::default() };
        period_with(c, &roots, *cyc, opts.weight, c.lambda(), &po)
    });
    let mut ladder = Vec::with_capacity(eps.len());
    for (e, (v, (c, _, _))) in values.into_iter().zip(&tracked).enumerate() {
        let p = v?;
        ladder.push(LadderPoint { e, eps: eps[e], s0: c.s[0], value: p.value, error: p.error, cycle: p.cycle });
    }
    let y: Vec<Complex64> = ladder.iter().map(|p| p.value).collect();
    let d = opts.hol_order.unwrap_or(match opts.cycle {
        FitCycle::Vanishing => 0,
        FitCycle::Adjacent => 2,
    });
    let mut z = y.clone();
    for n in 0..d {
        z = apply_annihilator(&z, n);
    }
    let mut ratios = log_ratios(&z);
    let (mut rho, mut rho_err) = extrapolate(&ratios);
    let mut log_rank = 0;
    let near_int = |r: f64, e: f64| {
        let n = r.round();
        (n >= 0.0 && (n as u32) < d && (r - n).abs() < 0.05_f64.max(3.0 * e)).then_some(n as u32)
    };
    while let Some(n) = near_int(rho, rho_err) {
        if log_rank >= 3 || z.len() < 5 {
            break;
        }
        // the survivor on an annihilated integer is a log term; strip one power and look again
        let z2 = apply_annihilator(&z, n);
        let r2 = log_ratios(&z2);
        let (rho2, err2) = extrapolate(&r2);
        log_rank += 1;
        if (rho2 - n as f64).abs() > 0.05_f64.max(3.0 * err2) {
            break;
        }
        z = z2;
        ratios = r2;
        (rho, rho_err) = (rho2, err2);
    }
    let rho_q = rationalize(rho, 24).filter(|q| (q_to_f64(q) - rho).abs() <= (10.0 * rho_err).max(1e-9));
    let coefficients = fit_coefficients(&ladder, rho_q.as_ref().map_or(rho, q_to_f64), rho_q.as_ref(), log_rank, d)?;
    Ok(FitResult { t0, cycle: opts.cycle, rho, rho_err, rho_rational: rho_q.as_ref().map(fmt_q), log_rank, hol_order: d, ratios, coefficients, ladder })
}

struct Basis {
    rho: f64,
    label: String,
    k: u32,
}

fn basis_for(rho: f64, rho_q: Option<&Q>, log_rank: u32, d: u32) -> Vec<Basis> {
    let mut b: Vec<Basis> = (0..d).map(|n| Basis { rho: n as f64, label: n.to_string(), k: 0 }).collect();
    for j in 0..2u32 {
        for k in 0..=log_rank {
            let r = rho + j as f64;
            let label = match rho_q {
                Some(q) => fmt_q(&(q + Q::from_integer(j.into()))),
                None => format!("{r}"),
            };
            if !b.iter().any(|x| x.k == k && (x.rho - r).abs() < 1e-9) {
                b.push(Basis { rho: r, label, k });
            }
        }
    }
    b
}

fn least_squares(pts: &[&LadderPoint], basis: &[Basis]) -> Option<Vec<Complex64>> {
    let (n, m) = (pts.len(), basis.len());
    if n < m {
        return None;
    }
    let mut a = DMatrix::<Complex64>::zeros(n, m);
    let mut y = DMatrix::<Complex64>::zeros(n, 1);
    for (i, p) in pts.iter().enumerate() {
        let le = p.eps.ln();
        for (j, b) in basis.iter().enumerate() {
            a[(i, j)] = Complex64::new(p.eps.powf(b.rho) * le.powi(b.k as i32), 0.0);
        }
        y[(i, 0)] = p.value;
    }
    // equilibrate columns before the SVD
    let norms: Vec<f64> = (0..m).map(|j| a.column(j).norm().max(1e-300)).collect();
    for (j, nj) in norms.iter().enumerate() {
        a.column_mut(j).scale_mut(1.0 / nj);
    }
    let x = a.svd(true, true).solve(&y, 1e-14).ok()?;
    Some((0..m).map(|j| x[(j, 0)] / norms[j]).collect())
}

fn fit_coefficients(ladder: &[LadderPoint], rho: f64, rho_q: Option<&Q>, log_rank: u32, d: u32) -> Result<Vec<FitCoefficient>> {
    let basis = basis_for(rho, rho_q, log_rank, d);
    let all: Vec<&LadderPoint> = ladder.iter().collect();
    let full = least_squares(&all, &basis).ok_or_else(|| Error::Numerical("coefficient fit is underdetermined".into()))?;
    // error bar: refit without the coarsest point
    let rest = least_squares(&all[1..], &basis).unwrap_or_else(|| full.clone());
    let noise = ladder.iter().map(|p| p.error).fold(0.0, f64::max);
    Ok(basis
        .iter()
        .zip(full.iter().zip(&rest))
        .map(|(b, (c, c2))| FitCoefficient { rho: b.label.clone(), k: b.k, re: c.re, im: c.im, err: (c - c2).norm().max(noise) })
        .collect())
}

impl FitResult {
    /// The fitted expansion as a Dulac series; needs every exponent to be rational.
    pub fn dulac(&self, threshold: f64) -> Result<DulacExpansion> {
        let mut terms = Vec::new();
        for c in &self.coefficients {
            let rho = crate::exact_algebra::rational::parse_q(&c.rho).map_err(|_| Error::Indeterminate(format!("exponent {} is not recognizably rational", c.rho)))?;
            terms.push(DulacTerm { rho, k: c.k, coeff: Coefficient::Fitted { re: c.re, im: c.im, err: c.err } });
        }
        let mut e = DulacExpansion::new(self.t0.re, terms);
        e.threshold = threshold;
        Ok(e)
    }

    /// Plain CSV of the ladder: `e,eps,s0_re,s0_im,re,im,error`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "e,eps,s0_re,s0_im,re,im,error")?;
        for p in &self.ladder {
            writeln!(w, "{},{:e},{:e},{:e},{:e},{:e},{:e}", p.e, p.eps, p.s0.re, p.s0.im, p.value.re, p.value.im, p.error)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // z^3 − z: critical points ±1/√3, critical values ±2/(3√3)
    fn cubic(nu: u32, m: i64) -> (CurveConfig, Complex64) {
        let cfg = CurveConfig::real(2, nu, m, &[0.0, -1.0]).unwrap();
        (cfg, Complex64::new(2.0 / (3.0 * 3f64.sqrt()), 0.0))
    }

    #[test]
    fn vanishing_cycle_exponent() {
        for (nu, m, want) in [(2, 1, 1.0), (3, 1, 5.0 / 6.0)] {
            let (cfg, t0) = cubic(nu, m);
            // the oval sits on the side of t0 towards the other critical value
            let o = FitOptions { direction: Complex64::new(-1.0, 0.0), ..FitOptions::default() };
            let f = fit_exponent(&cfg, t0, &o).unwrap();
            assert!((f.rho - want).abs() < 1e-4, "{nu},{m}: {} ± {}", f.rho, f.rho_err);
            assert_eq!(f.log_rank, 0);
        }
    }

    #[test]
    fn adjacent_cycle_log() {
        for (nu, m, logs) in [(2, 1, 1), (3, 1, 0)] {
            let (cfg, t0) = cubic(nu, m);
            let o = FitOptions { cycle: FitCycle::Adjacent, direction: Complex64::new(-1.0, 0.0), ..FitOptions::default() };
            let f = fit_exponent(&cfg, t0, &o).unwrap();
            assert_eq!(f.log_rank, logs, "{nu},{m}: ρ = {} ratios {:?}", f.rho, f.ratios);
        }
    }

    #[test]
    fn log_coefficient_is_the_vanishing_period_over_2pi() {
        let (cfg, t0) = cubic(2, 1);
        let dir = Complex64::new(-1.0, 0.0);
        let van = fit_exponent(&cfg, t0, &FitOptions { direction: dir, ..FitOptions::default() }).unwrap();
        let adj = fit_exponent(&cfg, t0, &FitOptions { cycle: FitCycle::Adjacent, direction: dir, ..FitOptions::default() }).unwrap();
        let a = van.coefficients.iter().find(|c| c.rho == "1" && c.k == 0).unwrap();
        let l = adj.coefficients.iter().find(|c| c.rho == "1" && c.k == 1).unwrap();
        let ratio = l.re.hypot(l.im) / a.re.hypot(a.im);
        assert!((ratio - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-3, "{ratio}");
    }

    #[test]
    fn off_discriminant_is_rejected() {
        let (cfg, _) = cubic(2, 1);
        assert!(matches!(fit_exponent(&cfg, Complex64::new(0.1, 0.0), &FitOptions::default()), Err(Error::NotOnDiscriminant(_))));
    }
}
