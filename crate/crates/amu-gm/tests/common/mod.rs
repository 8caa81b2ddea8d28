#![allow(dead_code)]

use amu_gm::periods::{critical_values, CurveConfig};
use num::complex::Complex64;

/// Real desk-scale curves, one per μ, with distinct critical values.
pub fn desk_curve(mu: usize, nu: u32, m: i64) -> CurveConfig {
    let s: &[f64] = match mu {
        2 => &[0.0, -1.0],
        3 => &[0.0, 0.2, -1.0],
        4 => &[0.0, 0.5, 0.1, -2.0],
        _ => panic!("no desk curve for mu = {mu}"),
    };
    CurveConfig::real(mu, nu, m, s).unwrap()
}

/// Critical values with the unit direction towards the nearest other one.
pub fn morse_values(cfg: &CurveConfig) -> Vec<(Complex64, Complex64)> {
    let cv: Vec<Complex64> = critical_values(cfg).into_iter().map(|(_, t)| t).collect();
    cv.iter()
        .map(|&t| {
            let other = cv.iter().filter(|&&u| (u - t).norm() > 1e-9).min_by(|a, b| (*a - t).norm().total_cmp(&(*b - t).norm())).unwrap();
            let d = other - t;
            (t, d / d.norm())
        })
        .collect()
}
