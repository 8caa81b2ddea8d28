use num::complex::Complex64;

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h0: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-11, atol: 1e-13, h0: 1e-3, max_steps: 200_000 }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evals: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Dormand–Prince 5(4) for `y' = f(t, y)` with complex state, from `t0` to `t1`.
pub fn dopri5<F>(f: F, t0: f64, t1: f64, y0: &[Complex64], opt: &OdeOptions) -> Result<(Vec<Complex64>, OdeStats), String>
where
    F: Fn(f64, &[Complex64]) -> Vec<Complex64>,
{
    let n = y0.len();
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut h = opt.h0.min(span).max(span * 1e-12);
    let mut st = OdeStats::default();
    let mut k: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); n]; 7];
    k[0] = f(t, &y);
    st.evals += 1;
    let mut ytmp = vec![Complex64::new(0.0, 0.0); n];
    while (t1 - t) * dir > 0.0 {
        if st.accepted + st.rejected >= opt.max_steps {
            return Err(format!("dopri5: step budget exhausted at t = {t}"));
        }
        let last = h >= (t1 - t).abs();
        if last {
            h = (t1 - t).abs();
        }
        let hs = h * dir;
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    if A[s][j] != 0.0 {
                        acc += kj[i] * (hs * A[s][j]);
                    }
                }
                ytmp[i] = acc;
            }
            k[s] = f(t + C[s] * hs, &ytmp);
            st.evals += 1;
        }
        // ytmp holds the 5th-order solution (FSAL stage)
        let mut err = 0.0f64;
        for i in 0..n {
            let mut e = Complex64::new(0.0, 0.0);
            for s in 0..7 {
                e += k[s][i] * (B5[s] - B4[s]);
            }
            let e = (e * hs).norm();
            let sc = opt.atol + opt.rtol * y[i].norm().max(ytmp[i].norm());
            err = err.max(e / sc);
        }
        if err <= 1.0 || h <= span * 1e-14 {
            t = if last { t1 } else { t + hs };
            y.copy_from_slice(&ytmp);
            k[0] = k[6].clone();
            st.accepted += 1;
        } else {
            st.rejected += 1;
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
        if !h.is_finite() || h == 0.0 {
            return Err(format!("dopri5: step size collapsed at t = {t}"));
        }
    }
    Ok((y, st))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth_in_complex_plane() {
        let lam = Complex64::new(-0.5, 2.0);
        let (y, st) = dopri5(|_, y| vec![lam * y[0]], 0.0, 3.0, &[Complex64::new(1.0, 0.0)], &OdeOptions::default()).unwrap();
        let exact = (lam * 3.0).exp();
        assert!((y[0] - exact).norm() < 1e-10);
        assert!(st.accepted > 0);
    }

    #[test]
    fn backward_integration() {
        let (y, _) = dopri5(|t, _| vec![Complex64::new(t.cos(), 0.0)], 2.0, 0.0, &[Complex64::new(0.0, 0.0)], &OdeOptions::default()).unwrap();
        assert!((y[0].re + 2f64.sin()).abs() < 1e-11);
    }
}
