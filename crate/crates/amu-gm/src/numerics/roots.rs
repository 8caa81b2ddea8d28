use num::complex::Complex64;

/// Horner evaluation of `p` (ascending) and its derivative.
pub fn poly_eval(p: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    for c in p.iter().rev() {
        d = d * z + v;
        v = v * z + c;
    }
    (v, d)
}

/// All complex roots of the polynomial with ascending coefficients `p` (Aberth–Ehrlich, then Newton polish).
pub fn poly_roots(p: &[Complex64]) -> Vec<Complex64> {
    let mut p: Vec<Complex64> = p.to_vec();
    while p.last().is_some_and(|c| c.norm() == 0.0) {
        p.pop();
    }
    if p.len() < 2 {
        return Vec::new();
    }
    let mut zeros = 0;
    while p[0].norm() == 0.0 {
        p.remove(0);
        zeros += 1;
    }
    let n = p.len() - 1;
    let mut out = vec![Complex64::new(0.0, 0.0); zeros];
    if n == 0 {
        return out;
    }
    let lead = p[n];
    let monic: Vec<Complex64> = p.iter().map(|c| c / lead).collect();
    let bound = 1.0 + monic[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    // Fujiwara-ish radius keeps the start circle near the roots
    let mut r = 0.0f64;
    for k in 1..=n {
        r = r.max(monic[n - k].norm().powf(1.0 / k as f64));
    }
    let r = (2.0 * r).min(bound).max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4))
        .collect();
    for _ in 0..800 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (v, d) = poly_eval(&monic, z[i]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / d;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff.norm() > 0.0 {
                        s += 1.0 / diff;
                    }
                }
            }
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if w.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-16 {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (v, d) = poly_eval(&monic, *zi);
            if d.norm() == 0.0 {
                break;
            }
            let step = v / d;
            if !step.is_finite() || step.norm() > 1e-6 * (1.0 + zi.norm()) {
                break;
            }
            *zi -= step;
        }
    }
    out.extend(z);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn cubic_roots() {
        // z^3 - z
        let mut r = poly_roots(&[c(0.0), c(-1.0), c(0.0), c(1.0)]);
        r.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((r[0] - c(-1.0)).norm() < 1e-14);
        assert!((r[1] - c(0.0)).norm() < 1e-14);
        assert!((r[2] - c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn roots_of_unity() {
        let r = poly_roots(&[c(-1.0), c(0.0), c(0.0), c(0.0), c(0.0), c(1.0)]);
        for z in r {
            assert!((z.powu(5) - c(1.0)).norm() < 1e-13);
        }
    }
}
