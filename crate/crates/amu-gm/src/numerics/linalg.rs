use nalgebra::DMatrix;
use num::complex::Complex64;

pub type CMat = DMatrix<Complex64>;

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Solves `a x = b` by partial-pivot elimination; `None` when a pivot vanishes.
pub fn lu_solve(a: &CMat, b: &CMat) -> Option<CMat> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut x = b.clone();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[(i, k)].norm().partial_cmp(&m[(j, k)].norm()).unwrap())?;
        if m[(p, k)].norm() == 0.0 {
            return None;
        }
        m.swap_rows(k, p);
        x.swap_rows(k, p);
        let piv = m[(k, k)];
        for i in k + 1..n {
            let f = m[(i, k)] / piv;
            if f.norm() == 0.0 {
                continue;
            }
            for j in k..n {
                let t = m[(k, j)];
                m[(i, j)] -= f * t;
            }
            for j in 0..x.ncols() {
                let t = x[(k, j)];
                x[(i, j)] -= f * t;
            }
        }
    }
    for k in (0..n).rev() {
        for j in 0..x.ncols() {
            let mut s = x[(k, j)];
            for c in k + 1..n {
                s -= m[(k, c)] * x[(c, j)];
            }
            x[(k, j)] = s / m[(k, k)];
        }
    }
    Some(x)
}

pub fn inverse(a: &CMat) -> Option<CMat> {
    lu_solve(a, &CMat::identity(a.nrows(), a.nrows()))
}

pub fn mat_mul(a: &CMat, b: &CMat) -> CMat {
    a * b
}

/// Frobenius norm.
pub fn mat_norm(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn singular_values(a: &CMat) -> Vec<f64> {
    let svd = a.clone().svd(false, false);
    let mut v: Vec<f64> = svd.singular_values.iter().copied().collect();
    v.sort_by(|x, y| y.partial_cmp(x).unwrap());
    v
}

/// Characteristic polynomial `det(x I - a)`, ascending coefficients (Faddeev–LeVerrier).
pub fn char_poly(a: &CMat) -> Vec<Complex64> {
    let n = a.nrows();
    let mut c = vec![czero(); n + 1];
    c[n] = Complex64::new(1.0, 0.0);
    let mut m = CMat::zeros(n, n);
    for k in 1..=n {
        m = a * &m + CMat::identity(n, n) * c[n - k + 1];
        let am = a * &m;
        c[n - k] = -am.trace() / k as f64;
    }
    c
}

/// Eigenvalues of a small complex matrix: Hessenberg reduction then shifted QR with Givens rotations.
pub fn eigenvalues(a: &CMat) -> Vec<Complex64> {
    let n = a.nrows();
    let mut h = a.clone();
    hessenberg(&mut h);
    let mut out = Vec::with_capacity(n);
    let mut hi = n;
    let mut iter = 0usize;
    while hi > 0 {
        if hi == 1 {
            out.push(h[(0, 0)]);
            break;
        }
        let k = hi - 1;
        let scale = h[(k, k)].norm() + h[(k - 1, k - 1)].norm();
        if h[(k, k - 1)].norm() <= 1e-15 * scale.max(1e-300) {
            out.push(h[(k, k)]);
            hi -= 1;
            iter = 0;
            continue;
        }
        // find the start of the active unreduced block
        let mut lo = k - 1;
        while lo > 0 {
            let s = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            if h[(lo, lo - 1)].norm() <= 1e-15 * s.max(1e-300) {
                h[(lo, lo - 1)] = czero();
                break;
            }
            lo -= 1;
        }
        iter += 1;
        let shift = if iter.is_multiple_of(11) {
            h[(k, k)] + Complex64::new(h[(k, k - 1)].norm(), 0.0)
        } else {
            wilkinson(h[(k - 1, k - 1)], h[(k - 1, k)], h[(k, k - 1)], h[(k, k)])
        };
        qr_step(&mut h, lo, hi, shift);
        if iter > 10_000 {
            out.push(h[(k, k)]);
            hi -= 1;
            iter = 0;
        }
    }
    out
}

fn wilkinson(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr / 4.0 - det).sqrt();
    let l1 = tr / 2.0 + disc;
    let l2 = tr / 2.0 - disc;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn hessenberg(h: &mut CMat) {
    let n = h.nrows();
    for k in 0..n.saturating_sub(2) {
        let alpha_norm: f64 = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] += phase * alpha_norm;
        let vn: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vn;
        }
        // H <- (I - 2 v v*) H (I - 2 v v*)
        for j in 0..n {
            let mut s = czero();
            for (t, vi) in v.iter().enumerate() {
                s += vi.conj() * h[(k + 1 + t, j)];
            }
            for (t, vi) in v.iter().enumerate() {
                h[(k + 1 + t, j)] -= *vi * s * 2.0;
            }
        }
        for i in 0..n {
            let mut s = czero();
            for (t, vi) in v.iter().enumerate() {
                s += h[(i, k + 1 + t)] * vi;
            }
            for (t, vi) in v.iter().enumerate() {
                h[(i, k + 1 + t)] -= s * vi.conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = czero();
        }
    }
}

fn qr_step(h: &mut CMat, lo: usize, hi: usize, shift: Complex64) {
    let n = h.nrows();
    for i in lo..hi {
        h[(i, i)] -= shift;
    }
    let mut rots = Vec::with_capacity(hi - lo);
    for k in lo..hi - 1 {
        let a = h[(k, k)];
        let b = h[(k + 1, k)];
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 { (Complex64::new(1.0, 0.0), czero()) } else { (a / r, b / r) };
        // G = [[c*, s*], [-s, c]] applied to rows k, k+1
        for j in k..n {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = c.conj() * x + s.conj() * y;
            h[(k + 1, j)] = -s * x + c * y;
        }
        rots.push((c, s));
    }
    for (idx, (c, s)) in rots.into_iter().enumerate() {
        let k = lo + idx;
        for i in 0..(k + 2).min(n) {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = x * c + y * s;
            h[(i, k + 1)] = -x * s.conj() + y * c.conj();
        }
    }
    for i in lo..hi {
        h[(i, i)] += shift;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eigen_of_rotation_and_triangular() {
        let a = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let mut e = eigenvalues(&a);
        e.sort_by(|x, y| x.im.partial_cmp(&y.im).unwrap());
        assert!((e[0] - c(0.0, -1.0)).norm() < 1e-12);
        assert!((e[1] - c(0.0, 1.0)).norm() < 1e-12);
        let b = CMat::from_row_slice(
            3,
            3,
            &[c(2.0, 0.0), c(1.0, 1.0), c(0.5, 0.0), c(0.0, 0.0), c(-1.0, 0.5), c(3.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.25, 0.0)],
        );
        let e = eigenvalues(&b);
        for target in [c(2.0, 0.0), c(-1.0, 0.5), c(0.25, 0.0)] {
            assert!(e.iter().any(|z| (z - target).norm() < 1e-12));
        }
    }

    #[test]
    fn eigen_matches_char_poly_on_dense_matrix() {
        let vals = [1.0, -2.0, 0.3, 4.0, 0.5, 1.5, -0.7, 2.2, 0.9, 1.1, -1.3, 0.4, 2.0, 0.1, -0.6, 3.0];
        let a = CMat::from_iterator(4, 4, vals.iter().enumerate().map(|(i, v)| c(*v, 0.1 * i as f64)));
        let cp = char_poly(&a);
        for z in eigenvalues(&a) {
            let v = cp.iter().rev().fold(c(0.0, 0.0), |acc, k| acc * z + k);
            assert!(v.norm() < 1e-9, "{v}");
        }
    }

    #[test]
    fn solve_roundtrip() {
        let a = CMat::from_row_slice(2, 2, &[c(1.0, 1.0), c(2.0, 0.0), c(0.0, -1.0), c(3.0, 0.5)]);
        let b = CMat::from_row_slice(2, 1, &[c(1.0, 0.0), c(0.0, 2.0)]);
        let x = lu_solve(&a, &b).unwrap();
        assert!(mat_norm(&(&a * &x - &b)) < 1e-14);
    }
}
