// Independent check of the segment periods: the endpoint singularities are removed by the
// substitution 1 ∓ u = w^ν (so (1 ∓ u)^λ = w^m), the fiber is deflated by synthetic
// division, and the branch of the remaining factor is continued by stepping its argument.
// Plain Gauss–Legendre then converges geometrically.

use amu_gm::numerics::gauss_legendre;
use amu_gm::periods::{period_with, pochhammer_factor, roots_of_fiber, widest_segment, CurveConfig, CyclePath, PeriodOptions, Weight};
use num::complex::Complex64;
use proptest::prelude::*;

type C = Complex64;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Coefficients (ascending in u) of p(mid + h u).
fn recenter(p: &[C], mid: C, h: C) -> Vec<C> {
    let mut q: Vec<C> = vec![c(0.0, 0.0)];
    for &a in p.iter().rev() {
        // q ← q·(mid + h u) + a
        let mut next = vec![c(0.0, 0.0); q.len() + 1];
        for (k, &qk) in q.iter().enumerate() {
            next[k] += qk * mid;
            next[k + 1] += qk * h;
        }
        next[0] += a;
        q = next;
    }
    while q.len() > 1 && q.last().unwrap().norm() == 0.0 {
        q.pop();
    }
    q
}

/// Quotient of q by (u − r).
fn deflate(q: &[C], r: C) -> Vec<C> {
    let n = q.len() - 1;
    let mut out = vec![c(0.0, 0.0); n];
    let mut carry = q[n];
    for k in (0..n).rev() {
        out[k] = carry;
        carry = q[k] + carry * r;
    }
    out
}

fn horner(p: &[C], x: f64) -> C {
    p.iter().rev().fold(c(0.0, 0.0), |acc, &a| acc * x + a)
}

/// arg of g continued from u = 0 to every u in `us` (sorted by distance from 0 on one side).
fn continued_args(g: &[C], us: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(us.len());
    let (mut u, mut th, mut gv) = (0.0, horner(g, 0.0).arg(), horner(g, 0.0));
    for &target in us {
        let steps = (((target - u).abs() / 1e-3).ceil() as usize).max(1);
        for s in 1..=steps {
            let x = u + (target - u) * s as f64 / steps as f64;
            let gx = horner(g, x);
            let jump = (gx / gv).arg();
            assert!(jump.abs() < std::f64::consts::FRAC_PI_8, "argument jump {jump}");
            th += jump;
            gv = gx;
        }
        u = target;
        out.push(th);
    }
    out
}

/// ∫_a^b (z − x0)^p (F + s0)^λ dz with the principal branch at the midpoint.
fn oracle(cfg: &CurveConfig, za: C, zb: C, w: Weight, n: usize) -> C {
    let nu = cfg.nu as i32;
    let m = cfg.m as i32;
    let lam = cfg.lambda();
    let mid = 0.5 * (za + zb);
    let h = 0.5 * (zb - za);
    let q = recenter(&cfg.fiber_coeffs(), mid, h);
    // F + s0 = (u − 1)(u + 1) G(u) = (1 − u²)·(−G(u))
    let g: Vec<C> = deflate(&deflate(&q, c(1.0, 0.0)), c(-1.0, 0.0)).into_iter().map(|x| -x).collect();
    let (x, wt) = gauss_legendre(n);
    let mut total = c(0.0, 0.0);
    for side in [1.0, -1.0] {
        // u = side·(1 − w^ν), w ∈ (0, 1)
        let nodes: Vec<(f64, f64)> = x.iter().zip(&wt).map(|(&xi, &wi)| (0.5 * (xi + 1.0), 0.5 * wi)).collect();
        let mut order: Vec<usize> = (0..nodes.len()).collect();
        // continue the branch from u = 0 (w = 1) outwards
        order.sort_by(|&i, &j| nodes[j].0.total_cmp(&nodes[i].0));
        let us: Vec<f64> = order.iter().map(|&i| side * (1.0 - nodes[i].0.powi(nu))).collect();
        let args = continued_args(&g, &us);
        for (k, &i) in order.iter().enumerate() {
            let (wv, ww) = nodes[i];
            let u = us[k];
            let gv = horner(&g, u);
            let logg = c(gv.norm().ln(), args[k]);
            let z = mid + h * u;
            // (1 − u²)^λ = (w^ν)^λ (2 − w^ν)^λ = w^m (2 − w^ν)^λ; du = ν w^{ν−1} dw
            let jac = nu as f64 * wv.powi(nu - 1 + m) * (2.0 - wv.powi(nu)).powf(lam);
            total += (z - w.x0).powu(w.power) * (logg * lam).exp() * jac * ww;
        }
    }
    total * h
}

fn engine(cfg: &CurveConfig, cycle: CyclePath, w: Weight) -> (C, C, C) {
    let roots = roots_of_fiber(cfg).unwrap();
    let p = period_with(cfg, &roots, cycle, w, cfg.lambda(), &PeriodOptions::default()).unwrap();
    assert!(p.branch_certified);
    (p.value, roots.roots[cycle.a], roots.roots[cycle.b])
}

#[test]
fn cubic_half_on_unit_interval() {
    let cfg = CurveConfig::real(2, 2, 1, &[0.0, -1.0]).unwrap();
    let (v, a, b) = engine(&cfg, CyclePath::segment(1, 2), Weight::z(0));
    assert!((a.re).abs() < 1e-14 && (b.re - 1.0).abs() < 1e-14);
    let o = oracle(&cfg, a, b, Weight::z(0), 120);
    assert!((v - o).norm() < 1e-10 * o.norm(), "{v} vs {o}");
    // (z³ − z)^{1/2} = i (z − z³)^{1/2} on (0, 1); the real integral is positive
    assert!(v.im > 0.1 && v.re.abs() < 1e-12);
}

#[test]
fn oracle_converges() {
    let cfg = CurveConfig::real(3, 3, 2, &[0.2, -1.0, 0.1]).unwrap();
    let roots = roots_of_fiber(&cfg).unwrap();
    let cyc = widest_segment(&roots).unwrap();
    let (a, b) = (roots.roots[cyc.a], roots.roots[cyc.b]);
    let o1 = oracle(&cfg, a, b, Weight::z(1), 80);
    let o2 = oracle(&cfg, a, b, Weight::z(1), 160);
    assert!((o1 - o2).norm() < 1e-12 * o2.norm());
}

fn curve_strategy() -> impl Strategy<Value = CurveConfig> {
    (2usize..=4, prop::sample::select(vec![(2u32, 1i64), (3, 1), (3, 2), (2, -1), (3, -2), (4, 3)]), prop::collection::vec((-1.5f64..1.5, -1.0f64..1.0), 4))
        .prop_map(|(mu, (nu, m), s)| {
            let s: Vec<C> = s.into_iter().take(mu).map(|(re, im)| c(re, im)).collect();
            CurveConfig::new(mu, nu, m, s).unwrap()
        })
        .prop_filter("fiber must be safely off the discriminant", |cfg| {
            roots_of_fiber(cfg).is_ok_and(|r| {
                let min_sep = r.roots.iter().enumerate().flat_map(|(i, a)| r.roots[i + 1..].iter().map(move |b| (a - b).norm())).fold(f64::INFINITY, f64::min);
                min_sep > 0.05
            })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn segment_matches_oracle(cfg in curve_strategy(), i in 0usize..3) {
        let roots = roots_of_fiber(&cfg).unwrap();
        let cyc = widest_segment(&roots).unwrap();
        let (v, a, b) = engine(&cfg, cyc, Weight::z(i));
        let o = oracle(&cfg, a, b, Weight::z(i), 160);
        prop_assert!((v - o).norm() <= 1e-10 * o.norm().max(1e-3), "{} vs {}", v, o);
    }

    #[test]
    fn quasihomogeneous_scaling(cfg in curve_strategy(), i in 0usize..3, t in prop::sample::select(vec![c(0.5, 0.0), c(2.0, 0.0), c(1.1, 0.06), c(0.9, -0.04)])) {
        let mu = cfg.mu;
        let scaled = CurveConfig::new(mu, cfg.nu, cfg.m, cfg.s.iter().enumerate().map(|(j, &v)| v * t.powu((mu + 1 - j) as u32)).collect()).unwrap();
        let r0 = roots_of_fiber(&cfg).unwrap();
        let r1 = roots_of_fiber(&scaled).unwrap();
        let cyc = widest_segment(&r0).unwrap();
        // the scaled roots are t·z; find them again
        let find = |z: C| (0..r1.roots.len()).min_by(|&p, &q| (r1.roots[p] - t * z).norm().total_cmp(&(r1.roots[q] - t * z).norm())).unwrap();
        let cyc1 = CyclePath::segment(find(r0.roots[cyc.a]), find(r0.roots[cyc.b]));
        let p0 = period_with(&cfg, &r0, cyc, Weight::z(i), cfg.lambda(), &PeriodOptions::default()).unwrap().value;
        let p1 = period_with(&scaled, &r1, cyc1, Weight::z(i), cfg.lambda(), &PeriodOptions::default()).unwrap().value;
        // weight (μ+1)λ + i + 1 with t^{(μ+1)λ} taken on the principal branch of log t
        let w = (mu as f64 + 1.0) * cfg.lambda() + i as f64 + 1.0;
        let want = p0 * (t.ln() * w).exp();
        // a midpoint crossing the cut of log(F+s0) moves the branch by e^{2πikλ}
        let sheets: Vec<C> = (-1..=1).map(|k| want * C::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 * cfg.lambda())).collect();
        let best = sheets.iter().map(|s| (p1 - s).norm()).fold(f64::INFINITY, f64::min);
        prop_assert!(best <= 1e-9 * p1.norm().max(1e-3), "{} vs {}", p1, want);
        if t.im == 0.0 {
            prop_assert!((p1 - want).norm() <= 1e-9 * p1.norm().max(1e-3));
        }
    }

    #[test]
    fn double_loop_is_segment_times_factor(cfg in curve_strategy()) {
        let roots = roots_of_fiber(&cfg).unwrap();
        let cyc = widest_segment(&roots).unwrap();
        let o = PeriodOptions::default();
        let seg = period_with(&cfg, &roots, cyc, Weight::z(0), cfg.lambda(), &o).unwrap().value;
        let poc = period_with(&cfg, &roots, CyclePath::pochhammer(cyc.a, cyc.b), Weight::z(0), cfg.lambda(), &o).unwrap().value;
        let f = pochhammer_factor(cfg.lambda());
        prop_assert!((poc - seg * f).norm() <= 1e-9 * (seg * f).norm().max(1e-6), "{} vs {}", poc, seg * f);
    }

    #[test]
    fn derivative_under_the_integral(cfg in curve_strategy()) {
        prop_assume!(cfg.lambda() > 0.0);
        let roots = roots_of_fiber(&cfg).unwrap();
        let cyc = widest_segment(&roots).unwrap();
        let o = PeriodOptions::default();
        let lam = cfg.lambda();
        let d = period_with(&cfg, &roots, cyc, Weight::z(0), lam - 1.0, &o).unwrap().value * lam;
        // central difference in s0, roots matched by proximity
        let h = 1e-4;
        let mut fd = c(0.0, 0.0);
        for (sgn, wgt) in [(1.0, 0.5 / h), (-1.0, -0.5 / h)] {
            let moved = cfg.with_s0(cfg.s[0] + sgn * h);
            let r = roots_of_fiber(&moved).unwrap();
            let find = |z: C| (0..r.roots.len()).min_by(|&p, &q| (r.roots[p] - z).norm().total_cmp(&(r.roots[q] - z).norm())).unwrap();
            let cy = CyclePath::segment(find(roots.roots[cyc.a]), find(roots.roots[cyc.b]));
            let po = PeriodOptions { anchor: Some(cfg.fiber(0.5 * (roots.roots[cyc.a] + roots.roots[cyc.b])).ln().im), ..o };
            fd += period_with(&moved, &r, cy, Weight::z(0), lam, &po).unwrap().value * wgt;
        }
        prop_assert!((fd - d).norm() <= 1e-6 * d.norm().max(1e-3), "{} vs {}", fd, d);
    }
}
