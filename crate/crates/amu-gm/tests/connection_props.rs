use amu_gm::exact_algebra::rational::q;
use amu_gm::exact_algebra::resultant::{monic_in_s0, resultant_s0_oracle};
use amu_gm::exact_algebra::{MultiPoly, Q};
use amu_gm::gauss_manin::{derive_connection, derive_shifted_connection, discriminant, log_fields};
use amu_gm::periods::{connection_residual, CurveConfig};
use num::complex::Complex64;
use proptest::prelude::*;

#[test]
fn determinant_is_the_monic_resultant() {
    for mu in 2..=5 {
        let cs = derive_connection(mu, 2, 1).unwrap();
        let delta = discriminant(mu).unwrap();
        assert_eq!(cs.det_s(), delta, "mu = {mu}");
        assert_eq!(monic_in_s0(&resultant_s0_oracle(mu).unwrap()).unwrap(), delta, "mu = {mu}");
    }
}

#[test]
fn s_is_s0_plus_constant_in_s0() {
    for mu in 2..=5 {
        let cs = derive_connection(mu, 3, 2).unwrap();
        let n = cs.size();
        for i in 0..n {
            for j in 0..n {
                let mut e = cs.s[i][j].clone();
                if i == j {
                    e = &e - &MultiPoly::var(mu, 0);
                }
                assert_eq!(e.degree_in(0).unwrap_or(0), 0, "mu = {mu}, entry ({i},{j})");
            }
        }
    }
}

#[test]
fn diagonal_of_l() {
    for mu in 2..=5usize {
        for (nu, m) in [(2u32, 1i64), (3, 1), (3, 2), (5, -2)] {
            let cs = derive_connection(mu, nu, m).unwrap();
            let lam = q(m, nu as i64);
            let want: Vec<Q> = (0..mu).map(|i| &lam + q(i as i64 + 1, mu as i64 + 1)).collect();
            assert_eq!(cs.l, want, "mu = {mu}, λ = {lam}");
        }
    }
}

#[test]
fn logarithmic_fields_are_tangent() {
    for mu in 2..=4 {
        let cs = derive_connection(mu, 2, 1).unwrap();
        let delta = discriminant(mu).unwrap();
        let fields = log_fields(&cs);
        assert_eq!(fields.len(), mu);
        for f in &fields {
            let image = f.apply(&delta);
            assert!(image.div_exact(&delta).is_some(), "mu = {mu}, field {}", f.index);
        }
    }
}

#[test]
fn discriminant_is_quasihomogeneous() {
    for mu in 2..=5usize {
        let delta = discriminant(mu).unwrap();
        let w: Vec<u32> = (0..mu).map(|j| (mu + 1 - j) as u32).collect();
        // τ as an extra variable: Δ(τ^{w} s) = τ^{μ(μ+1)} Δ(s) as polynomials in (s, τ)
        let tau = MultiPoly::var(mu + 1, mu);
        let mut lhs = delta.embed(mu + 1);
        for j in 0..mu {
            let sj = &MultiPoly::var(mu + 1, j) * &tau.pow(w[j]);
            lhs = lhs.subst(j, &sj);
        }
        let rhs = &delta.embed(mu + 1) * &tau.pow((mu * (mu + 1)) as u32);
        assert_eq!(lhs, rhs, "mu = {mu}");
    }
}

#[test]
fn shifted_system_keeps_the_discriminant() {
    let cs = derive_shifted_connection(3, 2, 1, 1, &q(1, 2)).unwrap();
    let delta = discriminant(3).unwrap();
    let d = cs.det_s();
    assert!(d.div_exact(&delta).is_some());
    assert_eq!(cs.size(), 4);
    assert!(cs.shift.is_some());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn quadrature_periods_satisfy_the_system(
        mu in 2usize..=3,
        re in prop::collection::vec(-1.0f64..1.0, 3),
        im in prop::collection::vec(-0.5f64..0.5, 3),
    ) {
        let cs = derive_connection(mu, 2, 1).unwrap();
        let s: Vec<Complex64> = (0..mu).map(|j| Complex64::new(re[j], im[j])).collect();
        let cfg = CurveConfig::new(mu, 2, 1, s).unwrap();
        let d = discriminant(mu).unwrap().eval_c(&cfg.s).norm();
        prop_assume!(d > 1e-3);
        let rep = connection_residual(&cs, &cfg, None).unwrap();
        prop_assert!(rep.residual < 1e-8, "{:?}", rep);
    }
}
