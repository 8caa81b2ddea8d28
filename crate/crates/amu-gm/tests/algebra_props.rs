use amu_gm::exact_algebra::rational::{q, qi};
use amu_gm::exact_algebra::resultant::{monic_in_s0, resultant_s0_oracle};
use amu_gm::exact_algebra::{DiffOp, MultiPoly, Q};
use proptest::prelude::*;

const N: usize = 3;

fn poly(max_terms: usize) -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec((prop::collection::vec(0u32..3, N), -4i64..5, 1i64..4), 0..max_terms)
        .prop_map(|ts| MultiPoly::from_terms(N, ts.into_iter().map(|(e, n, d)| (e, q(n, d)))))
}

// up to three normal-ordered terms; `primed` allows a ∂_{s_j} factor
fn op(primed: bool) -> impl Strategy<Value = DiffOp> {
    prop::collection::vec((poly(3), 0u32..=3, prop::option::of(1usize..N)), 1..4).prop_map(move |ts| {
        ts.into_iter().fold(DiffOp::zero(N), |acc, (c, k, j)| acc.add(&DiffOp::term(N, c, if primed { j } else { None }, k)))
    })
}

fn point() -> impl Strategy<Value = Vec<Q>> {
    prop::collection::vec((-5i64..6, 1i64..4).prop_map(|(n, d)| q(n, d)), N)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in poly(5), b in poly(5), c in poly(5)) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(&a * &MultiPoly::one(N), a.clone());
    }

    #[test]
    fn evaluation_is_a_homomorphism(a in poly(5), b in poly(5), x in point()) {
        prop_assert_eq!((&a * &b).eval(&x), a.eval(&x) * b.eval(&x));
        prop_assert_eq!((&a + &b).eval(&x), a.eval(&x) + b.eval(&x));
    }

    #[test]
    fn leibniz_rule(a in poly(5), b in poly(5), i in 0usize..N) {
        prop_assert_eq!((&a * &b).derivative(i), &(&a.derivative(i) * &b) + &(&a * &b.derivative(i)));
    }

    #[test]
    fn exact_division_round_trips(a in poly(4), b in poly(4)) {
        prop_assume!(!b.is_zero());
        prop_assert_eq!((&a * &b).div_exact(&b), Some(a));
    }

    #[test]
    fn weyl_product_is_associative(a in op(false), b in op(false), c in op(true), slot in 0usize..3) {
        // at most one factor may carry ∂_{s_j}
        let (x, y, z) = match slot {
            0 => (c, a, b),
            1 => (a, c, b),
            _ => (a, b, c),
        };
        let left = x.weyl_mul(&y).unwrap().weyl_mul(&z).unwrap();
        let right = x.weyl_mul(&y.weyl_mul(&z).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn product_acts_as_composition(a in op(false), b in op(true), f in poly(5), swap in any::<bool>()) {
        let (x, y) = if swap { (b, a) } else { (a, b) };
        let xy = x.weyl_mul(&y).unwrap();
        prop_assert_eq!(xy.apply_poly(&f), x.apply_poly(&y.apply_poly(&f)));
    }

    #[test]
    fn commutator_of_d0_and_s0(k in 1u32..4) {
        // [∂0^k, s0] = k ∂0^{k-1}
        let s0 = DiffOp::coef(MultiPoly::var(N, 0));
        let d = DiffOp::d0(N, k);
        let comm = d.weyl_mul(&s0).unwrap().sub(&s0.weyl_mul(&d).unwrap());
        prop_assert_eq!(comm, DiffOp::d0(N, k - 1).scale(&qi(k as i64)));
    }
}

#[test]
fn resultant_is_quasihomogeneous() {
    for mu in 2..=5usize {
        let r = monic_in_s0(&resultant_s0_oracle(mu).unwrap()).unwrap();
        let w: Vec<u32> = (0..mu).map(|j| (mu + 1 - j) as u32).collect();
        assert_eq!(r.weighted_degree(&w), Some((mu * (mu + 1)) as u32));
        // every monomial has the same weight
        for (e, _) in r.terms() {
            let d: u32 = e.iter().zip(&w).map(|(a, b)| a * b).sum();
            assert_eq!(d, (mu * (mu + 1)) as u32, "mu = {mu}, monomial {e:?}");
        }
        let tau = q(3, 2);
        let scaled = r.weighted_scale(&tau, &w);
        assert_eq!(scaled, r.scale(&num::pow(tau, mu * (mu + 1))));
    }
}

#[test]
fn resultant_vanishes_on_double_roots() {
    // F + s0 = (z − a)^2 G(z) for μ = 3 with G = z^2 + 2a z + b, s2 = b − 3a^2
    for (a, b) in [(qi(1), qi(2)), (q(1, 2), qi(-3)), (qi(-2), q(5, 3))] {
        let r = resultant_s0_oracle(3).unwrap();
        // (z−a)^2 (z^2 + 2a z + b) = z^4 + (b − 3a^2) z^2 + (−2ab + 2a^3) z + a^2 b
        let s2 = &b - qi(3) * &a * &a;
        let s1 = qi(-2) * &a * &b + qi(2) * &a * &a * &a;
        let s0 = &a * &a * &b;
        assert_eq!(r.eval(&[s0, s1, s2]), qi(0));
    }
}
