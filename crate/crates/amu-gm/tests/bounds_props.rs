use amu_gm::bounds::{dulac_multiplicity, zero_bound, zero_bound_hyperelliptic, BoundQuery, Coefficient, DulacExpansion, DulacTerm, PointType};
use amu_gm::exact_algebra::rational::{q, qi};
use proptest::prelude::*;

fn branch(mu: usize, nu: u32, m: i64, big_k: u64, k1: u64) -> BoundQuery {
    BoundQuery { mu, nu, m, big_k, k1, point: PointType::Branch }
}

// brute force over the definition: count (k+1)(⌊ρ⌋+1) of the lowest live term
fn naive_multiplicity(terms: &[(i64, i64, u32, i64)]) -> Option<i64> {
    let live: Vec<_> = terms.iter().filter(|t| t.3 != 0).collect();
    let lo = live.iter().map(|t| t.0 as f64 / t.1 as f64).fold(f64::INFINITY, f64::min);
    if !lo.is_finite() {
        return None;
    }
    let k = live.iter().filter(|t| (t.0 as f64 / t.1 as f64 - lo).abs() < 1e-12).map(|t| t.2).max()?;
    Some((k as i64 + 1) * (lo.floor() as i64 + 1))
}

fn expansion(terms: &[(i64, i64, u32, i64)]) -> DulacExpansion {
    DulacExpansion::new(0.0, terms.iter().map(|&(n, d, k, c)| DulacTerm { rho: q(n, d), k, coeff: Coefficient::Exact(qi(c)) }).collect())
}

#[test]
fn worked_instances() {
    assert_eq!(zero_bound(&branch(2, 2, 1, 0, 0)).unwrap().bound, 2);
    assert_eq!(zero_bound(&branch(3, 2, 1, 0, 0)).unwrap().bound, 4);
    let reg = BoundQuery { point: PointType::Regular, ..branch(4, 2, 1, 3, 0) };
    assert_eq!(zero_bound(&reg).unwrap().bound, 7);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn monotone_in_the_total_degree(mu in 2usize..=8, nu in 2u32..6, m in -3i64..6, big_k in 0u64..10) {
        let reg = |k| zero_bound(&BoundQuery { point: PointType::Regular, ..branch(mu, nu, m, k, 0) }).unwrap().bound;
        prop_assert!(reg(big_k + 1) >= reg(big_k));
        if mu % 2 == 0 {
            let br = |k| zero_bound(&branch(mu, nu, m, k, 0)).unwrap().bound;
            prop_assert!(br(big_k + 1) >= br(big_k));
        }
    }

    #[test]
    fn monotone_in_m(mu in 2usize..=8, nu in 2u32..6, m in -3i64..6, big_k in 0u64..10) {
        let k1 = if mu % 2 == 0 { big_k.min(2) } else { 0 };
        let a = zero_bound(&branch(mu, nu, m, big_k, k1)).unwrap().bound;
        let b = zero_bound(&branch(mu, nu, m + 1, big_k, k1)).unwrap().bound;
        prop_assert!(b >= a);
    }

    #[test]
    fn hyperelliptic_form_agrees(half in 1usize..=4, m in -3i64..8, big_k in 0u64..12) {
        let mu = 2 * half;
        prop_assert_eq!(zero_bound(&branch(mu, 2, m, big_k, 0)).unwrap().bound, zero_bound_hyperelliptic(mu, m, big_k));
    }

    #[test]
    fn odd_mu_needs_k1_zero(half in 1usize..=3, k1 in 1u64..4) {
        prop_assert!(zero_bound(&branch(2 * half + 1, 2, 1, k1, k1)).is_err());
    }

    #[test]
    fn multiplicity_matches_the_definition(
        terms in prop::collection::vec((-6i64..12, 1i64..7, 0u32..3, -2i64..3), 1..7),
    ) {
        let e = expansion(&terms);
        match naive_multiplicity(&terms) {
            Some(n) => prop_assert_eq!(dulac_multiplicity(&e).unwrap(), n),
            None => prop_assert!(dulac_multiplicity(&e).is_err()),
        }
    }

    #[test]
    fn zero_terms_and_order_do_not_matter(
        terms in prop::collection::vec((-6i64..12, 1i64..7, 0u32..3, 1i64..3), 1..6),
        padding in prop::collection::vec((-6i64..12, 1i64..7, 0u32..3), 0..4),
        seed in any::<u64>(),
    ) {
        let base = dulac_multiplicity(&expansion(&terms)).unwrap();
        let mut more: Vec<_> = terms.clone();
        more.extend(padding.iter().map(|&(n, d, k)| (n, d, k, 0)));
        // deterministic shuffle
        let len = more.len();
        for i in (1..len).rev() {
            let j = (seed.rotate_left(i as u32) as usize) % (i + 1);
            more.swap(i, j);
        }
        prop_assert_eq!(dulac_multiplicity(&expansion(&more)).unwrap(), base);
    }
}
