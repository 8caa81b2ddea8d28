//! Acceptance suite: one line per criterion, nonzero exit if any fails.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use amu_gm::bounds::{dulac_multiplicity, zero_bound, BoundQuery, PointType};
use amu_gm::exact_algebra::rational::{q, qi};
use amu_gm::exact_algebra::resultant::{monic_in_s0, resultant_s0_oracle};
use amu_gm::exact_algebra::Q;
use amu_gm::fuchs::closed_forms::{family_operator, normalized};
use amu_gm::fuchs::{
    build_annihilator, check_isomonodromy_factorization, exponents_closed_form, exponents_computed, fuchs_sum_audit, indicial_at, scale_sample, stratum_point, Family,
    SpecialPoint,
};
use amu_gm::gauss_manin::{derive_connection, discriminant};
use amu_gm::par::Exec;
use amu_gm::periods::{
    annihilator_fd_residual, composite_loop, connection_residual, critical_values, fit_exponent, monodromy, CurveConfig, FitCycle, FitOptions, FitResult,
    MonodromyOptions,
};
use common::{desk_curve, morse_values};
use num::complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LAMBDAS: [(u32, i64); 2] = [(2, 1), (3, 1)];
const SEED: u64 = 20_240_611;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn run(id: usize, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Result<Outcome, String>) -> bool {
    let start = Instant::now();
    let res = f();
    let took = start.elapsed();
    let (mut pass, mut detail) = match res {
        Ok(o) => (o.pass, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(l) = limit {
        if took > l {
            pass = false;
            detail.push_str(&format!("; over the {} s limit", l.as_secs()));
        }
    }
    println!("{} {id} {name}: {detail} [{:.2} s]", if pass { "PASS" } else { "FAIL" }, took.as_secs_f64());
    pass
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

fn discriminant_oracle() -> Result<Outcome, String> {
    let mut bad = Vec::new();
    for mu in 2..=5 {
        let cs = derive_connection(mu, 2, 1).map_err(e)?;
        let oracle = monic_in_s0(&resultant_s0_oracle(mu).map_err(e)?).ok_or("resultant is not monic-able in s0")?;
        if cs.det_s() != oracle || discriminant(mu).map_err(e)? != oracle {
            bad.push(mu);
        }
    }
    Ok(outcome(bad.is_empty(), if bad.is_empty() { "det S = monic Res for mu = 2..5".into() } else { format!("mismatch for mu = {bad:?}") }))
}

fn random_point(rng: &mut ChaCha8Rng, mu: usize) -> Vec<Complex64> {
    (0..mu).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-0.5..0.5))).collect()
}

fn connection_soundness() -> Result<Outcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    let mut count = 0;
    for mu in [2usize, 3] {
        let delta = discriminant(mu).map_err(e)?;
        for nu in [2u32, 3] {
            let cs = derive_connection(mu, nu, 1).map_err(e)?;
            let mut done = 0;
            while done < 20 {
                let s = random_point(&mut rng, mu);
                if delta.eval_c(&s).norm() < 1e-3 {
                    continue;
                }
                let cfg = CurveConfig::new(mu, nu, 1, s).map_err(e)?;
                let r = connection_residual(&cs, &cfg, None).map_err(e)?;
                worst = worst.max(r.residual);
                done += 1;
                count += 1;
            }
        }
    }
    Ok(outcome(worst < 1e-8, format!("max residual {worst:.2e} over {count} points (tol 1e-8, seed {SEED})")))
}

fn annihilator_soundness() -> Result<Outcome, String> {
    let mut worst = 0.0f64;
    let mut count = 0;
    for mu in [2usize, 3] {
        for (nu, m) in LAMBDAS {
            let cs = derive_connection(mu, nu, m).map_err(e)?;
            let op = build_annihilator(&cs).map_err(e)?;
            let base = desk_curve(mu, nu, m);
            let cv: Vec<f64> = critical_values(&base).iter().map(|(_, t)| t.re).collect();
            let (lo, hi) = cv.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| (a.min(t), b.max(t)));
            let spread = hi - lo;
            for k in 0..7 {
                let s0 = lo - 0.5 * spread + 2.0 * spread * k as f64 / 6.0;
                if cv.iter().any(|t| (t - s0).abs() < 0.1 * spread) {
                    continue;
                }
                let cfg = base.with_s0(Complex64::new(s0, 0.0));
                let r = annihilator_fd_residual(&op, &cfg, None, Exec::Auto).map_err(e)?;
                worst = worst.max(r.residual);
                count += 1;
            }
        }
    }
    Ok(outcome(worst < 1e-6, format!("max relative residual {worst:.2e} over {count} grid points (tol 1e-6)")))
}

fn exponents() -> Result<Outcome, String> {
    let mut fails = Vec::new();
    for mu in 2..=4 {
        for (nu, m) in LAMBDAS {
            let lam = q(m, nu as i64);
            let op = normalized(Family::Unshifted, mu, &lam, 0).map_err(e)?;
            let got = indicial_at(&op, &qi(1)).map_err(e)?.exponent_set();
            let mut list: Vec<Q> = (0..mu as i64 - 1).map(qi).collect();
            list.push(&lam + q(1, 2));
            let want = amu_gm::fuchs::ExponentSet::new(got.point.clone(), &list);
            if !got.same_exponents(&want) {
                fails.push(format!("t0 = 1, mu = {mu}, λ = {lam}"));
            }
        }
    }
    let mut covered = 0;
    for mu in [2usize, 4] {
        for k in 0..=2 {
            for (nu, m) in LAMBDAS {
                for fam in [Family::Unshifted, Family::Shifted, Family::EvenIndex, Family::OddIndex] {
                    let Ok(op) = family_operator(fam, mu, nu, m, k) else { continue };
                    for pt in [SpecialPoint::RootOfUnity, SpecialPoint::Zero, SpecialPoint::Infinity] {
                        let Ok(table) = exponents_closed_form(mu, nu, m, k, fam, pt) else { continue };
                        covered += 1;
                        match exponents_computed(&op, mu, pt) {
                            Ok(got) if got.same_exponents(&table) => {}
                            _ => fails.push(format!("{fam:?} at {pt:?}, mu = {mu}, k = {k}, λ = {m}/{nu}")),
                        }
                    }
                }
            }
        }
    }
    Ok(outcome(fails.is_empty(), if fails.is_empty() { format!("exact at t0 = 1 for mu = 2..4; {covered} tabulated cases agree") } else { fails.join("; ") }))
}

/// Vanishing and adjacent fits at the first Morse value of each desk curve.
fn desk_fits() -> Result<Vec<(usize, u32, i64, FitResult)>, String> {
    let mut out = Vec::new();
    for mu in [2usize, 3] {
        for (nu, m) in LAMBDAS {
            let cfg = desk_curve(mu, nu, m);
            let (t0, dir) = morse_values(&cfg)[0];
            for cycle in [FitCycle::Vanishing, FitCycle::Adjacent] {
                out.push((mu, nu, m, fit_exponent(&cfg, t0, &FitOptions { cycle, direction: dir, ..FitOptions::default() }).map_err(e)?));
            }
        }
    }
    Ok(out)
}

fn fitted_asymptotics(fits: &[(usize, u32, i64, FitResult)]) -> Result<Outcome, String> {
    let mut worst = 0.0f64;
    let mut fails = Vec::new();
    for (mu, nu, m, f) in fits {
        let want = *m as f64 / *nu as f64 + 0.5;
        let integral = want.fract() == 0.0;
        match f.cycle {
            FitCycle::Vanishing => {
                worst = worst.max((f.rho - want).abs());
                if (f.rho - want).abs() >= 1e-4 || f.log_rank != 0 {
                    fails.push(format!("vanishing mu = {mu}, λ = {m}/{nu}: ρ = {}, logs {}", f.rho, f.log_rank));
                }
            }
            FitCycle::Adjacent => {
                if (f.log_rank > 0) != integral {
                    fails.push(format!("adjacent mu = {mu}, λ = {m}/{nu}: logs {}", f.log_rank));
                }
            }
        }
    }
    let detail = if fails.is_empty() { format!("max |ρ − (λ+1/2)| = {worst:.2e} (tol 1e-4); logs exactly at λ = 1/2") } else { fails.join("; ") };
    Ok(outcome(fails.is_empty(), detail))
}

fn monodromy_check() -> Result<Outcome, String> {
    let mut worst_ev = 0.0f64;
    let mut worst_loop = 0.0f64;
    for mu in [2usize, 3] {
        for (nu, m) in LAMBDAS {
            let cs = derive_connection(mu, nu, m).map_err(e)?;
            let cfg = desk_curve(mu, nu, m);
            let (t0, _) = morse_values(&cfg)[0];
            let o = MonodromyOptions::default();
            let r = monodromy(&cs, &cfg, t0, &o).map_err(e)?;
            let want = Complex64::from_polar(1.0, 2.0 * PI * (m as f64 / nu as f64 + 0.5));
            let got = r.rank_one_eigenvalue.ok_or_else(|| format!("mu = {mu}, λ = {m}/{nu}: M − I is not rank one"))?;
            worst_ev = worst_ev.max((got - want).norm());
            worst_loop = worst_loop.max(composite_loop(&cs, &cfg, &o).map_err(e)?.identity_defect);
        }
    }
    Ok(outcome(worst_ev < 1e-6 && worst_loop < 1e-6, format!("eigenvalue error {worst_ev:.2e}, composite loop defect {worst_loop:.2e} (tol 1e-6)")))
}

fn isomonodromy() -> Result<Outcome, String> {
    let mut fails = Vec::new();
    let mut total = 0;
    for (mu, base) in [
        (2usize, vec![stratum_point(2, 0, &qi(1), &[]), stratum_point(2, 0, &q(1, 2), &[]), stratum_point(2, 0, &qi(3), &[])]),
        (4, vec![stratum_point(4, 0, &qi(1), &[qi(3), qi(1)]), stratum_point(4, 0, &qi(-1), &[qi(-2), qi(5)]), stratum_point(4, 0, &q(1, 2), &[qi(7), qi(-1)])]),
    ] {
        let base: Vec<_> = base.into_iter().collect::<Result<_, _>>().map_err(e)?;
        let mut samples = base.clone();
        for tau in [qi(2), q(-1, 3)] {
            samples.push(scale_sample(&base[0], &tau));
        }
        for (nu, m) in LAMBDAS {
            let cs = derive_connection(mu, nu, m).map_err(e)?;
            let op = build_annihilator(&cs).map_err(e)?;
            let rep = check_isomonodromy_factorization(&cs, &op, &samples, Exec::Auto).map_err(e)?;
            total += samples.len();
            if !(rep.all_factorizations_hold && rep.all_groups_agree) {
                fails.push(format!("mu = {mu}, λ = {m}/{nu}"));
            }
        }
    }
    Ok(outcome(fails.is_empty(), if fails.is_empty() { format!("{total} samples, 3 per component plus 2 scalings, exponent sets agree") } else { fails.join("; ") }))
}

fn bounds(fits: &[(usize, u32, i64, FitResult)]) -> Result<Outcome, String> {
    let branch = |mu, nu, m| BoundQuery { mu, nu, m, big_k: 0, k1: 0, point: PointType::Branch };
    let got = [
        zero_bound(&branch(2, 2, 1)).map_err(e)?.bound,
        zero_bound(&branch(3, 2, 1)).map_err(e)?.bound,
        zero_bound(&BoundQuery { mu: 4, nu: 2, m: 1, big_k: 3, k1: 0, point: PointType::Regular }).map_err(e)?.bound,
    ];
    let mut fails = Vec::new();
    if got != [2, 4, 7] {
        fails.push(format!("instances gave {got:?}, expected [2, 4, 7]"));
    }
    let mut worst = i64::MIN;
    for (mu, nu, m, f) in fits {
        let n = dulac_multiplicity(&f.dulac(0.0).map_err(e)?).map_err(e)?;
        let b = zero_bound(&branch(*mu, *nu, *m)).map_err(e)?.bound;
        worst = worst.max(n - b);
        if n > b {
            fails.push(format!("mu = {mu}, λ = {m}/{nu}, {:?}: multiplicity {n} > bound {b}", f.cycle));
        }
    }
    Ok(outcome(fails.is_empty(), if fails.is_empty() { format!("instances {got:?}; {} fitted integrals, max multiplicity − bound = {worst}", fits.len()) } else { fails.join("; ") }))
}

fn fuchs_audit() -> Result<Outcome, String> {
    let mut fails = Vec::new();
    let mut flagged = Vec::new();
    for mu in 2..=4 {
        for k in 0..=2 {
            for (nu, m) in LAMBDAS {
                let a = fuchs_sum_audit(mu, nu, m, k).map_err(e)?;
                if !a.computed_matches_tabulated {
                    fails.push(format!("mu = {mu}, k = {k}, λ = {}: computed {} vs tabulated {}", a.lambda, a.computed, a.tabulated));
                }
                if k == 0 && m == 1 && nu == 2 {
                    flagged.push(format!("mu={mu} computed {} printed {}{}", a.computed, a.printed, if a.printed_matches_tabulated { "" } else { " (differs)" }));
                }
            }
        }
    }
    let detail = format!("{}; {}", if fails.is_empty() { "brute-force sums match the tables".to_string() } else { fails.join("; ") }, flagged.join(", "));
    Ok(outcome(fails.is_empty(), detail))
}

fn main() {
    // `cargo test` passes harness flags such as `--nocapture` or a filter; none apply here
    let secs = Duration::from_secs;
    let mut ok = true;
    ok &= run(1, "discriminant_oracle", Some(secs(10)), discriminant_oracle);
    ok &= run(2, "connection_soundness", Some(secs(120)), connection_soundness);
    ok &= run(3, "annihilator_soundness", Some(secs(120)), annihilator_soundness);
    ok &= run(4, "exponents", None, exponents);
    let mut fits: Option<Vec<(usize, u32, i64, FitResult)>> = None;
    ok &= run(5, "fitted_asymptotics", Some(secs(300)), || {
        let f = desk_fits()?;
        let o = fitted_asymptotics(&f);
        fits = Some(f);
        o
    });
    ok &= run(6, "monodromy", Some(secs(300)), monodromy_check);
    ok &= run(7, "isomonodromy_sampling", None, isomonodromy);
    ok &= run(8, "bounds_arithmetic", None, || bounds(fits.as_deref().ok_or("no fitted integrals")?));
    ok &= run(9, "fuchs_sum_audit", None, fuchs_audit);
    println!("acceptance: {}", if ok { "all criteria pass" } else { "FAILURES" });
    if !ok {
        std::process::exit(1);
    }
}
