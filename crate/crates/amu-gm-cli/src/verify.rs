//! Batch checks behind `verify`. Each suite yields one record with a list of checks;
//! suites run in parallel and are emitted in the order requested.

use std::f64::consts::PI;

use amu_gm::bounds::{dulac_multiplicity, zero_bound, BoundQuery, PointType};
use amu_gm::exact_algebra::rational::{q, qi};
use amu_gm::exact_algebra::resultant::{monic_in_s0, resultant_s0_oracle};
use amu_gm::exact_algebra::Q;
use amu_gm::fuchs::closed_forms::{family_operator, normalized};
use amu_gm::fuchs::{
    build_annihilator, check_isomonodromy_factorization, exponents_closed_form, exponents_computed, fuchs_sum_audit, indicial_at, scale_sample, stratum_point, ExponentSet,
    Family, SpecialPoint,
};
use amu_gm::gauss_manin::{derive_connection, discriminant};
use amu_gm::par::{self, Exec};
use amu_gm::periods::{annihilator_fd_residual, composite_loop, connection_residual, fit_exponent, monodromy, CurveConfig, FitCycle, FitOptions, FitResult, MonodromyOptions};
use num::complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::commands::{sorted_critical, toward_nearest};
use crate::output::Record;
use crate::{Ctx, Failure, UsageError};

const SUITES: &[&str] = &["discriminant", "connection", "annihilator", "exponents", "fit", "monodromy", "isomonodromy", "bounds", "fuchs"];
const LAMBDAS: [(u32, i64); 2] = [(2, 1), (3, 1)];

#[derive(Clone, Debug, Serialize)]
struct Check {
    name: String,
    pass: bool,
    /// measured quantity (error, residual, count) where one exists
    value: Option<f64>,
    tol: Option<f64>,
    detail: String,
}

fn check(name: impl Into<String>, pass: bool, value: Option<f64>, tol: Option<f64>, detail: impl Into<String>) -> Check {
    Check { name: name.into(), pass, value, tol, detail: detail.into() }
}

type Checks = Result<Vec<Check>, amu_gm::Error>;

fn allowed(suite: &str) -> &'static [usize] {
    match suite {
        "discriminant" => &[2, 3, 4, 5],
        "connection" | "annihilator" | "monodromy" | "bounds" => &[2, 3],
        "exponents" | "fit" | "fuchs" => &[2, 3, 4],
        "isomonodromy" => &[2, 4],
        _ => &[],
    }
}

/// Real curves with distinct critical values, one per μ.
fn desk_curve(mu: usize, nu: u32, m: i64) -> amu_gm::Result<CurveConfig> {
    let s: &[f64] = match mu {
        2 => &[0.0, -1.0],
        3 => &[0.0, 0.2, -1.0],
        4 => &[0.0, 0.5, 0.1, -2.0],
        _ => return Err(amu_gm::Error::Uncovered(format!("no desk curve for mu = {mu}"))),
    };
    CurveConfig::real(mu, nu, m, s)
}

pub fn run(suite: &Option<String>, mu: Option<usize>, ctx: &Ctx) -> Result<Vec<Record>, Failure> {
    let name: String = ctx.defaults.pick(suite.clone(), "suite", Some("all".into()))?;
    let mu: Option<usize> = ctx.defaults.pick_opt(mu, "mu")?;
    let names: Vec<&str> = if name == "all" {
        SUITES.to_vec()
    } else if let Some(s) = SUITES.iter().find(|s| **s == name) {
        vec![*s]
    } else {
        return Err(UsageError(format!("--suite {name}: expected one of {} or all", SUITES.join(", "))).into());
    };
    let mut plan: Vec<(&str, Vec<usize>)> = Vec::new();
    for s in names {
        let mus: Vec<usize> = match mu {
            None => allowed(s).to_vec(),
            Some(m) if allowed(s).contains(&m) => vec![m],
            Some(m) if name == "all" => {
                let _ = m;
                continue;
            }
            Some(m) => return Err(UsageError(format!("suite {s} covers mu in {:?}, not {m}", allowed(s))).into()),
        };
        plan.push((s, mus));
    }
    if plan.is_empty() {
        return Err(UsageError(format!("no suite covers mu = {}", mu.unwrap_or(0))).into());
    }
    let seed = ctx.seed;
    let results = par::map(Exec::Auto, &plan, |(s, mus)| suite_checks(s, mus, seed));
    let mut out = Vec::new();
    for ((s, mus), res) in plan.iter().zip(results) {
        let checks = res?;
        let pass = checks.iter().all(|c| c.pass);
        let mut r = Record::new("verify", format!("verify.{s}"), json!({ "suite": s, "mu": mus }), json!({ "checks": checks, "passed": checks.iter().filter(|c| c.pass).count(), "total": checks.len() }));
        r.pass = Some(pass);
        out.push(r);
    }
    Ok(out)
}

fn suite_checks(suite: &str, mus: &[usize], seed: u64) -> Checks {
    match suite {
        "discriminant" => discriminant_suite(mus),
        "connection" => connection_suite(mus, seed),
        "annihilator" => annihilator_suite(mus),
        "exponents" => exponents_suite(mus),
        "fit" => fit_suite(mus).map(|(c, _)| c),
        "monodromy" => monodromy_suite(mus),
        "isomonodromy" => isomonodromy_suite(mus),
        "bounds" => bounds_suite(mus),
        "fuchs" => fuchs_suite(mus),
        _ => unreachable!("suite names are validated"),
    }
}

fn discriminant_suite(mus: &[usize]) -> Checks {
    mus.iter()
        .map(|&mu| {
            let cs = derive_connection(mu, 2, 1)?;
            let oracle = monic_in_s0(&resultant_s0_oracle(mu)?).ok_or_else(|| amu_gm::Error::Numerical("resultant has no constant top coefficient".into()))?;
            let ok = cs.det_s() == oracle && discriminant(mu)? == oracle;
            Ok(check(format!("det_s_equals_monic_resultant.mu{mu}"), ok, None, Some(0.0), "exact"))
        })
        .collect()
}

fn connection_suite(mus: &[usize], seed: u64) -> Checks {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &mu in mus {
        let delta = discriminant(mu)?;
        for nu in [2u32, 3] {
            let cs = derive_connection(mu, nu, 1)?;
            let mut pts = Vec::new();
            while pts.len() < 20 {
                let s: Vec<Complex64> = (0..mu).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-0.5..0.5))).collect();
                if delta.eval_c(&s).norm() >= 1e-3 {
                    pts.push(s);
                }
            }
            let res = par::map(Exec::Auto, &pts, |s| -> amu_gm::Result<f64> { Ok(connection_residual(&cs, &CurveConfig::new(mu, nu, 1, s.clone())?, None)?.residual) });
            let worst = res.into_iter().collect::<amu_gm::Result<Vec<f64>>>()?.into_iter().fold(0.0, f64::max);
            out.push(check(format!("connection_residual.mu{mu}.nu{nu}"), worst < 1e-8, Some(worst), Some(1e-8), "max over 20 random points off the discriminant"));
        }
    }
    Ok(out)
}

fn annihilator_suite(mus: &[usize]) -> Checks {
    let mut out = Vec::new();
    for &mu in mus {
        for (nu, m) in LAMBDAS {
            let op = build_annihilator(&derive_connection(mu, nu, m)?)?;
            let base = desk_curve(mu, nu, m)?;
            let cv: Vec<f64> = sorted_critical(&base).iter().map(|t| t.re).collect();
            let (lo, hi) = (cv[0], cv[cv.len() - 1]);
            let spread = hi - lo;
            let grid: Vec<f64> = (0..7).map(|k| lo - 0.5 * spread + 2.0 * spread * k as f64 / 6.0).filter(|s0| cv.iter().all(|t| (t - s0).abs() >= 0.1 * spread)).collect();
            let mut worst = 0.0f64;
            for s0 in &grid {
                worst = worst.max(annihilator_fd_residual(&op, &base.with_s0(Complex64::new(*s0, 0.0)), None, Exec::Auto)?.residual);
            }
            out.push(check(format!("annihilator_fd.mu{mu}.lambda{m}_{nu}"), worst < 1e-6, Some(worst), Some(1e-6), format!("{} points on an s0 grid", grid.len())));
        }
    }
    Ok(out)
}

fn exponents_suite(mus: &[usize]) -> Checks {
    let mut out = Vec::new();
    for &mu in mus {
        for (nu, m) in LAMBDAS {
            let lam = q(m, nu as i64);
            let got = indicial_at(&normalized(Family::Unshifted, mu, &lam, 0)?, &qi(1))?.exponent_set();
            let mut list: Vec<Q> = (0..mu as i64 - 1).map(qi).collect();
            list.push(&lam + q(1, 2));
            let ok = got.same_exponents(&ExponentSet::new(got.point.clone(), &list));
            out.push(check(format!("indicial_t1.mu{mu}.lambda{m}_{nu}"), ok, None, Some(0.0), "{0..mu-2, lambda+1/2}"));
        }
        if mu % 2 != 0 {
            continue;
        }
        let mut covered = 0;
        let mut bad = Vec::new();
        for k in 0..=2 {
            for (nu, m) in LAMBDAS {
                for fam in [Family::Unshifted, Family::Shifted, Family::EvenIndex, Family::OddIndex] {
                    let Ok(op) = family_operator(fam, mu, nu, m, k) else { continue };
                    for pt in [SpecialPoint::RootOfUnity, SpecialPoint::Zero, SpecialPoint::Infinity] {
                        let Ok(table) = exponents_closed_form(mu, nu, m, k, fam, pt) else { continue };
                        covered += 1;
                        if !exponents_computed(&op, mu, pt).is_ok_and(|g| g.same_exponents(&table)) {
                            bad.push(format!("{fam:?}/{pt:?}/k{k}/{m}_{nu}"));
                        }
                    }
                }
            }
        }
        out.push(check(format!("closed_forms.mu{mu}"), bad.is_empty(), Some(covered as f64), None, if bad.is_empty() { "all covered cases agree".into() } else { bad.join(" ") }));
    }
    Ok(out)
}

type Fit = (usize, u32, i64, FitResult);

fn fit_suite(mus: &[usize]) -> Result<(Vec<Check>, Vec<Fit>), amu_gm::Error> {
    let mut out = Vec::new();
    let mut fits = Vec::new();
    for &mu in mus {
        for (nu, m) in LAMBDAS {
            let cfg = desk_curve(mu, nu, m)?;
            let cv = sorted_critical(&cfg);
            let t0 = cv[0];
            let dir = toward_nearest(&cv, t0);
            let want = m as f64 / nu as f64 + 0.5;
            let van = fit_exponent(&cfg, t0, &FitOptions { direction: dir, ..FitOptions::default() })?;
            let err = (van.rho - want).abs();
            out.push(check(format!("fit_rho.mu{mu}.lambda{m}_{nu}"), err < 1e-4 && van.log_rank == 0, Some(err), Some(1e-4), format!("rho = {:.10}", van.rho)));
            let adj = fit_exponent(&cfg, t0, &FitOptions { cycle: FitCycle::Adjacent, direction: dir, ..FitOptions::default() })?;
            let integral = want.fract() == 0.0;
            out.push(check(format!("fit_log.mu{mu}.lambda{m}_{nu}"), (adj.log_rank > 0) == integral, Some(adj.log_rank as f64), None, format!("log expected: {integral}")));
            fits.push((mu, nu, m, van));
            fits.push((mu, nu, m, adj));
        }
    }
    Ok((out, fits))
}

fn monodromy_suite(mus: &[usize]) -> Checks {
    let mut out = Vec::new();
    let o = MonodromyOptions::default();
    for &mu in mus {
        for (nu, m) in LAMBDAS {
            let cs = derive_connection(mu, nu, m)?;
            let cfg = desk_curve(mu, nu, m)?;
            let t0 = sorted_critical(&cfg)[0];
            let want = Complex64::from_polar(1.0, 2.0 * PI * (m as f64 / nu as f64 + 0.5));
            let rep = monodromy(&cs, &cfg, t0, &o)?;
            let err = rep.rank_one_eigenvalue.map(|e| (e - want).norm());
            out.push(check(format!("eigenvalue.mu{mu}.lambda{m}_{nu}"), err.is_some_and(|e| e < 1e-6), err, Some(1e-6), "M - I rank one, other eigenvalues 1"));
            let defect = composite_loop(&cs, &cfg, &o)?.identity_defect;
            out.push(check(format!("composite_loop.mu{mu}.lambda{m}_{nu}"), defect < 1e-6, Some(defect), Some(1e-6), "loop around all singular values and infinity"));
        }
    }
    Ok(out)
}

fn isomonodromy_suite(mus: &[usize]) -> Checks {
    let mut out = Vec::new();
    for &mu in mus {
        let base = match mu {
            2 => vec![stratum_point(2, 0, &qi(1), &[])?, stratum_point(2, 0, &q(1, 2), &[])?, stratum_point(2, 0, &qi(3), &[])?],
            4 => vec![
                stratum_point(4, 0, &qi(1), &[qi(3), qi(1)])?,
                stratum_point(4, 0, &qi(-1), &[qi(-2), qi(5)])?,
                stratum_point(4, 0, &q(1, 2), &[qi(7), qi(-1)])?,
            ],
            _ => unreachable!("allowed list"),
        };
        let mut samples = base.clone();
        for tau in [qi(2), q(-1, 3)] {
            samples.push(scale_sample(&base[0], &tau));
        }
        for (nu, m) in LAMBDAS {
            let cs = derive_connection(mu, nu, m)?;
            let rep = check_isomonodromy_factorization(&cs, &build_annihilator(&cs)?, &samples, Exec::Auto)?;
            out.push(check(
                format!("isomonodromy.mu{mu}.lambda{m}_{nu}"),
                rep.all_factorizations_hold && rep.all_groups_agree,
                Some(samples.len() as f64),
                None,
                "3 samples on one component plus 2 scalings",
            ));
        }
    }
    Ok(out)
}

fn bounds_suite(mus: &[usize]) -> Checks {
    let branch = |mu, nu, m| BoundQuery { mu, nu, m, big_k: 0, k1: 0, point: PointType::Branch };
    let mut out = vec![
        check("instance.mu2_K0_m1", zero_bound(&branch(2, 2, 1))?.bound == 2, None, Some(0.0), "expect 2"),
        check("instance.mu3_k1_0_m1", zero_bound(&branch(3, 2, 1))?.bound == 4, None, Some(0.0), "expect 4"),
        check(
            "instance.mu4_K3_regular",
            zero_bound(&BoundQuery { mu: 4, nu: 2, m: 1, big_k: 3, k1: 0, point: PointType::Regular })?.bound == 7,
            None,
            Some(0.0),
            "expect 7",
        ),
    ];
    let (_, fits) = fit_suite(mus)?;
    for (mu, nu, m, f) in fits {
        let n = dulac_multiplicity(&f.dulac(0.0)?)?;
        let b = zero_bound(&branch(mu, nu, m))?.bound;
        out.push(check(format!("dulac_le_bound.mu{mu}.lambda{m}_{nu}.{:?}", f.cycle).to_lowercase(), n <= b, Some(n as f64), Some(b as f64), format!("multiplicity {n}, bound {b}")));
    }
    Ok(out)
}

fn fuchs_suite(mus: &[usize]) -> Checks {
    let mut out = Vec::new();
    for &mu in mus {
        for k in 0..=2 {
            for (nu, m) in LAMBDAS {
                let a = fuchs_sum_audit(mu, nu, m, k)?;
                let flag = if a.printed_matches_tabulated { "" } else { "; printed value differs" };
                out.push(check(
                    format!("fuchs_sum.mu{mu}.k{k}.lambda{m}_{nu}"),
                    a.computed_matches_tabulated,
                    None,
                    None,
                    format!("computed {}, tabulated {}, printed {}{flag}", a.computed, a.tabulated, a.printed),
                ));
            }
        }
    }
    Ok(out)
}
