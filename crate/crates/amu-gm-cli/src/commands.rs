use amu_gm::bounds::{zero_bound, zero_bound_hyperelliptic, BoundQuery, PointType};
use amu_gm::exact_algebra::rational::{fmt_q, parse_q, parse_q_list, q, Q};
use amu_gm::fuchs::closed_forms::family_operator;
use amu_gm::fuchs::{
    build_annihilator, build_shifted_annihilator, check_isomonodromy_factorization, exponents_closed_form, exponents_computed, fuchs_sum_audit, indicial_polynomial,
    scale_sample, stratum_point, Family as ExpFamily, SpecialPoint, StratumSample,
};
use amu_gm::exact_algebra::UPoly;
use amu_gm::gauss_manin::{derive_connection, derive_shifted_connection, discriminant, stratum_of, ConnectionSystem};
use amu_gm::par::Exec;
use amu_gm::periods::{
    composite_loop, connection_residual, critical_values, fit_exponent, monodromy, period_with, roots_of_fiber, shift_loop, system_weights, CurveConfig, CyclePath,
    FitCycle, FitOptions, MonodromyOptions, PeriodOptions,
};
use num::complex::Complex64;
use serde_json::{json, Value};

use crate::output::Record;
use crate::{Command, Ctx, Failure, Family, ShiftArgs, UsageError};

type Out = Result<Vec<Record>, Failure>;

fn ser<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("library reports serialize")
}

pub struct Fam {
    pub mu: usize,
    pub nu: u32,
    pub m: i64,
}

impl Fam {
    fn json(&self) -> Value {
        json!({ "mu": self.mu, "nu": self.nu, "m": self.m, "lambda": fmt_q(&q(self.m, self.nu as i64)) })
    }
}

fn family(f: &Family, ctx: &Ctx) -> Result<Fam, UsageError> {
    let d = &ctx.defaults;
    let mu: usize = d.pick(f.mu, "mu", None)?;
    if !(2..=amu_gm::MAX_MU).contains(&mu) {
        return Err(UsageError(format!("--mu {mu}: supported range is 2..={}", amu_gm::MAX_MU)));
    }
    let nu: u32 = d.pick(f.nu, "nu", Some(2))?;
    if nu < 2 {
        return Err(UsageError(format!("--nu {nu}: need at least 2")));
    }
    Ok(Fam { mu, nu, m: d.pick(f.m, "m", Some(1))? })
}

fn shift(s: &ShiftArgs, ctx: &Ctx) -> Result<Option<(usize, Q)>, UsageError> {
    let d = &ctx.defaults;
    let k: Option<usize> = d.pick_opt(s.k, "k")?;
    let x0: Option<String> = d.pick_opt(s.x0.clone(), "x0")?;
    match (k, x0) {
        (None, None) => Ok(None),
        (Some(k), x0) => Ok(Some((k, parse_q(x0.as_deref().unwrap_or("0")).map_err(|e| UsageError(format!("--x0: {e}")))?))),
        (None, Some(_)) => Err(UsageError("--x0 needs --k".into())),
    }
}

fn connection(f: &Fam, sh: &Option<(usize, Q)>) -> Result<ConnectionSystem, Failure> {
    Ok(match sh {
        None => derive_connection(f.mu, f.nu, f.m)?,
        Some((k, x0)) => derive_shifted_connection(f.mu, f.nu, f.m, *k, x0)?,
    })
}

fn shift_json(sh: &Option<(usize, Q)>) -> Value {
    match sh {
        None => Value::Null,
        Some((k, x0)) => json!({ "k": k, "x0": fmt_q(x0) }),
    }
}

pub fn parse_complex_list(s: &str, mu: usize) -> Result<Vec<Complex64>, UsageError> {
    let v: Vec<Complex64> = s
        .split(',')
        .map(|x| x.trim().parse::<Complex64>().map_err(|e| UsageError(format!("--s entry `{x}`: {e}"))))
        .collect::<Result<_, _>>()?;
    if v.len() != mu {
        return Err(UsageError(format!("--s has {} entries, expected mu = {mu}", v.len())));
    }
    Ok(v)
}

fn curve(f: &Fam, s: &Option<String>, ctx: &Ctx) -> Result<CurveConfig, Failure> {
    let s: String = ctx.defaults.pick(s.clone(), "s", None)?;
    Ok(CurveConfig::new(f.mu, f.nu, f.m, parse_complex_list(&s, f.mu)?)?)
}

fn c_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn mat_json(m: &[Vec<amu_gm::exact_algebra::MultiPoly>]) -> Value {
    Value::Array(m.iter().map(|r| Value::Array(r.iter().map(|p| json!(p.to_string())).collect())).collect())
}

/// Critical values sorted by `(re, im)` so that indices are stable.
pub fn sorted_critical(cfg: &CurveConfig) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = critical_values(cfg).into_iter().map(|(_, t)| t).collect();
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

/// Unit direction from `t` towards the nearest other critical value.
pub fn toward_nearest(cv: &[Complex64], t: Complex64) -> Complex64 {
    cv.iter()
        .filter(|&&u| (u - t).norm() > 1e-9 * (1.0 + t.norm()))
        .min_by(|a, b| (*a - t).norm().total_cmp(&(*b - t).norm()))
        .map(|u| (u - t) / (u - t).norm())
        .unwrap_or(Complex64::new(1.0, 0.0))
}

fn pick_critical(cfg: &CurveConfig, idx: Option<usize>, ctx: &Ctx) -> Result<(usize, Complex64, Vec<Complex64>), Failure> {
    let cv = sorted_critical(cfg);
    let i: usize = ctx.defaults.pick(idx, "critical", Some(0))?;
    let t = *cv.get(i).ok_or_else(|| UsageError(format!("--critical {i}: only {} critical values", cv.len())))?;
    Ok((i, t, cv))
}

pub fn dispatch(cmd: &Command, ctx: &Ctx) -> Out {
    match cmd {
        Command::System { fam, shift: sa } => system(&family(fam, ctx)?, &shift(sa, ctx)?),
        Command::Strata { mu, point } => strata(*mu, point, ctx),
        Command::Operator { fam, shift: sa } => operator(&family(fam, ctx)?, &shift(sa, ctx)?),
        Command::Exponents { fam, family: which, special, k, point, audit } => exponents(&family(fam, ctx)?, which, special, *k, point, *audit, ctx),
        Command::Isocheck { fam, k, samples, scale } => isocheck(&family(fam, ctx)?, *k, samples, scale, ctx),
        Command::Bounds { fam, big_k, k1, point } => bounds(&family(fam, ctx)?, *big_k, *k1, point, ctx),
        Command::Periods { fam, s, a, b, kind } => periods(&family(fam, ctx)?, s, *a, *b, kind, ctx),
        Command::Residual { fam, shift: sa, s } => residual(&family(fam, ctx)?, &shift(sa, ctx)?, s, ctx),
        Command::Fit { fam, s, critical, cycle, ladder, eps0 } => fit(&family(fam, ctx)?, s, *critical, cycle, *ladder, *eps0, ctx),
        Command::Monodromy { fam, shift: sa, s, critical, composite, shift_line, radius } => {
            monodromy_cmd(&family(fam, ctx)?, &shift(sa, ctx)?, s, *critical, *composite, *shift_line, *radius, ctx)
        }
        Command::Verify { suite, mu } => crate::verify::run(suite, *mu, ctx),
    }
}

fn system(f: &Fam, sh: &Option<(usize, Q)>) -> Out {
    let cs = connection(f, sh)?;
    let delta = discriminant(f.mu)?;
    let det = cs.det_s();
    let det_matches = match sh {
        None => det == delta,
        Some(_) => det.div_exact(&delta).is_some(),
    };
    let mut result = json!({
        "size": cs.size(),
        "S": mat_json(&cs.s),
        "L": cs.l.iter().map(fmt_q).collect::<Vec<_>>(),
        "V": mat_json(&cs.v),
        "discriminant": delta.to_string(),
        "det_S": det.to_string(),
        "det_S_matches_discriminant": det_matches,
    });
    if let Some(s) = &cs.shift {
        result["s0_tilde"] = json!(s.s0_tilde.to_string());
    }
    let tag = if sh.is_some() { "connection.shifted_system" } else { "connection.system" };
    let mut input = f.json();
    input["shift"] = shift_json(sh);
    Ok(vec![Record::new("system", tag, input, result)])
}

fn strata(mu: Option<usize>, point: &Option<String>, ctx: &Ctx) -> Out {
    let f = family(&Family { mu, nu: None, m: None }, ctx)?;
    let p: String = ctx.defaults.pick(point.clone(), "point", None)?;
    let pt = parse_q_list(&p).map_err(|e| UsageError(format!("--point: {e}")))?;
    let cs = derive_connection(f.mu, 2, 1)?;
    let delta = discriminant(f.mu)?;
    let on = delta.eval(&pt) == Q::from_integer(0.into());
    let label = if pt.len() == f.mu && !on { None } else { Some(stratum_of(&cs, &delta, &pt)?) };
    let result = json!({ "on_discriminant": on, "discriminant_value": fmt_q(&delta.eval(&pt)), "label": label.as_ref().map(ser) });
    Ok(vec![Record::new("strata", "connection.stratum", json!({ "mu": f.mu, "point": pt.iter().map(fmt_q).collect::<Vec<_>>() }), result)])
}

fn operator(f: &Fam, sh: &Option<(usize, Q)>) -> Out {
    let cs = connection(f, sh)?;
    let op = if sh.is_some() { build_shifted_annihilator(&cs)? } else { build_annihilator(&cs)? };
    let mut result = ser(&op.summary());
    result["factors"] = json!(op.factors.iter().map(|p| p.to_string()).collect::<Vec<_>>());
    let mut input = f.json();
    input["shift"] = shift_json(sh);
    let tag = if sh.is_some() { "annihilator.shifted" } else { "annihilator.unshifted" };
    Ok(vec![Record::new("operator", tag, input, result)])
}

#[allow(clippy::too_many_arguments)]
fn exponents(f: &Fam, which: &Option<String>, special: &Option<String>, k: Option<usize>, point: &Option<String>, audit: bool, ctx: &Ctx) -> Out {
    let d = &ctx.defaults;
    let k: usize = d.pick(k, "k", Some(0))?;
    let mut input = f.json();
    input["k"] = json!(k);
    if audit {
        let a = fuchs_sum_audit(f.mu, f.nu, f.m, k)?;
        let mut r = Record::new("exponents", "fuchs_sum.audit", input, ser(&a));
        r.pass = Some(a.computed_matches_tabulated);
        return Ok(vec![r]);
    }
    if let Some(p) = d.pick_opt(point.clone(), "point")? {
        let pt = parse_q_list(&p).map_err(|e| UsageError(format!("--point: {e}")))?;
        if pt.len() != f.mu {
            return Err(UsageError(format!("--point has {} entries, expected {}", pt.len(), f.mu)).into());
        }
        let cs = derive_connection(f.mu, f.nu, f.m)?;
        let op = build_annihilator(&cs)?;
        let eqs = indicial_polynomial(&op, &pt[1..], &UPoly::linear_root(&pt[0]))?;
        let sets: Vec<Value> = eqs.iter().map(|e| ser(&e.exponent_set())).collect();
        input["point"] = json!(pt.iter().map(fmt_q).collect::<Vec<_>>());
        return Ok(vec![Record::new("exponents", "exponents.discriminant_point", input, json!({ "exponents": sets }))]);
    }
    let fam_s: String = d.pick(which.clone(), "family", Some("unshifted".into()))?;
    let fam: ExpFamily = fam_s.parse()?;
    let pt_s: String = d.pick(special.clone(), "point", Some("omega".into()))?;
    let sp: SpecialPoint = pt_s.parse()?;
    let table = exponents_closed_form(f.mu, f.nu, f.m, k, fam, sp)?;
    let op = family_operator(fam, f.mu, f.nu, f.m, k)?;
    let got = exponents_computed(&op, f.mu, sp)?;
    let agree = table.same_exponents(&got);
    input["family"] = ser(&fam);
    input["at"] = ser(&sp);
    let mut r = Record::new("exponents", format!("exponents.{}.{}", ser(&fam).as_str().unwrap_or(""), ser(&sp).as_str().unwrap_or("")), input, json!({
        "closed_form": ser(&table),
        "computed": ser(&got),
        "agree": agree,
    }));
    r.pass = Some(agree);
    Ok(vec![r])
}

fn parse_sample(mu: usize, k: usize, s: &str) -> Result<StratumSample, Failure> {
    let (a, tail) = match s.split_once(':') {
        Some((a, t)) => (a, parse_q_list(t)?),
        None => (s, Vec::new()),
    };
    Ok(stratum_point(mu, k, &parse_q(a)?, &tail)?)
}

fn isocheck(f: &Fam, k: Option<usize>, samples: &[String], scale: &Option<String>, ctx: &Ctx) -> Out {
    let k: usize = ctx.defaults.pick(k, "k", Some(0))?;
    let mut list: Vec<StratumSample> = samples.iter().map(|s| parse_sample(f.mu, k, s)).collect::<Result<_, _>>()?;
    if list.is_empty() {
        // three samples with random-looking tails, then the scaling orbit of the first
        let tail_len = (f.mu - k - 1).saturating_sub(1);
        for (i, a) in [q(1, 1), q(1, 2), q(3, 1)].iter().enumerate() {
            let tail: Vec<Q> = (0..tail_len).map(|j| q(((i + 2) * (j + 3)) as i64 % 7 - 3, 1)).collect();
            list.push(stratum_point(f.mu, k, a, &tail)?);
        }
    }
    let scales = match ctx.defaults.pick_opt(scale.clone(), "scale")? {
        Some(s) => parse_q_list(&s)?,
        None if samples.is_empty() => vec![q(2, 1), q(-1, 3)],
        None => Vec::new(),
    };
    let first = list[0].clone();
    for t in &scales {
        list.push(scale_sample(&first, t));
    }
    let cs = derive_connection(f.mu, f.nu, f.m)?;
    let op = build_annihilator(&cs)?;
    let rep = check_isomonodromy_factorization(&cs, &op, &list, Exec::Auto)?;
    let mut input = f.json();
    input["k"] = json!(k);
    input["samples"] = json!(list.iter().map(|s| s.point.iter().map(fmt_q).collect::<Vec<_>>()).collect::<Vec<_>>());
    let mut r = Record::new("isocheck", "isomonodromy.factorization", input, ser(&rep));
    r.pass = Some(rep.all_factorizations_hold && rep.all_groups_agree);
    Ok(vec![r])
}

fn bounds(f: &Fam, big_k: Option<u64>, k1: Option<u64>, point: &Option<String>, ctx: &Ctx) -> Out {
    let d = &ctx.defaults;
    let big_k: u64 = d.pick(big_k, "K", Some(0))?;
    let k1: u64 = d.pick(k1, "k1", Some(0))?;
    let pt: PointType = d.pick(point.clone(), "point", Some("branch".into()))?.parse()?;
    let qy = BoundQuery { mu: f.mu, nu: f.nu, m: f.m, big_k, k1, point: pt };
    let res = zero_bound(&qy)?;
    let mut result = ser(&res);
    if f.nu == 2 && f.mu.is_multiple_of(2) && pt == PointType::Branch {
        result["hyperelliptic_form"] = json!(zero_bound_hyperelliptic(f.mu, f.m, big_k));
    }
    let mut input = f.json();
    input["K"] = json!(big_k);
    input["k1"] = json!(k1);
    input["point"] = json!(pt.to_string());
    Ok(vec![Record::new("bounds", res.formula, input, result)])
}

fn periods(f: &Fam, s: &Option<String>, a: Option<usize>, b: Option<usize>, kind: &Option<String>, ctx: &Ctx) -> Out {
    let cfg = curve(f, s, ctx)?;
    let roots = roots_of_fiber(&cfg)?;
    let a = a.unwrap_or(0);
    let b = b.unwrap_or(1);
    let n = roots.roots.len();
    if a >= n || b >= n || a == b {
        return Err(UsageError(format!("--a {a} --b {b}: need two distinct roots among {n}")).into());
    }
    let kind = kind.clone().unwrap_or_else(|| "segment".into());
    let cycle = match kind.as_str() {
        "segment" => CyclePath::segment(a, b),
        "pochhammer" => CyclePath::pochhammer(a, b),
        other => return Err(UsageError(format!("--kind {other}: expected segment or pochhammer")).into()),
    };
    let cs = derive_connection(f.mu, f.nu, f.m)?;
    let samples: Vec<Value> = system_weights(&cs)
        .into_iter()
        .map(|w| period_with(&cfg, &roots, cycle, w, cfg.lambda(), &PeriodOptions::default()).map(|p| ser(&p)))
        .collect::<Result<_, _>>()?;
    let mut input = f.json();
    input["s"] = json!(cfg.s.iter().map(|z| c_json(*z)).collect::<Vec<_>>());
    input["cycle"] = ser(&cycle);
    Ok(vec![Record::new("periods", format!("period.{kind}"), input, json!({ "roots": ser(&roots), "periods": samples }))])
}

fn residual(f: &Fam, sh: &Option<(usize, Q)>, s: &Option<String>, ctx: &Ctx) -> Out {
    let cs = connection(f, sh)?;
    let cfg = curve(f, s, ctx)?;
    let rep = connection_residual(&cs, &cfg, None)?;
    let mut input = f.json();
    input["shift"] = shift_json(sh);
    input["s"] = json!(cfg.s.iter().map(|z| c_json(*z)).collect::<Vec<_>>());
    let mut r = Record::new("residual", "connection.residual", input, ser(&rep));
    r.pass = Some(rep.residual < 1e-8);
    Ok(vec![r])
}

#[allow(clippy::too_many_arguments)]
fn fit(f: &Fam, s: &Option<String>, critical: Option<usize>, cycle: &Option<String>, ladder: Option<usize>, eps0: Option<f64>, ctx: &Ctx) -> Out {
    let d = &ctx.defaults;
    let cfg = curve(f, s, ctx)?;
    let (i, t0, cv) = pick_critical(&cfg, critical, ctx)?;
    let cyc = match d.pick(cycle.clone(), "cycle", Some("vanishing".into()))?.as_str() {
        "vanishing" => FitCycle::Vanishing,
        "adjacent" => FitCycle::Adjacent,
        other => return Err(UsageError(format!("--cycle {other}: expected vanishing or adjacent")).into()),
    };
    let opts = FitOptions {
        cycle: cyc,
        ladder: d.pick(ladder, "ladder", Some(12))?,
        eps0: d.pick_opt(eps0, "eps0")?,
        direction: toward_nearest(&cv, t0),
        ..FitOptions::default()
    };
    let res = fit_exponent(&cfg, t0, &opts)?;
    let mut csv = Vec::new();
    res.write_csv(&mut csv).expect("writing to memory");
    let dulac = res.dulac(0.0).and_then(|e| amu_gm::bounds::dulac_multiplicity(&e));
    let bound = zero_bound(&BoundQuery { mu: f.mu, nu: f.nu, m: f.m, big_k: 0, k1: 0, point: PointType::Branch }).ok();
    let mut result = ser(&res);
    result["dulac_multiplicity"] = match &dulac {
        Ok(n) => json!(n),
        Err(e) => json!({ "error": e.to_string() }),
    };
    result["zero_bound"] = json!(bound.as_ref().map(|b| b.bound));
    let mut input = f.json();
    input["s_prime"] = json!(cfg.s[1..].iter().map(|z| c_json(*z)).collect::<Vec<_>>());
    input["critical"] = json!(i);
    let tag = match cyc {
        FitCycle::Vanishing => "fit.vanishing",
        FitCycle::Adjacent => "fit.adjacent",
    };
    let mut r = Record::new("fit", tag, input, result);
    if let (Ok(n), Some(b)) = (&dulac, &bound) {
        r.pass = Some(*n <= b.bound);
    }
    r.csv = Some(String::from_utf8(csv).expect("ascii csv"));
    Ok(vec![r])
}

#[allow(clippy::too_many_arguments)]
fn monodromy_cmd(f: &Fam, sh: &Option<(usize, Q)>, s: &Option<String>, critical: Option<usize>, composite: bool, shift_line: bool, radius: Option<f64>, ctx: &Ctx) -> Out {
    let cs = connection(f, sh)?;
    let cfg = curve(f, s, ctx)?;
    let o = MonodromyOptions { radius: ctx.defaults.pick_opt(radius, "radius")?, ..MonodromyOptions::default() };
    let mut input = f.json();
    input["shift"] = shift_json(sh);
    input["s_prime"] = json!(cfg.s[1..].iter().map(|z| c_json(*z)).collect::<Vec<_>>());
    if composite && shift_line {
        return Err(UsageError("--composite and --shift-line are exclusive".into()).into());
    }
    if composite {
        let rep = composite_loop(&cs, &cfg, &o)?;
        let mut r = Record::new("monodromy", "monodromy.composite", input, ser(&rep));
        r.pass = Some(rep.identity_defect < 1e-6);
        return Ok(vec![r]);
    }
    if shift_line {
        let rep = shift_loop(&cs, &cfg, &o)?;
        let mut r = Record::new("monodromy", "monodromy.shift_line", input, ser(&rep));
        r.pass = Some(rep.period_defect < 1e-7);
        return Ok(vec![r]);
    }
    let (i, t0, _) = pick_critical(&cfg, critical, ctx)?;
    let rep = monodromy(&cs, &cfg, t0, &o)?;
    input["critical"] = json!(i);
    let want = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (cfg.lambda() + 0.5));
    let mut result = ser(&rep);
    result["expected_eigenvalue"] = c_json(want);
    let mut r = Record::new("monodromy", "monodromy.local", input, result);
    r.pass = Some(rep.rank_one_eigenvalue.is_some_and(|e| (e - want).norm() < 1e-6));
    Ok(vec![r])
}
