//! `amu-gm`: command-line front end. Every subcommand prints self-describing records
//! (text, JSON or CSV); `verify` runs the acceptance checks and exits 1 on any failure.

mod commands;
mod config;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{resolve_precision, Defaults, PRECISION_ENV};
use output::Format;

pub const DEFAULT_SEED: u64 = 20_240_611;

/// Bad flags, values or config: exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

/// Failure reported by the library or a failed check: exit status 1.
#[derive(Debug)]
pub enum Failure {
    Usage(UsageError),
    Library(amu_gm::Error),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e)
    }
}

impl From<amu_gm::Error> for Failure {
    fn from(e: amu_gm::Error) -> Self {
        use amu_gm::Error::*;
        match e {
            // problems with what the user asked for, not with the computation
            Parse(m) | OutOfRange(m) | Shape(m) | NotOnDiscriminant(m) | Stratum(m) | Uncovered(m) => Failure::Usage(UsageError(m)),
            VarMismatch(a, b) => Failure::Usage(UsageError(format!("variable count mismatch: {a} vs {b}"))),
            other => Failure::Library(other),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "amu-gm", version, about = "Gauss-Manin systems of the versal A_mu deformation: exact algebra, exponents, bounds and periods")]
pub struct Cli {
    /// key = value file with defaults for any flag
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// output format: text, json or csv [default: text]
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// json shorthand for --format json
    #[arg(long, global = true)]
    pub json: bool,
    /// seed for randomized checks; recorded in every output
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// floating-point precision (only `double`); also read from AMU_GM_PRECISION
    #[arg(long, global = true)]
    pub precision: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Family {
    #[arg(long)]
    pub mu: Option<usize>,
    #[arg(long)]
    pub nu: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<i64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ShiftArgs {
    /// weight `(z - x0)^k` of the shifted system
    #[arg(long)]
    pub k: Option<usize>,
    /// base point of the shifted system (rational)
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Connection matrices S, L, V and the discriminant
    System {
        #[command(flatten)]
        fam: Family,
        #[command(flatten)]
        shift: ShiftArgs,
    },
    /// Stratum of a rational point of the discriminant
    Strata {
        #[arg(long)]
        mu: Option<usize>,
        /// s0,s1,...,s_{mu-1} as rationals
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
    },
    /// Annihilating operator of the first period
    Operator {
        #[command(flatten)]
        fam: Family,
        #[command(flatten)]
        shift: ShiftArgs,
    },
    /// Local exponents: closed-form tables against the computed operators
    Exponents {
        #[command(flatten)]
        fam: Family,
        /// unshifted, shifted, even or odd
        #[arg(long)]
        family: Option<String>,
        /// omega (t^mu = 1), 0 or inf
        #[arg(long = "at", value_name = "POINT")]
        special: Option<String>,
        /// shift k, or the index j for the even/odd families
        #[arg(long)]
        k: Option<usize>,
        /// rational discriminant point s0,...,s_{mu-1}: exponents of the full operator there
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
        /// sum of exponents over all singular points against the printed value
        #[arg(long)]
        audit: bool,
    },
    /// Isomonodromy factorization on sample points of a stratum
    Isocheck {
        #[command(flatten)]
        fam: Family,
        /// stratum depth of the samples
        #[arg(long)]
        k: Option<usize>,
        /// `a` or `a:t1,t2,...` (repeatable): F + s0 = (z-a)^{k+2} G with G's tail coefficients
        #[arg(long = "sample", allow_hyphen_values = true)]
        samples: Vec<String>,
        /// scale factors applied to the first sample (comma separated rationals)
        #[arg(long, allow_hyphen_values = true)]
        scale: Option<String>,
    },
    /// Upper bound for the multiplicity of zeros of a period integral
    Bounds {
        #[command(flatten)]
        fam: Family,
        #[arg(long = "K")]
        big_k: Option<u64>,
        #[arg(long)]
        k1: Option<u64>,
        /// branch or regular
        #[arg(long)]
        point: Option<String>,
    },
    /// Period integrals over a segment or double loop between two fiber roots
    Periods {
        #[command(flatten)]
        fam: Family,
        /// s0,...,s_{mu-1}, complex entries as `re+imi`
        #[arg(long, allow_hyphen_values = true)]
        s: Option<String>,
        #[arg(long)]
        a: Option<usize>,
        #[arg(long)]
        b: Option<usize>,
        /// segment or pochhammer
        #[arg(long)]
        kind: Option<String>,
    },
    /// Residual of the connection on quadrature periods
    Residual {
        #[command(flatten)]
        fam: Family,
        #[command(flatten)]
        shift: ShiftArgs,
        #[arg(long, allow_hyphen_values = true)]
        s: Option<String>,
    },
    /// Fitted exponent of a period at a critical value
    Fit {
        #[command(flatten)]
        fam: Family,
        /// s' is read from s1,...; s0 is replaced by the critical value
        #[arg(long, allow_hyphen_values = true)]
        s: Option<String>,
        /// index into the critical values sorted by (re, im)
        #[arg(long)]
        critical: Option<usize>,
        /// vanishing or adjacent
        #[arg(long)]
        cycle: Option<String>,
        #[arg(long)]
        ladder: Option<usize>,
        #[arg(long)]
        eps0: Option<f64>,
    },
    /// Monodromy by transport of the connection around singular values
    Monodromy {
        #[command(flatten)]
        fam: Family,
        #[command(flatten)]
        shift: ShiftArgs,
        #[arg(long, allow_hyphen_values = true)]
        s: Option<String>,
        #[arg(long)]
        critical: Option<usize>,
        /// loop around every singular value and infinity
        #[arg(long)]
        composite: bool,
        /// loop around the extra singular value of the shifted system
        #[arg(long)]
        shift_line: bool,
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Run acceptance checks; exit 1 if any fails
    Verify {
        /// discriminant, connection, annihilator, exponents, fit, monodromy, isomonodromy, bounds, fuchs or all
        #[arg(long)]
        suite: Option<String>,
        /// restrict to one mu
        #[arg(long)]
        mu: Option<usize>,
    },
}

pub struct Ctx {
    pub defaults: Defaults,
    pub seed: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Usage(UsageError(m))) => {
            eprintln!("error: {m}");
            eprintln!("run `amu-gm --help` for usage");
            ExitCode::from(2)
        }
        Err(Failure::Library(e)) => {
            let diag = serde_json::json!({ "schema": output::SCHEMA, "error": { "kind": kind(&e), "message": e.to_string() } });
            eprintln!("{diag}");
            ExitCode::from(1)
        }
    }
}

fn kind(e: &amu_gm::Error) -> &'static str {
    use amu_gm::Error::*;
    match e {
        Parse(_) => "parse",
        VarMismatch(..) => "var_mismatch",
        OutOfRange(_) => "out_of_range",
        Shape(_) => "shape",
        Unsupported(_) => "unsupported",
        NotOnDiscriminant(_) => "not_on_discriminant",
        Stratum(_) => "stratum",
        Truncation(_) => "truncation",
        Factorization(_) => "factorization",
        Numerical(_) => "numerical",
        Indeterminate(_) => "indeterminate",
        Uncovered(_) => "uncovered",
    }
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    let defaults = match &cli.config {
        Some(p) => Defaults::load(p)?,
        None => Defaults::default(),
    };
    let precision = resolve_precision(cli.precision.clone(), std::env::var(PRECISION_ENV).ok(), &defaults)?;
    let format = if cli.json { Format::Json } else { defaults.pick(cli.format, "format", Some(Format::Text))? };
    let seed = defaults.pick(cli.seed, "seed", Some(DEFAULT_SEED))?;
    let ctx = Ctx { defaults, seed };
    let records = commands::dispatch(&cli.command, &ctx)?;
    let mut ok = true;
    for r in &records {
        print!("{}", r.render(format, seed, &precision).map_err(UsageError)?);
        ok &= r.pass != Some(false);
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
