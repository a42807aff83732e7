//! The `runge` command line.
//!
//! [`run`] parses arguments, dispatches to `runge-core` and writes either a
//! text table or a JSON document with a top-level `schema` field. Exit codes:
//! 0 on success, 1 when a mathematical hypothesis fails, 2 on usage errors.

use std::io::Write;
use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::Serialize;
use serde_json::{json, Value};

use runge_core::analytic::{self, SweepCheck, SweepSummary};
use runge_core::ball::Ball;
use runge_core::bounds::{self, BoundReport};
use runge_core::cusps::{CuspOrbit, CuspStructure};
use runge_core::modnt::{GroupSpec, SubgroupG};
use runge_core::par::{self, Exec};
use runge_core::units::{self, RungeUnit};
use runge_core::Error;

pub const SCHEMA: u32 = 1;
pub const EXIT_OK: i32 = 0;
pub const EXIT_HYPOTHESIS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "runge", version, about = "Runge's method for modular curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value = "text", global = true)]
    format: Format,
    /// Working precision in bits for certified real arithmetic.
    #[arg(long, env = "RUNGE_PRECISION", default_value_t = 128, global = true)]
    precision: usize,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cusps of X_G with widths and Galois orbits.
    Cusps {
        #[command(flatten)]
        common: Common,
        /// Preset `split:p^n`, `nonsplit:p^n`, `borel:p^n`, `full:p^n`, or a file.
        #[arg(long)]
        group: String,
    },
    /// The unit positive exactly on the chosen cusp orbits.
    RungeUnit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        group: String,
        /// `rational` (all orbits of degree 1) or comma-separated orbit ids.
        #[arg(long)]
        sigma: String,
        /// Number of places in S; defaults to the size of sigma.
        #[arg(long)]
        s: Option<usize>,
    },
    /// Evaluate one of the explicit bounds.
    Bound {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        theorem: Theorem,
        #[arg(long)]
        group: Option<String>,
        #[arg(long)]
        s: Option<u32>,
        /// Primes below the finite places of S.
        #[arg(long, value_delimiter = ',')]
        finite_primes: Vec<u64>,
        #[arg(long)]
        p: Option<u64>,
        /// Degree of the field of definition (pellarin).
        #[arg(long, default_value_t = 1)]
        d: u32,
        /// Rational j, for heights.
        #[arg(long)]
        j: Option<String>,
    },
    /// Seeded certified sweeps of the analytic inequalities.
    VerifyAnalytic {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Restrict to some checks.
        #[arg(long, value_delimiter = ',')]
        checks: Vec<String>,
    },
    /// The chain 23 p log p -> level cap -> max n for integral j.
    SerreCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, conflicts_with = "primes")]
        p: Option<u64>,
        /// Batch mode: several primes, plus the three-prime test on them.
        #[arg(long, value_delimiter = ',')]
        primes: Vec<u64>,
        #[arg(long, allow_hyphen_values = true)]
        j: String,
    },
    /// Fast run of the invariant suite.
    Selftest {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Theorem {
    Th1,
    Tbo,
    Tspto,
    Pellarin,
    LevelCap,
}

enum Failure {
    Usage(String),
    Hypothesis(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_)
            | Error::UnsupportedModulus(_)
            | Error::Precondition(_)
            | Error::ModulusMismatch { .. }
            | Error::NonInvertibleGenerator(..)
            | Error::InvalidTorsionIndex(..)
            | Error::GroupTooLarge { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Hypothesis(e.to_string()),
        }
    }
}

type Outcome = std::result::Result<(Value, String, i32), Failure>;

/// Run the CLI with `argv` (including the program name).
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    return EXIT_OK;
                }
                _ => EXIT_USAGE,
            };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    let (name, common) = match &cli.command {
        Command::Cusps { common, .. } => ("cusps", common),
        Command::RungeUnit { common, .. } => ("runge-unit", common),
        Command::Bound { common, .. } => ("bound", common),
        Command::VerifyAnalytic { common, .. } => ("verify-analytic", common),
        Command::SerreCheck { common, .. } => ("serre-check", common),
        Command::Selftest { common } => ("selftest", common),
    };
    let common = common.clone();
    let result = par::with_jobs(common.jobs, || dispatch(&cli.command, &common));
    match result {
        Ok((value, text, code)) => {
            match common.format {
                Format::Json => {
                    let doc = json!({ "schema": SCHEMA, "command": name, "result": value });
                    let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"));
                }
                Format::Text => {
                    let _ = write!(out, "{text}");
                }
            }
            code
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Hypothesis(msg)) => {
            if common.format == Format::Json {
                let doc = json!({ "schema": SCHEMA, "command": name, "error": msg });
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"));
            }
            let _ = writeln!(err, "error: {msg}");
            EXIT_HYPOTHESIS
        }
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable report")
}

fn load_group(spec: &str) -> std::result::Result<SubgroupG, Failure> {
    let parsed = if spec.contains(':') {
        spec.parse::<GroupSpec>()?
    } else if Path::new(spec).exists() {
        let text = std::fs::read_to_string(spec)
            .map_err(|e| Failure::Usage(format!("cannot read {spec}: {e}")))?;
        GroupSpec::parse_text(&text)?
    } else {
        return Err(Failure::Usage(format!("`{spec}` is neither a preset nor a file")));
    };
    Ok(parsed.build()?)
}

fn dispatch(cmd: &Command, common: &Common) -> Outcome {
    let prec = common.precision.clamp(64, 4096);
    match cmd {
        Command::Cusps { group, .. } => cusps_cmd(&load_group(group)?),
        Command::RungeUnit { group, sigma, s, .. } => runge_unit_cmd(&load_group(group)?, sigma, *s),
        Command::Bound { theorem, group, s, finite_primes, p, d, j, .. } => {
            bound_cmd(*theorem, group.as_deref(), *s, finite_primes, *p, *d, j.as_deref(), prec)
        }
        Command::VerifyAnalytic { samples, seed, checks, .. } => verify_cmd(*samples, *seed, checks, prec),
        Command::SerreCheck { p, primes, j, .. } => serre_cmd(*p, primes, j, prec),
        Command::Selftest { .. } => selftest_cmd(prec),
    }
}

fn cusps_cmd(g: &SubgroupG) -> Outcome {
    let cs = CuspStructure::new(g);
    let orbits: Option<Vec<CuspOrbit>> = cs.galois_orbits().ok();
    let mut text = format!(
        "N = {}, |G| = {}, {} cusps, {}\n",
        g.n,
        g.order(),
        cs.len(),
        match &orbits {
            Some(o) => format!("{} Galois orbits", o.len()),
            None => "not defined over Q".to_string(),
        }
    );
    text.push_str(&format!("{:>5} {:>12} {:>6} {:>6}\n", "cusp", "rep", "width", "orbit"));
    for (i, c) in cs.cusps().iter().enumerate() {
        let orbit = if orbits.is_some() { cs.orbit_index(i).to_string() } else { "-".into() };
        text.push_str(&format!(
            "{:>5} {:>12} {:>6} {:>6}\n",
            i,
            format!("({}, {})", c.rep.0, c.rep.1),
            c.width,
            orbit
        ));
    }
    let value = json!({
        "n": g.n,
        "group_order": g.order(),
        "cusps": to_value(&cs.cusps()),
        "orbits": orbits.as_ref().map(|o| {
            o.iter().map(|o| json!({
                "id": o.id,
                "degree": o.degree,
                "members": o.members.iter().map(|c| json!([c.rep.0, c.rep.1])).collect::<Vec<_>>(),
            })).collect::<Vec<_>>()
        }),
        "defined_over_q": orbits.is_some(),
    });
    Ok((value, text, EXIT_OK))
}

fn parse_sigma(spec: &str, orbits: &[CuspOrbit]) -> std::result::Result<Vec<usize>, Failure> {
    if spec.trim() == "rational" {
        return Ok(orbits.iter().filter(|o| o.degree == 1).map(|o| o.id).collect());
    }
    spec.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| Failure::Usage(format!("bad orbit id `{t}`: {e}")))
        })
        .collect()
}

fn unit_value(u: &RungeUnit) -> Value {
    json!({
        "s": u.s,
        "sigma": u.sigma,
        "exponents": u.exponents.iter().map(|e| json!({
            "a": [e.a.a1, e.a.a2],
            "n": e.a.n,
            "b": e.b.to_string(),
        })).collect::<Vec<_>>(),
        "divisor": u.divisor.iter().map(|c| json!({
            "cusp": [c.cusp.rep.0, c.cusp.rep.1],
            "orbit": c.orbit_id,
            "ord": c.ord.to_string(),
        })).collect::<Vec<_>>(),
        "l1_norm": u.l1_norm.to_string(),
        "bound_b": u.bound_b.to_string(),
        "lambda_height_budget": {
            "log2_coefficient": u.lambda_height_budget.log2_coefficient.to_string(),
            "upper": u.lambda_height_budget.log2_form,
            "relaxed": u.lambda_height_budget.relaxed.to_string(),
        },
    })
}

fn runge_unit_cmd(g: &SubgroupG, sigma: &str, s: Option<usize>) -> Outcome {
    let cs = CuspStructure::new(g);
    let orbits = cs.galois_orbits()?;
    let sigma = parse_sigma(sigma, &orbits)?;
    let s = s.unwrap_or(sigma.len().max(1));
    let u = units::runge_unit_with(g, &cs, &sigma, s, Exec::default())?;
    let mut text = format!("s = {}, sigma = {:?}, |b|_1 = {}, B = {}\n", u.s, u.sigma, u.l1_norm, u.bound_b);
    for e in &u.exponents {
        text.push_str(&format!("  b[({}, {})/{}] = {}\n", e.a.a1, e.a.a2, e.a.n, e.b));
    }
    for c in &u.divisor {
        text.push_str(&format!(
            "  ord at ({}, {}) [orbit {}] = {}\n",
            c.cusp.rep.0, c.cusp.rep.1, c.orbit_id, c.ord
        ));
    }
    Ok((unit_value(&u), text, EXIT_OK))
}

fn bound_text(r: &BoundReport) -> String {
    let mut t = format!("{}: {}", r.name, r.value_exact_form);
    if let Some(e) = &r.value_exact {
        t.push_str(&format!(" = {e}"));
    }
    t.push_str(&format!(" <= {:e}\n", r.value_log.upper));
    t
}

#[allow(clippy::too_many_arguments)]
fn bound_cmd(
    theorem: Theorem,
    group: Option<&str>,
    s: Option<u32>,
    finite_primes: &[u64],
    p: Option<u64>,
    d: u32,
    j: Option<&str>,
    prec: usize,
) -> Outcome {
    let need_group = || -> std::result::Result<SubgroupG, Failure> {
        load_group(group.ok_or_else(|| Failure::Usage("--group is required".into()))?)
    };
    let need_p = || p.ok_or_else(|| Failure::Usage("--p is required".into()));
    let height = || -> std::result::Result<Ball, Failure> {
        match j {
            Some(j) => Ok(bounds::height_rational(&bounds::parse_rational(j)?, prec)),
            None => Ok(Ball::zero(prec)),
        }
    };
    let (value, text) = match theorem {
        Theorem::Th1 => {
            let r = bounds::bound_th1(&need_group()?, prec)?;
            (to_value(&r), bound_text(&r))
        }
        Theorem::Tbo => {
            let g = need_group()?;
            let s = s.ok_or_else(|| Failure::Usage("--s is required".into()))?;
            let r_ball = bounds::calr_ball(g.n, finite_primes, prec);
            let calr = bounds::calr(g.n, finite_primes, prec);
            let r = bounds::bound_tbo(s, g.order() as u64, g.n, &r_ball, false, prec)?;
            let v = json!({ "bound": to_value(&r), "calr": to_value(&calr) });
            (v, bound_text(&r))
        }
        Theorem::Tspto => {
            let r = bounds::bound_tspto(need_p()?, prec)?;
            (to_value(&r), bound_text(&r))
        }
        Theorem::Pellarin => {
            let r = bounds::pellarin_degree(d, &height()?, prec)?;
            (to_value(&r), bound_text(&r))
        }
        Theorem::LevelCap => {
            let c = bounds::split_cartan_level_cap(&height()?, p, prec)?;
            let mut t = format!("p^n <= kappa (1+h)^2 <= {:e}, kappa = {}\n", c.cap.upper, c.kappa);
            if let (Some(p), Some(n)) = (c.p, c.max_n) {
                t.push_str(&format!("max n for p = {p}: {n}\n"));
            }
            (to_value(&c), t)
        }
    };
    Ok((value, text, EXIT_OK))
}

fn verify_cmd(samples: usize, seed: u64, checks: &[String], prec: usize) -> Outcome {
    let selected: Vec<SweepCheck> = if checks.is_empty() {
        SweepCheck::ALL.to_vec()
    } else {
        checks
            .iter()
            .map(|c| {
                SweepCheck::ALL
                    .into_iter()
                    .find(|k| k.name() == c.trim())
                    .ok_or_else(|| Failure::Usage(format!("unknown check `{c}`")))
            })
            .collect::<std::result::Result<_, _>>()?
    };
    let summaries: Vec<SweepSummary> = selected
        .iter()
        .map(|&c| analytic::sweep(c, samples, seed, prec, Exec::default()))
        .collect();
    let bad = summaries.iter().any(|s| s.violated > 0 || s.indeterminate > 0);
    let mut text = format!(
        "{:<12} {:>8} {:>8} {:>9} {:>13} {:>8} {:>14}\n",
        "check", "checked", "holds", "violated", "indeterminate", "skipped", "worst margin"
    );
    for s in &summaries {
        text.push_str(&format!(
            "{:<12} {:>8} {:>8} {:>9} {:>13} {:>8} {:>14.6e}\n",
            s.check, s.checked, s.holds, s.violated, s.indeterminate, s.skipped, s.worst_margin
        ));
    }
    let value = json!({ "samples": samples, "seed": seed, "precision": prec, "checks": to_value(&summaries) });
    Ok((value, text, if bad { EXIT_HYPOTHESIS } else { EXIT_OK }))
}

fn serre_cmd(p: Option<u64>, primes: &[u64], j: &str, prec: usize) -> Outcome {
    let j: BigInt = j.trim().parse().map_err(|e| Failure::Usage(format!("bad integer j: {e}")))?;
    if let Some(p) = p {
        let r = bounds::serre_check(p, &j, prec)?;
        let text = format!(
            "p = {}, log|j| <= {:e}, 23 p log p <= {:e}, consistent = {}\nlevel cap {:e}, max n = {}\nlevel cap from the bound {:e}, max n = {}\n",
            r.p,
            r.log_abs_j.upper,
            r.tspto.value_log.upper,
            r.consistent,
            r.level_cap.cap.upper,
            r.level_cap.max_n.unwrap_or(0),
            r.level_cap_from_bound.cap.upper,
            r.level_cap_from_bound.max_n.unwrap_or(0),
        );
        return Ok((to_value(&r), text, EXIT_OK));
    }
    if primes.is_empty() {
        return Err(Failure::Usage("give --p or --primes".into()));
    }
    let b = bounds::serre_batch(primes, &j, prec)?;
    let mut text = String::new();
    for r in &b.reports {
        text.push_str(&format!(
            "p = {:>6}  consistent = {:<5}  max n = {}\n",
            r.p,
            r.consistent,
            r.level_cap.max_n.unwrap_or(0)
        ));
    }
    text.push_str(&format!("max n nonincreasing: {}\n", b.max_n_nonincreasing));
    let rejected = b.triples.iter().filter(|t| t.rejected).count();
    text.push_str(&format!(
        "triples: {} checked, {} rejected; three-prime threshold {}\n",
        b.triples.len(),
        rejected,
        b.threshold.threshold
    ));
    Ok((to_value(&b), text, EXIT_OK))
}

fn selftest_cmd(prec: usize) -> Outcome {
    let results = runge_core::selftest::run_all(prec);
    let ok = results.iter().all(|r| r.passed);
    let mut text = String::new();
    for r in &results {
        text.push_str(&format!("{} {}: {}\n", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail));
    }
    Ok((to_value(&results), text, if ok { EXIT_OK } else { EXIT_HYPOTHESIS }))
}
