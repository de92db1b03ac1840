//! Command-line surface: `gausslab <field|gauss|kloosterman|moments|verify|gl2>`.
//!
//! Every command prints one [`output::Envelope`] (JSON) or its rows (CSV).
//! Exit codes: 0 all checks passed, 1 a verification failed, 2 usage or
//! guard error.

pub mod output;
pub mod verify;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::chars::{CharIndex, Family};
use crate::equidist::{
    build_population, check_target, default_target, ks_distance, moment_report, principal_angle, star_discrepancy,
    TargetMeasure,
};
use crate::error::{Error, Result};
use crate::expsum::{KlMethod, SumContext, DEFAULT_MAX_WORK};
use crate::ffield::{prime_power, FieldOptions, Tower};
use crate::gl2gauss::Gl2;
use output::{emit, Check, Envelope, FieldFingerprint, Format, Row, RowBuilder, Summary};
use verify::Suite;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "gausslab", version, about = "Gauss and Kloosterman sums over finite fields")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CommonArgs {
    /// Characteristic of the base field F_q.
    #[arg(long, global = true)]
    pub p: Option<u64>,
    /// Degree of F_q over F_p.
    #[arg(long, global = true)]
    pub m: Option<u32>,
    /// Base field size as a prime power (alternative to --p/--m).
    #[arg(long, global = true, conflicts_with_all = ["p", "m"])]
    pub q: Option<u64>,
    /// Extension degree of the character field F_{q^d}.
    #[arg(long, global = true)]
    pub d: Option<u32>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Tolerance for integrality and relative-error checks.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol: f64,
    /// Directory for cached field tables.
    #[arg(long, global = true, env = "GAUSSLAB_CACHE")]
    pub cache_dir: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Additive character ψ(x) = e^{2πi t·Tr(x)/p} with this t.
    #[arg(long, global = true, default_value_t = 1)]
    pub psi_twist: u64,
    /// Bound on brute-force tuple enumeration.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_WORK)]
    pub max_work: u128,
    /// Bound on the size of the field F_{q^d}.
    #[arg(long, global = true)]
    pub max_field_size: Option<u64>,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Field parameters: modulus, generator, subfield stride.
    Field,
    /// Gauss sums of a character family (all characters by default).
    Gauss {
        #[arg(long)]
        family: Option<Family>,
    },
    /// Kloosterman sums Kl_n(a) for every nonzero a.
    Kloosterman {
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, value_enum, default_value_t = MethodArg::Convolution)]
        method: MethodArg,
    },
    /// Empirical moments of normalized Gauss sums against a limit measure.
    Moments {
        #[arg(long, default_value = "primitive")]
        family: Family,
        #[arg(long, default_value_t = 4)]
        n_max: u32,
        /// Limit measure (defaults to the family's: Dirac for C0S/C0NS, Haar otherwise).
        #[arg(long)]
        target: Option<TargetMeasure>,
    },
    /// Run verification suites; exits 1 on any failure.
    Verify {
        /// Comma-separated suites, or "all" for every suite that applies.
        #[arg(long, default_value = "all", value_delimiter = ',')]
        suite: Vec<String>,
        #[arg(long, default_value_t = 4)]
        n_max: u32,
    },
    /// GL_2(F_q) matrix Gauss sums of cuspidal representations (d = 2).
    Gl2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Direct,
    Convolution,
    Inversion,
    All,
}

impl CommonArgs {
    /// `(p, m)` from `--p/--m` or `--q`.
    pub fn base_field(&self) -> Result<(u64, u32)> {
        if let Some(q) = self.q {
            return prime_power(q).ok_or_else(|| Error::Invalid(format!("--q {q} is not a prime power")));
        }
        let p = self.p.ok_or_else(|| Error::Invalid("one of --p or --q is required".into()))?;
        Ok((p, self.m.unwrap_or(1)))
    }

    fn options(&self) -> FieldOptions {
        FieldOptions { max_size: self.max_field_size, cache_dir: self.cache_dir.clone() }
    }

    fn context(&self, d: u32) -> Result<SumContext> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Invalid("--tol must be positive".into()));
        }
        let (p, m) = self.base_field()?;
        let tower = Tower::with_options(p, m, d, &self.options())?;
        Ok(SumContext::with_twist(tower, self.psi_twist)?.with_max_work(self.max_work))
    }
}

fn config_echo(cli: &Cli, p: u64, m: u32, d: u32) -> Value {
    let c = &cli.common;
    let mut v = serde_json::json!({
        "p": p, "m": m, "d": d, "tol": c.tol, "psi_twist": c.psi_twist,
        "max_work": c.max_work.to_string(), "max_field_size": c.max_field_size,
        "cache_dir": c.cache_dir, "format": c.format,
    });
    if let (Value::Object(map), Ok(Value::Object(cmd))) = (&mut v, serde_json::to_value(&cli.command)) {
        map.extend(cmd);
    }
    v
}

fn complex_cols(b: RowBuilder, prefix: &str, z: num_complex::Complex64) -> RowBuilder {
    b.set(&format!("{prefix}re"), z.re).set(&format!("{prefix}im"), z.im)
}

fn cmd_field(ctx: &SumContext) -> (Vec<Row>, Option<Summary>) {
    let t = ctx.tower();
    let f = &t.field;
    let row = RowBuilder::new()
        .set("p", t.p())
        .set("m", t.base_m())
        .set("d", t.d())
        .set("q", t.q())
        .set("field_size", f.size())
        .set("modulus", f.modulus_string())
        .set("generator", f.generator_string())
        .set("generator_code", f.generator_code())
        .set("group_order", f.group_order())
        .set("stride", t.view.stride())
        .build();
    (vec![row], None)
}

fn cmd_gauss(ctx: &SumContext, family: Option<Family>) -> Result<(Vec<Row>, Option<Summary>)> {
    let rows = ctx
        .gauss_records(family)?
        .into_iter()
        .map(|r| {
            let b = RowBuilder::new()
                .set("j", r.j)
                .set("primitive", r.primitive)
                .set("trivial_central", r.trivial_central)
                .set("square_in_c0", r.square_in_c0);
            complex_cols(b, "", r.value).set("abs", r.value.norm()).set("angle", principal_angle(r.normalized)).build()
        })
        .collect();
    Ok((rows, None))
}

fn cmd_kloosterman(ctx: &SumContext, n: u32, method: MethodArg, tol: f64) -> Result<(Vec<Row>, Option<Summary>)> {
    let field = &ctx.tower().field;
    let single = |m: KlMethod| ctx.kloosterman_with(n, m);
    let (main, others) = match method {
        MethodArg::Direct => (single(KlMethod::Direct)?, vec![]),
        MethodArg::Convolution => (single(KlMethod::Convolution)?, vec![]),
        MethodArg::Inversion => (single(KlMethod::Inversion)?, vec![]),
        MethodArg::All => {
            let mut others = vec![single(KlMethod::Inversion)?];
            match single(KlMethod::Direct) {
                Ok(t) => others.push(t),
                Err(Error::WorkGuard { .. }) => {}
                Err(e) => return Err(e),
            }
            (single(KlMethod::Convolution)?, others)
        }
    };
    let rows = main
        .values
        .iter()
        .enumerate()
        .map(|(k, &z)| {
            let b = RowBuilder::new().set("log_a", k).set("a_code", field.code(field.from_log(k as u64)));
            let mut b = complex_cols(b, "", z).set("abs", z.norm());
            if method == MethodArg::All {
                let dev = others.iter().map(|t| (t.values[k] - z).norm()).fold(0.0, f64::max);
                b = b.set("max_deviation", dev);
            }
            b.build()
        })
        .collect();
    let summary = (method == MethodArg::All).then(|| {
        let bound = tol * ctx.sqrt_size().powi(n as i32);
        let checks: Vec<Check> = others
            .iter()
            .map(|t| {
                let dev = main.max_deviation(t);
                Check::new("kloosterman", format!("convolution vs {}", t.method.name()), dev < bound, dev, bound)
            })
            .collect();
        let mut s = Summary::from_checks(&checks);
        s.extra.insert("methods_compared".into(), (others.len() + 1).into());
        s.extra.insert("max_deviation".into(), others.iter().map(|t| main.max_deviation(t)).fold(0.0, f64::max).into());
        s
    });
    Ok((rows, summary))
}

fn cmd_moments(
    ctx: &SumContext,
    family: Family,
    n_max: u32,
    target: Option<TargetMeasure>,
) -> Result<(Vec<Row>, Option<Summary>)> {
    let target = target.unwrap_or(if ctx.d() == 2 { default_target(family) } else { TargetMeasure::Haar });
    check_target(family, ctx.d(), target)?;
    let reports = moment_report(ctx, family, n_max, target)?;
    let rows = reports
        .iter()
        .map(|r| {
            let b = RowBuilder::new()
                .set("family", r.family)
                .set("target", r.target_measure)
                .set("n", r.n)
                .set("count", r.count);
            let b = complex_cols(b, "empirical_", r.empirical).set("target_moment", r.target);
            let b = b
                .set("exact_prediction_re", r.exact_prediction.map(|z| z.re))
                .set("exact_prediction_im", r.exact_prediction.map(|z| z.im))
                .set("deviation", r.deviation)
                .set("prediction_error", r.prediction_error)
                .set("full_group_count", r.full_group_count);
            complex_cols(b, "full_group_", r.full_group_empirical).build()
        })
        .collect();
    let pop = build_population(ctx, family)?;
    let checks: Vec<Check> = reports
        .iter()
        .filter_map(|r| {
            r.prediction_error
                .map(|e| Check::new("moments", format!("exact prediction at n={}", r.n), e < 1e-8, e, 1e-8))
        })
        .collect();
    let mut s = Summary::from_checks(&checks);
    let mut extra = Map::new();
    extra.insert("count".into(), pop.len().into());
    extra.insert("star_discrepancy".into(), star_discrepancy(&pop).into());
    extra.insert("ks_distance".into(), ks_distance(&pop, target).into());
    s.extra = extra;
    Ok((rows, Some(s)))
}

fn parse_suites(names: &[String], d: u32, p: u64) -> Result<Vec<Suite>> {
    if names.iter().any(|s| s == "all") {
        return Ok(Suite::ALL.into_iter().filter(|s| s.applicable(d, p).is_ok()).collect());
    }
    names
        .iter()
        .map(|n| {
            let s: Suite = n.parse()?;
            s.applicable(d, p)?;
            Ok(s)
        })
        .collect()
}

fn cmd_verify(ctx: &SumContext, suites: &[String], n_max: u32, tol: f64) -> Result<(Vec<Row>, Option<Summary>)> {
    let suites = parse_suites(suites, ctx.d(), ctx.tower().p())?;
    let mut checks = Vec::new();
    for s in suites {
        checks.extend(s.run(ctx, n_max, tol)?);
    }
    let rows = checks.iter().map(Check::to_row).collect();
    Ok((rows, Some(Summary::from_checks(&checks))))
}

fn cmd_gl2(ctx: &SumContext, tol: f64) -> Result<(Vec<Row>, Option<Summary>)> {
    let gl2 = Gl2::from_tower(ctx.tower().clone(), ctx.psi().twist())?;
    let rep = gl2.verify_kondo(tol)?;
    let view = &ctx.tower().view;
    let rows = rep
        .rows
        .iter()
        .map(|r| {
            let orbit_rep = crate::chars::galois_orbit(view, CharIndex(r.j)).iter().map(|k| k.0).min();
            let b = RowBuilder::new().set("j", r.j).set("orbit", orbit_rep);
            let b = complex_cols(b, "matrix_gauss_", r.matrix_gauss).set("matrix_gauss_abs", r.matrix_gauss.norm());
            complex_cols(b, "gauss_", r.gauss)
                .set("residual_plus_q", r.residual)
                .set("residual_minus_q", r.signed_residual)
                .set("norm_defect", r.norm_defect)
                .build()
        })
        .collect();
    let q2 = (rep.q * rep.q) as f64;
    let checks = vec![
        Check::new("gl2", "|g(rho)| = q^2", rep.absolute_value_holds(), rep.max_abs_residual, tol * q2),
        Check::new("gl2", "g(rho) = -q g(chi)", rep.signed_identity_holds(), rep.max_signed_residual, tol * q2),
        Check::new(
            "gl2",
            "cuspidal characters orthonormal",
            rep.characters_ok(),
            rep.max_norm_defect.max(rep.max_cross_inner),
            1e-6,
        ),
    ];
    let mut s = Summary::from_checks(&checks);
    s.extra.insert("classes".into(), gl2.classes().len().into());
    s.extra.insert("group_order".into(), gl2.order().to_string().into());
    s.extra.insert("orbits".into(), rep.orbits.into());
    s.extra.insert("checks_detail".into(), serde_json::to_value(&checks).unwrap_or(Value::Null));
    Ok((rows, Some(s)))
}

/// Runs a parsed command and returns its envelope.
pub fn execute(cli: &Cli) -> Result<Envelope> {
    let c = &cli.common;
    let d = match cli.command {
        Command::Gl2 => match c.d {
            None | Some(2) => 2,
            Some(got) => return Err(Error::WrongDegree { expected: 2, got }),
        },
        Command::Verify { ref suite, .. } if c.d.is_none() => {
            // suites that only exist at d = 2 imply it
            let needs_two = suite.iter().filter_map(|n| n.parse::<Suite>().ok()).any(|s| s.applicable(1, 3).is_err());
            if needs_two {
                2
            } else {
                1
            }
        }
        _ => c.d.unwrap_or(1),
    };
    let ctx = c.context(d)?;
    let (rows, summary) = match &cli.command {
        Command::Field => cmd_field(&ctx),
        Command::Gauss { family } => cmd_gauss(&ctx, *family)?,
        Command::Kloosterman { n, method } => cmd_kloosterman(&ctx, *n, *method, 1e-7)?,
        Command::Moments { family, n_max, target } => cmd_moments(&ctx, *family, *n_max, *target)?,
        Command::Verify { suite, n_max } => cmd_verify(&ctx, suite, *n_max, c.tol)?,
        Command::Gl2 => cmd_gl2(&ctx, c.tol)?,
    };
    let name = match cli.command {
        Command::Field => "field",
        Command::Gauss { .. } => "gauss",
        Command::Kloosterman { .. } => "kloosterman",
        Command::Moments { .. } => "moments",
        Command::Verify { .. } => "verify",
        Command::Gl2 => "gl2",
    };
    let config = config_echo(cli, ctx.tower().p(), ctx.tower().base_m(), d);
    Ok(Envelope::new(name, config, FieldFingerprint::of(ctx.tower()), rows, summary))
}

/// Parses `args`, runs the command, writes output and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Some(n) = cli.common.threads {
        // a pool may already exist when run() is called twice in-process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let env = match execute(&cli) {
        Ok(env) => env,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Err(e) = emit(&env, cli.common.format, cli.common.out.as_deref()) {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    if env.passed() {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn envelope(args: &[&str]) -> Result<Envelope> {
        let cli = Cli::try_parse_from(std::iter::once("gausslab").chain(args.iter().copied())).unwrap();
        execute(&cli)
    }

    #[test]
    fn field_command() {
        let env = envelope(&["field", "--p", "3", "--m", "2"]).unwrap();
        assert_eq!(env.rows[0]["modulus"], "x^2 + 1");
        assert_eq!(env.field.m, 2);
        let trivial = envelope(&["field", "--p", "2"]).unwrap();
        assert_eq!(trivial.rows[0]["field_size"], 2);
        assert!(matches!(envelope(&["field", "--p", "2", "--m", "30"]), Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn q_flag_factors() {
        let env = envelope(&["field", "--q", "9", "--d", "2"]).unwrap();
        assert_eq!((env.field.p, env.field.m, env.field.q), (3, 4, 9));
        assert!(envelope(&["field", "--q", "12"]).is_err());
    }

    #[test]
    fn gauss_rows() {
        let env = envelope(&["gauss", "--p", "3", "--d", "2", "--family", "primitive"]).unwrap();
        assert_eq!(env.rows.len(), 6);
        let all = envelope(&["gauss", "--p", "3", "--d", "2"]).unwrap();
        assert_eq!(all.rows[0]["re"], -1.0);
        assert_eq!(all.rows[0]["im"], 0.0);
        let keys: Vec<&String> = all.rows[0].keys().collect();
        assert_eq!(keys, ["j", "primitive", "trivial_central", "square_in_c0", "re", "im", "abs", "angle"]);
    }

    #[test]
    fn kloosterman_rows() {
        let env = envelope(&["kloosterman", "--p", "3", "--n", "2", "--method", "all"]).unwrap();
        assert!((env.rows[0]["re"].as_f64().unwrap() + 1.0).abs() < 1e-12);
        assert!(env.passed());
    }

    #[test]
    fn moments_and_verify() {
        let env = envelope(&["moments", "--p", "7", "--d", "2", "--family", "c0ns", "--n-max", "1"]).unwrap();
        assert!((env.rows[0]["empirical_re"].as_f64().unwrap() + 1.0).abs() < 1e-8);
        let haar = envelope(&["moments", "--p", "5", "--d", "2", "--n-max", "2"]).unwrap();
        assert_eq!(haar.rows[1]["target_moment"], 0.0);
        let v = envelope(&["verify", "--suite", "recurrence", "--p", "5", "--d", "2", "--n-max", "5"]).unwrap();
        assert!(v.passed());
        let counts = envelope(&["verify", "--suite", "counts", "--p", "7", "--d", "2"]).unwrap();
        let c0pr = counts.rows.iter().find(|r| r["check"] == "|C0_pr(2,q)|").unwrap();
        assert_eq!(c0pr["value"], 6);
        assert!(matches!(
            envelope(&["verify", "--suite", "kondo", "--p", "3", "--d", "3"]),
            Err(Error::WrongDegree { .. })
        ));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["gausslab", "verify", "--suite", "kondo", "--q", "3", "--out", "/dev/null"]), EXIT_OK);
        assert_eq!(run(["gausslab", "field", "--p", "4"]), EXIT_USAGE);
        assert_eq!(run(["gausslab", "bogus"]), EXIT_USAGE);
    }
}
