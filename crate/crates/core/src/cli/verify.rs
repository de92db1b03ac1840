//! Verification suites behind `gausslab verify`.

use std::fmt;
use std::str::FromStr;

use super::output::Check;
use crate::chars::{
    enumerate_family, is_square_in_c0, mult_char_value, square_criterion_epsilon, CharIndex, Family, TraceZeroWitness,
};
use crate::dft::pairwise_sum_by;
use crate::error::{Error, Result};
use crate::expsum::SumContext;
use crate::gl2gauss::Gl2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Counts,
    Orthogonality,
    Recurrence,
    ClosedForms,
    Deligne,
    Parseval,
    HasseDavenport,
    FourierIdentities,
    CrossMethod,
    EpsilonSquare,
    Kondo,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Counts,
        Suite::Orthogonality,
        Suite::Recurrence,
        Suite::ClosedForms,
        Suite::Deligne,
        Suite::Parseval,
        Suite::HasseDavenport,
        Suite::FourierIdentities,
        Suite::CrossMethod,
        Suite::EpsilonSquare,
        Suite::Kondo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Counts => "counts",
            Suite::Orthogonality => "orthogonality",
            Suite::Recurrence => "recurrence",
            Suite::ClosedForms => "closed-forms",
            Suite::Deligne => "deligne",
            Suite::Parseval => "parseval",
            Suite::HasseDavenport => "hasse-davenport",
            Suite::FourierIdentities => "fourier-identities",
            Suite::CrossMethod => "cross-method",
            Suite::EpsilonSquare => "epsilon-square",
            Suite::Kondo => "kondo",
        }
    }

    /// Whether the suite makes sense for this tower; `Err` explains why not.
    pub fn applicable(self, d: u32, p: u64) -> Result<()> {
        match self {
            Suite::Recurrence | Suite::ClosedForms | Suite::Kondo if d != 2 => {
                Err(Error::WrongDegree { expected: 2, got: d })
            }
            Suite::EpsilonSquare if d != 2 => Err(Error::WrongDegree { expected: 2, got: d }),
            Suite::EpsilonSquare if p == 2 => Err(Error::EvenCharacteristic),
            _ => Ok(()),
        }
    }

    pub fn run(self, ctx: &SumContext, n_max: u32, tol: f64) -> Result<Vec<Check>> {
        match self {
            Suite::Counts => counts(ctx),
            Suite::Orthogonality => orthogonality(ctx),
            Suite::Recurrence => recurrence(ctx, n_max, tol, false),
            Suite::ClosedForms => recurrence(ctx, n_max, tol, true),
            Suite::Deligne => deligne(ctx, n_max),
            Suite::Parseval => parseval(ctx, n_max, tol),
            Suite::HasseDavenport => hasse_davenport(ctx),
            Suite::FourierIdentities => fourier(ctx, n_max, tol),
            Suite::CrossMethod => cross_method(ctx, n_max),
            Suite::EpsilonSquare => epsilon_square(ctx),
            Suite::Kondo => kondo(ctx, tol),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        Suite::ALL.into_iter().find(|x| x.name() == norm).ok_or_else(|| Error::Invalid(format!("unknown suite '{s}'")))
    }
}

fn mobius(n: u32) -> i64 {
    let mut n = n;
    let mut sign = 1;
    let mut f = 2;
    while f * f <= n {
        if n.is_multiple_of(f) {
            n /= f;
            if n.is_multiple_of(f) {
                return 0;
            }
            sign = -sign;
        }
        f += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

fn counts(ctx: &SumContext) -> Result<Vec<Check>> {
    const S: &str = "counts";
    let tower = ctx.tower();
    let (q, d, p) = (ctx.q(), ctx.d(), tower.p());
    let mut out = Vec::new();
    let size = |f: Family| enumerate_family(tower, f).map(|v| v.len() as u64);

    let c0 = size(Family::C0)?;
    out.push(Check::new(S, "|C0| = (q^d-1)/(q-1)", c0 == tower.view.stride(), c0, tower.view.stride()));

    let want_prim: i64 = (1..=d).filter(|e| d % e == 0).map(|e| mobius(d / e) * (q.pow(e) as i64 - 1)).sum();
    let prim = size(Family::Primitive)?;
    out.push(Check::new(S, "|primitive| (Moebius count)", prim as i64 == want_prim, prim, want_prim));

    if d == 2 {
        let c0pr = size(Family::C0Primitive)?;
        let want = if p == 2 { q } else { q - 1 };
        out.push(Check::new(S, "|C0_pr(2,q)|", c0pr == want, c0pr, want));
        if p != 2 {
            let half = q.div_ceil(2);
            let s = size(Family::C0S)?;
            let ns = size(Family::C0NS)?;
            out.push(Check::new(S, "|C0S| = (q+1)/2", s == half, s, half));
            out.push(Check::new(S, "|C0NS| = (q+1)/2", ns == half, ns, half));
            // the quadratic character of C0 has index (q-1)(q+1)/2
            let quad = CharIndex((q - 1) * half);
            let is_sq = is_square_in_c0(tower, quad)?;
            let want_sq = (q + 1) % 4 == 0;
            out.push(Check::new(S, "quadratic in C0S iff 4 | q+1", is_sq == want_sq, is_sq, want_sq));
        }
    }
    Ok(out)
}

fn orthogonality(ctx: &SumContext) -> Result<Vec<Check>> {
    const S: &str = "orthogonality";
    let tower = ctx.tower();
    let field = &tower.field;
    let m = ctx.group_order();
    // element order by polynomial code, so the check runs through the log table
    let elems: Vec<_> = (1..field.size()).map(|c| field.from_code(c)).collect();
    let step = (m / 256).max(1);
    let mut worst: f64 = 0.0;
    for t in (0..m).step_by(step as usize) {
        let s = pairwise_sum_by(elems.len(), |i| mult_char_value(field, CharIndex(t), elems[i]).unwrap());
        let want = if t == 0 { m as f64 } else { 0.0 };
        worst = worst.max((s - want).norm() / m as f64);
    }
    let mut out = vec![Check::new(S, "sum_x chi_t(x) = M [t = 0]", worst < 1e-9, worst, 0.0)];

    let c0 = enumerate_family(tower, Family::C0)?;
    let mut worst_c0: f64 = 0.0;
    for &x in &elems {
        let s = pairwise_sum_by(c0.len(), |i| mult_char_value(field, c0[i], x).unwrap());
        let want = if tower.view.contains(x) { c0.len() as f64 } else { 0.0 };
        worst_c0 = worst_c0.max((s - want).norm() / c0.len() as f64);
    }
    out.push(Check::new(S, "sum_{C0} chi(x) = |C0| [x in F_q^*]", worst_c0 < 1e-9, worst_c0, 0.0));
    Ok(out)
}

fn recurrence(ctx: &SumContext, n_max: u32, tol: f64, closed: bool) -> Result<Vec<Check>> {
    let suite = if closed { "closed-forms" } else { "recurrence" };
    let rep = ctx.check_recurrence(n_max.max(1), tol)?;
    let mut out = Vec::new();
    for r in &rep.rows {
        let ok = if closed { r.closed_form_ok } else { r.recurrence_ok };
        let label = match (closed, r.n) {
            (false, 1) => "base values I_1, A_1".to_string(),
            (false, n) => format!("recurrence at n={n}"),
            (true, n) => format!("closed form at n={n}"),
        };
        out.push(Check::new(suite, label, ok, [r.i_n, r.a_n], serde_json::Value::Null));
        out.push(Check::new(suite, format!("integrality residual at n={}", r.n), r.residual < tol, r.residual, tol));
    }
    Ok(out)
}

fn deligne(ctx: &SumContext, n_max: u32) -> Result<Vec<Check>> {
    let rep = ctx.check_deligne_bound(n_max.max(1))?;
    Ok(rep
        .rows
        .iter()
        .map(|r| Check::new("deligne", format!("max |Kl_{}| / bound", r.n), r.violations == 0, r.max_ratio, 1.0))
        .collect())
}

fn parseval(ctx: &SumContext, n_max: u32, tol: f64) -> Result<Vec<Check>> {
    Ok(ctx
        .kloosterman_tables(n_max.max(1))?
        .iter()
        .map(|t| {
            let r = ctx.check_parseval(t);
            Check::new("parseval", format!("sum |Kl_{}|^2", r.n), r.rel_err < tol, r.lhs, r.rhs)
        })
        .collect())
}

fn hasse_davenport(ctx: &SumContext) -> Result<Vec<Check>> {
    let bound = 1e-7 * ctx.sqrt_size();
    let mut worst: f64 = 0.0;
    for j in 0..ctx.q() - 1 {
        worst = worst.max(ctx.check_hasse_davenport(j)?.residual);
    }
    Ok(vec![Check::new(
        "hasse-davenport",
        format!("-g(chi o N) = (-g(chi))^{} for all {} base characters", ctx.d(), ctx.q() - 1),
        worst < bound,
        worst,
        bound,
    )])
}

fn fourier(ctx: &SumContext, n_max: u32, tol: f64) -> Result<Vec<Check>> {
    const S: &str = "fourier-identities";
    let mut out = Vec::new();
    for t in ctx.kloosterman_tables(n_max.max(1))? {
        let r = ctx.moment_identity(&t);
        out.push(Check::new(
            S,
            format!("sum_(j!=0) g^{} = M Kl_{}(1) - (-1)^n", t.n, t.n),
            r.rel_err < tol,
            r.rel_err,
            tol,
        ));
        let c = ctx.c0_moment_identity(&t);
        out.push(Check::new(
            S,
            format!("sum_(C0 minus 1) g^{} = |C0| I_{} - (-1)^n", t.n, t.n),
            c.rel_err < tol,
            c.rel_err,
            tol,
        ));
    }
    let galois = ctx.galois_invariance_deviation();
    let bound = 1e-7 * ctx.sqrt_size();
    out.push(Check::new(S, "g(chi^q) = g(chi)", galois < bound, galois, bound));
    Ok(out)
}

fn cross_method(ctx: &SumContext, n_max: u32) -> Result<Vec<Check>> {
    const S: &str = "cross-method";
    let mut out = Vec::new();
    let sqrt_q = ctx.sqrt_size();
    if ctx.tower().field.size() <= 1 << 12 {
        let direct = ctx.gauss_sums_direct();
        let dev = direct.iter().zip(ctx.gauss_sums()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        out.push(Check::new(S, "batch vs direct Gauss sums", dev < 1e-7 * sqrt_q, dev, 1e-7 * sqrt_q));
    }
    for n in 1..=n_max.clamp(1, 3) {
        let conv = ctx.kloosterman_all(n)?;
        let inv = ctx.kloosterman_all_inversion(n)?;
        let bound = 1e-7 * sqrt_q.powi(n as i32);
        out.push(Check::new(
            S,
            format!("Kl_{n}: convolution vs inversion"),
            conv.max_deviation(&inv) < bound,
            conv.max_deviation(&inv),
            bound,
        ));
        let direct = match ctx.kloosterman_all_direct(n) {
            Ok(t) => t,
            Err(Error::WorkGuard { .. }) => continue,
            Err(e) => return Err(e),
        };
        let dev = conv.max_deviation(&direct).max(inv.max_deviation(&direct));
        out.push(Check::new(S, format!("Kl_{n}: direct vs fast routes"), dev < bound, dev, bound));
    }
    Ok(out)
}

fn epsilon_square(ctx: &SumContext) -> Result<Vec<Check>> {
    let tower = ctx.tower();
    let witness = TraceZeroWitness::find(tower)?;
    let c0 = enumerate_family(tower, Family::C0)?;
    let mismatches = c0
        .iter()
        .map(|&j| Ok(is_square_in_c0(tower, j)? != square_criterion_epsilon(tower, &witness, j)?))
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .filter(|&b| b)
        .count();
    Ok(vec![Check::new(
        "epsilon-square",
        format!("square in C0 iff chi(sqrt delta) = 1 over {} characters", c0.len()),
        mismatches == 0,
        mismatches,
        0,
    )])
}

fn kondo(ctx: &SumContext, tol: f64) -> Result<Vec<Check>> {
    const S: &str = "kondo";
    let tower = ctx.tower();
    let gl2 = Gl2::from_tower(tower.clone(), ctx.psi().twist())?;
    let rep = gl2.verify_kondo(tol)?;
    let q2 = (rep.q * rep.q) as f64;
    Ok(vec![
        Check::new(S, "|g(rho)| = q^2", rep.absolute_value_holds(), rep.max_abs_residual, tol * q2),
        Check::new(S, "g(rho) = -q g(chi)", rep.signed_identity_holds(), rep.max_signed_residual, tol * q2),
        Check::new(S, "cuspidal character norm", rep.max_norm_defect < 1e-6, rep.max_norm_defect, 1e-6),
        Check::new(S, "orthogonality across orbits", rep.max_cross_inner < 1e-6, rep.max_cross_inner, 1e-6),
        Check::info(S, "max |g(rho) - q g(chi)|", rep.max_residual, serde_json::Value::Null),
        Check::info(S, "primitive characters / orbits", [rep.rows.len(), rep.orbits], serde_json::Value::Null),
    ])
}
