//! Angle statistics of normalized Gauss sums: Weyl sums, moments against
//! limit measures (with exact finite-`q` predictions where they exist), and
//! discrepancy / Kolmogorov–Smirnov distances on the circle.
//!
//! Angles use the principal value in `(-π, π]`, cut at `π`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::chars::{enumerate_family, CharIndex, Family};
use crate::dft::pairwise_sum_by;
use crate::error::{Error, Result};
use crate::expsum::SumContext;

/// Angles this close to `0` or `±π` are snapped onto them, so that values
/// which are exactly `±1` in theory do not straddle the cut.
pub const ANGLE_SNAP: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetMeasure {
    Haar,
    Dirac1,
    DiracMinus1,
    HalfDiracPair,
}

impl TargetMeasure {
    pub const ALL: [TargetMeasure; 4] =
        [TargetMeasure::Haar, TargetMeasure::Dirac1, TargetMeasure::DiracMinus1, TargetMeasure::HalfDiracPair];

    pub fn name(self) -> &'static str {
        match self {
            TargetMeasure::Haar => "haar",
            TargetMeasure::Dirac1 => "dirac1",
            TargetMeasure::DiracMinus1 => "dirac-1",
            TargetMeasure::HalfDiracPair => "half-dirac-pair",
        }
    }

    /// `∫ z^n dμ`.
    pub fn moment(self, n: i64) -> f64 {
        let even = n % 2 == 0;
        match self {
            TargetMeasure::Haar => (n == 0) as u8 as f64,
            TargetMeasure::Dirac1 => 1.0,
            TargetMeasure::DiracMinus1 => {
                if even {
                    1.0
                } else {
                    -1.0
                }
            }
            TargetMeasure::HalfDiracPair => even as u8 as f64,
        }
    }

    /// Point masses as `(angle, mass)`.
    pub fn atoms(self) -> &'static [(f64, f64)] {
        match self {
            TargetMeasure::Haar => &[],
            TargetMeasure::Dirac1 => &[(0.0, 1.0)],
            TargetMeasure::DiracMinus1 => &[(PI, 1.0)],
            TargetMeasure::HalfDiracPair => &[(0.0, 0.5), (PI, 0.5)],
        }
    }

    /// `μ((-π, θ])` for `θ ∈ (-π, π]`.
    pub fn cdf(self, theta: f64) -> f64 {
        match self {
            TargetMeasure::Haar => ((theta + PI) / (2.0 * PI)).clamp(0.0, 1.0),
            _ => self.atoms().iter().filter(|(a, _)| *a <= theta).map(|(_, w)| w).sum(),
        }
    }

    /// `μ((-π, θ))`.
    pub fn cdf_left(self, theta: f64) -> f64 {
        match self {
            TargetMeasure::Haar => self.cdf(theta),
            _ => self.atoms().iter().filter(|(a, _)| *a < theta).map(|(_, w)| w).sum(),
        }
    }

    fn is_dirac(self) -> bool {
        self != TargetMeasure::Haar
    }
}

impl fmt::Display for TargetMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TargetMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        match norm.as_str() {
            "haar" => Ok(TargetMeasure::Haar),
            "dirac1" | "dirac-1-plus" | "dirac+1" => Ok(TargetMeasure::Dirac1),
            "dirac-1" | "dirac-minus1" | "diracminus1" => Ok(TargetMeasure::DiracMinus1),
            "half-dirac-pair" | "half" => Ok(TargetMeasure::HalfDiracPair),
            _ => Err(Error::Invalid(format!("unknown target measure '{s}'"))),
        }
    }
}

/// The limit measure the paper attaches to a family.
pub fn default_target(family: Family) -> TargetMeasure {
    match family {
        Family::C0S => TargetMeasure::Dirac1,
        Family::C0NS => TargetMeasure::DiracMinus1,
        _ => TargetMeasure::Haar,
    }
}

/// Dirac-type limits only make sense for the `d = 2` families living in `C0`.
pub fn check_target(family: Family, d: u32, target: TargetMeasure) -> Result<()> {
    let c0_type = matches!(family, Family::C0 | Family::C0Primitive | Family::C0S | Family::C0NS);
    if target.is_dirac() && !(d == 2 && c0_type) {
        return Err(Error::IncompatibleTarget { target: target.to_string(), family: family.to_string(), d });
    }
    Ok(())
}

/// Normalized Gauss sums `g(χ)/q^{d/2}` of a family, ascending by `j`.
#[derive(Clone, Debug, Serialize)]
pub struct AnglePopulation {
    pub family: Family,
    pub q: u64,
    pub d: u32,
    pub indices: Vec<u64>,
    pub points: Vec<Complex64>,
}

impl AnglePopulation {
    /// A population from raw points (used for synthetic checks).
    pub fn from_points(points: Vec<Complex64>) -> Self {
        let indices = (0..points.len() as u64).collect();
        AnglePopulation { family: Family::AllNontrivial, q: 0, d: 0, indices, points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Principal angles in `(-π, π]`, snapped near `0` and `π`.
    pub fn angles(&self) -> Vec<f64> {
        self.points.iter().map(|z| principal_angle(*z)).collect()
    }
}

pub fn principal_angle(z: Complex64) -> f64 {
    let a = z.arg();
    if a.abs() < ANGLE_SNAP {
        0.0
    } else if PI - a.abs() < ANGLE_SNAP {
        PI
    } else {
        a
    }
}

fn normalized_points(ctx: &SumContext, indices: &[CharIndex]) -> Vec<Complex64> {
    let g = ctx.gauss_sums();
    let scale = ctx.sqrt_size();
    indices.iter().map(|j| g[j.0 as usize] / scale).collect()
}

pub fn build_population(ctx: &SumContext, family: Family) -> Result<AnglePopulation> {
    let indices = enumerate_family(ctx.tower(), family)?;
    if indices.is_empty() {
        return Err(Error::EmptyFamily(family.to_string()));
    }
    Ok(AnglePopulation {
        family,
        q: ctx.q(),
        d: ctx.d(),
        points: normalized_points(ctx, &indices),
        indices: indices.into_iter().map(|j| j.0).collect(),
    })
}

fn power(z: Complex64, n: i64) -> Complex64 {
    if n >= 0 {
        z.powi(n as i32)
    } else {
        z.conj().powi((-n) as i32)
    }
}

fn mean_power(points: &[Complex64], n: i64) -> Complex64 {
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    pairwise_sum_by(points.len(), |i| power(points[i], n)) / points.len() as f64
}

/// `(1/N) Σ z^n`; negative `n` uses conjugates.
pub fn weyl_sum(pop: &AnglePopulation, n: i64) -> Complex64 {
    mean_power(&pop.points, n)
}

/// Envelope for `|weyl_sum(n)|` over the `Q - 2` nontrivial characters of
/// `F_Q^*`, from `|Kl_n(1)| <= n Q^{(n-1)/2}`.
pub fn haar_decay_bound(field_size: u64, n: u32) -> f64 {
    let big_q = field_size as f64;
    let n_f = n as f64;
    (n_f * big_q.powf((n_f - 1.0) / 2.0) * (big_q - 1.0) + 1.0) / ((big_q - 2.0) * big_q.powf(n_f / 2.0))
}

/// The smallest character group containing the family, which the proofs
/// average over before discarding the defect.
pub fn full_group(family: Family) -> Option<Family> {
    match family {
        Family::AllNontrivial | Family::Primitive => None,
        _ => Some(Family::C0),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentReport {
    pub family: Family,
    pub target_measure: TargetMeasure,
    pub n: u32,
    pub count: usize,
    pub empirical: Complex64,
    pub target: f64,
    pub exact_prediction: Option<Complex64>,
    /// `|empirical - target|`
    pub deviation: f64,
    /// `|empirical - exact_prediction|`
    pub prediction_error: Option<f64>,
    pub full_group_count: usize,
    pub full_group_empirical: Complex64,
}

/// Exact finite-`q` value of the `n`-th moment where the Kloosterman side
/// supplies one:
///
/// - `C0` (any `d`): `I_n / q^{dn/2}`;
/// - `C0S` (`d = 2`, `p` odd): `(I_n + A_n) / q^n`;
/// - `C0NS` (`d = 2`): `(I_n - A_n) / q^n = (-1)^n`;
/// - all nontrivial: `(M·Kl_n(1) - (-1)^n) / ((M - 1) q^{dn/2})`.
pub fn exact_prediction(
    ctx: &SumContext,
    family: Family,
    n: u32,
    kl_one: Complex64,
    i_n: f64,
    a_n: Option<f64>,
) -> Option<Complex64> {
    let q = ctx.q() as f64;
    let odd = ctx.tower().p() != 2;
    let scale = ctx.sqrt_size().powi(n as i32);
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    match family {
        Family::C0 => Some((i_n / scale).into()),
        Family::C0S if odd => Some(((i_n + a_n?) / q.powi(n as i32)).into()),
        Family::C0S => Some((i_n / scale).into()),
        Family::C0NS => Some(((i_n - a_n?) / q.powi(n as i32)).into()),
        Family::AllNontrivial => {
            let m = ctx.group_order() as f64;
            Some((m * kl_one - sign) / ((m - 1.0) * scale))
        }
        Family::Primitive | Family::C0Primitive => None,
    }
}

pub fn moment_report(ctx: &SumContext, family: Family, n_max: u32, target: TargetMeasure) -> Result<Vec<MomentReport>> {
    check_target(family, ctx.d(), target)?;
    let pop = build_population(ctx, family)?;
    let full_indices = match full_group(family) {
        Some(f) => enumerate_family(ctx.tower(), f)?,
        None => (0..ctx.group_order()).map(CharIndex).collect(),
    };
    let full_points = normalized_points(ctx, &full_indices);
    let tables = if n_max > 0 { ctx.kloosterman_tables(n_max)? } else { Vec::new() };
    let mut out = Vec::with_capacity(n_max as usize);
    for t in &tables {
        let n = t.n;
        let empirical = weyl_sum(&pop, n as i64);
        let target_m = target.moment(n as i64);
        let i_n = ctx.aggregate_i(t).re;
        let a_n = if ctx.d() == 2 { Some(ctx.aggregate_a(t)?.re) } else { None };
        let exact = exact_prediction(ctx, family, n, t.values[0], i_n, a_n);
        out.push(MomentReport {
            family,
            target_measure: target,
            n,
            count: pop.len(),
            empirical,
            target: target_m,
            exact_prediction: exact,
            deviation: (empirical - target_m).norm(),
            prediction_error: exact.map(|e| (empirical - e).norm()),
            full_group_count: full_points.len(),
            full_group_empirical: mean_power(&full_points, n as i64),
        });
    }
    Ok(out)
}

fn unit_positions(pop: &AnglePopulation) -> Vec<f64> {
    let mut u: Vec<f64> = pop
        .angles()
        .into_iter()
        .map(|a| {
            let x = a / (2.0 * PI);
            if x < 0.0 {
                x + 1.0
            } else {
                x
            }
        })
        .collect();
    u.sort_by(f64::total_cmp);
    u
}

/// `sup` over circular arcs of `|mass(arc) - length(arc)/2π|`, in
/// `O(N log N)` from the sorted positions.
pub fn star_discrepancy(pop: &AnglePopulation) -> f64 {
    let n = pop.len();
    if n == 0 {
        return 0.0;
    }
    let u = unit_positions(pop);
    let nf = n as f64;
    let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
    for (i, &x) in u.iter().enumerate() {
        let v = (i + 1) as f64 / nf - x;
        hi = hi.max(v);
        lo = lo.min(v);
    }
    (1.0 / nf + hi - lo).min(1.0)
}

/// Kolmogorov–Smirnov distance between the empirical angle distribution and
/// `target`, both as CDFs on `(-π, π]`.
pub fn ks_distance(pop: &AnglePopulation, target: TargetMeasure) -> f64 {
    let n = pop.len();
    if n == 0 {
        return 0.0;
    }
    let mut a = pop.angles();
    a.sort_by(f64::total_cmp);
    let nf = n as f64;
    let mut cuts: Vec<f64> = a.clone();
    cuts.extend(target.atoms().iter().map(|(t, _)| *t));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut best: f64 = 0.0;
    for &t in &cuts {
        let at = a.partition_point(|&x| x <= t) as f64 / nf;
        let before = a.partition_point(|&x| x < t) as f64 / nf;
        best = best.max((at - target.cdf(t)).abs()).max((before - target.cdf_left(t)).abs());
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::{prime_power, Tower};

    fn ctx_q(q: u64, d: u32) -> SumContext {
        let (p, m) = prime_power(q).unwrap();
        SumContext::new(Tower::new(p, m, d).unwrap()).unwrap()
    }

    fn unit(theta: f64) -> Complex64 {
        Complex64::from_polar(1.0, theta)
    }

    #[test]
    fn target_moments_and_cdfs() {
        for t in TargetMeasure::ALL {
            assert_eq!(t.moment(0), 1.0);
            assert_eq!(t.cdf(PI), 1.0);
            assert_eq!(t.name().parse::<TargetMeasure>().unwrap(), t);
        }
        assert_eq!(TargetMeasure::Haar.moment(3), 0.0);
        assert_eq!(TargetMeasure::DiracMinus1.moment(3), -1.0);
        assert_eq!(TargetMeasure::HalfDiracPair.moment(3), 0.0);
        assert_eq!(TargetMeasure::HalfDiracPair.moment(4), 1.0);
        assert_eq!(TargetMeasure::HalfDiracPair.cdf(0.0), 0.5);
        assert_eq!(TargetMeasure::HalfDiracPair.cdf_left(0.0), 0.0);
    }

    fn sorted_angles(points: impl Iterator<Item = Complex64>) -> Vec<f64> {
        let mut a: Vec<f64> = points.map(principal_angle).collect();
        a.sort_by(f64::total_cmp);
        a
    }

    #[test]
    fn population_sizes_and_closure() {
        let c = ctx_q(3, 2);
        let pop = build_population(&c, Family::Primitive).unwrap();
        assert_eq!(pop.len(), 6);
        for z in &pop.points {
            assert!((z.norm() - 1.0).abs() < 1e-9);
        }
        assert_eq!(build_population(&ctx_q(5, 2), Family::C0S).unwrap().len(), 3);

        // g(χ̄) = χ(-1)·conj(g(χ)): C0 families (χ(-1) = 1) and p = 2 are
        // closed under conjugation, general families under z ↦ χ(-1) z̄.
        for (q, fam) in [(5u64, Family::C0), (9, Family::C0NS), (7, Family::C0S), (8, Family::Primitive)] {
            let pop = build_population(&ctx_q(q, 2), fam).unwrap();
            let a = sorted_angles(pop.points.iter().copied());
            let b = sorted_angles(pop.points.iter().map(|z| z.conj()));
            assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-9), "q={q} {fam}");
        }
        let m = c.group_order();
        let twisted = pop.indices.iter().zip(&pop.points).map(|(&j, z)| {
            // χ_j(-1) = (-1)^j since -1 = g^{M/2}
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            z.conj() * sign
        });
        assert_eq!(m % 2, 0);
        let a = sorted_angles(pop.points.iter().copied());
        let b = sorted_angles(twisted);
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-9));
    }

    #[test]
    fn weyl_sum_basics() {
        let c = ctx_q(5, 2);
        let pop = build_population(&c, Family::AllNontrivial).unwrap();
        assert_eq!(weyl_sum(&pop, 0), Complex64::new(1.0, 0.0));
        for n in 1..=4 {
            let w = weyl_sum(&pop, n);
            assert!((weyl_sum(&pop, -n) - w.conj()).norm() < 1e-12);
            assert!(w.norm() <= 1.0 + 1e-12);
            assert!(w.norm() <= haar_decay_bound(25, n as u32) + 1e-12);
        }
    }

    #[test]
    fn all_nontrivial_weyl_sum_matches_kloosterman() {
        for (q, d) in [(3u64, 2u32), (2, 3), (7, 1), (4, 2)] {
            let c = ctx_q(q, d);
            let pop = build_population(&c, Family::AllNontrivial).unwrap();
            let m = c.group_order() as f64;
            for t in c.kloosterman_tables(4).unwrap() {
                let sign = if t.n % 2 == 0 { 1.0 } else { -1.0 };
                let want = (t.values[0] * m - sign) / ((m - 1.0) * c.sqrt_size().powi(t.n as i32));
                assert!((weyl_sum(&pop, t.n as i64) - want).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn c0s_first_moment_from_direct_sums() {
        // oracle: average the direct Gauss sums of the (q+1)/2 characters
        let c = ctx_q(5, 2);
        let members = enumerate_family(c.tower(), Family::C0S).unwrap();
        let direct: Complex64 =
            members.iter().map(|&j| c.gauss_sum_direct(j)).sum::<Complex64>() / (members.len() as f64 * 5.0);
        let rep = moment_report(&c, Family::C0S, 2, TargetMeasure::Dirac1).unwrap();
        assert!((rep[0].empirical - direct).norm() < 1e-12);
        assert!(rep[0].prediction_error.unwrap() < 1e-8);
        assert!((rep[0].exact_prediction.unwrap() - 0.6).norm() < 1e-12);
    }

    #[test]
    fn c0ns_moments_are_signs() {
        let c = ctx_q(7, 2);
        let rep = moment_report(&c, Family::C0NS, 4, TargetMeasure::DiracMinus1).unwrap();
        for r in &rep {
            let sign = if r.n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((r.empirical.re - sign).abs() < 1e-8, "{r:?}");
            assert!(r.prediction_error.unwrap() < 1e-8);
            assert_eq!(r.full_group_count, 8);
        }
    }

    #[test]
    fn predictions_hold_across_families() {
        for (q, d) in [(3u64, 2u32), (4, 2), (9, 2), (3, 3), (8, 2)] {
            let c = ctx_q(q, d);
            for fam in [Family::C0, Family::C0S, Family::C0NS, Family::AllNontrivial] {
                if !fam.is_defined(d, c.tower().p()) {
                    continue;
                }
                let target = if d == 2 { default_target(fam) } else { TargetMeasure::Haar };
                for r in moment_report(&c, fam, 4, target).unwrap() {
                    assert!(r.prediction_error.unwrap() < 1e-8, "q={q} d={d} {fam} n={}", r.n);
                }
            }
        }
    }

    #[test]
    fn incompatible_targets() {
        let c = ctx_q(3, 3);
        assert!(matches!(
            moment_report(&c, Family::C0, 1, TargetMeasure::Dirac1),
            Err(Error::IncompatibleTarget { .. })
        ));
        let c2 = ctx_q(3, 2);
        assert!(moment_report(&c2, Family::Primitive, 1, TargetMeasure::Dirac1).is_err());
        assert!(moment_report(&c2, Family::C0S, 1, TargetMeasure::Dirac1).is_ok());
    }

    #[test]
    fn discrepancy_examples() {
        let one = AnglePopulation::from_points(vec![unit(0.3)]);
        assert!((star_discrepancy(&one) - 1.0).abs() < 1e-12);
        for n in [1usize, 2, 5, 12] {
            let pts = (0..n).map(|k| unit(2.0 * PI * k as f64 / n as f64 + 0.1)).collect();
            let d = star_discrepancy(&AnglePopulation::from_points(pts));
            assert!((d - 1.0 / n as f64).abs() < 1e-12, "n={n}");
        }
        // two coincident points: an arc of length → 0 carries mass 1
        let two = AnglePopulation::from_points(vec![unit(1.0), unit(1.0)]);
        assert!((star_discrepancy(&two) - 1.0).abs() < 1e-12);
    }

    // Oracle: discrepancy by scanning arcs between every pair of sample
    // positions (open and closed ends).
    fn discrepancy_scan(u: &[f64]) -> f64 {
        let n = u.len() as f64;
        let mut best: f64 = 0.0;
        for &a in u {
            for &b in u {
                let len = if b >= a { b - a } else { b - a + 1.0 };
                let inside = |x: f64| if b >= a { x >= a && x <= b } else { x >= a || x <= b };
                let strictly = |x: f64| if b >= a { x > a && x < b } else { x > a || x < b };
                let closed = u.iter().filter(|&&x| inside(x)).count() as f64 / n;
                let open = u.iter().filter(|&&x| strictly(x)).count() as f64 / n;
                best = best.max(closed - len).max(len - open);
            }
        }
        best
    }

    #[test]
    fn discrepancy_matches_arc_scan() {
        let c = ctx_q(9, 2);
        for fam in [Family::Primitive, Family::C0, Family::C0S] {
            let pop = build_population(&c, fam).unwrap();
            let mut u: Vec<f64> = pop.angles().iter().map(|a| a.rem_euclid(2.0 * PI) / (2.0 * PI)).collect();
            u.sort_by(f64::total_cmp);
            assert!((star_discrepancy(&pop) - discrepancy_scan(&u)).abs() < 1e-12, "{fam}");
        }
    }

    #[test]
    fn ks_examples() {
        let plus = AnglePopulation::from_points(vec![Complex64::new(1.0, 0.0)]);
        let minus = AnglePopulation::from_points(vec![Complex64::new(-1.0, 0.0)]);
        assert_eq!(ks_distance(&plus, TargetMeasure::Dirac1), 0.0);
        assert_eq!(ks_distance(&minus, TargetMeasure::Dirac1), 1.0);
        assert_eq!(ks_distance(&minus, TargetMeasure::DiracMinus1), 0.0);
        let both = AnglePopulation::from_points(vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]);
        assert_eq!(ks_distance(&both, TargetMeasure::HalfDiracPair), 0.0);
        assert_eq!(ks_distance(&plus, TargetMeasure::Haar), 0.5);
        let a = ks_distance(&build_population(&ctx_q(29, 2), Family::C0S).unwrap(), TargetMeasure::Dirac1);
        let b = ks_distance(&build_population(&ctx_q(5, 2), Family::C0S).unwrap(), TargetMeasure::Dirac1);
        assert!(a < b, "{a} vs {b}");
    }
}
