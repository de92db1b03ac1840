//! Gauss sums, Kloosterman sums, and the exact identities relating them.
//!
//! Three independent routes to `Kl_n(a)` are provided:
//!
//! - **direct**: brute-force enumeration of `x_1 … x_{n-1}` with
//!   `x_n = a / (x_1 ⋯ x_{n-1})`, counting trace residues exactly;
//! - **convolution**: `Kl_n = Kl_{n-1} ⋆ ψ` over the cyclic group
//!   `F_{q^d}^*`, with no reference to multiplicative characters;
//! - **inversion**: Fourier inversion of `g(χ)^n = Σ_a χ(a) Kl_n(a)` from the
//!   batch of Gauss sums.

use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::chars::{enumerate_family, has_trivial_central, is_primitive, is_square_in_c0, AddChar, CharIndex, Family};
use crate::dft::{self, pairwise_sum, pairwise_sum_by, root_table, Sign};
use crate::error::{Error, Result};
use crate::ffield::{Elem, Tower};

/// Default bound on the number of tuples a brute-force Kloosterman sum may
/// enumerate.
pub const DEFAULT_MAX_WORK: u128 = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KlMethod {
    Direct,
    Convolution,
    Inversion,
}

impl KlMethod {
    pub fn name(self) -> &'static str {
        match self {
            KlMethod::Direct => "direct",
            KlMethod::Convolution => "convolution",
            KlMethod::Inversion => "inversion",
        }
    }
}

/// `Kl_n(g^k)` for every log index `k`.
#[derive(Clone, Debug)]
pub struct KloostermanTable {
    pub n: u32,
    pub values: Vec<Complex64>,
    pub method: KlMethod,
}

impl KloostermanTable {
    pub fn at(&self, a: Elem) -> Option<Complex64> {
        a.log().map(|k| self.values[k as usize])
    }

    pub fn max_deviation(&self, other: &KloostermanTable) -> f64 {
        self.values.iter().zip(&other.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GaussRecord {
    pub j: u64,
    pub value: Complex64,
    /// `value / q^{d/2}`; a unit complex number for `j != 0`.
    pub normalized: Complex64,
    pub primitive: bool,
    pub trivial_central: bool,
    /// Only meaningful for `d = 2` and `j ∈ C0`.
    pub square_in_c0: Option<bool>,
}

/// A complex number that should be a rational integer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rounded {
    pub value: i128,
    /// `max(|Im z|, |Re z - value|)`.
    pub residual: f64,
}

pub fn round_to_integer(z: Complex64) -> Rounded {
    let r = z.re.round();
    Rounded { value: r as i128, residual: z.im.abs().max((z.re - r).abs()) }
}

/// `Σ_{k<order} e^{2πi jk/order} ψ(g^k)`: a Gauss sum over any cyclic group
/// with tabulated additive-character residues.
pub fn gauss_sum_cyclic(order: u64, residues: &[u32], p: u64, j: u64) -> Complex64 {
    let chi = root_table(order);
    let psi: Vec<Complex64> = {
        let roots = root_table(p);
        residues.iter().map(|&r| roots[r as usize]).collect()
    };
    twisted_sum(&chi, &psi, j % order, &mut Vec::new())
}

/// `Σ_k chi[jk mod M]·psi[k]`, stepping the index instead of reducing
/// `jk` for every term.
fn twisted_sum(chi: &[Complex64], psi: &[Complex64], j: u64, buf: &mut Vec<Complex64>) -> Complex64 {
    let m = chi.len();
    let j = j as usize % m.max(1);
    buf.clear();
    let mut idx = 0usize;
    for &w in psi {
        buf.push(chi[idx] * w);
        idx += j;
        if idx >= m {
            idx -= m;
        }
    }
    pairwise_sum(buf)
}

fn sign_pow(n: u32) -> i128 {
    if n.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `I_n + A_n` for odd `p`: `(q-2)q^{n-1} + 2(-1)^n (1 - (-q)^{n-1})/(1+q)`.
pub fn closed_form_sum(q: u64, n: u32) -> i128 {
    let q = q as i128;
    let geometric = (1 - (-q).pow(n - 1)) / (1 + q);
    (q - 2) * q.pow(n - 1) + 2 * sign_pow(n) * geometric
}

/// `I_n - A_n = (-q)^n` for odd `p`.
pub fn closed_form_diff(q: u64, n: u32) -> i128 {
    (-(q as i128)).pow(n)
}

/// `I_n` for `p = 2`: `(q-1)q^{n-1} + (-1)^n (1 - (-q)^{n-1})/(1+q)`.
pub fn closed_form_even(q: u64, n: u32) -> i128 {
    let q = q as i128;
    (q - 1) * q.pow(n - 1) + sign_pow(n) * (1 - (-q).pow(n - 1)) / (1 + q)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct AggregateIA {
    pub d: u32,
    pub n: u32,
    /// `Σ_{a∈F_q^*} Kl_n(a, q^d)`
    pub i_n: Complex64,
    /// `Σ_{Tr(a)=0, a≠0} Kl_n(a, q²)`, only for `d = 2`.
    pub a_n: Option<Complex64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RecurrenceRow {
    pub n: u32,
    pub i_n: i128,
    pub a_n: i128,
    pub residual: f64,
    /// Recurrence (or the base values when `n = 1`).
    pub recurrence_ok: bool,
    pub closed_form_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RecurrenceReport {
    pub q: u64,
    pub p: u64,
    pub rows: Vec<RecurrenceRow>,
    pub tol: f64,
    pub max_residual: f64,
    /// Every aggregate rounded to an integer within `tol`.
    pub numerical_ok: bool,
    /// Recurrences, base values and closed forms all hold.
    pub identities_ok: bool,
}

impl RecurrenceReport {
    pub fn passed(&self) -> bool {
        self.numerical_ok && self.identities_ok
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DeligneRow {
    pub n: u32,
    pub max_abs: f64,
    pub bound: f64,
    pub max_ratio: f64,
    pub violations: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeligneReport {
    pub field_size: u64,
    pub rows: Vec<DeligneRow>,
}

impl DeligneReport {
    pub fn max_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.max_ratio).fold(0.0, f64::max)
    }

    pub fn violations(&self) -> usize {
        self.rows.iter().map(|r| r.violations).sum()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ParsevalReport {
    pub n: u32,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub n: u32,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub rel_err: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HasseDavenportReport {
    pub j_base: u64,
    pub n: u32,
    /// `-g(χ∘N, ψ∘Tr)` over `F_{q^n}`.
    pub lhs: Complex64,
    /// `(-g(χ, ψ))^n` over `F_q`.
    pub rhs: Complex64,
    pub residual: f64,
}

/// Field, additive character and cached Gauss sums for one tower.
pub struct SumContext {
    tower: Tower,
    psi: AddChar,
    max_work: u128,
    gauss: OnceLock<Vec<Complex64>>,
}

impl SumContext {
    pub fn new(tower: Tower) -> Result<Self> {
        Self::with_twist(tower, 1)
    }

    pub fn with_twist(tower: Tower, twist: u64) -> Result<Self> {
        let psi = AddChar::new(&tower.field, twist)?;
        Ok(SumContext { tower, psi, max_work: DEFAULT_MAX_WORK, gauss: OnceLock::new() })
    }

    pub fn with_max_work(mut self, max_work: u128) -> Self {
        self.max_work = max_work;
        self
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }

    pub fn psi(&self) -> &AddChar {
        &self.psi
    }

    pub fn q(&self) -> u64 {
        self.tower.q()
    }

    pub fn d(&self) -> u32 {
        self.tower.d()
    }

    pub fn group_order(&self) -> u64 {
        self.tower.group_order()
    }

    /// `q^{d/2} = sqrt(|F_{q^d}|)`.
    pub fn sqrt_size(&self) -> f64 {
        (self.tower.field.size() as f64).sqrt()
    }

    pub fn max_work(&self) -> u128 {
        self.max_work
    }

    /// `ψ(g^k)` for `k = 0..M`.
    pub fn psi_values(&self) -> Vec<Complex64> {
        self.psi.values()
    }

    /// `g(χ_j, ψ) = Σ_{x≠0} χ_j(x) ψ(x)` summed term by term.
    pub fn gauss_sum_direct(&self, j: CharIndex) -> Complex64 {
        if j.0.is_multiple_of(self.group_order()) {
            return self.trivial_gauss_sum();
        }
        gauss_sum_cyclic(self.group_order(), self.psi.residues(), self.psi.p(), j.0)
    }

    /// `Σ_{x≠0} ψ(x)` from the residue counts. The most frequent count is
    /// subtracted first; its contribution `c·Σ_r ζ^r` vanishes identically,
    /// so the balanced fibers of the trace give exactly `-1`.
    pub fn trivial_gauss_sum(&self) -> Complex64 {
        let p = self.psi.p() as usize;
        let mut counts = vec![0i64; p];
        for &r in self.psi.residues() {
            counts[r as usize] += 1;
        }
        let mut sorted = counts.clone();
        sorted.sort_unstable();
        let mode = sorted[p / 2];
        let roots = root_table(p as u64);
        pairwise_sum_by(p, |r| roots[r] * (counts[r] - mode) as f64)
    }

    /// All `M` Gauss sums as one DFT of `k -> ψ(g^k)`, indexed by `j`.
    pub fn gauss_sums(&self) -> &[Complex64] {
        self.gauss.get_or_init(|| {
            let mut g = dft::dft(&self.psi_values(), Sign::Positive);
            g[0] = self.trivial_gauss_sum();
            g
        })
    }

    /// Every Gauss sum by the direct route, in parallel over `j`.
    pub fn gauss_sums_direct(&self) -> Vec<Complex64> {
        let m = self.group_order();
        let chi = root_table(m);
        let psi = self.psi_values();
        (0..m)
            .into_par_iter()
            .map_init(
                Vec::new,
                |buf, j| {
                    if j == 0 {
                        self.trivial_gauss_sum()
                    } else {
                        twisted_sum(&chi, &psi, j, buf)
                    }
                },
            )
            .collect()
    }

    pub fn gauss_record(&self, j: CharIndex) -> GaussRecord {
        let value = self.gauss_sums()[j.0 as usize];
        let view = &self.tower.view;
        let trivial_central = has_trivial_central(view, j);
        let square_in_c0 = (self.d() == 2 && trivial_central).then(|| is_square_in_c0(&self.tower, j).ok()).flatten();
        GaussRecord {
            j: j.0,
            value,
            normalized: value / self.sqrt_size(),
            primitive: is_primitive(view, j),
            trivial_central,
            square_in_c0,
        }
    }

    pub fn gauss_records(&self, family: Option<Family>) -> Result<Vec<GaussRecord>> {
        let indices = match family {
            Some(f) => enumerate_family(&self.tower, f)?,
            None => (0..self.group_order()).map(CharIndex).collect(),
        };
        Ok(indices.into_iter().map(|j| self.gauss_record(j)).collect())
    }

    fn work_for(&self, n: u32) -> Result<u128> {
        if n == 0 {
            return Err(Error::ZeroOrder);
        }
        let work = (self.group_order() as u128).saturating_pow(n - 1);
        if work > self.max_work {
            return Err(Error::WorkGuard { work, limit: self.max_work });
        }
        Ok(work)
    }

    fn kloosterman_counts(&self, n: u32, log_a: u64) -> Vec<u64> {
        let m = self.group_order();
        let p = self.psi.p();
        let res = self.psi.residues();
        let mut counts = vec![0u64; p as usize];
        fn walk(depth: u32, last: u32, log_acc: u64, tr_acc: u64, ctx: (&[u32], u64, u64, u64), counts: &mut [u64]) {
            let (res, m, p, log_a) = ctx;
            if depth == last {
                let k = (log_a + m - log_acc) % m;
                counts[((tr_acc + res[k as usize] as u64) % p) as usize] += 1;
                return;
            }
            for k in 0..m {
                walk(depth + 1, last, (log_acc + k) % m, (tr_acc + res[k as usize] as u64) % p, ctx, counts);
            }
        }
        walk(0, n - 1, 0, 0, (res, m, p, log_a), &mut counts);
        counts
    }

    /// `Kl_n(a)` by enumerating `x_1 … x_{n-1}`; the trace sums are counted
    /// per residue mod `p`, so the only rounding is in the final `p` terms.
    pub fn kloosterman_direct(&self, n: u32, a: Elem) -> Result<Complex64> {
        let log_a = a.log().ok_or(Error::Invalid("Kloosterman sum at a = 0".into()))?;
        self.work_for(n)?;
        let counts = self.kloosterman_counts(n, log_a);
        let roots = root_table(self.psi.p());
        let terms: Vec<Complex64> = counts.iter().zip(&roots).map(|(&c, &w)| w * c as f64).collect();
        Ok(pairwise_sum(&terms))
    }

    pub fn kloosterman_all_direct(&self, n: u32) -> Result<KloostermanTable> {
        self.work_for(n)?;
        let m = self.group_order();
        let roots = root_table(self.psi.p());
        let values = (0..m)
            .into_par_iter()
            .map(|k| {
                let counts = self.kloosterman_counts(n, k);
                let terms: Vec<Complex64> = counts.iter().zip(&roots).map(|(&c, &w)| w * c as f64).collect();
                pairwise_sum(&terms)
            })
            .collect();
        Ok(KloostermanTable { n, values, method: KlMethod::Direct })
    }

    /// `Kl_1, …, Kl_{n_max}` by iterated cyclic convolution with `ψ`.
    pub fn kloosterman_tables(&self, n_max: u32) -> Result<Vec<KloostermanTable>> {
        if n_max == 0 {
            return Err(Error::ZeroOrder);
        }
        let base = self.psi_values();
        let mut out = vec![KloostermanTable { n: 1, values: base.clone(), method: KlMethod::Convolution }];
        for n in 2..=n_max {
            let prev = &out.last().unwrap().values;
            let values = dft::cyclic_convolution(prev, &base);
            out.push(KloostermanTable { n, values, method: KlMethod::Convolution });
        }
        Ok(out)
    }

    pub fn kloosterman_all(&self, n: u32) -> Result<KloostermanTable> {
        Ok(self.kloosterman_tables(n)?.pop().unwrap())
    }

    /// `Kl_n(g^L) = (1/M) Σ_j g(χ_j)^n e^{-2πi jL/M}` for one `a = g^L`.
    pub fn kloosterman_via_inversion(&self, n: u32, a: Elem) -> Result<Complex64> {
        if n == 0 {
            return Err(Error::ZeroOrder);
        }
        let l = a.log().ok_or(Error::Invalid("Kloosterman sum at a = 0".into()))?;
        let m = self.group_order();
        let g = self.gauss_sums();
        let roots = root_table(m);
        let s = pairwise_sum_by(m as usize, |j| {
            let idx = (m - (j as u64 * l % m)) % m;
            g[j].powi(n as i32) * roots[idx as usize]
        });
        Ok(s / m as f64)
    }

    pub fn kloosterman_all_inversion(&self, n: u32) -> Result<KloostermanTable> {
        if n == 0 {
            return Err(Error::ZeroOrder);
        }
        let m = self.group_order() as f64;
        let powers: Vec<Complex64> = self.gauss_sums().iter().map(|g| g.powi(n as i32)).collect();
        let values = dft::dft(&powers, Sign::Negative).into_iter().map(|z| z / m).collect();
        Ok(KloostermanTable { n, values, method: KlMethod::Inversion })
    }

    pub fn kloosterman_with(&self, n: u32, method: KlMethod) -> Result<KloostermanTable> {
        match method {
            KlMethod::Direct => self.kloosterman_all_direct(n),
            KlMethod::Convolution => self.kloosterman_all(n),
            KlMethod::Inversion => self.kloosterman_all_inversion(n),
        }
    }

    /// `I_n = Σ_{a ∈ F_q^*} Kl_n(a, q^d)`.
    pub fn aggregate_i(&self, table: &KloostermanTable) -> Complex64 {
        let s = self.tower.view.stride() as usize;
        pairwise_sum_by((self.q() - 1) as usize, |t| table.values[s * t])
    }

    /// `A_n = Σ_{a≠0, Tr(a)=0} Kl_n(a, q²)`.
    pub fn aggregate_a(&self, table: &KloostermanTable) -> Result<Complex64> {
        if self.d() != 2 {
            return Err(Error::WrongDegree { expected: 2, got: self.d() });
        }
        let terms: Vec<Complex64> = self
            .tower
            .field
            .nonzero()
            .filter(|&x| self.tower.trace_rel(x).is_zero())
            .map(|x| table.at(x).unwrap())
            .collect();
        Ok(pairwise_sum(&terms))
    }

    pub fn aggregates(&self, n_max: u32) -> Result<Vec<AggregateIA>> {
        self.kloosterman_tables(n_max)?
            .iter()
            .map(|t| {
                let a_n = if self.d() == 2 { Some(self.aggregate_a(t)?) } else { None };
                Ok(AggregateIA { d: self.d(), n: t.n, i_n: self.aggregate_i(t), a_n })
            })
            .collect()
    }

    /// Base values, the `I_n`/`A_n` cross-recurrence and the closed forms for
    /// `1 <= n <= n_max` (`d = 2`).
    pub fn check_recurrence(&self, n_max: u32, tol: f64) -> Result<RecurrenceReport> {
        if self.d() != 2 {
            return Err(Error::WrongDegree { expected: 2, got: self.d() });
        }
        let q = self.q();
        let qi = q as i128;
        let odd = self.tower.p() != 2;
        let aggs = self.aggregates(n_max)?;
        let mut rows: Vec<RecurrenceRow> = Vec::new();
        for agg in &aggs {
            let i = round_to_integer(agg.i_n);
            let a = round_to_integer(agg.a_n.unwrap());
            let n = agg.n;
            let recurrence_ok = match rows.last() {
                None if odd => i.value == -1 && a.value == qi - 1,
                None => i.value == qi - 1,
                Some(prev) if odd => i.value == qi * prev.a_n + sign_pow(n) && a.value == qi * prev.i_n + sign_pow(n),
                Some(prev) => i.value == qi * prev.i_n + sign_pow(n),
            };
            let closed_form_ok = if odd {
                i.value + a.value == closed_form_sum(q, n) && i.value - a.value == closed_form_diff(q, n)
            } else {
                i.value == closed_form_even(q, n)
            };
            rows.push(RecurrenceRow {
                n,
                i_n: i.value,
                a_n: a.value,
                residual: i.residual.max(a.residual),
                recurrence_ok,
                closed_form_ok,
            });
        }
        let max_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
        Ok(RecurrenceReport {
            q,
            p: self.tower.p(),
            numerical_ok: max_residual < tol,
            identities_ok: rows.iter().all(|r| r.recurrence_ok && r.closed_form_ok),
            rows,
            tol,
            max_residual,
        })
    }

    /// `|Kl_n(a)| <= n (q^d)^{(n-1)/2}` over every `a`, `1 <= n <= n_max`.
    pub fn check_deligne_bound(&self, n_max: u32) -> Result<DeligneReport> {
        let size = self.tower.field.size() as f64;
        let rows = self
            .kloosterman_tables(n_max)?
            .iter()
            .map(|t| {
                let bound = t.n as f64 * size.powf((t.n as f64 - 1.0) / 2.0);
                let max_abs = t.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
                let max_ratio = max_abs / bound;
                let violations = t.values.iter().filter(|z| z.norm() > bound * (1.0 + 1e-9)).count();
                DeligneRow { n: t.n, max_abs, bound, max_ratio, violations }
            })
            .collect();
        Ok(DeligneReport { field_size: self.tower.field.size(), rows })
    }

    /// `Σ_a |Kl_n(a)|² = ((Q-2) Q^n + 1)/(Q-1)` with `Q = q^d`.
    pub fn check_parseval(&self, table: &KloostermanTable) -> ParsevalReport {
        let big_q = self.tower.field.size() as f64;
        let n = table.n;
        let sq: Vec<Complex64> = table.values.iter().map(|z| Complex64::new(z.norm_sqr(), 0.0)).collect();
        let lhs = pairwise_sum(&sq).re;
        let rhs = ((big_q - 2.0) * big_q.powi(n as i32) + 1.0) / (big_q - 1.0);
        ParsevalReport { n, lhs, rhs, rel_err: (lhs - rhs).abs() / rhs }
    }

    /// `Σ_{j≠0} g(χ_j)^n = M·Kl_n(1) - (-1)^n`.
    pub fn moment_identity(&self, table: &KloostermanTable) -> IdentityReport {
        let n = table.n;
        let g = self.gauss_sums();
        let lhs = pairwise_sum_by(g.len() - 1, |i| g[i + 1].powi(n as i32));
        let m = self.group_order() as f64;
        let rhs = table.values[0] * m - sign_pow(n) as f64;
        let scale = m * self.sqrt_size().powi(n as i32);
        IdentityReport { n, lhs, rhs, rel_err: (lhs - rhs).norm() / scale }
    }

    /// `Σ_{χ ∈ C0, χ≠1} g(χ)^n = |C0|·I_n - (-1)^n`.
    pub fn c0_moment_identity(&self, table: &KloostermanTable) -> IdentityReport {
        let n = table.n;
        let g = self.gauss_sums();
        let step = (self.q() - 1) as usize;
        let c0 = self.tower.view.stride() as usize;
        let lhs = pairwise_sum_by(c0 - 1, |t| g[(t + 1) * step].powi(n as i32));
        let rhs = self.aggregate_i(table) * c0 as f64 - sign_pow(n) as f64;
        let scale = c0 as f64 * self.sqrt_size().powi(n as i32);
        IdentityReport { n, lhs, rhs, rel_err: (lhs - rhs).norm() / scale }
    }

    /// `max_j |g(χ_{qj}) - g(χ_j)|`.
    pub fn galois_invariance_deviation(&self) -> f64 {
        let g = self.gauss_sums();
        let view = &self.tower.view;
        (0..self.group_order())
            .map(|j| {
                let k = CharIndex(j).galois(view).0;
                (g[j as usize] - g[k as usize]).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `-g(χ∘N, ψ∘Tr) = (-g(χ, ψ))^d` for the base character `χ` of index
    /// `j_base` mod `q - 1`.
    pub fn check_hasse_davenport(&self, j_base: u64) -> Result<HasseDavenportReport> {
        let q = self.q();
        let base_psi = AddChar::on_base(&self.tower, self.psi.twist())?;
        let j_base = j_base % (q - 1);
        let base = gauss_sum_cyclic(q - 1, base_psi.residues(), base_psi.p(), j_base);
        let lifted = self.gauss_sum_direct(CharIndex(j_base * self.tower.view.stride()));
        let lhs = -lifted;
        let rhs = (-base).powi(self.d() as i32);
        Ok(HasseDavenportReport { j_base, n: self.d(), lhs, rhs, residual: (lhs - rhs).norm() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::prime_power;

    fn ctx(p: u64, m: u32, d: u32) -> SumContext {
        SumContext::new(Tower::new(p, m, d).unwrap()).unwrap()
    }

    fn ctx_q(q: u64, d: u32) -> SumContext {
        let (p, m) = prime_power(q).unwrap();
        ctx(p, m, d)
    }

    // Oracle: Kl_n(a) by listing all n-tuples over the nonzero elements with
    // product a, adding them in the field and evaluating ψ on the sum.
    fn kl_tuples(c: &SumContext, n: u32, a: Elem) -> Complex64 {
        let f = &c.tower().field;
        let elems: Vec<Elem> = f.nonzero().collect();
        let mut total = Complex64::new(0.0, 0.0);
        let mut idx = vec![0usize; n as usize];
        loop {
            let prod = idx.iter().fold(f.one(), |acc, &i| f.mul(acc, elems[i]));
            if prod == a {
                let s = idx.iter().fold(Elem::ZERO, |acc, &i| f.add(acc, elems[i]));
                total += c.psi().value(s);
            }
            let mut pos = 0;
            loop {
                if pos == idx.len() {
                    return total;
                }
                idx[pos] += 1;
                if idx[pos] < elems.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }

    #[test]
    fn trivial_character_gauss_sum_is_minus_one() {
        for (p, m, d) in [(3, 1, 1), (2, 3, 1), (5, 1, 2), (2, 1, 1), (7, 3, 1)] {
            let c = ctx(p, m, d);
            assert_eq!(c.gauss_sum_direct(CharIndex(0)), Complex64::new(-1.0, 0.0));
            assert_eq!(c.gauss_sums()[0], Complex64::new(-1.0, 0.0));
            // oracle: plain term-by-term sum
            let plain: Complex64 = c.psi_values().iter().sum();
            assert!((plain + 1.0).norm() < 1e-9);
        }
    }

    #[test]
    fn quadratic_gauss_sum_mod_3() {
        // e^{2πi/3} - e^{4πi/3} = i√3
        let c = ctx(3, 1, 1);
        let g = c.gauss_sum_direct(CharIndex(1));
        assert!((g - Complex64::new(0.0, 3f64.sqrt())).norm() < 1e-12);
    }

    #[test]
    fn batch_matches_direct_and_has_modulus_sqrt_q() {
        for (p, m, d) in [(2, 3, 1), (3, 1, 2), (5, 1, 2), (2, 1, 10), (3, 6, 1)] {
            let c = ctx(p, m, d);
            let batch = c.gauss_sums();
            let direct = c.gauss_sums_direct();
            let scale = c.sqrt_size();
            for j in 0..c.group_order() as usize {
                assert!((batch[j] - direct[j]).norm() < 1e-7 * scale, "{p}^{m} j={j}");
                assert!((direct[j] - c.gauss_sum_direct(CharIndex(j as u64))).norm() < 1e-9 * scale);
                if j != 0 {
                    assert!((batch[j].norm() - scale).abs() < 1e-9 * scale);
                }
            }
            // Fourier inversion at k = 0: Σ_j g(χ_j) = M ψ(1)
            let total = pairwise_sum(batch);
            let want = c.psi().value(c.tower().field.one()) * c.group_order() as f64;
            assert!((total - want).norm() < 1e-8 * c.group_order() as f64);
        }
    }

    #[test]
    fn records_carry_flags() {
        let c = ctx(3, 1, 2);
        let recs = c.gauss_records(Some(Family::Primitive)).unwrap();
        assert_eq!(recs.len(), 6);
        let all = c.gauss_records(None).unwrap();
        assert!((all[0].value + 1.0).norm() < 1e-12);
        assert_eq!(all[4].square_in_c0, Some(true));
        assert_eq!(all[2].square_in_c0, Some(false));
        assert_eq!(all[1].square_in_c0, None);
        for r in &all[1..] {
            assert!((r.normalized.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn kloosterman_small_values() {
        let c = ctx(3, 1, 1);
        let f = &c.tower().field;
        for a in f.nonzero() {
            let kl1 = c.kloosterman_direct(1, a).unwrap();
            assert!((kl1 - c.psi().value(a)).norm() < 1e-12);
        }
        // Kl_2(1) over F_3 = ψ(1+1) + ψ(2+2) = -1
        let kl2 = c.kloosterman_direct(2, f.one()).unwrap();
        assert!((kl2 + 1.0).norm() < 1e-12);
        let table = c.kloosterman_all(2).unwrap();
        assert!((table.at(f.one()).unwrap() + 1.0).norm() < 1e-12);
        assert!(matches!(c.kloosterman_direct(0, f.one()), Err(Error::ZeroOrder)));
    }

    #[test]
    fn direct_route_matches_tuple_oracle() {
        for (p, m, n) in [(3u64, 1u32, 3u32), (5, 1, 3), (2, 2, 3), (3, 2, 2), (7, 1, 2)] {
            let c = ctx(p, m, 1);
            for a in c.tower().field.nonzero() {
                let want = kl_tuples(&c, n, a);
                assert!((c.kloosterman_direct(n, a).unwrap() - want).norm() < 1e-9, "{p}^{m} n={n}");
            }
        }
    }

    #[test]
    fn three_routes_agree() {
        for q in [4u64, 5, 7, 8, 9, 11, 13, 16, 25, 27, 32, 49, 64, 81, 121, 125] {
            let c = ctx_q(q, 1);
            for n in 1..=3u32 {
                let conv = c.kloosterman_all(n).unwrap();
                let inv = c.kloosterman_all_inversion(n).unwrap();
                let direct = c.kloosterman_all_direct(n).unwrap();
                let tol = 1e-7 * (q as f64).powf(n as f64 / 2.0);
                assert!(conv.max_deviation(&direct) < tol, "q={q} n={n}");
                assert!(inv.max_deviation(&direct) < tol, "q={q} n={n}");
                let a = c.tower().field.from_log(3);
                assert!((c.kloosterman_via_inversion(n, a).unwrap() - direct.at(a).unwrap()).norm() < tol);
            }
        }
    }

    #[test]
    fn kloosterman_sum_rule() {
        for (q, d) in [(3u64, 2u32), (5, 1), (4, 2), (2, 3)] {
            let c = ctx_q(q, d);
            for t in c.kloosterman_tables(4).unwrap() {
                let s = pairwise_sum(&t.values);
                assert!((s - sign_pow(t.n) as f64).norm() < 1e-8 * c.group_order() as f64);
            }
        }
    }

    #[test]
    fn work_guard() {
        let c = ctx(7, 2, 1).with_max_work(1000);
        let one = c.tower().field.one();
        assert!(matches!(c.kloosterman_direct(3, one), Err(Error::WorkGuard { .. })));
        assert!(c.kloosterman_direct(2, one).is_ok());
    }

    #[test]
    fn aggregates_base_values() {
        for q in [3u64, 5, 7, 9] {
            let c = ctx_q(q, 2);
            let agg = &c.aggregates(1).unwrap()[0];
            assert_eq!(round_to_integer(agg.i_n).value, -1);
            assert_eq!(round_to_integer(agg.a_n.unwrap()).value, q as i128 - 1);
        }
        for q in [2u64, 4, 8] {
            let c = ctx_q(q, 2);
            let agg = &c.aggregates(1).unwrap()[0];
            assert_eq!(round_to_integer(agg.i_n).value, q as i128 - 1);
        }
        assert!(matches!(
            ctx(3, 1, 3).aggregate_a(&ctx(3, 1, 3).kloosterman_all(1).unwrap()),
            Err(Error::WrongDegree { .. })
        ));
    }

    #[test]
    fn closed_forms_against_brute_force() {
        // oracle: I_n, A_n straight from the tuple enumeration for q = 3, 5
        for q in [3u64, 5] {
            let c = ctx_q(q, 2);
            let f = &c.tower().field;
            for n in 1..=2u32 {
                let mut i_n = Complex64::new(0.0, 0.0);
                let mut a_n = Complex64::new(0.0, 0.0);
                for a in f.nonzero() {
                    let kl = kl_tuples(&c, n, a);
                    if c.tower().view.contains(a) {
                        i_n += kl;
                    }
                    if c.tower().trace_rel(a).is_zero() {
                        a_n += kl;
                    }
                }
                let (i, a) = (round_to_integer(i_n).value, round_to_integer(a_n).value);
                assert_eq!(i + a, closed_form_sum(q, n), "q={q} n={n}");
                assert_eq!(i - a, closed_form_diff(q, n));
            }
        }
        // q = 5, n = 2: I_2 = 21, A_2 = -4
        assert_eq!(closed_form_sum(5, 2), 17);
        assert_eq!(closed_form_even(4, 2), 13);
    }

    #[test]
    fn recurrence_report() {
        let c = ctx(3, 1, 2);
        let rep = c.check_recurrence(5, 1e-6).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert_eq!((rep.rows[1].i_n, rep.rows[1].a_n), (7, -2));
        for r in &rep.rows {
            assert_eq!(r.i_n - r.a_n, (-3i128).pow(r.n));
        }
        let c4 = ctx(2, 2, 2);
        let rep4 = c4.check_recurrence(4, 1e-6).unwrap();
        assert!(rep4.passed());
        assert_eq!(rep4.rows[1].i_n, 13);
    }

    #[test]
    fn deligne_and_parseval() {
        let c = ctx(3, 2, 1);
        let rep = c.check_deligne_bound(3).unwrap();
        assert_eq!(rep.violations(), 0);
        assert!((rep.rows[0].max_ratio - 1.0).abs() < 1e-12);
        assert!(rep.rows[1].max_abs <= 6.0);
        let c25 = ctx(5, 2, 1);
        assert!(c25.check_deligne_bound(3).unwrap().rows[2].max_abs <= 75.0);
        // Q = 9, n = 2: ((9-2)81 + 1)/8 = 71; Q = 5, n = 3: 94
        let p9 = c.check_parseval(&c.kloosterman_all_direct(2).unwrap());
        assert!((p9.rhs - 71.0).abs() < 1e-12 && p9.rel_err < 1e-9);
        let c5 = ctx(5, 1, 1);
        let p5 = c5.check_parseval(&c5.kloosterman_all_direct(3).unwrap());
        assert!((p5.rhs - 94.0).abs() < 1e-12 && p5.rel_err < 1e-9);
        let p1 = c5.check_parseval(&c5.kloosterman_all(1).unwrap());
        assert!((p1.lhs - 4.0).abs() < 1e-12);
    }

    #[test]
    fn fourier_moment_identities() {
        for (q, d) in [(2u64, 3u32), (3, 2), (5, 2), (3, 3), (7, 2)] {
            let c = ctx_q(q, d);
            for t in c.kloosterman_tables(5).unwrap() {
                assert!(c.moment_identity(&t).rel_err < 1e-6);
                assert!(c.c0_moment_identity(&t).rel_err < 1e-6);
            }
        }
    }

    #[test]
    fn galois_invariance() {
        for (p, m, d) in [(2u64, 1u32, 10u32), (3, 1, 4), (5, 1, 2)] {
            let c = ctx(p, m, d);
            assert!(c.galois_invariance_deviation() < 1e-7 * c.sqrt_size());
        }
    }

    #[test]
    fn hasse_davenport() {
        // quadratic over F_3: (-i√3)² = -3 on the right-hand side
        let c = ctx(3, 1, 2);
        let rep = c.check_hasse_davenport(1).unwrap();
        assert!((rep.rhs + 3.0).norm() < 1e-12);
        assert!(rep.residual < 1e-9);
        let triv = c.check_hasse_davenport(0).unwrap();
        assert!((triv.lhs - 1.0).norm() < 1e-12 && (triv.rhs - 1.0).norm() < 1e-12);
        let c3 = ctx(5, 1, 3);
        assert!(c3.check_hasse_davenport(1).unwrap().residual < 1e-7 * 5f64.powf(1.5));
    }
}
