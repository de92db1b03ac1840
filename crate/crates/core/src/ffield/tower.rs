use std::path::Path;

use super::cache;
use super::table::{Elem, FieldTable, DEFAULT_MAX_SIZE};
use crate::error::{Error, Result};

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    r
}

/// The base field `F_q` inside `F_{q^d}`: `F_q^* = { g^{s t} }` with stride
/// `s = (q^d - 1)/(q - 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SubfieldView {
    q: u64,
    d: u32,
    stride: u64,
    group_order: u64,
}

impl SubfieldView {
    pub fn new(field: &FieldTable, base_m: u32, d: u32) -> Result<Self> {
        if base_m == 0 || d == 0 {
            return Err(Error::ZeroDegree);
        }
        if base_m * d != field.m() {
            return Err(Error::Invalid(format!(
                "F_{{p^{base_m}}} with d={d} does not match a field of degree {}",
                field.m()
            )));
        }
        let q = field.p().pow(base_m);
        let group_order = field.group_order();
        Ok(SubfieldView { q, d, stride: group_order / (q - 1), group_order })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn stride(&self) -> u64 {
        self.stride
    }

    /// `q^d - 1`.
    pub fn group_order(&self) -> u64 {
        self.group_order
    }

    /// `q^e mod (q^d - 1)`, the multiplier on log indices for `x -> x^{q^e}`.
    pub fn frobenius_multiplier(&self, e: u32) -> u64 {
        pow_mod(self.q, e as u64, self.group_order)
    }

    pub fn contains(&self, x: Elem) -> bool {
        x.log().is_none_or(|k| k % self.stride == 0)
    }

    /// `t` with `x = g^{s t}`, for nonzero `x` in the base field.
    pub fn base_log(&self, x: Elem) -> Option<u64> {
        let k = x.log()?;
        (k % self.stride == 0).then(|| k / self.stride)
    }

    pub fn base_elem(&self, field: &FieldTable, t: u64) -> Elem {
        field.from_log(self.stride * (t % (self.q - 1)))
    }

    /// The `q - 1` nonzero elements of `F_q`, ordered by base log.
    pub fn base_nonzero<'a>(&'a self, field: &'a FieldTable) -> impl Iterator<Item = Elem> + 'a {
        (0..self.q - 1).map(move |t| self.base_elem(field, t))
    }

    /// `x^{q^e}`.
    pub fn frobenius(&self, field: &FieldTable, x: Elem, e: u32) -> Elem {
        match x.log() {
            None => Elem::ZERO,
            Some(k) => {
                let mult = self.frobenius_multiplier(e) as u128;
                field.from_log((k as u128 * mult % self.group_order as u128) as u64)
            }
        }
    }

    /// `Tr_{F_{q^d}/F_q}(x) = sum_{i<d} x^{q^i}`.
    pub fn trace_rel(&self, field: &FieldTable, x: Elem) -> Elem {
        (0..self.d).fold(Elem::ZERO, |acc, i| field.add(acc, self.frobenius(field, x, i)))
    }

    /// `N_{F_{q^d}/F_q}(x) = x^{(q^d-1)/(q-1)}`.
    pub fn norm_rel(&self, field: &FieldTable, x: Elem) -> Elem {
        match x.log() {
            None => Elem::ZERO,
            Some(k) => field.from_log((k as u128 * self.stride as u128 % self.group_order as u128) as u64),
        }
    }

    /// `Tr_{F_q/F_p}(y)` for `y` in the base field, as an integer mod `p`.
    pub fn base_trace_abs(&self, field: &FieldTable, y: Elem) -> u64 {
        debug_assert!(self.contains(y));
        let base_m = field.m() / self.d;
        let t = (0..base_m).fold(Elem::ZERO, |acc, i| field.add(acc, field.frobenius_p(y, i)));
        // prime-field elements are constants, so the code is the residue
        field.code(t)
    }
}

#[derive(Clone, Debug, Default)]
pub struct FieldOptions {
    pub max_size: Option<u64>,
    pub cache_dir: Option<std::path::PathBuf>,
}

impl FieldOptions {
    pub fn limit(&self) -> u64 {
        self.max_size.unwrap_or(DEFAULT_MAX_SIZE)
    }
}

/// `F_{q^d}` with `q = p^m`, realised as the single field `F_{p^{m d}}`.
#[derive(Clone, Debug)]
pub struct Tower {
    pub field: FieldTable,
    pub view: SubfieldView,
}

impl Tower {
    pub fn new(p: u64, m: u32, d: u32) -> Result<Self> {
        Self::with_options(p, m, d, &FieldOptions::default())
    }

    pub fn with_options(p: u64, m: u32, d: u32, opts: &FieldOptions) -> Result<Self> {
        if m == 0 || d == 0 {
            return Err(Error::ZeroDegree);
        }
        let total = m.checked_mul(d).ok_or(Error::SizeGuard { p, m: u32::MAX, limit: opts.limit() })?;
        let field = load_or_build(p, total, opts.limit(), opts.cache_dir.as_deref())?;
        let view = SubfieldView::new(&field, m, d)?;
        Ok(Tower { field, view })
    }

    pub fn p(&self) -> u64 {
        self.field.p()
    }

    pub fn q(&self) -> u64 {
        self.view.q()
    }

    pub fn d(&self) -> u32 {
        self.view.d()
    }

    pub fn base_m(&self) -> u32 {
        self.field.m() / self.view.d()
    }

    pub fn group_order(&self) -> u64 {
        self.field.group_order()
    }

    pub fn trace_rel(&self, x: Elem) -> Elem {
        self.view.trace_rel(&self.field, x)
    }

    pub fn norm_rel(&self, x: Elem) -> Elem {
        self.view.norm_rel(&self.field, x)
    }

    pub fn frobenius(&self, x: Elem, e: u32) -> Elem {
        self.view.frobenius(&self.field, x, e)
    }
}

/// Builds `F_{p^m}`, reading and writing `<cache_dir>/f_<p>_<m>.tbl` when a
/// cache directory is given. A stale or unreadable cache file is rebuilt.
pub fn load_or_build(p: u64, m: u32, limit: u64, cache_dir: Option<&Path>) -> Result<FieldTable> {
    let Some(dir) = cache_dir else {
        return FieldTable::build_with_limit(p, m, limit);
    };
    let params = super::table::FieldParams::new(p, m, limit)?;
    let path = cache::cache_path(dir, p, m);
    if let Ok(table) = cache::read(&path, &params) {
        return Ok(table);
    }
    let table = FieldTable::build_with_limit(p, m, limit)?;
    if cache::supported(&table) {
        cache::write(&path, &table)?;
    }
    Ok(table)
}
