use std::fmt;

use super::poly::{self, checked_size, find_irreducible, frobenius_sum, pow_mod_coords, prime_factors};
use crate::error::{Error, Result};

/// Default bound on `p^m` for in-memory tables.
pub const DEFAULT_MAX_SIZE: u64 = 1 << 22;

/// A nonzero field element stored as its discrete log `k` (the element
/// `g^k`), or the distinguished zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Elem(u32);

impl Elem {
    pub const ZERO: Elem = Elem(u32::MAX);

    pub fn is_zero(self) -> bool {
        self.0 == u32::MAX
    }

    /// Discrete log with respect to the table's generator.
    pub fn log(self) -> Option<u64> {
        (!self.is_zero()).then_some(self.0 as u64)
    }
}

/// Serialized as the discrete log, or `null` for zero.
impl serde::Serialize for Elem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.log().serialize(s)
    }
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.log() {
            Some(k) => write!(f, "g^{k}"),
            None => write!(f, "0"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldParams {
    pub p: u64,
    pub m: u32,
    pub size: u64,
    /// Monic modulus, low degree first, `m + 1` coefficients.
    pub modulus: Vec<u64>,
}

impl FieldParams {
    pub fn new(p: u64, m: u32, max_size: u64) -> Result<Self> {
        let size = checked_size(p, m, max_size)?;
        let modulus = find_irreducible(p, m, max_size)?;
        Ok(FieldParams { p, m, size, modulus })
    }
}

const NO_LOG: u32 = u32::MAX;

/// `F_{p^m}` in discrete-log form.
///
/// Elements have a coordinate code `sum c_i p^i` in the polynomial basis
/// `1, x, ..., x^{m-1}` modulo the canonical irreducible modulus. The tables
/// map log indices to codes and back, carry the absolute trace of every
/// nonzero element and the Zech logarithms `log(1 + g^k)`.
#[derive(Clone)]
pub struct FieldTable {
    params: FieldParams,
    generator_code: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
    trace: Vec<u32>,
    zech: Vec<u32>,
}

impl fmt::Debug for FieldTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldTable")
            .field("p", &self.params.p)
            .field("m", &self.params.m)
            .field("modulus", &poly::format_poly(&self.params.modulus))
            .field("generator_code", &self.generator_code)
            .finish()
    }
}

fn decode(code: u64, p: u64, m: usize) -> Vec<u64> {
    let mut out = vec![0; m];
    let mut r = code;
    for c in out.iter_mut() {
        *c = r % p;
        r /= p;
    }
    out
}

fn encode(coords: &[u64], p: u64) -> u64 {
    coords.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// Smallest code whose element has multiplicative order exactly `p^m - 1`.
fn find_generator(params: &FieldParams) -> Result<u64> {
    let (p, m) = (params.p, params.m as usize);
    let order = params.size - 1;
    let factors = prime_factors(order);
    let mut one = vec![0u64; m];
    one[0] = 1;
    for code in 1..params.size {
        let g = decode(code, p, m);
        if factors.iter().all(|&r| pow_mod_coords(&g, order / r, &params.modulus, p) != one) {
            return Ok(code);
        }
    }
    Err(Error::NoGenerator { p, m: params.m })
}

impl FieldTable {
    pub fn build(p: u64, m: u32) -> Result<Self> {
        Self::build_with_limit(p, m, DEFAULT_MAX_SIZE)
    }

    pub fn build_with_limit(p: u64, m: u32, max_size: u64) -> Result<Self> {
        let params = FieldParams::new(p, m, max_size)?;
        let generator = find_generator(&params)?;
        let md = m as usize;

        // Tr(x^i) for the basis; the trace of any element is then linear in
        // its coordinates.
        let basis_trace: Vec<u64> = (0..md)
            .map(|i| {
                let mut mono = vec![0u64; i + 1];
                mono[i] = 1;
                let t = frobenius_sum(&mono, md, &params.modulus, p);
                debug_assert!(t[1..].iter().all(|&c| c == 0));
                t[0]
            })
            .collect();

        let order = (params.size - 1) as usize;
        let g = decode(generator, p, md);
        let g_terms: Vec<(usize, u64)> = g.iter().enumerate().filter(|(_, &c)| c != 0).map(|(i, &c)| (i, c)).collect();
        let mut exp = Vec::with_capacity(order);
        let mut trace = Vec::with_capacity(order);
        let mut cur = vec![0u64; md];
        cur[0] = 1;
        let mut wide = vec![0u64; 2 * md];
        for _ in 0..order {
            exp.push(encode(&cur, p) as u32);
            let t = cur.iter().zip(&basis_trace).fold(0, |acc, (&c, &b)| (acc + c * b) % p);
            trace.push(t as u32);

            wide.iter_mut().for_each(|w| *w = 0);
            for &(i, gi) in &g_terms {
                for (j, &cj) in cur.iter().enumerate() {
                    wide[i + j] = (wide[i + j] + gi * cj) % p;
                }
            }
            for top in (md..wide.len()).rev() {
                let c = wide[top];
                if c == 0 {
                    continue;
                }
                wide[top] = 0;
                for (i, &fi) in params.modulus[..md].iter().enumerate() {
                    let idx = top - md + i;
                    wide[idx] = (wide[idx] + (p - c) * fi) % p;
                }
            }
            cur.copy_from_slice(&wide[..md]);
        }
        Self::from_parts(params, generator as u32, exp, trace)
    }

    pub(crate) fn generator_code_for(params: &FieldParams) -> Result<u32> {
        find_generator(params).map(|c| c as u32)
    }

    pub(crate) fn from_parts(params: FieldParams, generator_code: u32, exp: Vec<u32>, trace: Vec<u32>) -> Result<Self> {
        let (p, m) = (params.p, params.m);
        let size = params.size as usize;
        if exp.len() != size - 1 || trace.len() != size - 1 {
            return Err(Error::NoGenerator { p, m });
        }
        let mut log = vec![NO_LOG; size];
        for (k, &code) in exp.iter().enumerate() {
            let slot = log.get_mut(code as usize).ok_or(Error::NoGenerator { p, m })?;
            if code == 0 || *slot != NO_LOG {
                return Err(Error::NoGenerator { p, m });
            }
            *slot = k as u32;
        }
        let zech = exp
            .iter()
            .map(|&code| {
                let code = code as u64;
                let c0 = code % p;
                let shifted = code - c0 + (c0 + 1) % p;
                log[shifted as usize]
            })
            .collect();
        Ok(FieldTable { params, generator_code, exp, log, trace, zech })
    }

    pub fn params(&self) -> &FieldParams {
        &self.params
    }

    pub fn p(&self) -> u64 {
        self.params.p
    }

    pub fn m(&self) -> u32 {
        self.params.m
    }

    pub fn size(&self) -> u64 {
        self.params.size
    }

    /// `M = p^m - 1`, the order of the multiplicative group.
    pub fn group_order(&self) -> u64 {
        self.params.size - 1
    }

    pub fn generator_code(&self) -> u32 {
        self.generator_code
    }

    pub(crate) fn exp_codes(&self) -> &[u32] {
        &self.exp
    }

    pub(crate) fn trace_values(&self) -> &[u32] {
        &self.trace
    }

    pub fn zero(&self) -> Elem {
        Elem::ZERO
    }

    pub fn one(&self) -> Elem {
        Elem(0)
    }

    pub fn generator(&self) -> Elem {
        self.from_log(1)
    }

    pub fn from_log(&self, k: u64) -> Elem {
        Elem((k % self.group_order()) as u32)
    }

    pub fn from_code(&self, code: u64) -> Elem {
        assert!(code < self.size(), "code {code} out of range");
        if code == 0 {
            Elem::ZERO
        } else {
            Elem(self.log[code as usize])
        }
    }

    /// The prime-field element `n mod p` (a constant polynomial).
    pub fn from_int(&self, n: u64) -> Elem {
        self.from_code(n % self.p())
    }

    pub fn code(&self, x: Elem) -> u64 {
        match x.log() {
            None => 0,
            Some(k) => self.exp[k as usize] as u64,
        }
    }

    pub fn coords(&self, x: Elem) -> Vec<u64> {
        decode(self.code(x), self.p(), self.m() as usize)
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        match (a.log(), b.log()) {
            (Some(i), Some(j)) => self.from_log(i + j),
            _ => Elem::ZERO,
        }
    }

    pub fn inv(&self, a: Elem) -> Option<Elem> {
        let k = a.log()?;
        Some(self.from_log(self.group_order() - k))
    }

    pub fn div(&self, a: Elem, b: Elem) -> Option<Elem> {
        Some(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Elem, e: i64) -> Elem {
        match a.log() {
            None if e == 0 => self.one(),
            None => Elem::ZERO,
            Some(k) => {
                let m = self.group_order() as i128;
                let t = (k as i128 * e as i128).rem_euclid(m);
                self.from_log(t as u64)
            }
        }
    }

    /// Addition through the Zech table: `a + b = a (1 + b/a)`.
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        let (i, j) = match (a.log(), b.log()) {
            (None, _) => return b,
            (_, None) => return a,
            (Some(i), Some(j)) => (i, j),
        };
        let m = self.group_order();
        let diff = (j + m - i) % m;
        match self.zech[diff as usize] {
            NO_LOG => Elem::ZERO,
            z => self.from_log(i + z as u64),
        }
    }

    pub fn minus_one(&self) -> Elem {
        if self.p() == 2 {
            self.one()
        } else {
            self.from_log(self.group_order() / 2)
        }
    }

    pub fn neg(&self, a: Elem) -> Elem {
        self.mul(a, self.minus_one())
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    /// `x^{p^e}`.
    pub fn frobenius_p(&self, x: Elem, e: u32) -> Elem {
        match x.log() {
            None => Elem::ZERO,
            Some(k) => {
                let m = self.group_order();
                let mut t = k % m;
                for _ in 0..e {
                    t = (t * self.p()) % m;
                }
                self.from_log(t)
            }
        }
    }

    /// Absolute trace `Tr_{F_{p^m}/F_p}(x)` as an integer in `0..p`.
    pub fn trace_abs(&self, x: Elem) -> u64 {
        match x.log() {
            None => 0,
            Some(k) => self.trace[k as usize] as u64,
        }
    }

    /// Zech logarithm `log(1 + g^k)`, `None` when `1 + g^k = 0`.
    pub fn zech(&self, k: u64) -> Option<u64> {
        match self.zech[(k % self.group_order()) as usize] {
            NO_LOG => None,
            z => Some(z as u64),
        }
    }

    pub fn nonzero(&self) -> impl Iterator<Item = Elem> + '_ {
        (0..self.group_order()).map(|k| self.from_log(k))
    }

    pub fn modulus_string(&self) -> String {
        poly::format_poly(&self.params.modulus)
    }

    /// Human readable generator, e.g. `x + 1`.
    pub fn generator_string(&self) -> String {
        poly::format_poly(&decode(self.generator_code as u64, self.p(), self.m() as usize))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Schoolbook multiplication on coordinates, independent of the tables.
    fn mul_coords(a: &[u64], b: &[u64], modulus: &[u64], p: u64) -> Vec<u64> {
        let m = modulus.len() - 1;
        let mut wide = vec![0u64; 2 * m];
        for i in 0..m {
            for j in 0..m {
                wide[i + j] = (wide[i + j] + a[i] * b[j]) % p;
            }
        }
        for top in (m..2 * m).rev() {
            let c = wide[top];
            wide[top] = 0;
            for i in 0..m {
                wide[top - m + i] = (wide[top - m + i] + (p - c) * modulus[i]) % p;
            }
        }
        wide.truncate(m);
        wide
    }

    #[test]
    fn generator_of_f9_is_x_plus_one() {
        let f = FieldTable::build(3, 2).unwrap();
        assert_eq!(f.modulus_string(), "x^2 + 1");
        assert_eq!(f.generator_string(), "x + 1");
        // (x+1)^4 = -1 and (x+1)^8 = 1, by repeated coordinate products.
        let g = vec![1, 1];
        let mut acc = vec![1, 0];
        for step in 1..=8 {
            acc = mul_coords(&acc, &g, &f.params.modulus, 3);
            if step == 4 {
                assert_eq!(acc, vec![2, 0]);
            }
        }
        assert_eq!(acc, vec![1, 0]);
        // x itself has order 4
        let x = f.from_code(3);
        assert_eq!(f.pow(x, 4), f.one());
    }

    #[test]
    fn tiny_prime_fields() {
        let f2 = FieldTable::build(2, 1).unwrap();
        assert_eq!(f2.group_order(), 1);
        assert_eq!(f2.generator_code(), 1);
        let f5 = FieldTable::build(5, 1).unwrap();
        assert_eq!(f5.group_order(), 4);
        assert_eq!(f5.generator_code(), 2);
        assert_eq!(f5.trace_abs(f5.from_int(3)), 3);
    }

    #[test]
    fn exp_log_and_zech_consistent() {
        for (p, m) in [(2, 5), (3, 3), (5, 2), (7, 1), (2, 1), (13, 2)] {
            let f = FieldTable::build(p, m).unwrap();
            for x in f.nonzero() {
                assert_eq!(f.from_code(f.code(x)), x);
            }
            let one = f.coords(f.one());
            for k in 0..f.group_order() {
                let y = f.coords(f.from_log(k));
                let sum: Vec<u64> = y.iter().zip(&one).map(|(a, b)| (a + b) % p).collect();
                let expect = f.from_code(encode(&sum, p));
                assert_eq!(f.add(f.one(), f.from_log(k)), expect);
            }
        }
    }

    #[test]
    fn multiplication_matches_coordinates() {
        let f = FieldTable::build(3, 4).unwrap();
        let modulus = f.params.modulus.clone();
        for a in (0..f.group_order()).step_by(7) {
            for b in (0..f.group_order()).step_by(11) {
                let (x, y) = (f.from_log(a), f.from_log(b));
                let prod = mul_coords(&f.coords(x), &f.coords(y), &modulus, 3);
                assert_eq!(f.coords(f.mul(x, y)), prod);
            }
        }
    }

    #[test]
    fn trace_fibers_are_uniform() {
        for (p, m) in [(2u64, 6u32), (3, 4), (5, 3)] {
            let f = FieldTable::build(p, m).unwrap();
            let mut counts = vec![0u64; p as usize];
            counts[0] += 1; // zero
            for x in f.nonzero() {
                counts[f.trace_abs(x) as usize] += 1;
            }
            assert!(counts.iter().all(|&c| c == p.pow(m - 1)), "{counts:?}");
        }
    }

    #[test]
    fn trace_is_additive_and_frobenius_stable() {
        let f = FieldTable::build(5, 3).unwrap();
        let p = f.p();
        for a in (0..f.group_order()).step_by(5) {
            let x = f.from_log(a);
            assert_eq!(f.trace_abs(f.frobenius_p(x, 1)), f.trace_abs(x));
            for b in (0..f.group_order()).step_by(13) {
                let y = f.from_log(b);
                let s = f.add(x, y);
                assert_eq!(f.trace_abs(s), (f.trace_abs(x) + f.trace_abs(y)) % p);
            }
        }
    }

    #[test]
    fn arithmetic_identities() {
        let f = FieldTable::build(7, 2).unwrap();
        for x in f.nonzero() {
            assert_eq!(f.add(x, f.neg(x)), Elem::ZERO);
            assert_eq!(f.mul(x, f.inv(x).unwrap()), f.one());
            assert_eq!(f.frobenius_p(x, 2), x);
        }
        assert_eq!(f.add(f.minus_one(), f.one()), Elem::ZERO);
        assert_eq!(f.from_int(7), Elem::ZERO);
    }

    #[test]
    fn size_guard_is_enforced() {
        assert!(matches!(FieldTable::build_with_limit(3, 5, 100), Err(Error::SizeGuard { .. })));
    }
}
