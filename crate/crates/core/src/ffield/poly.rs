//! Dense polynomials over `Z/p`, coefficients stored low degree first.

use crate::error::{Error, Result};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Distinct prime factors of `n`, ascending.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Splits a prime power into `(p, m)`; `None` if `n` is not one.
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    let f = prime_factors(n);
    if f.len() != 1 {
        return None;
    }
    let p = f[0];
    let mut m = 0;
    let mut r = n;
    while r > 1 {
        r /= p;
        m += 1;
    }
    Some((p, m))
}

/// `p^m` if it does not exceed `limit`.
pub(crate) fn checked_size(p: u64, m: u32, limit: u64) -> Result<u64> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if m == 0 {
        return Err(Error::ZeroDegree);
    }
    let guard = Error::SizeGuard { p, m, limit };
    let size = p.checked_pow(m).ok_or(guard)?;
    if size > limit {
        return Err(Error::SizeGuard { p, m, limit });
    }
    Ok(size)
}

fn trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let mut r = 1u64;
    let mut b = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

/// Remainder of `a` modulo the monic or non-monic nonzero `f`.
fn rem(mut a: Vec<u64>, f: &[u64], p: u64) -> Vec<u64> {
    trim(&mut a);
    let df = f.len() - 1;
    let lead_inv = inv_mod(f[df], p);
    while a.len() > df {
        let top = a.len() - 1;
        let c = a[top] * lead_inv % p;
        if c != 0 {
            for (i, &fi) in f.iter().enumerate() {
                let idx = top - df + i;
                a[idx] = (a[idx] + (p - c) * fi % p) % p;
            }
        }
        trim(&mut a);
    }
    a
}

fn mul_mod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + ai * bj) % p;
        }
    }
    rem(out, f, p)
}

fn pow_mod(base: &[u64], mut e: u64, f: &[u64], p: u64) -> Vec<u64> {
    let mut result = rem(vec![1], f, p);
    let mut b = rem(base.to_vec(), f, p);
    while e > 0 {
        if e & 1 == 1 {
            result = mul_mod(&result, &b, f, p);
        }
        b = mul_mod(&b, &b, f, p);
        e >>= 1;
    }
    result
}

fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = rem(a, &b, p);
        a = b;
        b = r;
    }
    a
}

fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out: Vec<u64> = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(&mut out);
    out
}

/// Irreducibility over `Z/p` for a monic `f` of degree `m >= 1`:
/// `gcd(x^{p^k} - x, f) = 1` for `0 < k < m` and `x^{p^m} = x mod f`.
pub fn is_irreducible(f: &[u64], p: u64) -> bool {
    let m = f.len() - 1;
    if m == 0 {
        return false;
    }
    if m == 1 {
        return true;
    }
    let x = rem(vec![0, 1], f, p);
    let mut h = x.clone();
    for k in 1..=m {
        h = pow_mod(&h, p, f, p);
        if k < m {
            let g = gcd(&sub(&h, &x, p), f, p);
            if g.len() != 1 {
                return false;
            }
        }
    }
    h == x
}

/// Lexicographically smallest monic irreducible polynomial of degree `m`
/// over `Z/p`. Candidates are ordered by their coefficient vectors read from
/// the constant term upwards, so for `(3, 2)` the scan visits `x^2`,
/// `x^2 + x`, `x^2 + 2x` before accepting `x^2 + 1`.
pub fn find_irreducible(p: u64, m: u32, limit: u64) -> Result<Vec<u64>> {
    let size = checked_size(p, m, limit)?;
    let m = m as usize;
    for idx in 0..size {
        let mut coeffs = vec![0u64; m + 1];
        let mut r = idx;
        for i in (0..m).rev() {
            coeffs[i] = r % p;
            r /= p;
        }
        coeffs[m] = 1;
        if m > 1 && coeffs[0] == 0 {
            continue;
        }
        if is_irreducible(&coeffs, p) {
            return Ok(coeffs);
        }
    }
    Err(Error::NoGenerator { p, m: m as u32 })
}

/// `base^e mod f` exposed for generator searches on coordinate vectors.
pub(crate) fn pow_mod_coords(base: &[u64], e: u64, f: &[u64], p: u64) -> Vec<u64> {
    let mut r = pow_mod(base, e, f, p);
    r.resize(f.len() - 1, 0);
    r
}

pub(crate) fn frobenius_sum(base: &[u64], count: usize, f: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![0u64; f.len() - 1];
    let mut t = rem(base.to_vec(), f, p);
    for step in 0..count {
        for (i, &c) in t.iter().enumerate() {
            acc[i] = (acc[i] + c) % p;
        }
        if step + 1 < count {
            t = pow_mod(&t, p, f, p);
        }
    }
    acc
}

pub fn format_poly(coeffs: &[u64]) -> String {
    let mut terms = Vec::new();
    for (i, &c) in coeffs.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let mono = match i {
            0 => String::new(),
            1 => "x".to_string(),
            _ => format!("x^{i}"),
        };
        let term = match (c, i) {
            (_, 0) => c.to_string(),
            (1, _) => mono,
            _ => format!("{c}{mono}"),
        };
        terms.push(term);
    }
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join(" + ")
    }
}
