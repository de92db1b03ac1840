//! Arbitrary-length DFTs and cyclic convolutions.
//!
//! Lengths here are `q^d - 1`, which are rarely smooth, so the fast path is
//! the chirp-z (Bluestein) transform: the DFT is rewritten as a linear
//! convolution with the chirp `e^{±iπ n²/N}` and evaluated with power-of-two
//! FFTs. Short inputs use the direct `O(N²)` sum.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlannerScalar;

/// Below this length the direct transform is used.
pub const DIRECT_CUTOFF: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    /// `X_j = sum_k x_k e^{-2πi jk/N}`
    Negative,
    /// `X_j = sum_k x_k e^{+2πi jk/N}`
    Positive,
}

impl Sign {
    fn as_f64(self) -> f64 {
        match self {
            Sign::Negative => -1.0,
            Sign::Positive => 1.0,
        }
    }
}

/// `e^{2πi num/den}`, exact at multiples of a quarter turn.
pub fn unit_root(num: u64, den: u64) -> Complex64 {
    let r = num % den;
    if (4 * r as u128).is_multiple_of(den as u128) {
        return match (4 * r as u128 / den as u128) as u8 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    // reduce to (-1/2, 1/2] turns before scaling
    let signed = if 2 * r > den { r as f64 - den as f64 } else { r as f64 };
    let (s, c) = (2.0 * PI * signed / den as f64).sin_cos();
    Complex64::new(c, s)
}

/// All `N`-th roots of unity `e^{2πi k/N}`.
pub fn root_table(n: u64) -> Vec<Complex64> {
    (0..n).map(|k| unit_root(k, n)).collect()
}

/// Fixed-order pairwise (tree) summation.
pub fn pairwise_sum(xs: &[Complex64]) -> Complex64 {
    const LEAF: usize = 16;
    if xs.len() <= LEAF {
        return xs.iter().fold(Complex64::new(0.0, 0.0), |a, &b| a + b);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Pairwise sum of `f(i)` for `i` in `0..n`, without materialising the terms.
pub fn pairwise_sum_by<F: Fn(usize) -> Complex64>(n: usize, f: F) -> Complex64 {
    fn go<F: Fn(usize) -> Complex64>(lo: usize, hi: usize, f: &F) -> Complex64 {
        if hi - lo <= 16 {
            return (lo..hi).fold(Complex64::new(0.0, 0.0), |a, i| a + f(i));
        }
        let mid = lo + (hi - lo) / 2;
        go(lo, mid, f) + go(mid, hi, f)
    }
    go(0, n, &f)
}

pub fn dft_direct(input: &[Complex64], sign: Sign) -> Vec<Complex64> {
    let n = input.len();
    if n == 0 {
        return Vec::new();
    }
    let roots = root_table(n as u64);
    (0..n)
        .map(|j| {
            pairwise_sum_by(n, |k| {
                let idx = (j as u64 * k as u64 % n as u64) as usize;
                let w = match sign {
                    Sign::Positive => roots[idx],
                    Sign::Negative => roots[(n - idx) % n],
                };
                input[k] * w
            })
        })
        .collect()
}

/// Bluestein's chirp-z evaluation of the length-`N` DFT.
pub fn dft_chirp(input: &[Complex64], sign: Sign) -> Vec<Complex64> {
    let n = input.len();
    if n <= 1 {
        return input.to_vec();
    }
    let two_n = 2 * n as u64;
    let s = sign.as_f64();
    // chirp c_k = e^{± iπ k²/N}; k² is reduced mod 2N so the angle stays small
    let chirp: Vec<Complex64> = (0..n as u64)
        .map(|k| {
            let r = (k as u128 * k as u128 % two_n as u128) as u64;
            let c = unit_root(r, two_n);
            Complex64::new(c.re, s * c.im)
        })
        .collect();
    let len = (2 * n - 1).next_power_of_two();
    let mut a = vec![Complex64::new(0.0, 0.0); len];
    for k in 0..n {
        a[k] = input[k] * chirp[k];
    }
    let mut b = vec![Complex64::new(0.0, 0.0); len];
    b[0] = chirp[0].conj();
    for k in 1..n {
        b[k] = chirp[k].conj();
        b[len - k] = chirp[k].conj();
    }
    let mut planner = FftPlannerScalar::<f64>::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= *y;
    }
    inv.process(&mut a);
    let scale = 1.0 / len as f64;
    (0..n).map(|j| a[j] * scale * chirp[j]).collect()
}

pub fn dft(input: &[Complex64], sign: Sign) -> Vec<Complex64> {
    if input.len() < DIRECT_CUTOFF {
        dft_direct(input, sign)
    } else {
        dft_chirp(input, sign)
    }
}

/// `out[n] = sum_k a[k] b[(n - k) mod N]`.
pub fn cyclic_convolution(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    if n < DIRECT_CUTOFF {
        return cyclic_convolution_direct(a, b);
    }
    let fa = dft_chirp(a, Sign::Negative);
    let fb = dft_chirp(b, Sign::Negative);
    let prod: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    let scale = 1.0 / n as f64;
    dft_chirp(&prod, Sign::Positive).into_iter().map(|z| z * scale).collect()
}

pub fn cyclic_convolution_direct(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len();
    (0..n).map(|i| pairwise_sum_by(n, |k| a[k] * b[(i + n - k) % n])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive(input: &[Complex64], sign: Sign) -> Vec<Complex64> {
        let n = input.len();
        (0..n)
            .map(|j| {
                input.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (k, &x)| {
                    let ang = sign.as_f64() * 2.0 * PI * (j * k) as f64 / n as f64;
                    acc + x * Complex64::from_polar(1.0, ang)
                })
            })
            .collect()
    }

    fn max_dev(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn exact_quarter_roots() {
        assert_eq!(unit_root(0, 7), Complex64::new(1.0, 0.0));
        assert_eq!(unit_root(2, 4), Complex64::new(-1.0, 0.0));
        assert_eq!(unit_root(3, 12), Complex64::new(0.0, 1.0));
        assert!((unit_root(1, 3) - Complex64::new(-0.5, 3f64.sqrt() / 2.0)).norm() < 1e-15);
    }

    #[test]
    fn chirp_matches_naive_on_awkward_lengths() {
        for n in [1usize, 2, 3, 7, 8, 26, 80, 242, 624, 728, 1023] {
            let input: Vec<Complex64> =
                (0..n).map(|k| Complex64::new((k as f64 * 0.37).sin(), (k as f64 * 1.3).cos())).collect();
            for sign in [Sign::Negative, Sign::Positive] {
                let want = naive(&input, sign);
                assert!(max_dev(&dft_chirp(&input, sign), &want) < 1e-9 * n as f64, "n={n}");
                assert!(max_dev(&dft_direct(&input, sign), &want) < 1e-9 * n as f64, "n={n}");
            }
        }
    }

    #[test]
    fn convolution_paths_agree() {
        for n in [5usize, 600, 1000] {
            let a: Vec<Complex64> = (0..n).map(|k| Complex64::new((k % 7) as f64, 1.0)).collect();
            let b: Vec<Complex64> = (0..n).map(|k| Complex64::new(0.5, (k % 3) as f64)).collect();
            let fast = cyclic_convolution(&a, &b);
            let slow = cyclic_convolution_direct(&a, &b);
            assert!(max_dev(&fast, &slow) < 1e-8 * n as f64);
        }
    }

    proptest! {
        #[test]
        fn inverse_round_trip(xs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..700)) {
            let input: Vec<Complex64> = xs.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
            let n = input.len() as f64;
            let back: Vec<Complex64> = dft(&dft(&input, Sign::Negative), Sign::Positive)
                .into_iter()
                .map(|z| z / n)
                .collect();
            prop_assert!(max_dev(&back, &input) < 1e-9 * n);
        }

        #[test]
        fn pairwise_matches_sequential(xs in prop::collection::vec(-1.0f64..1.0, 0..200)) {
            let input: Vec<Complex64> = xs.iter().map(|&a| Complex64::new(a, -a)).collect();
            let seq = input.iter().fold(Complex64::new(0.0, 0.0), |a, &b| a + b);
            prop_assert!((pairwise_sum(&input) - seq).norm() < 1e-12);
            prop_assert_eq!(pairwise_sum(&input), pairwise_sum_by(input.len(), |i| input[i]));
        }
    }
}
