//! Gauss and Kloosterman sums over finite fields `F_{q^d}`.
//!
//! The crate builds concrete finite fields with discrete-log tables, evaluates
//! additive and multiplicative characters exactly (as rational angles), and
//! computes Gauss sums, Kloosterman sums and their aggregates. On top of that
//! it provides the statistics used to study how normalized Gauss sums of
//! character families distribute on the unit circle, and the `GL_2(F_q)`
//! side of the picture through cuspidal characters and matrix Gauss sums.
//!
//! Module map:
//!
//! - [`ffield`]: fields, towers `F_q ⊂ F_{q^d}`, Zech logarithms, disk cache
//! - [`dft`]: chirp-z (Bluestein) DFT, cyclic convolution, pairwise sums
//! - [`chars`]: characters, primitivity, the `C0` family taxonomy
//! - [`expsum`]: Gauss sums, Kloosterman sums and the identities they satisfy
//! - [`equidist`]: Weyl sums, moments, discrepancy and KS distances
//! - [`gl2gauss`]: conjugacy classes and cuspidal characters of `GL_2(F_q)`
//! - [`cli`]: the `gausslab` command-line surface

pub mod chars;
pub mod cli;
pub mod dft;
pub mod equidist;
pub mod error;
pub mod expsum;
pub mod ffield;
pub mod gl2gauss;

pub use error::{Error, Result};
pub use num_complex::Complex64;
