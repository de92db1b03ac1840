//! Finite fields `F_{p^m}` in discrete-log form and the tower `F_q ⊂ F_{q^d}`.

pub mod cache;
pub mod poly;
mod table;
mod tower;

pub use poly::{find_irreducible, is_prime, prime_power};
pub use table::{Elem, FieldParams, FieldTable, DEFAULT_MAX_SIZE};
pub use tower::{load_or_build, FieldOptions, SubfieldView, Tower};
