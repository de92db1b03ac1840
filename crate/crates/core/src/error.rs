use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("extension degree must be at least 1")]
    ZeroDegree,

    #[error("field of size {p}^{m} exceeds the size guard of {limit} elements")]
    SizeGuard { p: u64, m: u32, limit: u64 },

    #[error("no element of full multiplicative order in F_{p}^{m}; modulus is not irreducible")]
    NoGenerator { p: u64, m: u32 },

    #[error("multiplicative character evaluated at zero")]
    CharAtZero,

    #[error("brute-force work {work} exceeds the guard of {limit} (raise --max-work)")]
    WorkGuard { work: u128, limit: u128 },

    #[error("family {family} is undefined for d={d}, p={p}")]
    FamilyUndefined { family: String, d: u32, p: u64 },

    #[error("family {0} is empty for these parameters")]
    EmptyFamily(String),

    #[error("character index {j} is not in C0")]
    NotInC0 { j: u64 },

    #[error("character index {j} is not primitive")]
    NotPrimitive { j: u64 },

    #[error("operation requires degree d={expected}, got d={got}")]
    WrongDegree { expected: u32, got: u32 },

    #[error("operation requires odd characteristic")]
    EvenCharacteristic,

    #[error("target measure {target} is incompatible with family {family} at d={d}")]
    IncompatibleTarget { target: String, family: String, d: u32 },

    #[error("additive character twist {0} is zero modulo p")]
    ZeroTwist(u64),

    #[error("order n must be at least 1")]
    ZeroOrder,

    #[error("{0}")]
    Invalid(String),

    #[error("cache file {path}: {source}")]
    Cache {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
