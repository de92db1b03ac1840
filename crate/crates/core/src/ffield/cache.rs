//! On-disk field tables.
//!
//! Layout of `f_<p>_<m>.tbl`, all integers little-endian:
//!
//! ```text
//! offset  size        content
//! 0       5           magic "GFTB1"
//! 5       4           p (u32)
//! 9       4           m (u32)
//! 13      4 (m+1)     modulus coefficients, constant term first (u32 each)
//! ..      4 M         exp table: code of g^k for k = 0..M-1 (u32 each)
//! ..      M           absolute trace of g^k (u8 each)
//! ```
//!
//! `M = p^m - 1` and the code of an element is `sum c_i p^i` over its
//! polynomial-basis coordinates. Traces are stored in one byte, so fields
//! with `p > 256` are never cached.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::table::{FieldParams, FieldTable};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 5] = b"GFTB1";

pub fn cache_path(dir: &Path, p: u64, m: u32) -> PathBuf {
    dir.join(format!("f_{p}_{m}.tbl"))
}

pub fn supported(table: &FieldTable) -> bool {
    table.p() <= 256
}

pub fn encode(table: &FieldTable) -> Vec<u8> {
    let params = table.params();
    let order = table.group_order() as usize;
    let mut out = Vec::with_capacity(13 + 4 * params.modulus.len() + 5 * order);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(params.p as u32).to_le_bytes());
    out.extend_from_slice(&params.m.to_le_bytes());
    for &c in &params.modulus {
        out.extend_from_slice(&(c as u32).to_le_bytes());
    }
    for &code in table.exp_codes() {
        out.extend_from_slice(&code.to_le_bytes());
    }
    out.extend(table.trace_values().iter().map(|&t| t as u8));
    out
}

fn invalid(path: &Path, msg: &str) -> Error {
    Error::Cache {
        path: path.to_path_buf(),
        source: std::io::Error::new(std::io::ErrorKind::InvalidData, msg.to_string()),
    }
}

pub fn decode(bytes: &[u8], params: &FieldParams, path: &Path) -> Result<FieldTable> {
    let m = params.m as usize;
    let order = (params.size - 1) as usize;
    let expected = 13 + 4 * (m + 1) + 5 * order;
    if bytes.len() != expected {
        return Err(invalid(path, "unexpected length"));
    }
    if &bytes[..5] != MAGIC {
        return Err(invalid(path, "bad magic"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    if word(5) as u64 != params.p || word(9) != params.m {
        return Err(invalid(path, "header does not match field"));
    }
    let modulus: Vec<u64> = (0..=m).map(|i| word(13 + 4 * i) as u64).collect();
    if modulus != params.modulus {
        return Err(invalid(path, "modulus differs from canonical modulus"));
    }
    let exp_start = 13 + 4 * (m + 1);
    let exp: Vec<u32> = (0..order).map(|k| word(exp_start + 4 * k)).collect();
    let trace: Vec<u32> = bytes[exp_start + 4 * order..].iter().map(|&b| b as u32).collect();
    if trace.first().copied() != Some((params.m as u64 % params.p) as u32) {
        return Err(invalid(path, "trace of 1 is wrong"));
    }
    let generator = if order > 1 { exp[1] } else { 1 };
    let table = FieldTable::from_parts(params.clone(), generator, exp, trace)
        .map_err(|_| invalid(path, "exp table is not a bijection"))?;
    let fresh_generator = super::table::FieldTable::generator_code_for(params)?;
    if fresh_generator != generator {
        return Err(invalid(path, "generator is not canonical"));
    }
    Ok(table)
}

pub fn read(path: &Path, params: &FieldParams) -> Result<FieldTable> {
    let bytes = fs::read(path).map_err(|source| Error::Cache { path: path.to_path_buf(), source })?;
    decode(&bytes, params, path)
}

/// Writes through a temporary file and renames it into place.
pub fn write(path: &Path, table: &FieldTable) -> Result<()> {
    let wrap = |source| Error::Cache { path: path.to_path_buf(), source };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(wrap)?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    let mut file = fs::File::create(&tmp).map_err(wrap)?;
    file.write_all(&encode(table)).map_err(wrap)?;
    file.sync_all().map_err(wrap)?;
    fs::rename(&tmp, path).map_err(wrap)?;
    Ok(())
}
