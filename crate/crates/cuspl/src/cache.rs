//! Coefficient cache files.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic     8 bytes  "CUSPLCF\0"
//! version   u32
//! weight    u32
//! n_max     u64
//! n_max records: u32 byte length, then a(n) as two's-complement bytes
//! ```

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use cuspl_core::forms::{self, CuspForm};
use num_bigint::BigInt;
use sha2::{Digest, Sha256};

pub const MAGIC: &[u8; 8] = b"CUSPLCF\0";
pub const VERSION: u32 = 1;
/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "CUSPL_CACHE_DIR";

#[derive(Debug)]
pub enum CacheError {
    Io(PathBuf, io::Error),
    Format(String),
    Core(cuspl_core::Error),
}

impl fmt::Display for CacheError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CacheError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CacheError::Format(m) => write!(f, "bad coefficient cache: {m}"),
            CacheError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CacheError {}

impl From<cuspl_core::Error> for CacheError {
    fn from(e: cuspl_core::Error) -> Self {
        CacheError::Core(e)
    }
}

pub fn encode(form: &CuspForm) -> Vec<u8> {
    let mut out = Vec::with_capacity(24 + form.n_max() * 16);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&form.weight().to_le_bytes());
    out.extend_from_slice(&(form.n_max() as u64).to_le_bytes());
    for a in form.coefficients() {
        let bytes = a.to_signed_bytes_le();
        out.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
        out.extend_from_slice(&bytes);
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CacheError> {
        if self.bytes.len() - self.pos < n {
            return Err(CacheError::Format(format!("truncated at byte {}", self.pos)));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, CacheError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CacheError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Parses a cache file and checks the eigenform identities on its first
/// coefficients.
pub fn decode(bytes: &[u8]) -> Result<CuspForm, CacheError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(CacheError::Format("wrong magic bytes".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(CacheError::Format(format!("version {version}, expected {VERSION}")));
    }
    let weight = r.u32()?;
    let n_max = r.u64()? as usize;
    if n_max > forms::MAX_COEFFICIENTS {
        return Err(CacheError::Format(format!("n_max {n_max} exceeds {}", forms::MAX_COEFFICIENTS)));
    }
    let mut coeffs = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        let len = r.u32()? as usize;
        coeffs.push(BigInt::from_signed_bytes_le(r.take(len)?));
    }
    if r.pos != bytes.len() {
        return Err(CacheError::Format(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    let form = CuspForm::from_coefficients(weight, coeffs)?;
    let report = forms::verify_hecke(&form, form.n_max().min(1000))?;
    if !report.passed() {
        return Err(CacheError::Format(format!("coefficients fail the Hecke identities: {report:?}")));
    }
    Ok(form)
}

/// Hex SHA-256 of `bytes`.
pub fn checksum(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// `$CUSPL_CACHE_DIR`, else `$XDG_CACHE_HOME/cuspl`, else `$HOME/.cache/cuspl`.
pub fn default_dir() -> Option<PathBuf> {
    if let Some(d) = std::env::var_os(CACHE_DIR_ENV) {
        return Some(PathBuf::from(d));
    }
    if let Some(d) = std::env::var_os("XDG_CACHE_HOME") {
        return Some(PathBuf::from(d).join("cuspl"));
    }
    std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache").join("cuspl"))
}

pub fn file_name(weight: u32, n_max: usize) -> String {
    format!("k{weight}-n{n_max}.cuspl")
}

/// A coefficient table together with the checksum of its encoding.
#[derive(Debug, Clone)]
pub struct LoadedForm {
    pub form: CuspForm,
    pub checksum: String,
    /// The cache file read or written, if any.
    pub path: Option<PathBuf>,
    pub from_cache: bool,
}

/// Reads the table from `dir` when present, otherwise builds it and (when
/// `dir` is given) stores it. Unreadable cache files are rebuilt.
pub fn load_or_build(weight: u32, n_max: usize, dir: Option<&Path>) -> Result<LoadedForm, CacheError> {
    if !forms::SUPPORTED_WEIGHTS.contains(&weight) {
        return Err(CacheError::Core(cuspl_core::Error::UnsupportedWeight(weight)));
    }
    let path = dir.map(|d| d.join(file_name(weight, n_max)));
    if let Some(p) = &path {
        if let Ok(bytes) = fs::read(p) {
            if let Ok(form) = decode(&bytes) {
                if form.weight() == weight && form.n_max() == n_max {
                    return Ok(LoadedForm { form, checksum: checksum(&bytes), path, from_cache: true });
                }
            }
        }
    }
    let form = forms::build_eigenform(weight, n_max)?;
    let bytes = encode(&form);
    if let Some(p) = &path {
        store(p, &bytes)?;
    }
    Ok(LoadedForm { form, checksum: checksum(&bytes), path, from_cache: false })
}

fn store(path: &Path, bytes: &[u8]) -> Result<(), CacheError> {
    let io = |e| CacheError::Io(path.to_path_buf(), e);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io)?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, bytes).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}
