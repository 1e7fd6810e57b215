//! On-disk cache of sieve segments.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic   b"MLAB"
//! version u32      (FORMAT_VERSION)
//! lo      u64
//! hi      u64
//! lpf     [u64; hi - lo]
//! mult    [u8;  hi - lo]
//! cof_mu  [i8;  hi - lo]   μ of n / lpf(n)^mult
//! ```
//!
//! A file is reused only when magic, version, `lo`, `hi` and the total length
//! all match; anything else is rebuilt and overwritten.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sieve::{BasePrimes, SieveSegment};

pub const MAGIC: &[u8; 4] = b"MLAB";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 4 + 4 + 8 + 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentCache {
    dir: PathBuf,
}

impl SegmentCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, lo: u64, hi: u64) -> PathBuf {
        self.dir.join(format!("segment-{lo}-{hi}.mlab"))
    }

    /// `Ok(None)` when the file is missing or its header does not match.
    pub fn load(&self, lo: u64, hi: u64, base_primes: &Arc<BasePrimes>) -> Result<Option<SieveSegment>> {
        let path = self.path_for(lo, hi);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        Ok(decode(&bytes, lo, hi).map(|(lpf, mult, cof)| {
            SieveSegment::from_parts(lo, hi, lpf, mult, cof, base_primes.clone())
        }))
    }

    /// Write through a temporary file and rename into place.
    pub fn store(&self, seg: &SieveSegment) -> Result<()> {
        let path = self.path_for(seg.lo(), seg.hi());
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        let bytes = encode(seg);
        let write = || -> std::io::Result<()> {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&bytes)?;
            f.sync_all()?;
            fs::rename(&tmp, &path)
        };
        write().map_err(|e| Error::Cache { path: path.clone(), reason: e.to_string() })
    }
}

pub fn encode(seg: &SieveSegment) -> Vec<u8> {
    let len = seg.len();
    let mut out = Vec::with_capacity(HEADER_LEN + len * 10);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&seg.lo().to_le_bytes());
    out.extend_from_slice(&seg.hi().to_le_bytes());
    for &p in seg.lpf() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out.extend_from_slice(seg.lpf_mult());
    out.extend(seg.cofactor_mu().iter().map(|&m| m as u8));
    out
}

type Decoded = (Vec<u64>, Vec<u8>, Vec<i8>);

fn decode(bytes: &[u8], lo: u64, hi: u64) -> Option<Decoded> {
    if bytes.len() < HEADER_LEN || &bytes[0..4] != MAGIC {
        return None;
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    if u32_at(4) != FORMAT_VERSION || u64_at(8) != lo || u64_at(16) != hi || hi <= lo {
        return None;
    }
    let len = (hi - lo) as usize;
    if bytes.len() != HEADER_LEN + len * 10 {
        return None;
    }
    let lpf_end = HEADER_LEN + 8 * len;
    let lpf = bytes[HEADER_LEN..lpf_end]
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let mult = bytes[lpf_end..lpf_end + len].to_vec();
    let cof = bytes[lpf_end + len..].iter().map(|&b| b as i8).collect();
    Some((lpf, mult, cof))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout_is_fixed() {
        let bp = Arc::new(BasePrimes::for_limit(20));
        let seg = SieveSegment::build(10, 20, bp).unwrap();
        let bytes = encode(&seg);
        assert_eq!(&bytes[..4], b"MLAB");
        assert_eq!(&bytes[4..8], &1u32.to_le_bytes());
        assert_eq!(&bytes[8..16], &10u64.to_le_bytes());
        assert_eq!(&bytes[16..24], &20u64.to_le_bytes());
        // lpf(10) = 2
        assert_eq!(&bytes[24..32], &2u64.to_le_bytes());
        // mult(12) = 2, right after the lpf array
        assert_eq!(bytes[24 + 80 + 2], 2);
        assert_eq!(bytes.len(), HEADER_LEN + 10 * 10);
    }

    #[test]
    fn mismatched_header_is_ignored() {
        let dir = tempfile::tempdir().unwrap();
        let cache = SegmentCache::new(dir.path()).unwrap();
        let bp = Arc::new(BasePrimes::for_limit(100));
        let seg = SieveSegment::build(50, 100, bp.clone()).unwrap();
        cache.store(&seg).unwrap();
        assert_eq!(cache.load(50, 100, &bp).unwrap(), Some(seg.clone()));

        // a file for another range copied over this one's name must not be accepted
        let other = SieveSegment::build(40, 90, bp.clone()).unwrap();
        fs::write(cache.path_for(50, 100), encode(&other)).unwrap();
        assert_eq!(cache.load(50, 100, &bp).unwrap(), None);

        let mut bytes = encode(&seg);
        bytes[4] = 9;
        fs::write(cache.path_for(50, 100), &bytes).unwrap();
        assert_eq!(cache.load(50, 100, &bp).unwrap(), None);

        let mut bytes = encode(&seg);
        bytes.pop();
        fs::write(cache.path_for(50, 100), &bytes).unwrap();
        assert_eq!(cache.load(50, 100, &bp).unwrap(), None);
    }
}
