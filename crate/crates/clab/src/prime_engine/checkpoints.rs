//! Checkpointed prime-counting table over a segmented sieve.
//!
//! The table stores pi(n) at multiples of a stride; a query re-sieves at most
//! one stride-length segment above the nearest checkpoint. This keeps queries
//! fast over ranges up to ~2*10^9 without any analytic machinery.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::numeric::Fnv64;
use crate::prime_engine::sieve::{simple_sieve, SieveSegment};

/// Default stride between checkpoints.
pub const DEFAULT_STRIDE: u64 = 1 << 16;

/// Hard capacity limit: a bit sieve streamed in segments stays cheap up to
/// this range, and all desk-scale scans live far below it.
pub const MAX_SUPPORTED_N: u64 = 2_000_000_000;

/// Magic string of the checkpoint cache file format.
pub const CACHE_MAGIC: &[u8; 5] = b"CLAB1";

/// Checkpointed pi-values plus the base primes needed to re-sieve any segment.
pub struct PrimeCheckpointTable {
    stride: u64,
    max_n: u64,
    /// (n, pi(n)) at n = stride, 2*stride, ..., ascending in both coordinates.
    checkpoints: Vec<(u64, u64)>,
    base_primes: Vec<u32>,
}

/// Build a table supporting pi(n) for all n <= max_n.
///
/// Deterministic given its inputs.
pub fn build_checkpoints(max_n: u64, stride: u64) -> Result<PrimeCheckpointTable> {
    if max_n < 4 {
        return Err(Error::precondition(format!("max_n must be >= 4, got {max_n}")));
    }
    if stride < 2 {
        return Err(Error::precondition(format!("stride must be >= 2, got {stride}")));
    }
    if max_n > MAX_SUPPORTED_N {
        return Err(Error::capacity(format!(
            "max_n {max_n} exceeds supported range {MAX_SUPPORTED_N}"
        )));
    }
    let base_primes = simple_sieve((max_n as f64).sqrt() as u32 + 1);
    let mut checkpoints = Vec::with_capacity((max_n / stride) as usize);
    let mut count = 0u64;
    let mut ck = stride;
    let mut lo = 2u64;
    while ck <= max_n {
        let seg = SieveSegment::new(lo, ck, &base_primes, false);
        count += seg.count_primes();
        checkpoints.push((ck, count));
        lo = ck + 1;
        ck += stride;
    }
    Ok(PrimeCheckpointTable {
        stride,
        max_n,
        checkpoints,
        base_primes,
    })
}

impl PrimeCheckpointTable {
    pub fn stride(&self) -> u64 {
        self.stride
    }

    pub fn max_n(&self) -> u64 {
        self.max_n
    }

    pub fn checkpoints(&self) -> &[(u64, u64)] {
        &self.checkpoints
    }

    pub fn base_primes(&self) -> &[u32] {
        &self.base_primes
    }

    /// Exact count of primes <= n.
    pub fn pi(&self, n: u64) -> Result<u64> {
        if n < 2 || n > self.max_n {
            return Err(Error::precondition(format!(
                "pi argument {n} outside [2, {}]",
                self.max_n
            )));
        }
        let idx = (n / self.stride) as usize;
        let (start, base) = if idx == 0 {
            (2, 0)
        } else {
            let (ck, count) = self.checkpoints[idx - 1];
            (ck + 1, count)
        };
        if start > n {
            return Ok(base);
        }
        let seg = SieveSegment::new(start, n, &self.base_primes, false);
        Ok(base + seg.count_primes())
    }

    /// Sieve an arbitrary in-range segment, optionally with Lambda values.
    pub fn sieve_segment(&self, lo: u64, hi: u64, with_lambda: bool) -> Result<SieveSegment> {
        if hi > self.max_n || lo > hi {
            return Err(Error::precondition(format!(
                "segment [{lo}, {hi}] outside table range (max {})",
                self.max_n
            )));
        }
        Ok(SieveSegment::new(lo, hi, &self.base_primes, with_lambda))
    }

    /// Serialize to the cache format: magic "CLAB1", LE u64 stride, max_n,
    /// count, then (n, pi(n)) pairs, then an FNV-64 checksum of everything
    /// preceding it.
    pub fn store(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(29 + 16 * self.checkpoints.len());
        buf.extend_from_slice(CACHE_MAGIC);
        buf.extend_from_slice(&self.stride.to_le_bytes());
        buf.extend_from_slice(&self.max_n.to_le_bytes());
        buf.extend_from_slice(&(self.checkpoints.len() as u64).to_le_bytes());
        for &(n, count) in &self.checkpoints {
            buf.extend_from_slice(&n.to_le_bytes());
            buf.extend_from_slice(&count.to_le_bytes());
        }
        let mut h = Fnv64::new();
        h.update(&buf);
        buf.extend_from_slice(&h.finish().to_le_bytes());
        let mut f = std::fs::File::create(path)?;
        f.write_all(&buf)?;
        Ok(())
    }

    /// Load a cached table and re-verify `verify_segments` random segments
    /// against a fresh sieve before trusting it.
    pub fn load(path: &Path, verify_segments: usize, seed: u64) -> Result<PrimeCheckpointTable> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        if buf.len() < 37 || &buf[..5] != CACHE_MAGIC {
            return Err(Error::integrity("bad magic or truncated cache file"));
        }
        let body = &buf[..buf.len() - 8];
        let stored = u64::from_le_bytes(buf[buf.len() - 8..].try_into().unwrap());
        let mut h = Fnv64::new();
        h.update(body);
        if h.finish() != stored {
            return Err(Error::integrity("cache checksum mismatch"));
        }
        let rd = |off: usize| u64::from_le_bytes(buf[off..off + 8].try_into().unwrap());
        let stride = rd(5);
        let max_n = rd(13);
        let count = rd(21) as usize;
        if stride < 2 || max_n < 4 || body.len() != 29 + 16 * count {
            return Err(Error::integrity("inconsistent cache header"));
        }
        let mut checkpoints = Vec::with_capacity(count);
        for i in 0..count {
            let n = rd(29 + 16 * i);
            let c = rd(37 + 16 * i);
            if let Some(&(pn, pc)) = checkpoints.last() {
                if n <= pn || c < pc {
                    return Err(Error::integrity("checkpoints not ascending"));
                }
            }
            checkpoints.push((n, c));
        }
        let base_primes = simple_sieve((max_n as f64).sqrt() as u32 + 1);
        let table = PrimeCheckpointTable {
            stride,
            max_n,
            checkpoints,
            base_primes,
        };
        table.spot_verify(verify_segments, seed)?;
        Ok(table)
    }

    /// Re-sieve `n_segments` pseudorandom checkpoint segments and compare the
    /// prime-count deltas against the stored values.
    pub fn spot_verify(&self, n_segments: usize, seed: u64) -> Result<()> {
        if self.checkpoints.is_empty() {
            return Ok(());
        }
        let mut state = seed | 1;
        for _ in 0..n_segments {
            // xorshift* is plenty for picking verification segments
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let idx = (state.wrapping_mul(0x2545_f491_4f6c_dd1d) % self.checkpoints.len() as u64)
                as usize;
            let (ck, count) = self.checkpoints[idx];
            let (start, base) = if idx == 0 {
                (2, 0)
            } else {
                (self.checkpoints[idx - 1].0 + 1, self.checkpoints[idx - 1].1)
            };
            let seg = SieveSegment::new(start, ck, &self.base_primes, false);
            if base + seg.count_primes() != count {
                return Err(Error::integrity(format!(
                    "checkpoint at n={ck} failed segment re-count"
                )));
            }
        }
        Ok(())
    }
}
