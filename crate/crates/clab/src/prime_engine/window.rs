//! One-pass window prefix of E_psi values, prime flags, and pi offsets.
//!
//! A window scan at X = 10^8 touches ~10^7 integers; recomputing psi or pi
//! per point would be quadratic. The prefix sieves the window once, carries
//! psi and pi forward incrementally from their values just below the window,
//! and exposes O(1) lookups for everything the scans and the trajectory
//! stepper need.

use crate::error::{Error, Result};
use crate::numeric::KahanSum;
use crate::prime_engine::{li, ChebyshevValues, PrimeCheckpointTable};

/// Exact E_psi(y) = psi(y) - y for every integer y in [lo, lo + length],
/// together with primality flags and pi values over the same range.
pub struct WindowPrefix {
    lo: u64,
    e_psi: Vec<f64>,
    pi_off: Vec<u32>,
    prime_bits: Vec<u64>,
    pi_base: u64,
    psi_base: f64,
}

/// Build the prefix for the window [X, X + length].
pub fn psi_window_prefix(
    x: u64,
    length: u64,
    table: &PrimeCheckpointTable,
) -> Result<WindowPrefix> {
    if x < 2 || x + length > table.max_n() {
        return Err(Error::precondition(format!(
            "window [{x}, {}] outside table range [2, {}]",
            x + length,
            table.max_n()
        )));
    }
    let (psi_base, pi_base) = if x == 2 {
        (0.0, 0)
    } else {
        (
            ChebyshevValues::compute((x - 1) as f64, table)?.psi,
            table.pi(x - 1)?,
        )
    };
    let hi = x + length;
    let len = (length + 1) as usize;
    let seg = table.sieve_segment(x, hi, true)?;
    let mut e_psi = Vec::with_capacity(len);
    let mut pi_off = Vec::with_capacity(len);
    let mut prime_bits = vec![0u64; (len + 63) / 64];
    let mut psi_run = KahanSum::with_value(psi_base);
    let mut pi_run = 0u32;
    for y in x..=hi {
        let lam = seg.lambda(y);
        if lam != 0.0 {
            psi_run.add(lam);
        }
        if seg.is_prime(y) {
            pi_run += 1;
            let i = (y - x) as usize;
            prime_bits[i / 64] |= 1 << (i % 64);
        }
        e_psi.push(psi_run.value() - y as f64);
        pi_off.push(pi_run);
    }
    Ok(WindowPrefix {
        lo: x,
        e_psi,
        pi_off,
        prime_bits,
        pi_base,
        psi_base,
    })
}

impl WindowPrefix {
    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.lo + self.e_psi.len() as u64 - 1
    }

    #[inline]
    pub fn contains(&self, y: u64) -> bool {
        y >= self.lo && y <= self.hi()
    }

    /// E_psi(y) = psi(y) - y.
    #[inline]
    pub fn e_psi(&self, y: u64) -> f64 {
        self.e_psi[(y - self.lo) as usize]
    }

    #[inline]
    pub fn psi(&self, y: u64) -> f64 {
        self.e_psi(y) + y as f64
    }

    #[inline]
    pub fn is_prime(&self, y: u64) -> bool {
        let i = (y - self.lo) as usize;
        self.prime_bits[i / 64] & (1 << (i % 64)) != 0
    }

    #[inline]
    pub fn is_composite(&self, y: u64) -> bool {
        y >= 4 && !self.is_prime(y)
    }

    /// pi(y), exact.
    #[inline]
    pub fn pi(&self, y: u64) -> u64 {
        self.pi_base + self.pi_off[(y - self.lo) as usize] as u64
    }

    pub fn psi_base(&self) -> f64 {
        self.psi_base
    }

    /// E_pi(y) = pi(y) - Li_byparts(y) for every y in the window, computed by
    /// carrying Li forward with a per-unit Gauss panel (d/dt Li_byparts = 1/log t).
    pub fn e_pi_values(&self) -> Result<Vec<f64>> {
        const N4: [f64; 4] = [
            -0.861_136_311_594_052_6,
            -0.339_981_043_584_856_3,
            0.339_981_043_584_856_3,
            0.861_136_311_594_052_6,
        ];
        const W4: [f64; 4] = [
            0.347_854_845_137_453_9,
            0.652_145_154_862_546_1,
            0.652_145_154_862_546_1,
            0.347_854_845_137_453_9,
        ];
        let base = li(self.lo as f64)?;
        let mut li_run = KahanSum::with_value(base.li_byparts);
        let mut out = Vec::with_capacity(self.e_psi.len());
        out.push(self.pi(self.lo) as f64 - li_run.value());
        for y in self.lo..self.hi() {
            let mid = y as f64 + 0.5;
            let mut inc = 0.0;
            for i in 0..4 {
                inc += W4[i] / (mid + 0.5 * N4[i]).ln();
            }
            li_run.add(0.5 * inc);
            out.push(self.pi(y + 1) as f64 - li_run.value());
        }
        Ok(out)
    }
}
