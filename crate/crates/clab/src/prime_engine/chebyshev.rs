//! Chebyshev psi and theta by streaming the segmented sieve.
//!
//! psi(x) = sum of Lambda(n) over n <= x, theta(x) = sum of log p over
//! primes p <= x, both accumulated with compensated summation. One stream
//! produces both so the identity psi - theta = sum_{k>=2} theta(x^{1/k})
//! holds over identical log values.

use crate::error::{Error, Result};
use crate::numeric::KahanSum;
use crate::prime_engine::PrimeCheckpointTable;

const STREAM_SEGMENT: u64 = 1 << 20;

/// psi(x), theta(x), and a bound on the accumulated floating-point error.
#[derive(Debug, Clone, Copy)]
pub struct ChebyshevValues {
    pub psi: f64,
    pub theta: f64,
    /// Conservative bound on summation error: one ulp of the running sum per
    /// term is already covered by Kahan; this tracks the representation error
    /// of the individual logs, ~n_terms * eps * log(x).
    pub error_bound: f64,
}

impl ChebyshevValues {
    /// Compute both Chebyshev functions at real x in [2, table.max_n].
    pub fn compute(x: f64, table: &PrimeCheckpointTable) -> Result<ChebyshevValues> {
        if !(2.0..=table.max_n() as f64).contains(&x) {
            return Err(Error::precondition(format!(
                "chebyshev argument {x} outside [2, {}]",
                table.max_n()
            )));
        }
        let n = x.floor() as u64;
        let mut psi = KahanSum::new();
        let mut theta = KahanSum::new();
        let mut terms = 0u64;
        let mut lo = 2u64;
        while lo <= n {
            let hi = (lo + STREAM_SEGMENT - 1).min(n);
            let seg = table.sieve_segment(lo, hi, true)?;
            for m in lo..=hi {
                let lam = seg.lambda(m);
                if lam != 0.0 {
                    psi.add(lam);
                    terms += 1;
                    if seg.is_prime(m) {
                        theta.add(lam);
                    }
                }
            }
            lo = hi + 1;
        }
        let error_bound = terms as f64 * f64::EPSILON * x.ln();
        Ok(ChebyshevValues {
            psi: psi.value(),
            theta: theta.value(),
            error_bound,
        })
    }
}

/// psi(x) = sum of Lambda(n) for n <= x.
pub fn psi(x: f64, table: &PrimeCheckpointTable) -> Result<f64> {
    Ok(ChebyshevValues::compute(x, table)?.psi)
}

/// theta(x) = sum of log p over primes p <= x.
pub fn theta(x: f64, table: &PrimeCheckpointTable) -> Result<f64> {
    Ok(ChebyshevValues::compute(x, table)?.theta)
}
