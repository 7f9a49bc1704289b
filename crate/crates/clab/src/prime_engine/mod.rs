//! Exact prime-number-theoretic primitives over large ranges: primality,
//! pi, prime gaps, von Mangoldt Lambda, the Chebyshev functions psi and
//! theta, and the logarithmic integral.
//!
//! Primality has two independent routes: the segmented sieve (used for
//! counting and window scans) and deterministic Miller-Rabin (used for
//! point queries and spot checks of the sieve). Tests cross-validate them.

mod chebyshev;
mod checkpoints;
mod li;
mod sieve;
mod window;

pub use chebyshev::{psi, theta, ChebyshevValues};
pub use checkpoints::{
    build_checkpoints, PrimeCheckpointTable, CACHE_MAGIC, DEFAULT_STRIDE, MAX_SUPPORTED_N,
};
pub use li::{li, LiForm, LiValue, LI_BYPARTS_OFFSET};
pub use sieve::{simple_sieve, SieveSegment};
pub use window::{psi_window_prefix, WindowPrefix};

use crate::error::{Error, Result};

/// Deterministic primality for u64 via Miller-Rabin with a fixed base set
/// known to be exact for all 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'bases: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Largest prime strictly below n. Requires n >= 3.
pub fn prev_prime(n: u64) -> Result<u64> {
    if n < 3 {
        return Err(Error::precondition(format!("prev_prime needs n >= 3, got {n}")));
    }
    let mut m = n - 1;
    loop {
        if is_prime(m) {
            return Ok(m);
        }
        m -= 1;
    }
}

/// Gap p - prev_prime(p) before a prime p >= 3.
pub fn gap_before(p: u64) -> Result<u64> {
    if p < 3 || !is_prime(p) {
        return Err(Error::precondition(format!(
            "gap_before needs a prime >= 3, got {p}"
        )));
    }
    Ok(p - prev_prime(p)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= n {
            if n % d == 0 {
                return false;
            }
            d += 1;
        }
        true
    }

    #[test]
    fn is_prime_examples() {
        assert!(!is_prime(4));
        assert!(is_prime(2));
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(1));
        assert!(!is_prime(0));
    }

    #[test]
    fn is_prime_matches_trial_division() {
        for n in 0..5000 {
            assert_eq!(is_prime(n), trial_division(n), "n={n}");
        }
        for n in 999_950_000..999_950_400u64 {
            assert_eq!(is_prime(n), trial_division(n), "n={n}");
        }
    }

    #[test]
    fn prev_prime_and_gaps() {
        assert_eq!(prev_prime(11).unwrap(), 7);
        assert_eq!(gap_before(11).unwrap(), 4);
        assert_eq!(gap_before(3).unwrap(), 1);
        assert_eq!(prev_prime(3).unwrap(), 2);
        assert_eq!(prev_prime(1_000_000).unwrap(), 999_983);
        assert!(prev_prime(2).is_err());
        assert!(gap_before(9).is_err());
    }
}
