//! Simple and segmented sieves of Eratosthenes.

/// Primes up to `limit` (inclusive) by a plain bit sieve.
pub fn simple_sieve(limit: u32) -> Vec<u32> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize + 1;
    let mut composite = vec![false; n];
    let mut primes = Vec::new();
    for p in 2..n {
        if !composite[p] {
            primes.push(p as u32);
            let mut m = p * p;
            while m < n {
                composite[m] = true;
                m += p;
            }
        }
    }
    primes
}

/// One sieved segment [lo, hi] with primality flags and, optionally, the
/// von Mangoldt values Lambda(n) in nats.
///
/// Lambda(n) = log p exactly when n = p^k (k >= 1), else 0. The prime-power
/// entries are placed directly from the base primes, so psi and theta sums
/// over the same segment use bitwise-identical log values.
pub struct SieveSegment {
    pub lo: u64,
    pub hi: u64,
    bits: Vec<u64>, // set bit = composite (or < 2)
    lambda: Option<Vec<f64>>,
}

impl SieveSegment {
    /// Sieve [lo, hi] using base primes covering sqrt(hi).
    ///
    /// Panics if the base primes do not reach sqrt(hi).
    pub fn new(lo: u64, hi: u64, base_primes: &[u32], with_lambda: bool) -> Self {
        assert!(lo <= hi);
        // sufficiency: no prime beyond the list may have its square <= hi
        let last = *base_primes.last().unwrap_or(&0) as u64;
        if last * last < hi {
            let mut q = last + 1;
            while q * q <= hi {
                assert!(
                    !crate::prime_engine::is_prime(q),
                    "base primes too short for hi={hi}: missing {q}"
                );
                q += 1;
            }
        }
        let len = (hi - lo + 1) as usize;
        let mut bits = vec![0u64; (len + 63) / 64];
        let mut lambda = with_lambda.then(|| vec![0.0f64; len]);

        let mark = |bits: &mut [u64], idx: usize| {
            bits[idx / 64] |= 1 << (idx % 64);
        };

        for n in lo..(hi + 1).min(2) {
            mark(&mut bits, (n - lo) as usize);
        }
        for &p in base_primes {
            let p = p as u64;
            if p * p > hi {
                break;
            }
            let mut m = (lo + p - 1) / p * p;
            if m < p * p {
                m = p * p;
            }
            while m <= hi {
                mark(&mut bits, (m - lo) as usize);
                m += p;
            }
        }
        if let Some(lam) = lambda.as_mut() {
            // prime powers p^k (k >= 2) from the base primes
            for &p in base_primes {
                let p = p as u64;
                if p * p > hi {
                    break;
                }
                let logp = (p as f64).ln();
                let mut pw = p * p;
                loop {
                    if pw >= lo {
                        lam[(pw - lo) as usize] = logp;
                    }
                    match pw.checked_mul(p) {
                        Some(next) if next <= hi => pw = next,
                        _ => break,
                    }
                }
            }
            // primes in the segment itself (k = 1)
            for n in lo.max(2)..=hi {
                let idx = (n - lo) as usize;
                if bits[idx / 64] & (1 << (idx % 64)) == 0 {
                    lam[idx] = (n as f64).ln();
                }
            }
        }
        SieveSegment { lo, hi, bits, lambda }
    }

    #[inline]
    pub fn is_prime(&self, n: u64) -> bool {
        debug_assert!(n >= self.lo && n <= self.hi);
        let idx = (n - self.lo) as usize;
        self.bits[idx / 64] & (1 << (idx % 64)) == 0
    }

    /// Lambda(n); panics if the segment was built without lambda values.
    #[inline]
    pub fn lambda(&self, n: u64) -> f64 {
        let idx = (n - self.lo) as usize;
        self.lambda.as_ref().expect("segment built without lambda")[idx]
    }

    pub fn count_primes(&self) -> u64 {
        self.iter_primes().count() as u64
    }

    pub fn iter_primes(&self) -> impl Iterator<Item = u64> + '_ {
        (self.lo..=self.hi).filter(move |&n| n >= 2 && self.is_prime(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_sieve_small() {
        assert_eq!(simple_sieve(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(simple_sieve(1), Vec::<u32>::new());
    }

    #[test]
    fn segment_matches_simple_sieve() {
        let base = simple_sieve(100);
        let seg = SieveSegment::new(2, 5000, &base, false);
        let primes: Vec<u64> = seg.iter_primes().collect();
        let expect: Vec<u64> = simple_sieve(5000).iter().map(|&p| p as u64).collect();
        assert_eq!(primes, expect);
    }

    #[test]
    fn segment_not_starting_at_two() {
        let base = simple_sieve(1000);
        let seg = SieveSegment::new(999_900, 1_000_100, &base, false);
        assert!(seg.is_prime(999_983));
        assert!(!seg.is_prime(999_981));
        assert!(seg.is_prime(1_000_003));
    }

    #[test]
    fn lambda_values() {
        let base = simple_sieve(100);
        let seg = SieveSegment::new(2, 200, &base, true);
        assert_eq!(seg.lambda(2), 2f64.ln());
        assert_eq!(seg.lambda(8), 2f64.ln());
        assert_eq!(seg.lambda(128), 2f64.ln());
        assert_eq!(seg.lambda(27), 3f64.ln());
        assert_eq!(seg.lambda(49), 7f64.ln());
        assert_eq!(seg.lambda(6), 0.0);
        assert_eq!(seg.lambda(100), 0.0);
        assert_eq!(seg.lambda(97), 97f64.ln());
    }
}
