//! Compensated summation, deterministic reductions, and quadrature.
//!
//! Window scans at X = 10^8 accumulate ~10^7 logarithms; plain f64 addition
//! loses several digits there. Everything that sums many terms goes through
//! [`KahanSum`] or the fixed-block pairwise reduction, which is bit-stable
//! across thread counts because blocks are combined in index order.

/// Kahan (compensated) summation accumulator.
///
/// ```
/// use clab::numeric::KahanSum;
/// let mut s = KahanSum::new();
/// for _ in 0..10_000_000 {
///     s.add(0.1);
/// }
/// assert!((s.value() - 1.0e6).abs() < 1e-7);
/// ```
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_value(v: f64) -> Self {
        Self { sum: v, comp: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let y = value - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Fixed block length for deterministic chunked reductions.
pub const REDUCTION_BLOCK: usize = 1 << 16;

/// Sums `values` by Kahan-summing fixed-size blocks and combining the block
/// totals in index order. The result is independent of how the blocks were
/// computed (serially or in parallel).
pub fn blockwise_sum(values: &[f64]) -> f64 {
    let mut total = KahanSum::new();
    for block in values.chunks(REDUCTION_BLOCK) {
        let mut s = KahanSum::new();
        for &v in block {
            s.add(v);
        }
        total.add(s.value());
    }
    total.value()
}

// 8-point Gauss-Legendre rule on [-1, 1].
pub const GL8_NODES: [f64; 8] = [
    -9.602_898_564_975_361_8e-1,
    -7.966_664_774_136_267_3e-1,
    -5.255_324_099_163_289_9e-1,
    -1.834_346_424_956_497_8e-1,
    1.834_346_424_956_497_8e-1,
    5.255_324_099_163_289_9e-1,
    7.966_664_774_136_267_3e-1,
    9.602_898_564_975_361_8e-1,
];

pub const GL8_WEIGHTS: [f64; 8] = [
    1.012_285_362_903_766_9e-1,
    2.223_810_344_533_743_4e-1,
    3.137_066_458_778_870_5e-1,
    3.626_837_833_783_617_7e-1,
    3.626_837_833_783_617_7e-1,
    3.137_066_458_778_870_5e-1,
    2.223_810_344_533_743_4e-1,
    1.012_285_362_903_766_9e-1,
];

/// One 8-point Gauss-Legendre panel over [a, b].
#[inline]
pub fn gauss8<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for i in 0..8 {
        acc += GL8_WEIGHTS[i] * f(mid + half * GL8_NODES[i]);
    }
    acc * half
}

/// Adaptive quadrature: bisects until a panel agrees with its two halves.
///
/// Returns the integral and an error estimate. `rel_tol` is relative to the
/// accumulated integral magnitude (floored at 1.0 to keep the criterion
/// meaningful near zero).
pub fn adaptive_quad<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> (f64, f64) {
    let whole = gauss8(f, a, b);
    let mut value = KahanSum::new();
    let mut err = KahanSum::new();
    let scale = whole.abs().max(1.0);
    adaptive_rec(f, a, b, whole, rel_tol * scale, 52, &mut value, &mut err);
    (value.value(), err.value())
}

fn adaptive_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    abs_tol: f64,
    depth: u32,
    value: &mut KahanSum,
    err: &mut KahanSum,
) {
    let mid = 0.5 * (a + b);
    let left = gauss8(f, a, mid);
    let right = gauss8(f, mid, b);
    let diff = (left + right - whole).abs();
    if depth == 0 || diff <= abs_tol {
        value.add(left);
        value.add(right);
        err.add(diff);
        return;
    }
    adaptive_rec(f, a, mid, left, abs_tol * 0.5, depth - 1, value, err);
    adaptive_rec(f, mid, b, right, abs_tol * 0.5, depth - 1, value, err);
}

/// FNV-1a 64-bit hash, used for cache and zero-table checksums.
#[derive(Debug, Clone, Copy)]
pub struct Fnv64(u64);

impl Default for Fnv64 {
    fn default() -> Self {
        Fnv64(0xcbf2_9ce4_8422_2325)
    }
}

impl Fnv64 {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn update(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x100_0000_01b3);
        }
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

pub fn fnv64(bytes: &[u8]) -> u64 {
    let mut h = Fnv64::new();
    h.update(bytes);
    h.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_beats_naive_on_many_small_terms() {
        let n = 10_000_000;
        let mut naive = 0.0f64;
        let mut k = KahanSum::new();
        for _ in 0..n {
            naive += 0.1;
            k.add(0.1);
        }
        let exact = 1.0e6;
        assert!((k.value() - exact).abs() < (naive - exact).abs());
        assert!((k.value() - exact).abs() < 1e-6);
    }

    #[test]
    fn blockwise_sum_matches_kahan() {
        let values: Vec<f64> = (0..200_000).map(|i| ((i * 2654435761u64 as usize) % 1000) as f64 * 1e-3).collect();
        let mut k = KahanSum::new();
        for &v in &values {
            k.add(v);
        }
        assert!((blockwise_sum(&values) - k.value()).abs() < 1e-9);
    }

    #[test]
    fn quadrature_exact_on_polynomials() {
        // GL8 is exact through degree 15
        let (v, _) = adaptive_quad(&|t: f64| t.powi(7), 0.0, 2.0, 1e-12);
        assert!((v - 32.0).abs() < 1e-10);
    }

    #[test]
    fn quadrature_log_integral() {
        // int_1^e dt/t = 1
        let (v, e) = adaptive_quad(&|t: f64| 1.0 / t, 1.0, std::f64::consts::E, 1e-12);
        assert!((v - 1.0).abs() < 1e-11, "v={v} err={e}");
    }

    #[test]
    fn fnv_distinguishes_inputs() {
        assert_ne!(fnv64(b"abc"), fnv64(b"abd"));
        assert_eq!(fnv64(b""), 0xcbf2_9ce4_8422_2325);
    }
}
