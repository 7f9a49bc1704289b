//! Partial-summation bridges between the two error terms.
//!
//! Abel summation turns pi(x) - Li(x) into (psi(x) - x)/log x plus a smooth
//! integral and a prime-power remainder R_pp, and back again. Both directions
//! are checked numerically as identities: every step-function integral has an
//! elementary closed form (the integrand is constant between prime-power
//! breakpoints), so the only inexact pieces are the quadratures for Li and
//! for int_2^x dt/log^2 t, and the reported gap is pure quadrature error.
//!
//! Li always means the x/log x + int_2^x dt/log^2 t normalization here; with
//! the offset-integral form every identity would pick up the constant
//! 2/log 2 and a spurious gap.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{adaptive_quad, KahanSum};
use crate::prime_engine::{
    simple_sieve, ChebyshevValues, PrimeCheckpointTable, LI_BYPARTS_OFFSET,
};

/// Default relative quadrature tolerance for bridge checks.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

/// Two sides of one bridge identity, evaluated independently.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BridgeReport {
    pub x: f64,
    pub direction: BridgeDirection,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_gap: f64,
    /// R_pp(x) forward, R-tilde_pp(x) reverse.
    pub r_pp: f64,
    pub r_pp_over_sqrt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BridgeDirection {
    /// pi - Li expressed through psi - x.
    Forward,
    /// psi - x expressed through pi - Li.
    Reverse,
}

/// Largest k with 2^k <= n.
fn max_power(n: u64) -> u32 {
    debug_assert!(n >= 4);
    63 - n.leading_zeros() as u32 - ((1u64 << (63 - n.leading_zeros())) > n) as u32
}

/// floor(n^{1/k}), exact (float estimate plus integer correction).
fn integer_root(n: u64, k: u32) -> u64 {
    if k == 1 {
        return n;
    }
    let mut r = (n as f64).powf(1.0 / k as f64).round() as u64;
    while r > 0 && checked_pow(r, k).map_or(true, |p| p > n) {
        r -= 1;
    }
    while checked_pow(r + 1, k).is_some_and(|p| p <= n) {
        r += 1;
    }
    r
}

fn checked_pow(base: u64, k: u32) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..k {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// Per-k pieces of R_pp(x): theta(x^{1/k})/log x plus the closed-form value
/// of int_2^x theta(t^{1/k})/(t log^2 t) dt. The integrand jumps only at
/// t = p^k, and int dt/(t log^2 t) = -1/log t, so each prime contributes
/// exactly 1/k - log p / log x once p^k <= x.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RppBreakdown {
    pub x: f64,
    /// (k, term_k) for 2 <= k <= floor(log2 x), nonzero terms only.
    pub terms: Vec<(u32, f64)>,
    pub total: f64,
    /// Share of the k = 2 term in the total.
    pub k2_share: f64,
}

pub fn r_pp_breakdown(x: f64) -> Result<RppBreakdown> {
    if !(x >= 4.0) {
        return Err(Error::precondition(format!("r_pp requires x >= 4, got {x}")));
    }
    let n = x as u64;
    let log_x = x.ln();
    let primes = simple_sieve(integer_root(n, 2) as u32);
    let mut terms = Vec::new();
    let mut total = KahanSum::new();
    for k in 2..=max_power(n) {
        let root = integer_root(n, k);
        if root < 2 {
            break;
        }
        let mut term = KahanSum::new();
        for &p in primes.iter().take_while(|&&p| p as u64 <= root) {
            let lp = (p as f64).ln();
            term.add(lp / log_x); // theta(x^{1/k}) / log x
            term.add(1.0 / k as f64 - lp / log_x); // integral piece
        }
        terms.push((k, term.value()));
        total.add(term.value());
    }
    let total = total.value();
    let k2 = terms.first().map_or(0.0, |&(_, t)| t);
    Ok(RppBreakdown {
        x,
        terms,
        total,
        k2_share: if total > 0.0 { k2 / total } else { 0.0 },
    })
}

/// R_pp(x) = sum_{k>=2} [theta(x^{1/k})/log x + int_2^x theta(t^{1/k})/(t log^2 t) dt].
pub fn r_pp(x: f64) -> Result<f64> {
    Ok(r_pp_breakdown(x)?.total)
}

/// R-tilde_pp(x) = sum_{k>=2} theta(x^{1/k}); the additive constant C0 of the
/// reverse bridge is 0 for this Li normalization (both sides of the
/// integration-by-parts identity equal 2 at x = 2).
pub fn r_pp_tilde(x: f64) -> Result<f64> {
    if !(x >= 4.0) {
        return Err(Error::precondition(format!(
            "r_pp_tilde requires x >= 4, got {x}"
        )));
    }
    let n = x as u64;
    let primes = simple_sieve(integer_root(n, 2) as u32);
    let mut total = KahanSum::new();
    for k in 2..=max_power(n) {
        let root = integer_root(n, k);
        if root < 2 {
            break;
        }
        for &p in primes.iter().take_while(|&&p| p as u64 <= root) {
            total.add((p as f64).ln());
        }
    }
    Ok(total.value())
}

/// Li_byparts via the log-integral quadrature (e^u/u after t = e^u), kept
/// deliberately independent of [`i2`] so bridge gaps measure real
/// quadrature disagreement rather than cancelling identically.
fn li_byparts_quad(x: f64, tol: f64) -> f64 {
    let (j, _) = adaptive_quad(&|u: f64| u.exp() / u, 2f64.ln(), x.ln(), tol);
    j + LI_BYPARTS_OFFSET
}

/// int_2^x dt/log^2 t, via t = e^u.
fn i2(x: f64, tol: f64) -> f64 {
    let (j, _) = adaptive_quad(&|u: f64| u.exp() / (u * u), 2f64.ln(), x.ln(), tol);
    j
}

/// Prime-power counting function Pi(x) = sum_{p^k <= x} 1/k.
fn riemann_pi(x: f64, table: &PrimeCheckpointTable) -> Result<f64> {
    let n = x as u64;
    let mut acc = KahanSum::with_value(table.pi(n)? as f64);
    for k in 2..=max_power(n) {
        let root = integer_root(n, k);
        if root < 2 {
            break;
        }
        acc.add(table.pi(root)? as f64 / k as f64);
    }
    Ok(acc.value())
}

/// Forward bridge: pi(x) - Li(x) against
/// (psi(x)-x)/log x + int_2^x (psi(t)-t)/(t log^2 t) dt - R_pp(x).
///
/// The psi part of the integral is exact by Abel summation
/// (int_2^x psi(t)/(t log^2 t) dt = Pi(x) - psi(x)/log x); the -t part is
/// the [`i2`] quadrature.
pub fn bridge_forward(x: f64, table: &PrimeCheckpointTable, quad_tol: f64) -> Result<BridgeReport> {
    check_bridge_args(x, quad_tol)?;
    let log_x = x.ln();
    let cheb = ChebyshevValues::compute(x, table)?;
    let pi_x = table.pi(x as u64)? as f64;
    let rpp = r_pp(x)?;
    let lhs = pi_x - li_byparts_quad(x, quad_tol);
    let psi_integral = riemann_pi(x, table)? - cheb.psi / log_x;
    let rhs = (cheb.psi - x) / log_x + (psi_integral - i2(x, quad_tol)) - rpp;
    Ok(BridgeReport {
        x,
        direction: BridgeDirection::Forward,
        lhs,
        rhs,
        abs_gap: (lhs - rhs).abs(),
        r_pp: rpp,
        r_pp_over_sqrt: rpp / x.sqrt(),
    })
}

/// Reverse bridge: psi(x) - x against
/// log x (pi(x)-Li(x)) - int_2^x (pi(t)-Li(t))/t dt + R-tilde_pp(x).
///
/// Exact pieces: int_2^x pi(t)/t dt = pi(x) log x - theta(x) by Abel, and
/// int_2^x Li(t)/t dt = log x * int_2^x dt/log^2 t (differentiate both
/// sides; they agree at x = 2), leaving only Li and i2 quadratures.
pub fn bridge_reverse(x: f64, table: &PrimeCheckpointTable, quad_tol: f64) -> Result<BridgeReport> {
    check_bridge_args(x, quad_tol)?;
    let log_x = x.ln();
    let cheb = ChebyshevValues::compute(x, table)?;
    let pi_x = table.pi(x as u64)? as f64;
    let rtilde = r_pp_tilde(x)?;
    let lhs = cheb.psi - x;
    let pi_over_t = pi_x * log_x - cheb.theta;
    let li_over_t = log_x * i2(x, quad_tol);
    let rhs = log_x * (pi_x - li_byparts_quad(x, quad_tol)) - (pi_over_t - li_over_t) + rtilde;
    Ok(BridgeReport {
        x,
        direction: BridgeDirection::Reverse,
        lhs,
        rhs,
        abs_gap: (lhs - rhs).abs(),
        r_pp: rtilde,
        r_pp_over_sqrt: rtilde / x.sqrt(),
    })
}

fn check_bridge_args(x: f64, quad_tol: f64) -> Result<()> {
    if !(x >= 4.0) {
        return Err(Error::precondition(format!("bridge requires x >= 4, got {x}")));
    }
    if !(quad_tol > 0.0 && quad_tol <= 1e-3) {
        return Err(Error::precondition(format!(
            "quadrature tolerance must lie in (0, 1e-3], got {quad_tol}"
        )));
    }
    Ok(())
}

/// Both error terms at x, normalized by sqrt(x) log x.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VonKochRatio {
    pub x: u64,
    /// |pi(x) - Li(x)| / (sqrt(x) log x).
    pub pi_ratio: f64,
    /// |psi(x) - x| / (sqrt(x) log x).
    pub psi_ratio: f64,
}

pub fn vonkoch_ratios(xs: &[u64], table: &PrimeCheckpointTable) -> Result<Vec<VonKochRatio>> {
    xs.iter()
        .map(|&n| {
            if n < 4 {
                return Err(Error::precondition(format!(
                    "vonkoch_ratios requires x >= 4, got {n}"
                )));
            }
            let x = n as f64;
            let scale = x.sqrt() * x.ln();
            let psi = ChebyshevValues::compute(x, table)?.psi;
            let pi_x = table.pi(n)? as f64;
            Ok(VonKochRatio {
                x: n,
                pi_ratio: (pi_x - li_byparts_quad(x, DEFAULT_QUAD_TOL)).abs() / scale,
                psi_ratio: (psi - x).abs() / scale,
            })
        })
        .collect()
}
