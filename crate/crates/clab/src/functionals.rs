//! Windows, the error functionals E(X) and E-tilde(X), dominance and
//! selection checks, the contraction scan, and the contraction-factor audit.
//!
//! E(X) is the supremum of |E_psi(y)| (or |E_pi(y)|) over composite integers
//! in the one-visit window W_X = [X, (1 + 0.1/log X) X]. E-tilde(X) takes,
//! over composite starts y in the parent window [X, (1 + 2/log X) X], the
//! supremum of the absolute trajectory sum of the same error over composite
//! in-window iterates. All scans share one precomputed window prefix, so a
//! full pass at X = 10^8 costs one sieve sweep plus O(landings) per start.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use crate::dynamics::{walk_composites, StepRule, DEFAULT_STEP_LIMIT};
use crate::error::{Error, Result};
use crate::prime_engine::{psi_window_prefix, PrimeCheckpointTable, WindowPrefix};

/// Width coefficient of the one-visit window.
pub const ONE_VISIT_C: f64 = 0.1;
/// Width coefficient of the parent window.
pub const PARENT_C: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WindowKind {
    OneVisit,
    Parent,
}

impl WindowKind {
    pub fn coefficient(&self) -> f64 {
        match self {
            WindowKind::OneVisit => ONE_VISIT_C,
            WindowKind::Parent => PARENT_C,
        }
    }
}

/// An interval [X, floor((1 + c/log X) X)] with its role tag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x: u64,
    pub kind: WindowKind,
    pub c: f64,
    pub lo: u64,
    pub hi: u64,
    /// U = log X.
    pub u: f64,
}

impl Window {
    #[inline]
    pub fn contains(&self, y: u64) -> bool {
        y >= self.lo && y <= self.hi
    }

    pub fn length(&self) -> u64 {
        self.hi - self.lo
    }
}

/// Construct W_X (one-visit) or the parent window at scale X >= 16.
pub fn make_window(x: u64, kind: WindowKind) -> Result<Window> {
    if x < 16 {
        return Err(Error::precondition(format!("window scale X must be >= 16, got {x}")));
    }
    let u = (x as f64).ln();
    let c = kind.coefficient();
    // at tiny X the one-visit width 0.1 X / log X rounds to zero and the
    // window degenerates to the single point X; scans handle that fine
    let hi = ((1.0 + c / u) * x as f64).floor() as u64;
    Ok(Window {
        x,
        kind,
        c,
        lo: x,
        hi,
        u,
    })
}

/// Which error metric a scan measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    /// E_psi(y) = psi(y) - y.
    Psi,
    /// E_pi(y) = pi(y) - Li_byparts(y).
    Pi,
}

impl Metric {
    pub const BOTH: [Metric; 2] = [Metric::Psi, Metric::Pi];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::Psi => "psi",
            Metric::Pi => "pi",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "psi" => Ok(Metric::Psi),
            "pi" => Ok(Metric::Pi),
            other => Err(Error::precondition(format!("unknown metric '{other}'"))),
        }
    }
}

/// Result of a window or trajectory supremum scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionalResult {
    pub x: u64,
    pub metric: Metric,
    pub value: f64,
    /// Composite point attaining the supremum (trajectory start for E-tilde);
    /// ties broken by the smallest attaining point.
    pub argmax_point: u64,
    pub rule: Option<StepRule>,
    pub points_scanned: u64,
}

impl FunctionalResult {
    /// value / (sqrt(X) log X).
    pub fn vonkoch_ratio(&self) -> f64 {
        let x = self.x as f64;
        self.value / (x.sqrt() * x.ln())
    }
}

/// Per-trajectory packing statistics over a full parent-window scan.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PackingStats {
    pub x: u64,
    pub rule: StepRule,
    pub max_landings: usize,
    /// Minimum spacing between consecutive composite landings of the same
    /// trajectory; u64::MAX when no trajectory had two landings.
    pub min_spacing: u64,
    pub trajectories: u64,
}

/// Shared scan context at one scale X: the parent-window prefix plus lazily
/// computed E_pi values. The one-visit window is the leading sub-range.
pub struct WindowScan<'a> {
    pub one_visit: Window,
    pub parent: Window,
    table: &'a PrimeCheckpointTable,
    prefix: WindowPrefix,
    e_pi: OnceLock<Vec<f64>>,
}

impl<'a> WindowScan<'a> {
    pub fn new(x: u64, table: &'a PrimeCheckpointTable) -> Result<Self> {
        let one_visit = make_window(x, WindowKind::OneVisit)?;
        let parent = make_window(x, WindowKind::Parent)?;
        let prefix = psi_window_prefix(x, parent.hi - parent.lo, table)?;
        Ok(WindowScan {
            one_visit,
            parent,
            table,
            prefix,
            e_pi: OnceLock::new(),
        })
    }

    pub fn prefix(&self) -> &WindowPrefix {
        &self.prefix
    }

    pub fn table(&self) -> &PrimeCheckpointTable {
        self.table
    }

    /// Metric error at in-window y.
    #[inline]
    fn metric_value(&self, metric: Metric, y: u64) -> f64 {
        match metric {
            Metric::Psi => self.prefix.e_psi(y),
            Metric::Pi => self.e_pi_values()[(y - self.prefix.lo()) as usize],
        }
    }

    fn e_pi_values(&self) -> &[f64] {
        self.e_pi
            .get_or_init(|| self.prefix.e_pi_values().expect("window already validated"))
    }

    /// E(X): supremum of the metric error over composites in W_X.
    pub fn big_e(&self, metric: Metric) -> FunctionalResult {
        if metric == Metric::Pi {
            self.e_pi_values();
        }
        let (value, argmax, scanned) = par_range_reduce(self.one_visit.lo, self.one_visit.hi, |y| {
            self.prefix
                .is_composite(y)
                .then(|| self.metric_value(metric, y).abs())
        });
        FunctionalResult {
            x: self.one_visit.x,
            metric,
            value,
            argmax_point: argmax,
            rule: None,
            points_scanned: scanned,
        }
    }

    /// E-tilde(X): supremum over composite starts in the parent window of the
    /// absolute trajectory sum of the metric error over composite iterates.
    pub fn big_e_tilde(&self, metric: Metric, rule: StepRule) -> FunctionalResult {
        if metric == Metric::Pi {
            self.e_pi_values();
        }
        let (value, argmax, scanned) = par_range_reduce(self.parent.lo, self.parent.hi, |y| {
            if !self.prefix.is_composite(y) {
                return None;
            }
            let mut sum = 0.0;
            walk_composites(y, &self.prefix, rule, DEFAULT_STEP_LIMIT, |m| {
                sum += self.metric_value(metric, m);
            });
            Some(sum.abs())
        });
        FunctionalResult {
            x: self.parent.x,
            metric,
            value,
            argmax_point: argmax,
            rule: Some(rule),
            points_scanned: scanned,
        }
    }

    /// Lemma-2.2 check: returns (E-tilde >= E, E-tilde - E) with both values.
    pub fn check_dominance(&self, metric: Metric, rule: StepRule) -> DominanceReport {
        let e = self.big_e(metric);
        let e_tilde = self.big_e_tilde(metric, rule);
        DominanceReport {
            x: self.parent.x,
            metric,
            rule,
            holds: e_tilde.value >= e.value,
            margin: e_tilde.value - e.value,
            e: e.value,
            e_tilde: e_tilde.value,
        }
    }

    /// Full-scan packing statistics: max composite landings per trajectory
    /// and the minimum spacing between consecutive landings.
    pub fn packing_stats(&self, rule: StepRule) -> PackingStats {
        let lo = self.parent.lo;
        let hi = self.parent.hi;
        let chunks: Vec<(u64, u64)> = chunk_ranges(lo, hi);
        let (max_landings, min_spacing, trajectories) = chunks
            .par_iter()
            .map(|&(a, b)| {
                let mut max_l = 0usize;
                let mut min_s = u64::MAX;
                let mut count = 0u64;
                for y in a..=b {
                    if !self.prefix.is_composite(y) {
                        continue;
                    }
                    count += 1;
                    let mut last: Option<u64> = None;
                    let landings =
                        walk_composites(y, &self.prefix, rule, DEFAULT_STEP_LIMIT, |m| {
                            if let Some(prev) = last {
                                min_s = min_s.min(m - prev);
                            }
                            last = Some(m);
                        });
                    max_l = max_l.max(landings);
                }
                (max_l, min_s, count)
            })
            .reduce(
                || (0, u64::MAX, 0),
                |a, b| (a.0.max(b.0), a.1.min(b.1), a.2 + b.2),
            );
        PackingStats {
            x: self.parent.x,
            rule,
            max_landings,
            min_spacing,
            trajectories,
        }
    }
}

/// Dominance check output.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DominanceReport {
    pub x: u64,
    pub metric: Metric,
    pub rule: StepRule,
    pub holds: bool,
    pub margin: f64,
    pub e: f64,
    pub e_tilde: f64,
}

fn chunk_ranges(lo: u64, hi: u64) -> Vec<(u64, u64)> {
    const CHUNK: u64 = 1 << 16;
    let mut out = Vec::new();
    let mut a = lo;
    while a <= hi {
        let b = (a + CHUNK - 1).min(hi);
        out.push((a, b));
        a = b + 1;
    }
    out
}

/// Parallel max-|value| reduction over [lo, hi] with deterministic smallest-y
/// tie-break. `f` returns None for points that do not participate.
fn par_range_reduce<F>(lo: u64, hi: u64, f: F) -> (f64, u64, u64)
where
    F: Fn(u64) -> Option<f64> + Sync,
{
    let chunks = chunk_ranges(lo, hi);
    chunks
        .par_iter()
        .map(|&(a, b)| {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0u64;
            let mut n = 0u64;
            for y in a..=b {
                if let Some(v) = f(y) {
                    n += 1;
                    if v > best {
                        best = v;
                        arg = y;
                    }
                }
            }
            (best, arg, n)
        })
        .reduce(
            || (f64::NEG_INFINITY, u64::MAX, 0),
            |x, y| {
                let (best, arg) = if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) {
                    (y.0, y.1)
                } else {
                    (x.0, x.1)
                };
                (best, arg, x.2 + y.2)
            },
        )
}

/// Composite-selection output: the chosen composite and the certified lower
/// bound on |psi(y) - y|.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SelectedComposite {
    pub y: u64,
    pub lower_bound: f64,
}

/// Select a composite y in W_X with |y - x| <= 1, certified to satisfy
/// |psi(y) - y| >= |psi(x) - x| - (log(2X) + 1).
///
/// Picks an even integer >= 4 among floor(x), ceil(x) and their unit
/// neighbors, preferring the candidate closest to x (ties to the smaller y).
pub fn composite_select(
    x: f64,
    scan: &WindowScan<'_>,
) -> Result<SelectedComposite> {
    let w = scan.one_visit;
    if x < w.lo as f64 || x > w.hi as f64 {
        return Err(Error::precondition(format!(
            "x={x} outside one-visit window [{}, {}]",
            w.lo, w.hi
        )));
    }
    let fl = x.floor() as u64;
    let ce = x.ceil() as u64;
    let mut best: Option<(f64, u64)> = None;
    for cand in [fl.saturating_sub(1), fl, ce, ce + 1] {
        if cand % 2 != 0 || cand < 4 || !w.contains(cand) {
            continue;
        }
        let dist = (cand as f64 - x).abs();
        if dist > 1.0 {
            continue;
        }
        match best {
            Some((d, y)) if d < dist || (d == dist && y <= cand) => {}
            _ => best = Some((dist, cand)),
        }
    }
    let (_, y) = best.ok_or_else(|| {
        Error::precondition(format!("window too short to retain an even composite near {x}"))
    })?;
    debug_assert!(scan.prefix().is_composite(y));
    let e_x = scan.prefix().psi(x.floor() as u64) - x;
    let slack = (2.0 * w.x as f64).ln() + 1.0;
    Ok(SelectedComposite {
        y,
        lower_bound: e_x.abs() - slack,
    })
}

/// One ladder level of the contraction scan.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LadderLevel {
    pub x: u64,
    pub e_tilde: f64,
    /// E-tilde at the next scale X^{3/4}, when the ladder continues.
    pub e_tilde_next: Option<f64>,
    pub vonkoch_ratio: f64,
}

/// Contraction-scan report across a 3/4-power ladder.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContractionReport {
    pub metric: Metric,
    pub rule: StepRule,
    pub ladder: Vec<LadderLevel>,
    /// (E-tilde(X) - (5/6) E-tilde(X^{3/4})) / (X^{1/2} log X), one per
    /// consecutive ladder pair.
    pub residuals: Vec<f64>,
    pub c_empirical: f64,
}

/// Scan the ladder X_k = X_max^{(3/4)^k}, k = 0..levels-1.
///
/// Every level must stay above 10^3; window definitions degrade below that.
pub fn contraction_scan(
    x_max: u64,
    levels: usize,
    metric: Metric,
    rule: StepRule,
    table: &PrimeCheckpointTable,
) -> Result<ContractionReport> {
    if levels < 1 {
        return Err(Error::precondition("levels must be >= 1"));
    }
    let mut scales = Vec::with_capacity(levels);
    let mut x = x_max as f64;
    for _ in 0..levels {
        if x < 1e3 {
            return Err(Error::precondition(format!(
                "ladder level {x:.0} fell below 10^3; reduce levels"
            )));
        }
        scales.push(x.round() as u64);
        x = x.powf(0.75);
    }
    let mut e_tildes = Vec::with_capacity(levels + 1);
    for &s in &scales {
        let scan = WindowScan::new(s, table)?;
        e_tildes.push(scan.big_e_tilde(metric, rule).value);
    }
    let mut ladder = Vec::with_capacity(levels);
    let mut residuals = Vec::new();
    for (k, &s) in scales.iter().enumerate() {
        let next = (k + 1 < levels).then(|| e_tildes[k + 1]);
        let xf = s as f64;
        let norm = xf.sqrt() * xf.ln();
        ladder.push(LadderLevel {
            x: s,
            e_tilde: e_tildes[k],
            e_tilde_next: next,
            vonkoch_ratio: e_tildes[k] / norm,
        });
        if let Some(n) = next {
            residuals.push((e_tildes[k] - (5.0 / 6.0) * n) / norm);
        }
    }
    let c_empirical = residuals.iter().cloned().fold(0.0f64, f64::max);
    Ok(ContractionReport {
        metric,
        rule,
        ladder,
        residuals,
        c_empirical,
    })
}

/// Exact contraction-factor audit value.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AlphaEff {
    /// Reduced fraction, available when U is a positive integer.
    pub rational: Option<(u64, u64)>,
    pub value: f64,
}

/// alpha_eff(U) = (5/6) (1 + 2/U) (11/12) = 55 (U + 2) / (72 U).
pub fn alpha_eff(u: f64) -> Result<AlphaEff> {
    if !(u > 0.0) {
        return Err(Error::precondition(format!("alpha_eff requires U > 0, got {u}")));
    }
    let value = (5.0 / 6.0) * (1.0 + 2.0 / u) * (11.0 / 12.0);
    let rational = if u.fract() == 0.0 && u <= 1e15 {
        let ui = u as u64;
        let num = 55 * (ui + 2);
        let den = 72 * ui;
        let g = gcd(num, den);
        Some((num / g, den / g))
    } else {
        None
    };
    Ok(AlphaEff { rational, value })
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prime_engine::build_checkpoints;

    #[test]
    fn window_shapes() {
        let w = make_window(162_755, WindowKind::Parent).unwrap();
        // length ~ 2X/U ~ 27126
        let expect = 2.0 * 162_755.0 / (162_755f64).ln();
        assert!((w.length() as f64 - expect).abs() < 2.0, "{}", w.length());
        assert_eq!(w.lo, 162_755);

        let w = make_window(1_000_000, WindowKind::OneVisit).unwrap();
        let expect = 0.1 * 1e6 / (1e6f64).ln();
        assert!((w.length() as f64 - expect).abs() < 2.0);
        assert!(make_window(15, WindowKind::Parent).is_err());
    }

    #[test]
    fn window_truncation_invariant() {
        for x in [16u64, 100, 1234, 99_991, 1_000_000] {
            for kind in [WindowKind::OneVisit, WindowKind::Parent] {
                let w = make_window(x, kind).unwrap();
                // floor truncation shortens the window by less than one unit
                let ratio = w.length() as f64 / (x as f64 / w.u);
                assert!(ratio <= w.c + 1e-12, "x={x} ratio={ratio}");
                assert!(ratio >= w.c - w.u / x as f64 - 1e-12, "x={x} ratio={ratio}");
            }
        }
    }

    #[test]
    fn big_e_matches_pointwise_scan() {
        let table = build_checkpoints(30_000, 512).unwrap();
        let scan = WindowScan::new(10_000, &table).unwrap();
        let r = scan.big_e(Metric::Psi);
        // brute force over composites of W_X using pointwise values
        let w = scan.one_visit;
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0;
        for y in w.lo..=w.hi {
            if scan.prefix().is_composite(y) {
                let v = scan.prefix().e_psi(y).abs();
                if v > best {
                    best = v;
                    arg = y;
                }
            }
        }
        assert_eq!(r.value, best);
        assert_eq!(r.argmax_point, arg);
        assert!(scan.prefix().is_composite(r.argmax_point));
    }

    #[test]
    fn e_tilde_single_composite_start() {
        // a start whose first step exits contributes exactly |E_psi(y)|
        let table = build_checkpoints(30_000, 512).unwrap();
        let scan = WindowScan::new(10_000, &table).unwrap();
        let r = scan.big_e_tilde(Metric::Psi, StepRule::RetreatOwnGap);
        assert!(r.value > 0.0);
        assert!(scan.prefix().is_composite(r.argmax_point));
    }

    #[test]
    fn dominance_small_scale() {
        let table = build_checkpoints(30_000, 512).unwrap();
        let scan = WindowScan::new(10_000, &table).unwrap();
        for rule in StepRule::BOTH {
            for metric in Metric::BOTH {
                let d = scan.check_dominance(metric, rule);
                assert!(d.holds, "{metric:?} {rule:?}: margin {}", d.margin);
            }
        }
    }

    #[test]
    fn composite_select_cases() {
        let table = build_checkpoints(3_000_000, 4096).unwrap();
        let scan = WindowScan::new(1_000_000, &table).unwrap();
        // already an even composite integer
        let s = composite_select(1_000_100.0, &scan).unwrap();
        assert_eq!(s.y, 1_000_100);
        // prime x -> even neighbor
        let s = composite_select(1_000_003.0, &scan).unwrap();
        assert!(s.y == 1_000_002 || s.y == 1_000_004);
        assert!((s.y as f64 - 1_000_003.0).abs() <= 1.0);
    }

    #[test]
    fn alpha_eff_values() {
        let a = alpha_eff(120.0).unwrap();
        let (n, d) = a.rational.unwrap();
        // equals 3355/4320 as a rational
        assert_eq!(n as u128 * 4320, d as u128 * 3355);
        assert!(a.value < 0.7767);
        // U -> infinity limit 55/72
        let inf = alpha_eff(1e12).unwrap();
        assert!((inf.value - 55.0 / 72.0).abs() < 1e-10);
        assert!(alpha_eff(0.0).is_err());
    }

    #[test]
    fn alpha_eff_monotone_decreasing() {
        let mut prev = f64::INFINITY;
        for u in (22..400).step_by(7) {
            let v = alpha_eff(u as f64).unwrap().value;
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn alpha_eff_below_five_sixths_iff_u_above_22() {
        assert!(alpha_eff(22.5).unwrap().value < 5.0 / 6.0);
        assert!(alpha_eff(21.5).unwrap().value > 5.0 / 6.0);
    }
}
