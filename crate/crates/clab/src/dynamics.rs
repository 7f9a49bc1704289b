//! The integer map and window-restricted trajectory segments.
//!
//! Composites advance by pi(m); primes retreat by a prime gap. The source
//! material admits two readings of the prime rule, so both are implemented
//! and every downstream scan is parameterized by the choice:
//!
//! - `RetreatOwnGap`: p_k -> p_k - (p_k - p_{k-1}) = p_{k-1}
//! - `RetreatPriorGap`: p_k -> p_k - (p_{k-1} - p_{k-2})
//!
//! Neither is asserted canonical anywhere in this crate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::Window;
use crate::prime_engine::{is_prime, prev_prime, PrimeCheckpointTable, WindowPrefix};

/// Active rule for the prime step of the map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepRule {
    /// p_k steps back by its own gap, landing on the previous prime.
    RetreatOwnGap,
    /// p_k steps back by the gap before the previous prime.
    RetreatPriorGap,
}

impl StepRule {
    pub const BOTH: [StepRule; 2] = [StepRule::RetreatOwnGap, StepRule::RetreatPriorGap];

    pub fn name(&self) -> &'static str {
        match self {
            StepRule::RetreatOwnGap => "retreat_own_gap",
            StepRule::RetreatPriorGap => "retreat_prior_gap",
        }
    }
}

impl std::str::FromStr for StepRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "retreat_own_gap" | "own" => Ok(StepRule::RetreatOwnGap),
            "retreat_prior_gap" | "prior" => Ok(StepRule::RetreatPriorGap),
            other => Err(Error::precondition(format!("unknown prime rule '{other}'"))),
        }
    }
}

/// Why a trajectory stopped being recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExitReason {
    LeftWindow,
    StepLimit,
}

/// Ordered in-window iterates of one starting point.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub start: u64,
    /// (value, is_composite), every value inside the window.
    pub points: Vec<(u64, bool)>,
    pub window: Window,
    pub exit_reason: ExitReason,
    /// First iterate outside the window, when the trajectory left it.
    pub exit_point: Option<u64>,
}

impl Trajectory {
    /// Number of composite iterates recorded in the window.
    pub fn composite_landings(&self) -> usize {
        self.points.iter().filter(|&&(_, c)| c).count()
    }

    /// CSV dump: start, index, value, is_composite, in_window.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("start,index,value,is_composite,in_window\n");
        for (i, &(v, c)) in self.points.iter().enumerate() {
            out.push_str(&format!("{},{},{},{},true\n", self.start, i, v, c));
        }
        if let Some(e) = self.exit_point {
            out.push_str(&format!(
                "{},{},{},{},false\n",
                self.start,
                self.points.len(),
                e,
                !is_prime(e)
            ));
        }
        out
    }
}

/// One application of the map at m >= 4.
pub fn step(m: u64, rule: StepRule, table: &PrimeCheckpointTable) -> Result<u64> {
    if m < 4 {
        return Err(Error::precondition(format!("step requires m >= 4, got {m}")));
    }
    let next = if is_prime(m) {
        prime_step(m, rule)?
    } else {
        m + table.pi(m)?
    };
    if next > table.max_n() {
        return Err(Error::capacity(format!(
            "step from {m} lands at {next}, beyond table range {}",
            table.max_n()
        )));
    }
    Ok(next)
}

fn prime_step(p: u64, rule: StepRule) -> Result<u64> {
    match rule {
        StepRule::RetreatOwnGap => prev_prime(p),
        StepRule::RetreatPriorGap => {
            let q = prev_prime(p)?;
            let r = prev_prime(q)?;
            Ok(p - (q - r))
        }
    }
}

pub const DEFAULT_STEP_LIMIT: usize = 64;

/// Forward orbit from y, recorded while inside `window`, stopped at the
/// first exit or after `step_limit` recorded points.
pub fn trajectory_segment(
    y: u64,
    window: Window,
    rule: StepRule,
    table: &PrimeCheckpointTable,
    step_limit: usize,
) -> Result<Trajectory> {
    if !window.contains(y) {
        return Err(Error::precondition(format!(
            "start {y} outside window [{}, {}]",
            window.lo, window.hi
        )));
    }
    if step_limit < 1 {
        return Err(Error::precondition("step_limit must be >= 1"));
    }
    let mut points = Vec::new();
    let mut m = y;
    loop {
        points.push((m, !is_prime(m)));
        if points.len() >= step_limit {
            return Ok(Trajectory {
                start: y,
                points,
                window,
                exit_reason: ExitReason::StepLimit,
                exit_point: None,
            });
        }
        let next = step(m, rule, table)?;
        if !window.contains(next) {
            return Ok(Trajectory {
                start: y,
                points,
                window,
                exit_reason: ExitReason::LeftWindow,
                exit_point: Some(next),
            });
        }
        m = next;
    }
}

/// Composite-landing walk over a precomputed window prefix.
///
/// Visits the same iterates as [`trajectory_segment`] but reads pi and the
/// composite flags from the prefix, calling `on_composite(m)` per composite
/// landing. Under `RetreatOwnGap` the walk stops at the first prime iterate,
/// since primes map to primes under that rule and no composite can follow.
/// Returns the number of composite landings.
pub fn walk_composites<F: FnMut(u64)>(
    y: u64,
    prefix: &WindowPrefix,
    rule: StepRule,
    step_limit: usize,
    mut on_composite: F,
) -> usize {
    debug_assert!(prefix.contains(y));
    let mut landings = 0;
    let mut m = y;
    for _ in 0..step_limit {
        if prefix.is_composite(m) {
            landings += 1;
            on_composite(m);
            let next = m + prefix.pi(m);
            if !prefix.contains(next) {
                break;
            }
            m = next;
        } else {
            if rule == StepRule::RetreatOwnGap {
                break;
            }
            let Ok(next) = prime_step(m, rule) else { break };
            if !prefix.contains(next) {
                break;
            }
            m = next;
        }
    }
    landings
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{make_window, WindowKind};
    use crate::prime_engine::build_checkpoints;

    #[test]
    fn composite_step() {
        let t = build_checkpoints(100, 10).unwrap();
        // pi(9) = 4
        assert_eq!(step(9, StepRule::RetreatOwnGap, &t).unwrap(), 13);
    }

    #[test]
    fn prime_steps_both_rules() {
        let t = build_checkpoints(100, 10).unwrap();
        assert_eq!(step(11, StepRule::RetreatOwnGap, &t).unwrap(), 7);
        assert_eq!(step(13, StepRule::RetreatPriorGap, &t).unwrap(), 9);
    }

    #[test]
    fn step_preconditions() {
        let t = build_checkpoints(100, 10).unwrap();
        assert!(step(3, StepRule::RetreatOwnGap, &t).is_err());
        // pi(97) = 25, 97 + 25 = 122 > 100
        assert!(matches!(
            step(98, StepRule::RetreatOwnGap, &t),
            Err(Error::Capacity(_))
        ));
    }

    fn window_8_20() -> Window {
        Window {
            x: 8,
            kind: WindowKind::Parent,
            c: 2.0,
            lo: 8,
            hi: 20,
            u: (8f64).ln(),
        }
    }

    #[test]
    fn hand_iterated_trajectory() {
        let t = build_checkpoints(100, 10).unwrap();
        // 9 -> 9 + pi(9) = 13 (prime) -> 11 (prime) -> 7 exits [8, 20]
        let traj =
            trajectory_segment(9, window_8_20(), StepRule::RetreatOwnGap, &t, 64).unwrap();
        assert_eq!(traj.points, vec![(9, true), (13, false), (11, false)]);
        assert_eq!(traj.exit_reason, ExitReason::LeftWindow);
        assert_eq!(traj.exit_point, Some(7));
        assert_eq!(traj.composite_landings(), 1);
    }

    #[test]
    fn step_limit_one() {
        let t = build_checkpoints(100, 10).unwrap();
        let traj =
            trajectory_segment(9, window_8_20(), StepRule::RetreatOwnGap, &t, 1).unwrap();
        assert_eq!(traj.points.len(), 1);
        assert_eq!(traj.exit_reason, ExitReason::StepLimit);
    }

    #[test]
    fn big_first_step_exits_immediately() {
        let t = build_checkpoints(10_000, 128).unwrap();
        let w = make_window(1000, WindowKind::OneVisit).unwrap();
        // window length ~14; pi(1000) = 168 >> 14
        let y = 1000; // composite
        let traj = trajectory_segment(y, w, StepRule::RetreatOwnGap, &t, 64).unwrap();
        assert_eq!(traj.points.len(), 1);
        assert_eq!(traj.exit_reason, ExitReason::LeftWindow);
    }

    #[test]
    fn determinism() {
        let t = build_checkpoints(10_000, 128).unwrap();
        let w = make_window(1000, WindowKind::Parent).unwrap();
        for rule in StepRule::BOTH {
            let a = trajectory_segment(1002, w, rule, &t, 64).unwrap();
            let b = trajectory_segment(1002, w, rule, &t, 64).unwrap();
            assert_eq!(a.points, b.points);
        }
    }

    #[test]
    fn csv_dump_shape() {
        let t = build_checkpoints(100, 10).unwrap();
        let traj =
            trajectory_segment(9, window_8_20(), StepRule::RetreatOwnGap, &t, 64).unwrap();
        let csv = traj.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "start,index,value,is_composite,in_window");
        assert_eq!(lines[1], "9,0,9,true,true");
        assert_eq!(lines.last().unwrap(), &"9,3,7,false,false");
    }
}
