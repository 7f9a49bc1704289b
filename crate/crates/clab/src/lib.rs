//! Desk-scale verification laboratory for a prime-dynamics contraction
//! framework: windows, trajectory functionals, packing and selection lemmas,
//! explicit-formula machinery, large-sieve netting, and constant ledgers.
//!
//! The crate is organized around the objects it measures:
//!
//! - [`prime_engine`] — exact primitives: pi, psi, theta, Lambda, Li.
//! - [`dynamics`] — the integer map (composites advance by pi(m), primes
//!   retreat by a prime gap) and window-restricted trajectory segments.
//! - [`functionals`] — windows, the error functionals E(X) and E-tilde(X),
//!   dominance, composite selection, the contraction scan, alpha_eff.
//! - [`explicit_formula`] — zero tables, the smoothed truncated explicit
//!   formula, remainder budgets, and off-critical zero injection.
//! - [`netting`] — uniform-grid exponential-sum bounds and zero transfer.
//! - [`bridges`] — partial-summation identities between pi - Li and psi - x.
//!
//! The companion mdbook under `book/` walks through the same material in
//! narrative order; its snippets are doc-tests in these modules.

pub mod bridges;
pub mod dynamics;
pub mod error;
pub mod explicit_formula;
pub mod functionals;
pub mod netting;
pub mod numeric;
pub mod prime_engine;

pub use error::{Error, Result};

// Each guide chapter is attached as module documentation so its code blocks
// run under `cargo test --doc`; the book cannot drift from the API.
#[doc = include_str!("../../../book/src/introduction.md")]
#[doc(hidden)]
pub mod _guide_introduction {}
#[doc = include_str!("../../../book/src/prime-engine.md")]
#[doc(hidden)]
pub mod _guide_prime_engine {}
#[doc = include_str!("../../../book/src/dynamics.md")]
#[doc(hidden)]
pub mod _guide_dynamics {}
#[doc = include_str!("../../../book/src/functionals.md")]
#[doc(hidden)]
pub mod _guide_functionals {}
#[doc = include_str!("../../../book/src/explicit-formula.md")]
#[doc(hidden)]
pub mod _guide_explicit_formula {}
#[doc = include_str!("../../../book/src/netting.md")]
#[doc(hidden)]
pub mod _guide_netting {}
#[doc = include_str!("../../../book/src/bridges.md")]
#[doc(hidden)]
pub mod _guide_bridges {}
