//! The logarithmic integral in both normalizations.
//!
//! `li_integral` is the textbook offset integral from 2; `li_byparts` is the
//! form x/log x + int_2^x dt/(log t)^2 used throughout the bridge identities.
//! Integration by parts shows li_byparts(x) - li_integral(x) = 2/log 2 for all
//! x >= 2, so carrying both costs one constant.

use crate::error::{Error, Result};
use crate::numeric::adaptive_quad;

/// The constant li_byparts - li_integral = 2 / log 2.
pub const LI_BYPARTS_OFFSET: f64 = 2.885_390_081_777_926_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiForm {
    ByParts,
    Integral,
}

#[derive(Debug, Clone, Copy)]
pub struct LiValue {
    pub x: f64,
    pub li_byparts: f64,
    pub li_integral: f64,
    pub quadrature_error: f64,
}

impl LiValue {
    pub fn get(&self, form: LiForm) -> f64 {
        match form {
            LiForm::ByParts => self.li_byparts,
            LiForm::Integral => self.li_integral,
        }
    }
}

/// Both logarithmic-integral forms at x >= 2, relative error <= 1e-9.
///
/// The integrals are evaluated after the substitution t = e^u, which turns
/// dt/log t into e^u/u du and keeps the adaptive rule efficient up to 10^9.
pub fn li(x: f64) -> Result<LiValue> {
    if !(x >= 2.0) {
        return Err(Error::precondition(format!("li requires x >= 2, got {x}")));
    }
    let a = 2f64.ln();
    let b = x.ln();
    let (j1, e1) = adaptive_quad(&|u: f64| u.exp() / u, a, b, 1e-11);
    let (j2, e2) = adaptive_quad(&|u: f64| u.exp() / (u * u), a, b, 1e-11);
    Ok(LiValue {
        x,
        li_integral: j1,
        li_byparts: x / b + j2,
        quadrature_error: e1 + e2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_integral_at_two() {
        let v = li(2.0).unwrap();
        assert_eq!(v.li_integral, 0.0);
        assert!((v.li_byparts - LI_BYPARTS_OFFSET).abs() < 1e-12);
        assert!((v.li_byparts - 2.8854).abs() < 1e-4);
    }

    #[test]
    fn forms_differ_by_constant() {
        for x in [10.0, 1e4, 1e6] {
            let v = li(x).unwrap();
            let gap = v.li_byparts - v.li_integral;
            assert!(
                (gap - LI_BYPARTS_OFFSET).abs() < 1e-8 * v.li_byparts.abs().max(1.0),
                "x={x}: gap {gap}"
            );
        }
    }

    #[test]
    fn li_reference_value() {
        // li(10^6) offset-from-2 integral: Li(10^6) = li(10^6) - li(2) = 78626.50399...
        let v = li(1e6).unwrap();
        assert!((v.li_integral - 78626.503996).abs() < 1e-4, "{}", v.li_integral);
    }

    #[test]
    fn rejects_below_two() {
        assert!(li(1.9).is_err());
        assert!(li(f64::NAN).is_err());
    }
}
