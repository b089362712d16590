//! A scalar abstraction that lets one arithmetic program run either on plain
//! `f64` or on [`Taylor2`](super::taylor2::Taylor2) jets. Metric formulas are
//! written once against this trait; evaluating them on jets yields exact
//! gradients and Hessians with no per-metric derivative code.
//!
//! Partial operations (division, sqrt, ln, real powers) return `Result` so a
//! vanishing denominator or a negative radicand surfaces as a structured
//! error instead of a NaN that poisons everything downstream.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::tol::MIN_POSITIVE;

/// Number-like values supporting the operations metric formulas need.
///
/// Total operations use operator traits; partial ones return `Result`.
/// `scale` and `offset` take `f64` coefficients so formulas can mix in
/// constants without a dimension-carrying constant constructor.
pub trait Scalar:
    Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    /// The underlying point value (for domain guards and diagnostics).
    fn value(&self) -> f64;

    /// Multiply by a constant.
    fn scale(&self, c: f64) -> Self;

    /// Add a constant.
    fn offset(&self, c: f64) -> Self;

    /// Square. Cheaper and slightly more accurate than `self * self` for jets.
    fn sq(&self) -> Self;

    /// Integer power by repeated multiplication (exact chain rule).
    fn powi(&self, n: u32) -> Self;

    /// Exponential.
    fn exp(&self) -> Self;

    /// Square root; requires a strictly positive value.
    fn sqrt(&self) -> Result<Self>;

    /// Natural logarithm; requires a strictly positive value.
    fn ln(&self) -> Result<Self>;

    /// Real power; requires a strictly positive base unless `p == 1`.
    fn powf(&self, p: f64) -> Result<Self>;

    /// Division; requires the divisor to be bounded away from zero.
    fn div(&self, rhs: &Self) -> Result<Self>;
}

/// Guard helper: error unless `v` is usable as a strictly positive argument.
pub(crate) fn require_positive(v: f64, context: &'static str) -> Result<()> {
    if v < MIN_POSITIVE {
        return Err(Error::Domain(format!(
            "{context} requires a strictly positive argument, got {v:.6e}"
        )));
    }
    Ok(())
}

/// Guard helper: error unless `v` is usable as a denominator.
pub(crate) fn require_denominator(v: f64, context: &'static str) -> Result<()> {
    if v.abs() < MIN_POSITIVE {
        return Err(Error::DivisionDomain { context, denom: v });
    }
    Ok(())
}

impl Scalar for f64 {
    fn value(&self) -> f64 {
        *self
    }

    fn scale(&self, c: f64) -> Self {
        self * c
    }

    fn offset(&self, c: f64) -> Self {
        self + c
    }

    fn sq(&self) -> Self {
        self * self
    }

    fn powi(&self, n: u32) -> Self {
        f64::powi(*self, n as i32)
    }

    fn exp(&self) -> Self {
        f64::exp(*self)
    }

    fn sqrt(&self) -> Result<Self> {
        require_positive(*self, "sqrt")?;
        Ok(f64::sqrt(*self))
    }

    fn ln(&self) -> Result<Self> {
        require_positive(*self, "ln")?;
        Ok(f64::ln(*self))
    }

    fn powf(&self, p: f64) -> Result<Self> {
        if p == 1.0 {
            return Ok(*self);
        }
        require_positive(*self, "powf")?;
        Ok(f64::powf(*self, p))
    }

    fn div(&self, rhs: &Self) -> Result<Self> {
        require_denominator(*rhs, "scalar division")?;
        Ok(self / rhs)
    }
}

/// Sum of `terms[i] * coeffs[i]`; `terms` must be non-empty.
pub fn dot_scaled<S: Scalar>(terms: &[S], coeffs: &[f64]) -> S {
    assert_eq!(terms.len(), coeffs.len(), "dot_scaled length mismatch");
    assert!(!terms.is_empty(), "dot_scaled needs at least one term");
    let mut acc = terms[0].scale(coeffs[0]);
    for (t, &c) in terms.iter().zip(coeffs).skip(1) {
        acc = acc + t.scale(c);
    }
    acc
}

/// Sum of squares of `terms`; `terms` must be non-empty.
pub fn sum_of_squares<S: Scalar>(terms: &[S]) -> S {
    assert!(!terms.is_empty(), "sum_of_squares needs at least one term");
    let mut acc = terms[0].sq();
    for t in terms.iter().skip(1) {
        acc = acc + t.sq();
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_total_ops() {
        let a: f64 = 3.0;
        assert_eq!(a.sq(), 9.0);
        assert_eq!(a.powi(4), 81.0);
        assert_eq!(a.scale(2.0), 6.0);
        assert_eq!(a.offset(-1.0), 2.0);
    }

    #[test]
    fn f64_partial_ops_guard_domain() {
        assert!(Scalar::sqrt(&4.0).is_ok());
        assert!(Scalar::sqrt(&0.0).is_err());
        assert!(Scalar::sqrt(&-1.0).is_err());
        assert!(Scalar::ln(&0.0).is_err());
        assert!(Scalar::div(&1.0, &0.0).is_err());
        assert!(Scalar::div(&1.0, &1e-310).is_err());
        // powf with exponent exactly 1 is the identity, even at zero.
        assert_eq!(Scalar::powf(&0.0, 1.0).unwrap(), 0.0);
        assert!(Scalar::powf(&0.0, 0.5).is_err());
    }

    #[test]
    fn dot_and_squares() {
        let v = [1.0, 2.0, 3.0];
        assert_eq!(dot_scaled(&v, &[2.0, 0.5, 1.0]), 6.0);
        assert_eq!(sum_of_squares(&v), 14.0);
    }
}
