//! Positive scalar fields on base coordinates, with closed-form gradients.
//! These are the warping functions that couple two metrics into a product;
//! each family is simple enough that its gradient is written out exactly,
//! keeping the product construction free of avoidable truncation error.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol::MIN_POSITIVE;

/// A scalar field `f(x) > 0` in one of a few closed-form families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScalarField {
    /// f(x) = value.
    Constant { value: f64 },
    /// f(x) = exp(coeffs . x).
    ExpLinear { coeffs: Vec<f64> },
    /// f(x) = coeff * (x_index)^power, on the half-space x_index > 0.
    Monomial {
        index: usize,
        power: f64,
        coeff: f64,
    },
    /// f(x) = |x|^2 + offset.
    NormSquaredPlus { offset: f64 },
}

impl ScalarField {
    /// Check the field is well-formed for base dimension `dim`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            ScalarField::Constant { value } => {
                if !(value.is_finite() && *value > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "constant field value must be positive and finite, got {value}"
                    )));
                }
            }
            ScalarField::ExpLinear { coeffs } => {
                if coeffs.len() != dim {
                    return Err(Error::InvalidParameter(format!(
                        "exp-linear field has {} coefficients for base dimension {dim}",
                        coeffs.len()
                    )));
                }
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "exp-linear coefficients must be finite".into(),
                    ));
                }
            }
            ScalarField::Monomial {
                index,
                power,
                coeff,
            } => {
                if *index >= dim {
                    return Err(Error::InvalidParameter(format!(
                        "monomial field index {index} out of range for base dimension {dim}"
                    )));
                }
                if !(coeff.is_finite() && *coeff > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "monomial field coefficient must be positive and finite, got {coeff}"
                    )));
                }
                if !power.is_finite() {
                    return Err(Error::InvalidParameter(
                        "monomial field power must be finite".into(),
                    ));
                }
            }
            ScalarField::NormSquaredPlus { offset } => {
                if !(offset.is_finite() && *offset > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "norm-squared-plus field offset must be positive and finite, got {offset}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The constant value, if the field is the constant family.
    pub fn constant_value(&self) -> Option<f64> {
        match self {
            ScalarField::Constant { value } => Some(*value),
            _ => None,
        }
    }

    /// Field value at `x`.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        match self {
            ScalarField::Constant { value } => Ok(*value),
            ScalarField::ExpLinear { coeffs } => {
                Ok(coeffs.iter().zip(x).map(|(c, v)| c * v).sum::<f64>().exp())
            }
            ScalarField::Monomial {
                index,
                power,
                coeff,
            } => {
                let base = x[*index];
                if base < MIN_POSITIVE {
                    return Err(Error::Domain(format!(
                        "monomial field requires x[{index}] > 0, got {base:.6e}"
                    )));
                }
                Ok(coeff * base.powf(*power))
            }
            ScalarField::NormSquaredPlus { offset } => {
                Ok(x.iter().map(|v| v * v).sum::<f64>() + offset)
            }
        }
    }

    /// Exact gradient at `x`.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            ScalarField::Constant { .. } => Ok(vec![0.0; x.len()]),
            ScalarField::ExpLinear { coeffs } => {
                let f = self.value(x)?;
                Ok(coeffs.iter().map(|c| c * f).collect())
            }
            ScalarField::Monomial {
                index,
                power,
                coeff,
            } => {
                let base = x[*index];
                if base < MIN_POSITIVE {
                    return Err(Error::Domain(format!(
                        "monomial field requires x[{index}] > 0, got {base:.6e}"
                    )));
                }
                let mut grad = vec![0.0; x.len()];
                grad[*index] = coeff * power * base.powf(power - 1.0);
                Ok(grad)
            }
            ScalarField::NormSquaredPlus { .. } => Ok(x.iter().map(|v| 2.0 * v).collect()),
        }
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Constant { value } => write!(f, "const({value})"),
            ScalarField::ExpLinear { coeffs } => write!(f, "exp-linear({coeffs:?})"),
            ScalarField::Monomial {
                index,
                power,
                coeff,
            } => write!(f, "{coeff}*x[{index}]^{power}"),
            ScalarField::NormSquaredPlus { offset } => write!(f, "|x|^2+{offset}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::fd::fd_gradient;

    #[test]
    fn constant_field() {
        let f = ScalarField::Constant { value: 2.5 };
        f.validate(3).unwrap();
        assert_eq!(f.value(&[1.0, 2.0, 3.0]).unwrap(), 2.5);
        assert_eq!(f.gradient(&[1.0, 2.0, 3.0]).unwrap(), vec![0.0; 3]);
        assert_eq!(f.constant_value(), Some(2.5));
        assert!(ScalarField::Constant { value: 0.0 }.validate(3).is_err());
        assert!(ScalarField::Constant { value: -1.0 }.validate(3).is_err());
    }

    #[test]
    fn exp_linear_field() {
        let f = ScalarField::ExpLinear {
            coeffs: vec![1.0, -2.0],
        };
        f.validate(2).unwrap();
        assert!(f.validate(3).is_err());
        let x = [0.3, 0.1];
        let v = f.value(&x).unwrap();
        assert!((v - (0.3_f64 - 0.2).exp()).abs() < 1e-15);
        let g = f.gradient(&x).unwrap();
        assert!((g[0] - v).abs() < 1e-15);
        assert!((g[1] + 2.0 * v).abs() < 1e-15);
    }

    #[test]
    fn monomial_field_and_domain() {
        let f = ScalarField::Monomial {
            index: 1,
            power: 3.0,
            coeff: 2.0,
        };
        f.validate(2).unwrap();
        assert!(f.validate(1).is_err());
        assert_eq!(f.value(&[5.0, 2.0]).unwrap(), 16.0);
        let g = f.gradient(&[5.0, 2.0]).unwrap();
        assert_eq!(g, vec![0.0, 24.0]);
        assert!(f.value(&[5.0, 0.0]).is_err());
        assert!(f.value(&[5.0, -1.0]).is_err());
    }

    #[test]
    fn norm_squared_plus_field() {
        let f = ScalarField::NormSquaredPlus { offset: 1.0 };
        f.validate(2).unwrap();
        assert_eq!(f.value(&[3.0, 4.0]).unwrap(), 26.0);
        assert_eq!(f.gradient(&[3.0, 4.0]).unwrap(), vec![6.0, 8.0]);
        assert!(ScalarField::NormSquaredPlus { offset: 0.0 }.validate(2).is_err());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let fields = [
            ScalarField::ExpLinear {
                coeffs: vec![0.7, -1.1],
            },
            ScalarField::Monomial {
                index: 0,
                power: 2.5,
                coeff: 1.3,
            },
            ScalarField::NormSquaredPlus { offset: 0.5 },
        ];
        let x = [0.8, 0.6];
        for f in &fields {
            let exact = f.gradient(&x).unwrap();
            let approx = fd_gradient(|p| f.value(p), &x, 1e-5).unwrap();
            for (e, a) in exact.iter().zip(&approx) {
                assert!((e - a).abs() < 1e-7, "{f}: {e} vs {a}");
            }
        }
    }

    #[test]
    fn json_shape() {
        let f = ScalarField::ExpLinear {
            coeffs: vec![1.0, 0.0],
        };
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(text, r#"{"type":"exp-linear","coeffs":[1.0,0.0]}"#);
        let back: ScalarField = serde_json::from_str(&text).unwrap();
        assert_eq!(f, back);
        let c: ScalarField = serde_json::from_str(r#"{"type":"constant","value":1.0}"#).unwrap();
        assert_eq!(c, ScalarField::Constant { value: 1.0 });
    }
}
