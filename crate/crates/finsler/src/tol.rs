//! Central record of numeric tolerances and fixed guard constants.
//!
//! Everything that decides "close enough" lives here so tests and the CLI pin
//! one set of numbers. The fixed constants are deliberately not configurable:
//! they guard against floating-point breakdown, not modelling choices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported manifold dimension (products included).
pub const MAX_DIM: usize = 16;

/// Denominators and sqrt/ln/powf arguments below this are treated as zero.
pub const MIN_POSITIVE: f64 = 1e-300;

/// A pivot smaller than this times the largest matrix entry aborts a solve.
pub const SINGULAR_PIVOT_REL: f64 = 1e-12;

/// Strict inequalities in chart domains are enforced with this margin, so
/// finite-difference stencils never step outside the domain.
pub const DOMAIN_MARGIN: f64 = 1e-6;

/// Sampled tangent vectors keep at least this norm away from the zero section.
pub const SLIT_MARGIN: f64 = 0.3;

/// Tunable tolerances, overridable from the CLI (`--tol name=value`) and from
/// the `FINSLER_TOL_OVERRIDE` environment variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Step for finite-difference derivatives in base/fiber coordinates.
    pub fd_step: f64,
    /// Step for the fiber derivative of the fundamental tensor.
    pub cartan_step: f64,
    /// Threshold under which a probed derivative counts as zero.
    pub derivative_probe: f64,
    /// Relative tolerance for algebraic identities evaluated in floats.
    pub algebraic: f64,
    /// Relative tolerance for scaling identities (homogeneity).
    pub homogeneity: f64,
    /// Threshold under which a sampled gradient counts as identically zero.
    pub constant_gradient: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            fd_step: 1e-4,
            cartan_step: 1e-4,
            derivative_probe: 1e-6,
            algebraic: 1e-9,
            homogeneity: 1e-12,
            constant_gradient: 1e-12,
        }
    }
}

impl Tolerances {
    /// Named-field assignment used by CLI overrides. Unknown names and
    /// non-positive values are rejected.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tolerance {name} must be a finite positive number, got {value}"
            )));
        }
        match name {
            "fd_step" => self.fd_step = value,
            "cartan_step" => self.cartan_step = value,
            "derivative_probe" => self.derivative_probe = value,
            "algebraic" => self.algebraic = value,
            "homogeneity" => self.homogeneity = value,
            "constant_gradient" => self.constant_gradient = value,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "unknown tolerance {name:?}; valid names: fd_step, cartan_step, \
                     derivative_probe, algebraic, homogeneity, constant_gradient"
                )))
            }
        }
        Ok(())
    }
}

/// Mixed absolute/relative comparison: |a - b| <= floor + rel * max(|a|, |b|).
pub fn close(a: f64, b: f64, rel: f64, floor: f64) -> bool {
    (a - b).abs() <= floor + rel * a.abs().max(b.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_known_names() {
        let mut t = Tolerances::default();
        t.set("algebraic", 1e-7).unwrap();
        assert_eq!(t.algebraic, 1e-7);
        t.set("fd_step", 1e-5).unwrap();
        assert_eq!(t.fd_step, 1e-5);
    }

    #[test]
    fn set_rejects_unknown_and_nonpositive() {
        let mut t = Tolerances::default();
        assert!(t.set("no_such_knob", 1.0).is_err());
        assert!(t.set("algebraic", 0.0).is_err());
        assert!(t.set("algebraic", -1.0).is_err());
        assert!(t.set("algebraic", f64::NAN).is_err());
    }

    #[test]
    fn close_is_symmetric_and_scale_aware() {
        assert!(close(1.0, 1.0 + 1e-10, 1e-9, 0.0));
        assert!(close(1e6, 1e6 * (1.0 + 1e-10), 1e-9, 0.0));
        assert!(!close(1.0, 1.1, 1e-9, 0.0));
        // The floor rescues comparisons near zero.
        assert!(close(0.0, 1e-13, 1e-9, 1e-12));
    }
}
