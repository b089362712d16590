//! Concrete metric families with validated constructors. Every parameter
//! range is enforced here, so a successfully built [`FinslerMetric`] never
//! fails for structural reasons later — only evaluation points can be bad.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{families::MetricKind, FinslerMetric, RandersForm};
use crate::numeric::linalg::SymMatrix;
use crate::tol::MAX_DIM;

/// Largest supported exponent for the power-norm families.
pub const MAX_POWER: u32 = 16;

/// Riemannian part of a Randers form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaSpec {
    /// The identity matrix in the given dimension.
    Euclidean { dim: usize },
    /// An explicit symmetric positive-definite matrix.
    Matrix { rows: Vec<Vec<f64>> },
}

/// One drift coefficient function b_i(x) of a Randers form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaSpec {
    Constant(f64),
    Linear { offset: f64, slope: Vec<f64> },
}

impl BetaSpec {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            BetaSpec::Constant(c) => *c,
            BetaSpec::Linear { offset, slope } => {
                offset + slope.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
            }
        }
    }

    fn is_constant(&self) -> bool {
        match self {
            BetaSpec::Constant(_) => true,
            BetaSpec::Linear { slope, .. } => slope.iter().all(|&v| v == 0.0),
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            BetaSpec::Constant(c) => {
                if !c.is_finite() {
                    return Err(Error::InvalidParameter(
                        "drift coefficient must be finite".into(),
                    ));
                }
            }
            BetaSpec::Linear { offset, slope } => {
                if !offset.is_finite() || slope.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "drift coefficients must be finite".into(),
                    ));
                }
                if slope.len() != dim {
                    return Err(Error::InvalidParameter(format!(
                        "drift slope has length {}, expected {dim}",
                        slope.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Declarative description of a zoo metric, ready for serialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ZooSpec {
    /// F = |y|.
    Euclidean { dim: usize },
    /// F^2 = y^T A y for a constant positive-definite A.
    ConstRiemann { matrix: Vec<Vec<f64>> },
    /// Klein model of the unit ball.
    Klein { dim: usize },
    /// Planar norm F^2 = sqrt(y1^4 + coupling y1^2 y2^2 + y2^4),
    /// coupling in [2, 4]. Riemannian exactly at coupling = 2.
    QuarticMinkowski { coupling: f64 },
    /// Planar norm F^2 = |y|^2 + coupling (y1^{2k} + y2^{2k})^{1/k},
    /// coupling in [2, 4], k >= 1. Riemannian exactly at k = 1.
    PowerNormMinkowski { coupling: f64, power: u32 },
    /// Randers form F = sqrt(a(y,y)) + b(x).y. The norm condition
    /// |b|_a < 1 is certified on the chart box at build time.
    Randers {
        alpha: AlphaSpec,
        beta: Vec<BetaSpec>,
        /// Chart box per coordinate; defaults to [-1, 1]^dim.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x_box: Option<Vec<(f64, f64)>>,
    },
    /// Four-dimensional coupled product of a quartic plane and a power-norm
    /// plane; x1, x3, y1, y3 stay positive.
    MinkowskiBlend { coupling: f64, power: u32 },
    /// Product of a drifted Euclidean norm on R^3 and the Funk ball metric
    /// in dimension dim - 3; drift in [0, 1).
    FunkBlend { dim: usize, drift: f64 },
    /// F = |y| + 1: not 1-homogeneous. Fixture for negative tests.
    OffsetNorm { dim: usize },
}

fn check_dim(dim: usize) -> Result<()> {
    if !(1..=MAX_DIM).contains(&dim) {
        return Err(Error::InvalidParameter(format!(
            "dimension must be between 1 and {MAX_DIM}, got {dim}"
        )));
    }
    Ok(())
}

fn check_coupling(coupling: f64) -> Result<()> {
    if !(coupling.is_finite() && (2.0..=4.0).contains(&coupling)) {
        return Err(Error::InvalidParameter(format!(
            "coupling must lie in [2, 4], got {coupling}"
        )));
    }
    Ok(())
}

fn check_power(power: u32) -> Result<()> {
    if !(1..=MAX_POWER).contains(&power) {
        return Err(Error::InvalidParameter(format!(
            "power must lie in 1..={MAX_POWER}, got {power}"
        )));
    }
    Ok(())
}

fn build_alpha(alpha: &AlphaSpec) -> Result<SymMatrix> {
    let matrix = match alpha {
        AlphaSpec::Euclidean { dim } => {
            check_dim(*dim)?;
            SymMatrix::identity(*dim)
        }
        AlphaSpec::Matrix { rows } => {
            let m = SymMatrix::from_rows(rows)?;
            check_dim(m.dim())?;
            m
        }
    };
    if matrix.min_eigenvalue() <= 0.0 {
        return Err(Error::InvalidParameter(
            "Randers matrix must be positive-definite".into(),
        ));
    }
    Ok(matrix)
}

/// Certify |b(x)|_a < 1 over the chart box. The squared dual norm
/// b(x)^T a^{-1} b(x) is convex in x when every b_i is affine, so its
/// maximum over the box is attained at a vertex; checking all vertices is
/// an exact certificate, not a sampling heuristic.
fn certify_randers(
    alpha: &SymMatrix,
    beta: &[BetaSpec],
    x_box: &[(f64, f64)],
) -> Result<()> {
    let dim = alpha.dim();
    let alpha_inv = alpha.inverse()?;
    let all_constant = beta.iter().all(|b| b.is_constant());
    let vertex_count = if all_constant { 1 } else { 1usize << dim };
    for mask in 0..vertex_count {
        let vertex: Vec<f64> = (0..dim)
            .map(|i| {
                if mask >> i & 1 == 1 {
                    x_box[i].1
                } else {
                    x_box[i].0
                }
            })
            .collect();
        let b: Vec<f64> = beta.iter().map(|c| c.eval(&vertex)).collect();
        let norm_sq = alpha_inv.quadratic_form(&b);
        if norm_sq >= 1.0 {
            return Err(Error::RandersInvalid {
                norm: norm_sq.sqrt(),
                witness: vertex,
            });
        }
    }
    Ok(())
}

/// Build and validate a zoo metric.
pub fn build(spec: &ZooSpec) -> Result<FinslerMetric> {
    let kind = match spec {
        ZooSpec::Euclidean { dim } => {
            check_dim(*dim)?;
            MetricKind::Euclidean { dim: *dim }
        }
        ZooSpec::ConstRiemann { matrix } => {
            let matrix = SymMatrix::from_rows(matrix)?;
            check_dim(matrix.dim())?;
            if matrix.min_eigenvalue() <= 0.0 {
                return Err(Error::InvalidParameter(
                    "constant Riemannian matrix must be positive-definite".into(),
                ));
            }
            MetricKind::ConstRiemann { matrix }
        }
        ZooSpec::Klein { dim } => {
            check_dim(*dim)?;
            MetricKind::Klein { dim: *dim }
        }
        ZooSpec::QuarticMinkowski { coupling } => {
            check_coupling(*coupling)?;
            MetricKind::QuarticMinkowski {
                coupling: *coupling,
            }
        }
        ZooSpec::PowerNormMinkowski { coupling, power } => {
            check_coupling(*coupling)?;
            check_power(*power)?;
            MetricKind::PowerNormMinkowski {
                coupling: *coupling,
                power: *power,
            }
        }
        ZooSpec::Randers { alpha, beta, x_box } => {
            let alpha = build_alpha(alpha)?;
            let dim = alpha.dim();
            if beta.len() != dim {
                return Err(Error::InvalidParameter(format!(
                    "Randers drift has {} coefficients for dimension {dim}",
                    beta.len()
                )));
            }
            for b in beta {
                b.validate(dim)?;
            }
            let x_box = match x_box {
                Some(b) => {
                    if b.len() != dim {
                        return Err(Error::InvalidParameter(format!(
                            "chart box has {} intervals for dimension {dim}",
                            b.len()
                        )));
                    }
                    for &(lo, hi) in b {
                        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                            return Err(Error::InvalidParameter(format!(
                                "chart box interval [{lo}, {hi}] is not a proper interval"
                            )));
                        }
                    }
                    b.clone()
                }
                None => vec![(-1.0, 1.0); dim],
            };
            certify_randers(&alpha, beta, &x_box)?;
            MetricKind::Randers(RandersForm {
                alpha,
                beta: beta.clone(),
                x_box,
            })
        }
        ZooSpec::MinkowskiBlend { coupling, power } => {
            check_coupling(*coupling)?;
            check_power(*power)?;
            MetricKind::MinkowskiBlend {
                coupling: *coupling,
                power: *power,
            }
        }
        ZooSpec::FunkBlend { dim, drift } => {
            check_dim(*dim)?;
            if *dim < 4 {
                return Err(Error::InvalidParameter(format!(
                    "the Funk product needs dimension at least 4 (3 + ball), got {dim}"
                )));
            }
            if !(drift.is_finite() && (0.0..1.0).contains(drift)) {
                return Err(Error::InvalidParameter(format!(
                    "drift must lie in [0, 1), got {drift}"
                )));
            }
            MetricKind::FunkBlend {
                dim: *dim,
                drift: *drift,
            }
        }
        ZooSpec::OffsetNorm { dim } => {
            check_dim(*dim)?;
            MetricKind::OffsetNorm { dim: *dim }
        }
    };
    Ok(FinslerMetric::from_kind(kind))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::TangentSample;

    fn sample(x: &[f64], y: &[f64]) -> TangentSample {
        TangentSample::new(x.to_vec(), y.to_vec()).unwrap()
    }

    #[test]
    fn euclidean_value() {
        let m = build(&ZooSpec::Euclidean { dim: 3 }).unwrap();
        let f = m.value(&sample(&[0.0; 3], &[3.0, 4.0, 12.0])).unwrap();
        assert!((f - 13.0).abs() < 1e-14);
    }

    #[test]
    fn klein_values() {
        let m = build(&ZooSpec::Klein { dim: 3 }).unwrap();
        // At the center the Klein metric is the Euclidean norm.
        let f0 = m.value(&sample(&[0.0; 3], &[3.0, 4.0, 0.0])).unwrap();
        assert!((f0 - 5.0).abs() < 1e-13);
        // Radial direction at |x| = 1/2 contracts by 1/(1 - |x|^2) = 4/3.
        let f = m
            .value(&sample(&[0.5, 0.0, 0.0], &[1.0, 0.0, 0.0]))
            .unwrap();
        assert!((f - 4.0 / 3.0).abs() < 1e-13, "got {f}");
        // Outside the ball the chart check fires.
        assert!(m.value(&sample(&[1.1, 0.0, 0.0], &[1.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn quartic_values_and_ranges() {
        let m = build(&ZooSpec::QuarticMinkowski { coupling: 3.0 }).unwrap();
        let f2 = m.squared_value(&sample(&[0.0; 2], &[1.0, 1.0])).unwrap();
        assert!((f2 - 5.0_f64.sqrt()).abs() < 1e-14);
        assert!(build(&ZooSpec::QuarticMinkowski { coupling: 1.9 }).is_err());
        assert!(build(&ZooSpec::QuarticMinkowski { coupling: 4.1 }).is_err());
        // coupling = 2 collapses to the Euclidean plane.
        let m2 = build(&ZooSpec::QuarticMinkowski { coupling: 2.0 }).unwrap();
        let f = m2.value(&sample(&[0.0; 2], &[3.0, 4.0])).unwrap();
        assert!((f - 5.0).abs() < 1e-13);
    }

    #[test]
    fn power_norm_values_and_ranges() {
        let m = build(&ZooSpec::PowerNormMinkowski {
            coupling: 2.0,
            power: 2,
        })
        .unwrap();
        let f2 = m.squared_value(&sample(&[0.0; 2], &[1.0, 1.0])).unwrap();
        assert!((f2 - (2.0 + 2.0 * 2.0_f64.sqrt())).abs() < 1e-14);
        assert!(build(&ZooSpec::PowerNormMinkowski {
            coupling: 2.0,
            power: 0
        })
        .is_err());
        assert!(build(&ZooSpec::PowerNormMinkowski {
            coupling: 5.0,
            power: 2
        })
        .is_err());
        // power = 1 collapses to a scaled Euclidean plane.
        let m1 = build(&ZooSpec::PowerNormMinkowski {
            coupling: 3.0,
            power: 1,
        })
        .unwrap();
        let f2 = m1.squared_value(&sample(&[0.0; 2], &[1.0, 2.0])).unwrap();
        assert!((f2 - 4.0 * 5.0).abs() < 1e-13);
    }

    #[test]
    fn const_riemann_requires_spd() {
        let ok = build(&ZooSpec::ConstRiemann {
            matrix: vec![vec![2.0, 1.0], vec![1.0, 2.0]],
        });
        assert!(ok.is_ok());
        let f2 = ok
            .unwrap()
            .squared_value(&sample(&[9.0, 9.0], &[1.0, 1.0]))
            .unwrap();
        assert!((f2 - 6.0).abs() < 1e-14);
        assert!(build(&ZooSpec::ConstRiemann {
            matrix: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        })
        .is_err());
        assert!(build(&ZooSpec::ConstRiemann {
            matrix: vec![vec![1.0, 2.0], vec![2.5, 1.0]],
        })
        .is_err());
    }

    #[test]
    fn randers_split_recovers_parts() {
        let m = build(&ZooSpec::Randers {
            alpha: AlphaSpec::Euclidean { dim: 2 },
            beta: vec![BetaSpec::Constant(0.3), BetaSpec::Constant(0.0)],
            x_box: None,
        })
        .unwrap();
        let s = sample(&[0.2, -0.4], &[1.0, 0.0]);
        assert!((m.value(&s).unwrap() - 1.3).abs() < 1e-14);
        let (even, odd) = m.even_odd_split(&s).unwrap();
        assert!((even - 1.0).abs() < 1e-14);
        assert!((odd - 0.3).abs() < 1e-14);
    }

    #[test]
    fn randers_norm_condition_is_certified_at_vertices() {
        // Drift b = (x1, 0) reaches norm 1 at the box edge x1 = 1.
        let bad = build(&ZooSpec::Randers {
            alpha: AlphaSpec::Euclidean { dim: 2 },
            beta: vec![
                BetaSpec::Linear {
                    offset: 0.0,
                    slope: vec![1.0, 0.0],
                },
                BetaSpec::Constant(0.0),
            ],
            x_box: None,
        });
        match bad {
            Err(Error::RandersInvalid { norm, witness }) => {
                assert!((norm - 1.0).abs() < 1e-12);
                assert_eq!(witness.len(), 2);
            }
            other => panic!("expected RandersInvalid, got {other:?}"),
        }
        // The same drift on a smaller box is fine.
        assert!(build(&ZooSpec::Randers {
            alpha: AlphaSpec::Euclidean { dim: 2 },
            beta: vec![
                BetaSpec::Linear {
                    offset: 0.0,
                    slope: vec![1.0, 0.0],
                },
                BetaSpec::Constant(0.0),
            ],
            x_box: Some(vec![(-0.5, 0.5), (-1.0, 1.0)]),
        })
        .is_ok());
    }

    #[test]
    fn blend_hand_value() {
        let m = build(&ZooSpec::MinkowskiBlend {
            coupling: 2.0,
            power: 1,
        })
        .unwrap();
        // At x1 = x3 = 1 and y = (1,1,1,1): sqrt(4) + 8 + 3*2 = 16.
        let s = sample(&[1.0, 0.5, 1.0, -0.5], &[1.0, 1.0, 1.0, 1.0]);
        assert!((m.value(&s).unwrap() - 4.0).abs() < 1e-13);
        // The positive-cone constraints are enforced.
        assert!(m
            .value(&sample(&[-1.0, 0.5, 1.0, -0.5], &[1.0, 1.0, 1.0, 1.0]))
            .is_err());
        assert!(m
            .value(&sample(&[1.0, 0.5, 1.0, -0.5], &[-1.0, 1.0, 1.0, 1.0]))
            .is_err());
    }

    #[test]
    fn funk_product_degenerates_to_fiber_norm_at_center() {
        let m = build(&ZooSpec::FunkBlend { dim: 5, drift: 0.5 }).unwrap();
        // With x2 = 0 and |x1| = 1 only the Funk factor survives, and the
        // Funk metric at the ball center is the Euclidean norm.
        let s = sample(
            &[1.0, 0.0, 0.0, 0.0, 0.0],
            &[0.4, -0.3, 0.2, 3.0, 4.0],
        );
        assert!((m.value(&s).unwrap() - 5.0).abs() < 1e-12);
        assert!(build(&ZooSpec::FunkBlend { dim: 3, drift: 0.5 }).is_err());
        assert!(build(&ZooSpec::FunkBlend { dim: 5, drift: 1.0 }).is_err());
    }

    #[test]
    fn offset_norm_breaks_homogeneity() {
        let m = build(&ZooSpec::OffsetNorm { dim: 2 }).unwrap();
        let s = sample(&[0.0; 2], &[3.0, 4.0]);
        assert!((m.value(&s).unwrap() - 6.0).abs() < 1e-14);
        let check = m.check_homogeneity(&s, &[2.0]).unwrap();
        // F(2y) = 11 but 2 F(y) = 12: a defect of order 1/12.
        assert!(check.max_value_defect > 0.05);
    }

    #[test]
    fn spec_roundtrips_through_json() {
        let specs = vec![
            ZooSpec::Euclidean { dim: 2 },
            ZooSpec::ConstRiemann {
                matrix: vec![vec![2.0, 0.5], vec![0.5, 1.0]],
            },
            ZooSpec::Klein { dim: 3 },
            ZooSpec::QuarticMinkowski { coupling: 2.5 },
            ZooSpec::PowerNormMinkowski {
                coupling: 3.0,
                power: 2,
            },
            ZooSpec::Randers {
                alpha: AlphaSpec::Euclidean { dim: 2 },
                beta: vec![BetaSpec::Constant(0.1), BetaSpec::Constant(0.2)],
                x_box: Some(vec![(-1.0, 1.0), (0.0, 2.0)]),
            },
            ZooSpec::MinkowskiBlend {
                coupling: 2.0,
                power: 1,
            },
            ZooSpec::FunkBlend { dim: 5, drift: 0.25 },
            ZooSpec::OffsetNorm { dim: 2 },
        ];
        for spec in specs {
            let text = serde_json::to_string(&spec).unwrap();
            let back: ZooSpec = serde_json::from_str(&text).unwrap();
            assert_eq!(spec, back, "roundtrip failed for {text}");
        }
        let parsed: ZooSpec =
            serde_json::from_str(r#"{"type":"klein","dim":2}"#).unwrap();
        assert_eq!(parsed, ZooSpec::Klein { dim: 2 });
    }
}
