//! The metric families themselves: squared-metric programs written once
//! against [`Scalar`], plus the chart, slit, and validity checks that define
//! each family's domain. Evaluating a program on `f64` gives values;
//! evaluating it on jets gives fiber derivatives. Nothing here differentiates
//! by hand.

use crate::convolution::{ConvolutionSpec, Factor};
use crate::error::{Error, Result};
use crate::numeric::linalg::SymMatrix;
use crate::numeric::scalar::{dot_scaled, sum_of_squares, Scalar};
use crate::tol::DOMAIN_MARGIN;
use crate::zoo::BetaSpec;

/// Domain-level floor on tangent-vector block norms: the slit bundle
/// excludes the zero section, and this keeps evaluations off its rim.
pub(crate) const SLIT_FLOOR: f64 = 1e-9;

/// Validated internal description of a Randers form F = sqrt(a(y,y)) + b(x).y.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RandersForm {
    /// Positive-definite matrix of the Riemannian part.
    pub alpha: SymMatrix,
    /// One coefficient function per coordinate for the drift one-form.
    pub beta: Vec<BetaSpec>,
    /// Base chart: the closed box on which the norm condition is certified.
    pub x_box: Vec<(f64, f64)>,
}

impl RandersForm {
    /// Drift coefficients b_i(x) at a base point.
    pub fn beta_at(&self, x: &[f64]) -> Vec<f64> {
        self.beta.iter().map(|b| b.eval(x)).collect()
    }
}

/// Internal family tag. Constructed only through the zoo builders and the
/// convolution constructor, which validate parameters.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum MetricKind {
    /// F^2 = |y|^2.
    Euclidean { dim: usize },
    /// F^2 = y^T A y for a fixed positive-definite A.
    ConstRiemann { matrix: SymMatrix },
    /// Klein model of the unit ball:
    /// F^2 = (|y|^2 (1 - |x|^2) + (x.y)^2) / (1 - |x|^2)^2.
    Klein { dim: usize },
    /// Planar Minkowski norm F^2 = sqrt(y1^4 + c y1^2 y2^2 + y2^4).
    QuarticMinkowski { coupling: f64 },
    /// Planar Minkowski norm F^2 = |y|^2 + c (y1^{2k} + y2^{2k})^{1/k}.
    PowerNormMinkowski { coupling: f64, power: u32 },
    /// Randers form F = sqrt(a(y,y)) + b(x).y with |b|_a < 1 on the chart.
    Randers(RandersForm),
    /// Four-dimensional product coupling a quartic plane and a power-norm
    /// plane through monomial weights in x1 and x3; all of x1, x3, y1, y3
    /// stay positive.
    MinkowskiBlend { coupling: f64, power: u32 },
    /// Product of a drifted Euclidean norm on R^3 and the Funk metric of the
    /// unit ball, coupled through the norms of the opposite base points.
    FunkBlend { dim: usize, drift: f64 },
    /// F = |y| + 1: deliberately not 1-homogeneous. Negative-test fixture.
    OffsetNorm { dim: usize },
    /// General two-factor convolution; see [`crate::convolution`].
    Convolution(Box<ConvolutionSpec>),
    /// Convolution with one warping function identically 1, evaluated
    /// without the vanished terms.
    Warped {
        spec: Box<ConvolutionSpec>,
        unit_side: Factor,
    },
}

impl MetricKind {
    pub fn dim(&self) -> usize {
        match self {
            MetricKind::Euclidean { dim }
            | MetricKind::Klein { dim }
            | MetricKind::OffsetNorm { dim }
            | MetricKind::FunkBlend { dim, .. } => *dim,
            MetricKind::ConstRiemann { matrix } => matrix.dim(),
            MetricKind::QuarticMinkowski { .. } | MetricKind::PowerNormMinkowski { .. } => 2,
            MetricKind::Randers(form) => form.alpha.dim(),
            MetricKind::MinkowskiBlend { .. } => 4,
            MetricKind::Convolution(spec) | MetricKind::Warped { spec, .. } => {
                let (n1, n2) = spec.dims();
                n1 + n2
            }
        }
    }

    /// Product structure, if any: dimensions of the two factor blocks.
    pub fn split(&self) -> Option<(usize, usize)> {
        match self {
            MetricKind::MinkowskiBlend { .. } => Some((2, 2)),
            MetricKind::FunkBlend { dim, .. } => Some((3, dim - 3)),
            MetricKind::Convolution(spec) | MetricKind::Warped { spec, .. } => Some(spec.dims()),
            _ => None,
        }
    }

    /// Human-readable description, used in reports.
    pub fn describe(&self) -> String {
        match self {
            MetricKind::Euclidean { dim } => format!("euclidean({dim})"),
            MetricKind::ConstRiemann { matrix } => format!("const-riemann({})", matrix.dim()),
            MetricKind::Klein { dim } => format!("klein({dim})"),
            MetricKind::QuarticMinkowski { coupling } => {
                format!("quartic-minkowski(coupling={coupling})")
            }
            MetricKind::PowerNormMinkowski { coupling, power } => {
                format!("power-norm-minkowski(coupling={coupling}, power={power})")
            }
            MetricKind::Randers(form) => format!("randers({})", form.alpha.dim()),
            MetricKind::MinkowskiBlend { coupling, power } => {
                format!("minkowski-blend(coupling={coupling}, power={power})")
            }
            MetricKind::FunkBlend { dim, drift } => {
                format!("funk-blend(dim={dim}, drift={drift})")
            }
            MetricKind::OffsetNorm { dim } => format!("offset-norm({dim})"),
            MetricKind::Convolution(spec) => format!(
                "convolution(f1={}, m1={}, f2={}, m2={})",
                spec.f1,
                spec.m1.describe(),
                spec.f2,
                spec.m2.describe()
            ),
            MetricKind::Warped { spec, unit_side } => {
                let (warp, base, fiber) = match unit_side {
                    Factor::First => (&spec.f2, spec.m1.describe(), spec.m2.describe()),
                    Factor::Second => (&spec.f1, spec.m2.describe(), spec.m1.describe()),
                };
                format!("warped(warp={warp}, scaled={base}, plain={fiber})")
            }
        }
    }
}

/// Squared metric F^2(x, y), generic over the scalar carrying y.
pub(crate) fn eval_f2<S: Scalar>(kind: &MetricKind, x: &[f64], y: &[S]) -> Result<S> {
    match kind {
        MetricKind::Euclidean { .. } => Ok(sum_of_squares(y)),
        MetricKind::ConstRiemann { matrix } => Ok(quad_form(matrix, y)),
        MetricKind::Klein { .. } => {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            let denom = 1.0 - r2;
            let dot = dot_scaled(y, x);
            let num = sum_of_squares(y).scale(denom) + dot.sq();
            Ok(num.scale(1.0 / (denom * denom)))
        }
        MetricKind::QuarticMinkowski { coupling } => quartic_f2(*coupling, y),
        MetricKind::PowerNormMinkowski { coupling, power } => power_norm_f2(*coupling, *power, y),
        MetricKind::Randers(form) => {
            let alpha_sq = quad_form(&form.alpha, y);
            let beta = dot_scaled(y, &form.beta_at(x));
            Ok((alpha_sq.sqrt()? + beta).sq())
        }
        MetricKind::MinkowskiBlend { coupling, power } => {
            let (x1, x3) = (x[0], x[2]);
            let quart = quartic_f2(*coupling, &y[..2])?;
            let pnorm = power_norm_f2(*coupling, *power, &y[2..])?;
            let cross = (y[0].clone() * y[2].clone()).scale(8.0 * x1.powi(3) * x3.powi(3));
            Ok(quart.scale(x3 * x3) + cross + pnorm.scale(x3 * x3))
        }
        MetricKind::FunkBlend { dim, drift } => {
            let n2 = dim - 3;
            let (x1, x2) = x.split_at(3);
            let (y1, y2) = y.split_at(3);
            let f1: f64 = x1.iter().map(|v| v * v).sum::<f64>().sqrt();
            let f2: f64 = x2.iter().map(|v| v * v).sum::<f64>().sqrt();
            debug_assert_eq!(y2.len(), n2);
            // First factor: drifted Euclidean norm |y1| + drift * y1[2].
            let drifted = sum_of_squares(y1).sqrt()? + y1[2].scale(*drift);
            // Second factor: Funk metric of the unit ball.
            let r2: f64 = x2.iter().map(|v| v * v).sum();
            let denom = 1.0 - r2;
            let dot2 = dot_scaled(y2, x2);
            let rad = sum_of_squares(y2).scale(denom) + dot2.clone().sq();
            let funk = (rad.sqrt()? + dot2.clone()).scale(1.0 / denom);
            let dot1 = dot_scaled(y1, x1);
            let cross = (dot1 * dot2).scale(2.0);
            Ok(drifted.sq().scale(f2 * f2) + cross + funk.sq().scale(f1 * f1))
        }
        MetricKind::OffsetNorm { .. } => Ok(sum_of_squares(y).sqrt()?.offset(1.0).sq()),
        MetricKind::Convolution(spec) => {
            let (n1, _) = spec.dims();
            let (x1, x2) = x.split_at(n1);
            let (y1, y2) = y.split_at(n1);
            let c1 = spec.f1.value(x1)?;
            let c2 = spec.f2.value(x2)?;
            let df1 = spec.f1.gradient(x1)?;
            let df2 = spec.f2.gradient(x2)?;
            let f1sq = eval_f2(spec.m1.kind(), x1, y1)?;
            let f2sq = eval_f2(spec.m2.kind(), x2, y2)?;
            // The coupling term 2 f1 f2 df1(y1) df2(y2); the one-forms df_k
            // act on the fiber blocks.
            let cross = (dot_scaled(y1, &df1) * dot_scaled(y2, &df2)).scale(2.0 * c1 * c2);
            Ok(f1sq.scale(c2 * c2) + f2sq.scale(c1 * c1) + cross)
        }
        MetricKind::Warped { spec, unit_side } => {
            let (n1, _) = spec.dims();
            let (x1, x2) = x.split_at(n1);
            let (y1, y2) = y.split_at(n1);
            let f1sq = eval_f2(spec.m1.kind(), x1, y1)?;
            let f2sq = eval_f2(spec.m2.kind(), x2, y2)?;
            // One warping function is identically 1, so its square and the
            // coupling term drop out exactly.
            match unit_side {
                Factor::First => {
                    let c2 = spec.f2.value(x2)?;
                    Ok(f1sq.scale(c2 * c2) + f2sq)
                }
                Factor::Second => {
                    let c1 = spec.f1.value(x1)?;
                    Ok(f1sq + f2sq.scale(c1 * c1))
                }
            }
        }
    }
}

/// y^T A y as a scalar program.
fn quad_form<S: Scalar>(a: &SymMatrix, y: &[S]) -> S {
    let n = a.dim();
    let mut acc: Option<S> = None;
    for i in 0..n {
        let row: Vec<f64> = (0..n).map(|j| a.get(i, j)).collect();
        let term = y[i].clone() * dot_scaled(y, &row);
        acc = Some(match acc {
            None => term,
            Some(s) => s + term,
        });
    }
    acc.expect("matrix dimension is at least 1")
}

/// sqrt(y1^4 + c y1^2 y2^2 + y2^4) on the plane.
fn quartic_f2<S: Scalar>(coupling: f64, y: &[S]) -> Result<S> {
    let radicand =
        y[0].powi(4) + (y[0].sq() * y[1].sq()).scale(coupling) + y[1].powi(4);
    radicand.sqrt()
}

/// |y|^2 + c (y1^{2k} + y2^{2k})^{1/k} on the plane.
fn power_norm_f2<S: Scalar>(coupling: f64, power: u32, y: &[S]) -> Result<S> {
    let base = sum_of_squares(y);
    let pow_sum = y[0].powi(2 * power) + y[1].powi(2 * power);
    Ok(base + pow_sum.powf(1.0 / power as f64)?.scale(coupling))
}

fn block_norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum()
}

/// Base-point (chart) constraints of the family.
pub(crate) fn check_chart(kind: &MetricKind, x: &[f64]) -> Result<()> {
    if x.len() != kind.dim() {
        return Err(Error::InvalidParameter(format!(
            "base point has dimension {}, metric expects {}",
            x.len(),
            kind.dim()
        )));
    }
    match kind {
        MetricKind::Euclidean { .. }
        | MetricKind::ConstRiemann { .. }
        | MetricKind::QuarticMinkowski { .. }
        | MetricKind::PowerNormMinkowski { .. }
        | MetricKind::OffsetNorm { .. } => Ok(()),
        MetricKind::Klein { .. } => {
            let r2 = block_norm_sq(x);
            let limit = (1.0 - DOMAIN_MARGIN) * (1.0 - DOMAIN_MARGIN);
            if r2 > limit {
                return Err(Error::Domain(format!(
                    "Klein chart requires |x| < 1, got |x| = {:.6}",
                    r2.sqrt()
                )));
            }
            Ok(())
        }
        MetricKind::Randers(form) => {
            for (i, (&xi, &(lo, hi))) in x.iter().zip(&form.x_box).enumerate() {
                if xi < lo - 1e-12 || xi > hi + 1e-12 {
                    return Err(Error::Domain(format!(
                        "Randers chart box violated: x[{i}] = {xi} outside [{lo}, {hi}]"
                    )));
                }
            }
            Ok(())
        }
        MetricKind::MinkowskiBlend { .. } => {
            if x[0] < DOMAIN_MARGIN || x[2] < DOMAIN_MARGIN {
                return Err(Error::Domain(format!(
                    "blend chart requires x[0] > 0 and x[2] > 0, got {} and {}",
                    x[0], x[2]
                )));
            }
            Ok(())
        }
        MetricKind::FunkBlend { .. } => {
            let r2 = block_norm_sq(&x[3..]);
            let limit = (1.0 - DOMAIN_MARGIN) * (1.0 - DOMAIN_MARGIN);
            if r2 > limit {
                return Err(Error::Domain(format!(
                    "Funk factor requires |x2| < 1, got |x2| = {:.6}",
                    r2.sqrt()
                )));
            }
            Ok(())
        }
        MetricKind::Convolution(spec) | MetricKind::Warped { spec, .. } => {
            let (n1, _) = spec.dims();
            let (x1, x2) = x.split_at(n1);
            check_chart(spec.m1.kind(), x1)?;
            check_chart(spec.m2.kind(), x2)?;
            // Warping functions must be defined (and hence positive) here.
            spec.f1.value(x1)?;
            spec.f2.value(x2)?;
            Ok(())
        }
    }
}

/// Tangent-vector (slit and sign) constraints of the family.
pub(crate) fn check_slit(kind: &MetricKind, y: &[f64]) -> Result<()> {
    if y.len() != kind.dim() {
        return Err(Error::InvalidParameter(format!(
            "tangent vector has dimension {}, metric expects {}",
            y.len(),
            kind.dim()
        )));
    }
    let floor = SLIT_FLOOR * SLIT_FLOOR;
    match kind.split() {
        None => {
            if block_norm_sq(y) < floor {
                return Err(Error::Domain(
                    "tangent vector is numerically on the zero section".into(),
                ));
            }
        }
        Some((n1, _)) => {
            // Product metrics need both blocks off the zero section.
            if block_norm_sq(&y[..n1]) < floor || block_norm_sq(&y[n1..]) < floor {
                return Err(Error::Domain(
                    "a factor tangent block is numerically on the zero section".into(),
                ));
            }
        }
    }
    match kind {
        MetricKind::MinkowskiBlend { .. } => {
            if y[0] < DOMAIN_MARGIN || y[2] < DOMAIN_MARGIN {
                return Err(Error::Domain(format!(
                    "blend cone requires y[0] > 0 and y[2] > 0, got {} and {}",
                    y[0], y[2]
                )));
            }
        }
        MetricKind::Convolution(spec) | MetricKind::Warped { spec, .. } => {
            let (n1, _) = spec.dims();
            check_slit(spec.m1.kind(), &y[..n1])?;
            check_slit(spec.m2.kind(), &y[n1..])?;
        }
        _ => {}
    }
    Ok(())
}

/// Joint positivity constraints that depend on both x and y. Only product
/// constructions with an indefinite coupling term can fail here.
pub(crate) fn check_validity(kind: &MetricKind, x: &[f64], y: &[f64]) -> Result<()> {
    match kind {
        MetricKind::Convolution(spec) => {
            let (n1, _) = spec.dims();
            check_validity(spec.m1.kind(), &x[..n1], &y[..n1])?;
            check_validity(spec.m2.kind(), &x[n1..], &y[n1..])?;
            let value = eval_f2(kind, x, y)?;
            if value <= 0.0 {
                return Err(Error::NonPositive { value });
            }
            Ok(())
        }
        MetricKind::Warped { spec, .. } => {
            let (n1, _) = spec.dims();
            check_validity(spec.m1.kind(), &x[..n1], &y[..n1])?;
            check_validity(spec.m2.kind(), &x[n1..], &y[n1..])
        }
        MetricKind::FunkBlend { .. } => {
            let value = eval_f2(kind, x, y)?;
            if value <= 0.0 {
                return Err(Error::NonPositive { value });
            }
            Ok(())
        }
        _ => Ok(()),
    }
}
