//! The central metric type and its pointwise operations: values, fiber
//! gradients, fundamental and Cartan tensors, homogeneity and convexity
//! checks, and the metric gradient of a scalar field.

pub(crate) mod families;
mod tensor;

use serde::{Deserialize, Serialize};

pub(crate) use families::{MetricKind, RandersForm};
pub use tensor::{CartanTensor, FundamentalTensor, Provenance};

use crate::convolution::ConvolutionSpec;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::numeric::taylor2::taylor2_eval;
use crate::sample::TangentSample;

/// A Finsler metric: a positively 1-homogeneous norm on each tangent space,
/// strongly convex away from the zero section. Instances come from the
/// builders in [`crate::zoo`] and [`crate::convolution`], which validate all
/// parameters up front; every pointwise operation then only has to check the
/// evaluation point.
#[derive(Debug, Clone, PartialEq)]
pub struct FinslerMetric {
    kind: MetricKind,
}

/// Result of a homogeneity check at one sample across several scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityCheck {
    /// Worst relative defect of F(x, c y) = c F(x, y) over the scales.
    pub max_value_defect: f64,
    /// Worst absolute entrywise defect of g(x, c y) = g(x, y).
    pub max_tensor_defect: f64,
    /// The scales exercised.
    pub scales: Vec<f64>,
}

/// Result of a strong-convexity check at one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityCheck {
    pub min_eigenvalue: f64,
    pub is_positive: bool,
}

impl FinslerMetric {
    pub(crate) fn from_kind(kind: MetricKind) -> FinslerMetric {
        FinslerMetric { kind }
    }

    pub(crate) fn kind(&self) -> &MetricKind {
        &self.kind
    }

    /// Manifold dimension (total dimension for products).
    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    /// Factor block dimensions, if the metric is a two-factor product.
    pub fn split(&self) -> Option<(usize, usize)> {
        self.kind.split()
    }

    /// The convolution data, if this metric is a convolution.
    pub fn as_convolution(&self) -> Option<&ConvolutionSpec> {
        match &self.kind {
            MetricKind::Convolution(spec) => Some(spec),
            _ => None,
        }
    }

    /// Human-readable description, used in reports and tables.
    pub fn describe(&self) -> String {
        self.kind.describe()
    }

    /// Full domain check for an evaluation point: chart constraints on x,
    /// slit constraints on y, and joint validity (positivity) where the
    /// family has one.
    pub fn check_domain(&self, s: &TangentSample) -> Result<()> {
        families::check_chart(&self.kind, &s.x)?;
        families::check_slit(&self.kind, &s.y)?;
        families::check_validity(&self.kind, &s.x, &s.y)
    }

    /// Domain check without the joint validity part. Samplers use this to
    /// admit points where a product's squared value may be non-positive, so
    /// that downstream checks can report the failure instead of never
    /// seeing it.
    pub fn check_chart_and_slit(&self, s: &TangentSample) -> Result<()> {
        families::check_chart(&self.kind, &s.x)?;
        families::check_slit(&self.kind, &s.y)
    }

    /// Chart constraints on a base point alone.
    pub fn check_chart(&self, x: &[f64]) -> Result<()> {
        families::check_chart(&self.kind, x)
    }

    /// Slit constraints on a tangent vector alone.
    pub fn check_slit(&self, y: &[f64]) -> Result<()> {
        families::check_slit(&self.kind, y)
    }

    /// Squared metric value F^2(x, y).
    pub fn squared_value(&self, s: &TangentSample) -> Result<f64> {
        self.check_domain(s)?;
        families::eval_f2(&self.kind, &s.x, &s.y)
    }

    /// Metric value F(x, y) > 0.
    pub fn value(&self, s: &TangentSample) -> Result<f64> {
        let f2 = self.squared_value(s)?;
        if f2 <= 0.0 {
            return Err(Error::NonPositive { value: f2 });
        }
        Ok(f2.sqrt())
    }

    /// Fiber gradient dF/dy at the sample, from dF^2/dy = 2 F dF/dy.
    pub fn y_gradient(&self, s: &TangentSample) -> Result<Vec<f64>> {
        self.check_domain(s)?;
        let (f2, grad, _) = taylor2_eval(
            |y| families::eval_f2(&self.kind, &s.x, y),
            &s.y,
        )?;
        if f2 <= 0.0 {
            return Err(Error::NonPositive { value: f2 });
        }
        let f = f2.sqrt();
        Ok(grad.iter().map(|g| g / (2.0 * f)).collect())
    }

    /// Fundamental tensor g_ij = 1/2 d^2 F^2 / dy^i dy^j at the sample,
    /// with its smallest eigenvalue as the convexity certificate.
    pub fn fundamental_tensor(&self, s: &TangentSample) -> Result<FundamentalTensor> {
        self.check_domain(s)?;
        let (_, _, hess) = taylor2_eval(
            |y| families::eval_f2(&self.kind, &s.x, y),
            &s.y,
        )?;
        Ok(FundamentalTensor::new(
            s.clone(),
            hess.scaled(0.5),
            Provenance::Autodiff,
        ))
    }

    /// Cartan tensor A_ijk = F/2 dg_ij/dy^k by central differences of the
    /// fundamental tensor in the fiber, then full symmetrization. Stencil
    /// points that leave the domain surface as errors.
    pub fn cartan_tensor(&self, s: &TangentSample, step: f64) -> Result<CartanTensor> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Cartan step must be finite and positive, got {step}"
            )));
        }
        let n = self.dim();
        let f = self.value(s)?;
        let mut raw = vec![0.0; n * n * n];
        for k in 0..n {
            let plus = self.fundamental_tensor(&s.with_shifted_y(k, step))?;
            let minus = self.fundamental_tensor(&s.with_shifted_y(k, -step))?;
            for i in 0..n {
                for j in 0..n {
                    let dg = (plus.matrix.get(i, j) - minus.matrix.get(i, j)) / (2.0 * step);
                    raw[i * n * n + j * n + k] = 0.5 * f * dg;
                }
            }
        }
        Ok(CartanTensor::from_raw(s.clone(), n, raw))
    }

    /// Check positive 1-homogeneity of F and 0-homogeneity of g at one
    /// sample, for the given positive scales.
    pub fn check_homogeneity(&self, s: &TangentSample, scales: &[f64]) -> Result<HomogeneityCheck> {
        if scales.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
            return Err(Error::InvalidParameter(
                "homogeneity scales must be finite and positive".into(),
            ));
        }
        let f = self.value(s)?;
        let g = self.fundamental_tensor(s)?;
        let mut max_value_defect = 0.0_f64;
        let mut max_tensor_defect = 0.0_f64;
        for &c in scales {
            let scaled = s.with_scaled_y(c);
            let f_scaled = self.value(&scaled)?;
            max_value_defect = max_value_defect.max((f_scaled - c * f).abs() / (c * f));
            let g_scaled = self.fundamental_tensor(&scaled)?;
            max_tensor_defect = max_tensor_defect.max(g.matrix.max_abs_diff(&g_scaled.matrix));
        }
        Ok(HomogeneityCheck {
            max_value_defect,
            max_tensor_defect,
            scales: scales.to_vec(),
        })
    }

    /// Strong convexity at one sample: is the fundamental tensor
    /// positive-definite?
    pub fn check_strong_convexity(&self, s: &TangentSample) -> Result<ConvexityCheck> {
        let g = self.fundamental_tensor(s)?;
        Ok(ConvexityCheck {
            min_eigenvalue: g.min_eigenvalue,
            is_positive: g.is_strongly_convex(),
        })
    }

    /// Metric gradient of a scalar field u at the sample: the vector
    /// grad u = g^{-1}(x, y) du(x), where du is the coordinate gradient.
    pub fn gradient_field(&self, u: &ScalarField, s: &TangentSample) -> Result<Vec<f64>> {
        u.validate(self.dim())?;
        let g = self.fundamental_tensor(s)?;
        let du = u.gradient(&s.x)?;
        g.matrix.solve(&du)
    }

    /// Even/odd decomposition of F in the fiber at one sample:
    /// returns (even part, odd part) of y -> F(x, y). For a Randers metric
    /// these are exactly the Riemannian norm sqrt(a(y,y)) and the drift
    /// b(x).y. Requires the reflected vector to lie in the domain.
    pub fn even_odd_split(&self, s: &TangentSample) -> Result<(f64, f64)> {
        let plus = self.value(s)?;
        let minus = self.value(&s.reflected())?;
        Ok((0.5 * (plus + minus), 0.5 * (plus - minus)))
    }
}
