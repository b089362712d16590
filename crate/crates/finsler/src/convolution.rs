//! Convolution of two Finsler metrics through a pair of positive warping
//! fields. Given metrics F1 on M1 and F2 on M2 and fields f1 on M1, f2 on
//! M2, the product carries
//!
//!   F^2 = f2^2 F1^2 + f1^2 F2^2 + 2 f1 f2 df1(y1) df2(y2),
//!
//! where df_k(y_k) is the differential of f_k applied to the fiber block.
//! The module also exposes the closed-form block structure of the resulting
//! fundamental tensor, the pointwise inequality that decides its positive
//! definiteness, a diagnosis of how strongly the coupling term acts, and the
//! reduction to a warped product when one field is identically 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::metric::{families::MetricKind, FinslerMetric, FundamentalTensor, Provenance};
use crate::numeric::linalg::SymMatrix;
use crate::sample::TangentSample;
use crate::tol::MAX_DIM;

/// Which factor of a product is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Factor {
    First,
    Second,
}

/// Two metrics and their warping fields, validated for compatible
/// dimensions. The fields live on the respective factors.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionSpec {
    pub(crate) m1: FinslerMetric,
    pub(crate) f1: ScalarField,
    pub(crate) m2: FinslerMetric,
    pub(crate) f2: ScalarField,
}

impl ConvolutionSpec {
    /// Validate field/metric dimension compatibility and the total dimension
    /// bound.
    pub fn new(
        m1: FinslerMetric,
        f1: ScalarField,
        m2: FinslerMetric,
        f2: ScalarField,
    ) -> Result<ConvolutionSpec> {
        f1.validate(m1.dim())?;
        f2.validate(m2.dim())?;
        let total = m1.dim() + m2.dim();
        if total > MAX_DIM {
            return Err(Error::InvalidParameter(format!(
                "product dimension {total} exceeds the supported maximum {MAX_DIM}"
            )));
        }
        Ok(ConvolutionSpec { m1, f1, m2, f2 })
    }

    /// Factor dimensions (n1, n2).
    pub fn dims(&self) -> (usize, usize) {
        (self.m1.dim(), self.m2.dim())
    }

    pub fn first_metric(&self) -> &FinslerMetric {
        &self.m1
    }

    pub fn second_metric(&self) -> &FinslerMetric {
        &self.m2
    }

    pub fn first_field(&self) -> &ScalarField {
        &self.f1
    }

    pub fn second_field(&self) -> &ScalarField {
        &self.f2
    }

    /// Field values and field gradients at the split base point.
    fn field_data(&self, x: &[f64]) -> Result<FieldData> {
        let (n1, _) = self.dims();
        let (x1, x2) = x.split_at(n1);
        Ok(FieldData {
            c1: self.f1.value(x1)?,
            c2: self.f2.value(x2)?,
            df1: self.f1.gradient(x1)?,
            df2: self.f2.gradient(x2)?,
        })
    }
}

struct FieldData {
    c1: f64,
    c2: f64,
    df1: Vec<f64>,
    df2: Vec<f64>,
}

/// The convolution metric itself.
pub fn convolve(spec: ConvolutionSpec) -> FinslerMetric {
    FinslerMetric::from_kind(MetricKind::Convolution(Box::new(spec)))
}

/// Fundamental tensor of a convolution in closed block form:
/// the diagonal blocks are the scaled factor tensors, the off-diagonal block
/// is the rank-one coupling of the field gradients, and the transposed
/// coupling block is zero — so the raw matrix is not symmetric whenever the
/// coupling acts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockTensor {
    pub at: TangentSample,
    n1: usize,
    n2: usize,
    /// f2^2 g1: the first factor's tensor scaled by the second field.
    pub top_left: SymMatrix,
    /// 2 f1 f2 df1_a df2_v, stored row-major as n1 x n2.
    pub top_right: Vec<f64>,
    /// f1^2 g2: the second factor's tensor scaled by the first field.
    pub bottom_right: SymMatrix,
}

impl BlockTensor {
    pub fn dims(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    fn top_right_at(&self, i: usize, j: usize) -> f64 {
        self.top_right[i * self.n2 + j]
    }

    /// The full (n1+n2) square matrix with its structural zero block in the
    /// bottom-left corner.
    pub fn assembled(&self) -> Vec<Vec<f64>> {
        let n = self.n1 + self.n2;
        (0..n)
            .map(|i| (0..n).map(|j| self.entry(i, j)).collect())
            .collect()
    }

    /// Symmetric part 1/2 (B + B^T); this equals the true fundamental
    /// tensor, because a quadratic form only sees the symmetric part.
    pub fn symmetrized(&self) -> SymMatrix {
        let n = self.n1 + self.n2;
        SymMatrix::from_fn(n, |i, j| {
            // Both index orders of the assembled matrix, halved.
            let a = self.entry(i, j);
            let b = self.entry(j, i);
            0.5 * (a + b)
        })
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        match (i < self.n1, j < self.n1) {
            (true, true) => self.top_left.get(i, j),
            (true, false) => self.top_right_at(i, j - self.n1),
            (false, true) => 0.0,
            (false, false) => self.bottom_right.get(i - self.n1, j - self.n1),
        }
    }

    /// v^T B v on the raw, unsymmetrized blocks.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        assert_eq!(v.len(), self.n1 + self.n2, "vector length mismatch");
        let (v1, v2) = v.split_at(self.n1);
        let mut s = self.top_left.quadratic_form(v1) + self.bottom_right.quadratic_form(v2);
        for (i, vi) in v1.iter().enumerate() {
            for (j, vj) in v2.iter().enumerate() {
                s += vi * self.top_right_at(i, j) * vj;
            }
        }
        s
    }

    /// Largest absolute asymmetry |B - B^T| of the raw matrix; zero exactly
    /// when the coupling block vanishes.
    pub fn max_asymmetry(&self) -> f64 {
        self.top_right.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Package the symmetrized blocks as a fundamental tensor.
    pub fn to_fundamental(&self) -> FundamentalTensor {
        let provenance = if self.max_asymmetry() == 0.0 {
            Provenance::BlockFormula
        } else {
            Provenance::Symmetrized
        };
        FundamentalTensor::new(self.at.clone(), self.symmetrized(), provenance)
    }
}

/// Closed-form block fundamental tensor of a convolution at a sample. The
/// factor tensors are computed by jet propagation on the factors; the
/// coupling block uses the exact field gradients.
pub fn block_tensor(spec: &ConvolutionSpec, s: &TangentSample) -> Result<BlockTensor> {
    let metric = FinslerMetric::from_kind(MetricKind::Convolution(Box::new(spec.clone())));
    metric.check_domain(s)?;
    let (n1, n2) = spec.dims();
    let fields = spec.field_data(&s.x)?;
    let g1 = spec.m1.fundamental_tensor(&s.block(0, n1))?;
    let g2 = spec.m2.fundamental_tensor(&s.block(n1, n2))?;
    let scale = 2.0 * fields.c1 * fields.c2;
    let mut top_right = vec![0.0; n1 * n2];
    for i in 0..n1 {
        for j in 0..n2 {
            top_right[i * n2 + j] = scale * fields.df1[i] * fields.df2[j];
        }
    }
    Ok(BlockTensor {
        at: s.clone(),
        n1,
        n2,
        top_left: g1.matrix.scaled(fields.c2 * fields.c2),
        top_right,
        bottom_right: g2.matrix.scaled(fields.c1 * fields.c1),
    })
}

/// Outcome of the pointwise positivity inequality for one direction v.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivityCheck {
    /// g1(v1, v1)/f1^2 + g2(v2, v2)/f2^2.
    pub lhs: f64,
    /// -2/(f1 f2) df1(v1) df2(v2).
    pub rhs: f64,
    /// Whether the strict inequality lhs > rhs holds.
    pub condition_holds: bool,
    /// v^T B v on the block tensor; positive exactly when the inequality
    /// holds (the two sides differ by the positive factor f1^2 f2^2).
    pub quadratic_form: f64,
}

/// Evaluate the positivity inequality at a sample for a direction v != 0.
pub fn check_positivity_condition(
    spec: &ConvolutionSpec,
    s: &TangentSample,
    v: &[f64],
) -> Result<PositivityCheck> {
    let (n1, n2) = spec.dims();
    if v.len() != n1 + n2 {
        return Err(Error::InvalidParameter(format!(
            "direction has dimension {}, product expects {}",
            v.len(),
            n1 + n2
        )));
    }
    if v.iter().all(|&c| c == 0.0) {
        return Err(Error::InvalidParameter(
            "direction vector must be nonzero".into(),
        ));
    }
    let fields = spec.field_data(&s.x)?;
    let g1 = spec.m1.fundamental_tensor(&s.block(0, n1))?;
    let g2 = spec.m2.fundamental_tensor(&s.block(n1, n2))?;
    let (v1, v2) = v.split_at(n1);
    let q1 = g1.matrix.quadratic_form(v1);
    let q2 = g2.matrix.quadratic_form(v2);
    let d1: f64 = fields.df1.iter().zip(v1).map(|(a, b)| a * b).sum();
    let d2: f64 = fields.df2.iter().zip(v2).map(|(a, b)| a * b).sum();
    let lhs = q1 / (fields.c1 * fields.c1) + q2 / (fields.c2 * fields.c2);
    let rhs = -2.0 / (fields.c1 * fields.c2) * d1 * d2;
    let quadratic_form =
        fields.c2 * fields.c2 * q1 + 2.0 * fields.c1 * fields.c2 * d1 * d2
            + fields.c1 * fields.c1 * q2;
    Ok(PositivityCheck {
        lhs,
        rhs,
        condition_holds: lhs > rhs,
        quadratic_form,
    })
}

/// How the coupling term behaves over a set of samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingBranch {
    /// A warping field has vanishing gradient everywhere sampled, so the
    /// coupling term is identically zero and the product is (up to scale) a
    /// warped product.
    ConstantFactor,
    /// Both gradients act somewhere, but their pairing never does: the
    /// differentials annihilate the sampled fiber blocks.
    OrthogonalGradients,
    /// The coupling term is active at some sample.
    CrossActive,
}

/// Evidence gathered while diagnosing the coupling term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingDiagnosis {
    pub branch: CouplingBranch,
    /// Which factor's field was flat, when `branch` is `ConstantFactor`.
    pub flat_factor: Option<Factor>,
    /// A sample where the coupling term acted, when `branch` is
    /// `CrossActive`.
    pub witness: Option<TangentSample>,
    /// Largest field-gradient magnitudes seen (first, second).
    pub max_gradient_norms: (f64, f64),
    /// Largest absolute coupling term seen.
    pub max_cross: f64,
    pub samples_used: usize,
}

/// Classify the coupling term over the given samples. `zero_tol` is the
/// magnitude under which a gradient or coupling value counts as zero.
pub fn diagnose_coupling(
    spec: &ConvolutionSpec,
    samples: &[TangentSample],
    zero_tol: f64,
) -> Result<CouplingDiagnosis> {
    if samples.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let (n1, _) = spec.dims();
    let mut max_g1 = 0.0_f64;
    let mut max_g2 = 0.0_f64;
    let mut max_cross = 0.0_f64;
    let mut witness = None;
    for s in samples {
        let fields = spec.field_data(&s.x)?;
        let norm1 = fields.df1.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let norm2 = fields.df2.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let d1: f64 = fields.df1.iter().zip(&s.y[..n1]).map(|(a, b)| a * b).sum();
        let d2: f64 = fields.df2.iter().zip(&s.y[n1..]).map(|(a, b)| a * b).sum();
        let cross = (2.0 * fields.c1 * fields.c2 * d1 * d2).abs();
        max_g1 = max_g1.max(norm1);
        max_g2 = max_g2.max(norm2);
        if cross > max_cross {
            max_cross = cross;
            if cross > zero_tol {
                witness = Some(s.clone());
            }
        }
    }
    let branch = if max_g1 <= zero_tol || max_g2 <= zero_tol {
        CouplingBranch::ConstantFactor
    } else if max_cross <= zero_tol {
        CouplingBranch::OrthogonalGradients
    } else {
        CouplingBranch::CrossActive
    };
    let flat_factor = match branch {
        CouplingBranch::ConstantFactor => Some(if max_g1 <= zero_tol {
            Factor::First
        } else {
            Factor::Second
        }),
        _ => None,
    };
    Ok(CouplingDiagnosis {
        witness: match branch {
            CouplingBranch::CrossActive => witness,
            _ => None,
        },
        branch,
        flat_factor,
        max_gradient_norms: (max_g1, max_g2),
        max_cross,
        samples_used: samples.len(),
    })
}

/// Result of attempting the warped-product reduction.
#[derive(Debug, Clone)]
pub struct WarpedReduction {
    /// The reduced metric, when a field is identically 1.
    pub metric: Option<FinslerMetric>,
    /// When a field is a constant other than 1: which factor and the value,
    /// as evidence for why the literal reduction does not apply.
    pub scaled_constant: Option<(Factor, f64)>,
}

/// If one warping field is the constant 1, the coupling term and that
/// field's square drop out exactly and the product is a warped product;
/// build that reduced metric. A constant field with a different value is
/// reported as near-miss evidence instead.
pub fn warped_reduction(spec: &ConvolutionSpec) -> WarpedReduction {
    let c1 = spec.f1.constant_value();
    let c2 = spec.f2.constant_value();
    if c1 == Some(1.0) {
        return WarpedReduction {
            metric: Some(FinslerMetric::from_kind(MetricKind::Warped {
                spec: Box::new(spec.clone()),
                unit_side: Factor::First,
            })),
            scaled_constant: None,
        };
    }
    if c2 == Some(1.0) {
        return WarpedReduction {
            metric: Some(FinslerMetric::from_kind(MetricKind::Warped {
                spec: Box::new(spec.clone()),
                unit_side: Factor::Second,
            })),
            scaled_constant: None,
        };
    }
    let scaled_constant = match (c1, c2) {
        (Some(c), _) => Some((Factor::First, c)),
        (_, Some(c)) => Some((Factor::Second, c)),
        _ => None,
    };
    WarpedReduction {
        metric: None,
        scaled_constant,
    }
}

/// The coupling term evaluated through the exact field differentials:
/// 2 f1 f2 df1(y1) df2(y2).
pub fn cross_term(spec: &ConvolutionSpec, s: &TangentSample) -> Result<f64> {
    let (n1, _) = spec.dims();
    let fields = spec.field_data(&s.x)?;
    let d1: f64 = fields.df1.iter().zip(&s.y[..n1]).map(|(a, b)| a * b).sum();
    let d2: f64 = fields.df2.iter().zip(&s.y[n1..]).map(|(a, b)| a * b).sum();
    Ok(2.0 * fields.c1 * fields.c2 * d1 * d2)
}

/// The coupling term evaluated the long way round, through each factor's
/// metric structure: 2 f1 f2 [F1 dF1/dy . grad f1] [F2 dF2/dy . grad f2],
/// where grad f_k = g_k^{-1} df_k is the metric gradient. The contraction
/// F dF/dy^i (g^{-1} df)^i telescopes to df(y) through Euler's identity, so
/// this must agree with [`cross_term`] to rounding for every factor pair —
/// the two routes share no code.
pub fn cross_term_via_metric_gradient(spec: &ConvolutionSpec, s: &TangentSample) -> Result<f64> {
    let (n1, n2) = spec.dims();
    let s1 = s.block(0, n1);
    let s2 = s.block(n1, n2);
    let fields = spec.field_data(&s.x)?;
    let factor_part = |m: &FinslerMetric, sk: &TangentSample, df: &[f64]| -> Result<f64> {
        let f = m.value(sk)?;
        let df_dy = m.y_gradient(sk)?;
        let g = m.fundamental_tensor(sk)?;
        let grad = g.matrix.solve(df)?;
        Ok(f * df_dy.iter().zip(&grad).map(|(a, b)| a * b).sum::<f64>())
    };
    let t1 = factor_part(&spec.m1, &s1, &fields.df1)?;
    let t2 = factor_part(&spec.m2, &s2, &fields.df2)?;
    Ok(2.0 * fields.c1 * fields.c2 * t1 * t2)
}
