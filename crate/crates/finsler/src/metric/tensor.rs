//! Pointwise tensor data attached to a metric: the fundamental tensor (the
//! fiber Hessian of the squared metric, halved) and the Cartan tensor (its
//! fiber derivative, which vanishes exactly in the Riemannian case).

use serde::{Deserialize, Serialize};

use crate::numeric::linalg::SymMatrix;
use crate::sample::TangentSample;

/// How a fundamental tensor was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Fiber Hessian of the squared metric, computed by jet propagation.
    Autodiff,
    /// Assembled from the closed-form blocks of a product metric.
    BlockFormula,
    /// Symmetrized closed-form blocks (the raw block matrix had an
    /// asymmetric off-diagonal part).
    Symmetrized,
}

/// The fundamental tensor g_ij(x, y) = 1/2 d^2(F^2)/dy^i dy^j at one point of
/// the slit tangent bundle, with its convexity certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundamentalTensor {
    /// Where the tensor was evaluated.
    pub at: TangentSample,
    /// The matrix g_ij.
    pub matrix: SymMatrix,
    /// Smallest eigenvalue of g_ij; strong convexity means it is positive.
    pub min_eigenvalue: f64,
    pub provenance: Provenance,
}

impl FundamentalTensor {
    pub fn new(at: TangentSample, matrix: SymMatrix, provenance: Provenance) -> FundamentalTensor {
        let min_eigenvalue = matrix.min_eigenvalue();
        FundamentalTensor {
            at,
            matrix,
            min_eigenvalue,
            provenance,
        }
    }

    /// Strong convexity at this point: g positive-definite.
    pub fn is_strongly_convex(&self) -> bool {
        self.min_eigenvalue > 0.0
    }

    /// |g(y, y) - F^2|: zero in exact arithmetic for any metric that is
    /// 1-homogeneous in y (Euler's identity).
    pub fn euler_defect(&self, f_squared: f64) -> f64 {
        (self.matrix.quadratic_form(&self.at.y) - f_squared).abs()
    }
}

/// The Cartan tensor A_ijk(x, y) = F/2 dg_ij/dy^k, stored fully symmetrized.
/// `asymmetry` records how far the raw finite-difference values were from
/// total symmetry before averaging; large values indicate a step too coarse
/// for the metric at hand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartanTensor {
    pub at: TangentSample,
    dim: usize,
    /// Dense entries, index i*dim^2 + j*dim + k, symmetric in all slots.
    entries: Vec<f64>,
    pub asymmetry: f64,
}

impl CartanTensor {
    /// Symmetrize raw entries (already symmetric in the first two slots) over
    /// all three slots and record the largest correction.
    pub(crate) fn from_raw(at: TangentSample, dim: usize, raw: Vec<f64>) -> CartanTensor {
        let id = |i: usize, j: usize, k: usize| i * dim * dim + j * dim + k;
        let mut entries = vec![0.0; raw.len()];
        let mut asymmetry = 0.0_f64;
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    // The three distinct slot assignments given (i,j)-symmetry.
                    let mean =
                        (raw[id(i, j, k)] + raw[id(i, k, j)] + raw[id(j, k, i)]) / 3.0;
                    entries[id(i, j, k)] = mean;
                    asymmetry = asymmetry.max((raw[id(i, j, k)] - mean).abs());
                }
            }
        }
        CartanTensor {
            at,
            dim,
            entries,
            asymmetry,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.entries[i * self.dim * self.dim + j * self.dim + k]
    }

    /// Largest absolute entry; the metric is Riemannian at this point exactly
    /// when this vanishes.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Largest absolute entry of the contraction A(., ., y). This vanishes
    /// for every metric (0-homogeneity of g in y), so it doubles as an
    /// internal consistency check on the tensor.
    pub fn max_y_contraction(&self, y: &[f64]) -> f64 {
        assert_eq!(y.len(), self.dim, "contraction vector length mismatch");
        let mut worst = 0.0_f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let s: f64 = (0..self.dim).map(|k| self.get(i, j, k) * y[k]).sum();
                worst = worst.max(s.abs());
            }
        }
        worst
    }
}
