//! Small dense symmetric matrices (dimension at most 16) with the handful of
//! operations the geometry needs: solves, inversion, eigenvalues, and a
//! Cholesky-based positive-definiteness test. Sizes are tiny, so plain
//! unblocked algorithms are the right tool; there is no BLAS here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol::{MIN_POSITIVE, SINGULAR_PIVOT_REL};

/// Hard cap on matrix dimension. Metric dimensions are far smaller, but
/// least-squares fits build normal equations over monomial bases, which
/// need more room.
pub const MAX_MATRIX_DIM: usize = 512;

/// Dense symmetric matrix. Symmetry is maintained by construction: every
/// write goes through [`SymMatrix::set`], which mirrors the entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymMatrix {
    dim: usize,
    /// Row-major full storage; redundant but cheap at these sizes and keeps
    /// indexing trivial.
    data: Vec<f64>,
}

impl SymMatrix {
    /// Zero matrix.
    pub fn zeros(dim: usize) -> SymMatrix {
        assert!(
            (1..=MAX_MATRIX_DIM).contains(&dim),
            "matrix dimension must be between 1 and {MAX_MATRIX_DIM}, got {dim}"
        );
        SymMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    /// Identity matrix.
    pub fn identity(dim: usize) -> SymMatrix {
        let mut m = SymMatrix::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    /// Build from an entry function; only the lower triangle is sampled and
    /// the result is mirrored.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> SymMatrix {
        let mut m = SymMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..=i {
                let v = f(i, j);
                m.data[i * dim + j] = v;
                m.data[j * dim + i] = v;
            }
        }
        m
    }

    /// Build from explicit rows; the input must be square and exactly
    /// symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<SymMatrix> {
        let dim = rows.len();
        if !(1..=MAX_MATRIX_DIM).contains(&dim) {
            return Err(Error::InvalidParameter(format!(
                "matrix dimension must be between 1 and {MAX_MATRIX_DIM}, got {dim}"
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::InvalidParameter(format!(
                    "row {i} has length {}, expected {dim}",
                    row.len()
                )));
            }
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate().take(i) {
                if v != rows[j][i] {
                    return Err(Error::InvalidParameter(format!(
                        "matrix is not symmetric at ({i}, {j}): {v} vs {}",
                        rows[j][i]
                    )));
                }
            }
        }
        let mut m = SymMatrix::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            m.data[i * dim..(i + 1) * dim].copy_from_slice(row);
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Set entry `(i, j)` and its mirror.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    /// Entries as rows (for serialization and display).
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| self.data[i * self.dim..(i + 1) * self.dim].to_vec())
            .collect()
    }

    /// Entrywise scaling.
    pub fn scaled(&self, c: f64) -> SymMatrix {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    /// Entrywise sum; dimensions must agree.
    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim, other.dim, "matrix dimension mismatch");
        SymMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "matrix dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim, "vector length mismatch");
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// Quadratic form v^T M v.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        self.mul_vec(v).iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// Bilinear form u^T M v.
    pub fn bilinear_form(&self, u: &[f64], v: &[f64]) -> f64 {
        self.mul_vec(v).iter().zip(u).map(|(a, b)| a * b).sum()
    }

    /// Solve `M x = b` by LU decomposition with partial pivoting. A pivot
    /// smaller than `SINGULAR_PIVOT_REL` times the largest entry of `M` is
    /// treated as singular.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(b.len(), self.dim, "right-hand side length mismatch");
        let n = self.dim;
        let pivot_floor = SINGULAR_PIVOT_REL * self.max_abs().max(MIN_POSITIVE);
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        for k in 0..n {
            // Partial pivoting: bring the largest remaining entry of column k
            // to the diagonal.
            let mut p = k;
            for r in (k + 1)..n {
                if a[r * n + k].abs() > a[p * n + k].abs() {
                    p = r;
                }
            }
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
                x.swap(k, p);
            }
            let pivot = a[k * n + k];
            if pivot.abs() <= pivot_floor {
                return Err(Error::SingularMatrix { step: k, pivot });
            }
            for r in (k + 1)..n {
                let factor = a[r * n + k] / pivot;
                if factor != 0.0 {
                    for c in k..n {
                        a[r * n + c] -= factor * a[k * n + c];
                    }
                    x[r] -= factor * x[k];
                }
            }
        }
        // Back substitution.
        for k in (0..n).rev() {
            let mut s = x[k];
            for c in (k + 1)..n {
                s -= a[k * n + c] * x[c];
            }
            x[k] = s / a[k * n + k];
        }
        Ok(x)
    }

    /// Inverse via column-by-column solves, re-symmetrized to wash out the
    /// rounding asymmetry the elimination introduces.
    pub fn inverse(&self) -> Result<SymMatrix> {
        let n = self.dim;
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            cols.push(self.solve(&e)?);
        }
        Ok(SymMatrix::from_fn(n, |i, j| {
            0.5 * (cols[j][i] + cols[i][j])
        }))
    }

    /// Cholesky factor (packed lower triangle, row-wise) if the matrix is
    /// positive-definite; `None` as soon as a pivot fails to be strictly
    /// positive.
    pub fn cholesky(&self) -> Option<Vec<f64>> {
        let n = self.dim;
        let mut l = vec![0.0; n * (n + 1) / 2];
        let idx = |i: usize, j: usize| i * (i + 1) / 2 + j;
        for i in 0..n {
            for j in 0..=i {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[idx(i, k)] * l[idx(j, k)];
                }
                if i == j {
                    if s <= 0.0 {
                        return None;
                    }
                    l[idx(i, j)] = s.sqrt();
                } else {
                    l[idx(i, j)] = s / l[idx(j, j)];
                }
            }
        }
        Some(l)
    }

    /// All eigenvalues, sorted ascending, by cyclic Jacobi rotations. For
    /// these sizes Jacobi converges to machine precision in a few sweeps.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.dim;
        let mut a = self.data.clone();
        if n == 1 {
            return vec![a[0]];
        }
        let frob: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        let stop = (f64::EPSILON * frob).powi(2);
        for _sweep in 0..64 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..i).map(move |j| (i, j)))
                .map(|(i, j)| a[i * n + j] * a[i * n + j])
                .sum();
            if off <= stop {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + (1.0 + theta * theta).sqrt())
                    } else {
                        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    // Apply the rotation to rows/columns p and q.
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
        eig.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
        eig
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<SymMatrix> {
        SymMatrix::from_rows(&rows)
    }
}

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(m: SymMatrix) -> Vec<Vec<f64>> {
        m.rows()
    }
}
