//! Second-order forward-mode differentiation.
//!
//! A [`Taylor2`] carries a value, a gradient, and a symmetric Hessian through
//! arithmetic, so evaluating a formula on seeded jets produces exact first and
//! second derivatives in one pass (up to rounding, with no truncation error).
//! The Hessian is stored as a packed lower triangle; symmetry holds by
//! construction rather than by numerical accident.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::Result;
use crate::numeric::linalg::SymMatrix;
use crate::numeric::scalar::{require_denominator, require_positive, Scalar};
use crate::tol::MAX_DIM;

/// Packed length of a lower triangle in dimension `d`.
fn packed_len(d: usize) -> usize {
    d * (d + 1) / 2
}

/// Packed index of entry `(i, j)` with `i >= j`.
fn packed_index(i: usize, j: usize) -> usize {
    debug_assert!(i >= j);
    i * (i + 1) / 2 + j
}

/// A degree-2 jet: value, gradient, and packed symmetric Hessian with respect
/// to a fixed set of seed variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Taylor2 {
    value: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
}

impl Taylor2 {
    /// Seed one jet per coordinate of `x0`: variable `i` has value `x0[i]`,
    /// unit gradient in slot `i`, and zero Hessian.
    pub fn variables(x0: &[f64]) -> Vec<Taylor2> {
        let d = x0.len();
        assert!(
            (1..=MAX_DIM).contains(&d),
            "jet dimension must be between 1 and {MAX_DIM}, got {d}"
        );
        x0.iter()
            .enumerate()
            .map(|(i, &v)| {
                let mut grad = vec![0.0; d];
                grad[i] = 1.0;
                Taylor2 {
                    value: v,
                    grad,
                    hess: vec![0.0; packed_len(d)],
                }
            })
            .collect()
    }

    /// Number of seed variables.
    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    /// Gradient with respect to the seed variables.
    pub fn gradient(&self) -> &[f64] {
        &self.grad
    }

    /// Hessian entry `(i, j)`.
    pub fn hessian(&self, i: usize, j: usize) -> f64 {
        if i >= j {
            self.hess[packed_index(i, j)]
        } else {
            self.hess[packed_index(j, i)]
        }
    }

    /// Hessian as a dense symmetric matrix.
    pub fn hessian_matrix(&self) -> SymMatrix {
        let d = self.dim();
        SymMatrix::from_fn(d, |i, j| self.hessian(i, j))
    }

    /// A jet with the same seed set, constant value `c`.
    fn same_shape_constant(&self, c: f64) -> Taylor2 {
        Taylor2 {
            value: c,
            grad: vec![0.0; self.grad.len()],
            hess: vec![0.0; self.hess.len()],
        }
    }

    fn check_same_shape(&self, rhs: &Taylor2) {
        assert_eq!(
            self.dim(),
            rhs.dim(),
            "jets from different seed sets cannot be combined"
        );
    }
}

impl Add for Taylor2 {
    type Output = Taylor2;
    fn add(mut self, rhs: Taylor2) -> Taylor2 {
        self.check_same_shape(&rhs);
        self.value += rhs.value;
        for (a, b) in self.grad.iter_mut().zip(&rhs.grad) {
            *a += b;
        }
        for (a, b) in self.hess.iter_mut().zip(&rhs.hess) {
            *a += b;
        }
        self
    }
}

impl Sub for Taylor2 {
    type Output = Taylor2;
    fn sub(mut self, rhs: Taylor2) -> Taylor2 {
        self.check_same_shape(&rhs);
        self.value -= rhs.value;
        for (a, b) in self.grad.iter_mut().zip(&rhs.grad) {
            *a -= b;
        }
        for (a, b) in self.hess.iter_mut().zip(&rhs.hess) {
            *a -= b;
        }
        self
    }
}

impl Neg for Taylor2 {
    type Output = Taylor2;
    fn neg(mut self) -> Taylor2 {
        self.value = -self.value;
        for a in &mut self.grad {
            *a = -*a;
        }
        for a in &mut self.hess {
            *a = -*a;
        }
        self
    }
}

impl Mul for Taylor2 {
    type Output = Taylor2;
    /// Product rule: (ab)'' = a''b + a'(x)b'(y) + a'(y)b'(x) + ab''.
    fn mul(self, rhs: Taylor2) -> Taylor2 {
        self.check_same_shape(&rhs);
        let d = self.dim();
        let value = self.value * rhs.value;
        let grad: Vec<f64> = (0..d)
            .map(|i| self.grad[i] * rhs.value + self.value * rhs.grad[i])
            .collect();
        let mut hess = vec![0.0; packed_len(d)];
        for i in 0..d {
            for j in 0..=i {
                hess[packed_index(i, j)] = self.hess[packed_index(i, j)] * rhs.value
                    + self.grad[i] * rhs.grad[j]
                    + self.grad[j] * rhs.grad[i]
                    + self.value * rhs.hess[packed_index(i, j)];
            }
        }
        Taylor2 { value, grad, hess }
    }
}

impl Scalar for Taylor2 {
    fn value(&self) -> f64 {
        self.value
    }

    fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.value *= c;
        for a in &mut out.grad {
            *a *= c;
        }
        for a in &mut out.hess {
            *a *= c;
        }
        out
    }

    fn offset(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.value += c;
        out
    }

    fn sq(&self) -> Self {
        let d = self.dim();
        let value = self.value * self.value;
        let grad: Vec<f64> = (0..d).map(|i| 2.0 * self.value * self.grad[i]).collect();
        let mut hess = vec![0.0; packed_len(d)];
        for i in 0..d {
            for j in 0..=i {
                hess[packed_index(i, j)] = 2.0
                    * (self.value * self.hess[packed_index(i, j)] + self.grad[i] * self.grad[j]);
            }
        }
        Taylor2 { value, grad, hess }
    }

    fn powi(&self, n: u32) -> Self {
        match n {
            0 => self.same_shape_constant(1.0),
            1 => self.clone(),
            _ => {
                let mut acc = self.clone();
                for _ in 1..n {
                    acc = acc * self.clone();
                }
                acc
            }
        }
    }

    fn exp(&self) -> Self {
        let d = self.dim();
        let e = self.value.exp();
        let grad: Vec<f64> = (0..d).map(|i| e * self.grad[i]).collect();
        let mut hess = vec![0.0; packed_len(d)];
        for i in 0..d {
            for j in 0..=i {
                hess[packed_index(i, j)] =
                    e * (self.hess[packed_index(i, j)] + self.grad[i] * self.grad[j]);
            }
        }
        Taylor2 {
            value: e,
            grad,
            hess,
        }
    }

    fn sqrt(&self) -> Result<Self> {
        require_positive(self.value, "sqrt")?;
        let d = self.dim();
        let s = self.value.sqrt();
        let grad: Vec<f64> = (0..d).map(|i| self.grad[i] / (2.0 * s)).collect();
        let mut hess = vec![0.0; packed_len(d)];
        for i in 0..d {
            for j in 0..=i {
                hess[packed_index(i, j)] =
                    (self.hess[packed_index(i, j)] - 2.0 * grad[i] * grad[j]) / (2.0 * s);
            }
        }
        Ok(Taylor2 {
            value: s,
            grad,
            hess,
        })
    }

    fn ln(&self) -> Result<Self> {
        require_positive(self.value, "ln")?;
        let d = self.dim();
        let v = self.value;
        let grad: Vec<f64> = (0..d).map(|i| self.grad[i] / v).collect();
        let mut hess = vec![0.0; packed_len(d)];
        for i in 0..d {
            for j in 0..=i {
                hess[packed_index(i, j)] =
                    self.hess[packed_index(i, j)] / v - self.grad[i] * self.grad[j] / (v * v);
            }
        }
        Ok(Taylor2 {
            value: v.ln(),
            grad,
            hess,
        })
    }

    fn powf(&self, p: f64) -> Result<Self> {
        if p == 1.0 {
            return Ok(self.clone());
        }
        require_positive(self.value, "powf")?;
        let d = self.dim();
        let v = self.value;
        let w = v.powf(p);
        let c1 = p * v.powf(p - 1.0);
        let c2 = p * (p - 1.0) * v.powf(p - 2.0);
        let grad: Vec<f64> = (0..d).map(|i| c1 * self.grad[i]).collect();
        let mut hess = vec![0.0; packed_len(d)];
        for i in 0..d {
            for j in 0..=i {
                hess[packed_index(i, j)] =
                    c1 * self.hess[packed_index(i, j)] + c2 * self.grad[i] * self.grad[j];
            }
        }
        Ok(Taylor2 {
            value: w,
            grad,
            hess,
        })
    }

    fn div(&self, rhs: &Self) -> Result<Self> {
        self.check_same_shape(rhs);
        require_denominator(rhs.value, "jet division")?;
        let d = self.dim();
        let b = rhs.value;
        let q = self.value / b;
        let grad: Vec<f64> = (0..d)
            .map(|i| (self.grad[i] - q * rhs.grad[i]) / b)
            .collect();
        let mut hess = vec![0.0; packed_len(d)];
        for i in 0..d {
            for j in 0..=i {
                hess[packed_index(i, j)] = (self.hess[packed_index(i, j)]
                    - grad[i] * rhs.grad[j]
                    - grad[j] * rhs.grad[i]
                    - q * rhs.hess[packed_index(i, j)])
                    / b;
            }
        }
        Ok(Taylor2 {
            value: q,
            grad,
            hess,
        })
    }
}

/// Evaluate `program` on jets seeded at `x0`; returns value, gradient, and
/// Hessian of the program at `x0`.
pub fn taylor2_eval<F>(program: F, x0: &[f64]) -> Result<(f64, Vec<f64>, SymMatrix)>
where
    F: FnOnce(&[Taylor2]) -> Result<Taylor2>,
{
    let vars = Taylor2::variables(x0);
    let out = program(&vars)?;
    Ok((out.value(), out.grad.clone(), out.hessian_matrix()))
}
