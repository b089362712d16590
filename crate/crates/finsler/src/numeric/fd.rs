//! Central finite differences, used as an independent oracle against the jet
//! propagation in [`taylor2`](super::taylor2). Plain stencils are O(h^2); the
//! `_refined` variants apply one Richardson step, (4 D(h/2) - D(h)) / 3, for
//! O(h^4) when the extra function evaluations are worth it.

use crate::error::{Error, Result};
use crate::numeric::linalg::SymMatrix;

fn check_step(h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "finite-difference step must be finite and positive, got {h}"
        )));
    }
    Ok(())
}

/// Gradient by central differences with step `h`.
pub fn fd_gradient<F>(f: F, x0: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    check_step(h)?;
    let mut x = x0.to_vec();
    let mut grad = Vec::with_capacity(x0.len());
    for i in 0..x0.len() {
        x[i] = x0[i] + h;
        let plus = f(&x)?;
        x[i] = x0[i] - h;
        let minus = f(&x)?;
        x[i] = x0[i];
        grad.push((plus - minus) / (2.0 * h));
    }
    Ok(grad)
}

/// Hessian by central differences: the usual 3-point diagonal stencil and the
/// 4-point cross stencil off the diagonal.
pub fn fd_hessian<F>(f: F, x0: &[f64], h: f64) -> Result<SymMatrix>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    check_step(h)?;
    let n = x0.len();
    let center = f(x0)?;
    let mut x = x0.to_vec();
    let mut hess = SymMatrix::zeros(n);
    for i in 0..n {
        x[i] = x0[i] + h;
        let plus = f(&x)?;
        x[i] = x0[i] - h;
        let minus = f(&x)?;
        x[i] = x0[i];
        hess.set(i, i, (plus - 2.0 * center + minus) / (h * h));
        for j in 0..i {
            x[i] = x0[i] + h;
            x[j] = x0[j] + h;
            let pp = f(&x)?;
            x[j] = x0[j] - h;
            let pm = f(&x)?;
            x[i] = x0[i] - h;
            x[j] = x0[j] + h;
            let mp = f(&x)?;
            x[j] = x0[j] - h;
            let mm = f(&x)?;
            x[i] = x0[i];
            x[j] = x0[j];
            hess.set(i, j, (pp - pm - mp + mm) / (4.0 * h * h));
        }
    }
    Ok(hess)
}

/// Richardson-extrapolated gradient: one halving step, O(h^4).
pub fn fd_gradient_refined<F>(f: F, x0: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let coarse = fd_gradient(&f, x0, h)?;
    let fine = fd_gradient(&f, x0, h / 2.0)?;
    Ok(fine
        .iter()
        .zip(&coarse)
        .map(|(f4, f2)| (4.0 * f4 - f2) / 3.0)
        .collect())
}

/// Richardson-extrapolated Hessian: one halving step, O(h^4).
pub fn fd_hessian_refined<F>(f: F, x0: &[f64], h: f64) -> Result<SymMatrix>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let coarse = fd_hessian(&f, x0, h)?;
    let fine = fd_hessian(&f, x0, h / 2.0)?;
    let n = x0.len();
    Ok(SymMatrix::from_fn(n, |i, j| {
        (4.0 * fine.get(i, j) - coarse.get(i, j)) / 3.0
    }))
}
