//! A point of the slit tangent bundle: a base point together with a nonzero
//! tangent vector at it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol::MAX_DIM;

/// Base point `x` and tangent vector `y`, both of the metric's dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TangentSample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl TangentSample {
    /// Construct and validate: matching lengths, dimension in range, finite
    /// coordinates, and `y` not identically zero.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<TangentSample> {
        if x.len() != y.len() {
            return Err(Error::InvalidParameter(format!(
                "base point has dimension {} but tangent vector has dimension {}",
                x.len(),
                y.len()
            )));
        }
        if x.is_empty() || x.len() > MAX_DIM {
            return Err(Error::InvalidParameter(format!(
                "sample dimension must be between 1 and {MAX_DIM}, got {}",
                x.len()
            )));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "sample coordinates must be finite".into(),
            ));
        }
        if y.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidParameter(
                "tangent vector must be nonzero".into(),
            ));
        }
        Ok(TangentSample { x, y })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Euclidean norm of the tangent vector.
    pub fn y_norm(&self) -> f64 {
        self.y.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Same base point, tangent vector scaled by `c`.
    pub fn with_scaled_y(&self, c: f64) -> TangentSample {
        TangentSample {
            x: self.x.clone(),
            y: self.y.iter().map(|v| v * c).collect(),
        }
    }

    /// Same base point, reflected tangent vector.
    pub fn reflected(&self) -> TangentSample {
        self.with_scaled_y(-1.0)
    }

    /// Same base point, tangent vector nudged by `step` along coordinate `k`.
    pub fn with_shifted_y(&self, k: usize, step: f64) -> TangentSample {
        let mut y = self.y.clone();
        y[k] += step;
        TangentSample {
            x: self.x.clone(),
            y,
        }
    }

    /// Restriction to a coordinate block `[start, start + len)`, for product
    /// metrics.
    pub fn block(&self, start: usize, len: usize) -> TangentSample {
        TangentSample {
            x: self.x[start..start + len].to_vec(),
            y: self.y[start..start + len].to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(TangentSample::new(vec![0.0], vec![1.0]).is_ok());
        assert!(TangentSample::new(vec![0.0], vec![1.0, 2.0]).is_err());
        assert!(TangentSample::new(vec![], vec![]).is_err());
        assert!(TangentSample::new(vec![0.0], vec![0.0]).is_err());
        assert!(TangentSample::new(vec![f64::NAN], vec![1.0]).is_err());
        assert!(TangentSample::new(vec![0.0; 17], vec![1.0; 17]).is_err());
    }

    #[test]
    fn block_restriction() {
        let s = TangentSample::new(vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]).unwrap();
        let b = s.block(1, 2);
        assert_eq!(b.x, vec![2.0, 3.0]);
        assert_eq!(b.y, vec![5.0, 6.0]);
    }

    #[test]
    fn scaling_and_reflection() {
        let s = TangentSample::new(vec![0.0, 0.0], vec![3.0, 4.0]).unwrap();
        assert_eq!(s.y_norm(), 5.0);
        assert_eq!(s.with_scaled_y(2.0).y, vec![6.0, 8.0]);
        assert_eq!(s.reflected().y, vec![-3.0, -4.0]);
    }

    #[test]
    fn json_roundtrip() {
        let s = TangentSample::new(vec![0.5, -0.25], vec![1.0, 2.0]).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: TangentSample = serde_json::from_str(&text).unwrap();
        assert_eq!(s, back);
    }
}
