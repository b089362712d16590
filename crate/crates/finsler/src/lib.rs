//! Numerical Finsler geometry.
//!
//! The crate evaluates Finsler metrics — norms on tangent spaces that vary
//! with the base point and need not come from an inner product — and the
//! second-order fiber data that controls their geometry: the fundamental
//! tensor g_ij = 1/2 d^2(F^2)/dy^i dy^j, its strong-convexity certificate,
//! and the Cartan tensor that measures the departure from the Riemannian
//! case.
//!
//! On top of the pointwise machinery sit three larger pieces:
//!
//! * a zoo of concrete metric families (Euclidean, constant Riemannian,
//!   the Klein ball model, Minkowski norms with quartic and power-law
//!   perturbations, Randers forms, and two warped product families),
//! * a convolution construction that couples two Finsler metrics through a
//!   pair of positive scalar fields, including the block structure of the
//!   resulting fundamental tensor and the positivity condition that decides
//!   strong convexity of the product, and
//! * sampling-based classification probes that test whether a metric is
//!   Riemannian, locally Minkowskian, of Randers type, or flat Euclidean,
//!   reporting numeric evidence alongside each verdict.
//!
//! Derivatives are computed by second-order forward-mode jets
//! ([`numeric::taylor2`]) and cross-checked against central finite
//! differences ([`numeric::fd`]); the two never share code paths, so each is
//! an oracle for the other.

pub mod classify;
pub mod config;
pub mod convolution;
pub mod error;
pub mod field;
pub mod metric;
pub mod numeric;
pub mod report;
pub mod sample;
pub mod sampler;
pub mod tol;
pub mod zoo;

pub use error::{Error, Result};
pub use field::ScalarField;
pub use metric::{CartanTensor, FinslerMetric, FundamentalTensor};
pub use sample::TangentSample;
pub use tol::Tolerances;
