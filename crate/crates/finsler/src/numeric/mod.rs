//! Numeric kernel: guarded scalar algebra, second-order forward-mode
//! differentiation, finite-difference cross checks, and small dense symmetric
//! linear algebra. Everything upstream (metrics, convolution, classification)
//! is built on these four pieces.

pub mod fd;
pub mod linalg;
pub mod scalar;
pub mod taylor2;

pub use fd::{fd_gradient, fd_gradient_refined, fd_hessian, fd_hessian_refined};
pub use linalg::SymMatrix;
pub use scalar::Scalar;
pub use taylor2::{taylor2_eval, Taylor2};
