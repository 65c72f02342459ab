//! Small dense kernels (LU, Jacobi SVD, complex QZ) generic over [`Real`](crate::Real).

pub mod lu;
pub mod mat;
pub mod qz;
pub mod svd;

pub use lu::Lu;
pub use mat::{dot, norm2, norm2_complex, norm_inf, Mat};
pub use qz::{qz, GeneralizedSchur};
pub use svd::{cond_2, norm_2, singular_values};
