//! Special functions, Hermitian linear algebra and root finding.

pub mod linalg;
pub mod roots;
pub mod special;

pub use linalg::{
    hermitian_eigendecomposition, hermitian_part, inner, relative_frobenius, CMatrix, CVector,
    BlockCholesky, CholeskyFactor, HermitianEigen,
};
pub use roots::bracketed_root_find;
pub use special::{
    chi2_cdf, chi2_quantile, chi2_sf, chi2_upper_quantile, noncentral_chi2_cdf, normal_pdf,
    normal_sf, regularized_incomplete_beta,
};
