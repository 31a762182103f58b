//! Small dense complex linear algebra and one-dimensional quadrature.

mod linalg;
mod quad;

pub(crate) use linalg::hermitian_eigenvalues_n;
pub use linalg::{
    complex, hermitian_eigen, matrix_sqrt_psd, CMatrix, ComplexScalar, EigenDecomposition,
    HERMITIAN_TOL, JACOBI_TOL, PSD_CLAMP,
};
pub use quad::integrate_adaptive;
