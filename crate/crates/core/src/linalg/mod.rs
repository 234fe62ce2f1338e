//! Dense and sparse linear algebra kernels.

mod dense;
mod eig;
mod factor;
mod operator;
mod sparse;
mod spectral;
mod svd;
pub mod vector;

pub use dense::DenseMatrix;
pub use eig::{sym_eig, SymEig, SYMMETRY_TOL};
pub use factor::{thin_qr, Cholesky, Lu};
pub use operator::{BlockMatrix, LinearOperator};
#[allow(unused_imports)]
pub(crate) use sparse::RawSparse;
pub use sparse::SparseMatrix;
pub use spectral::{operator_norm, spectral_norm, spectral_radius};
pub use svd::{svd, Svd};
