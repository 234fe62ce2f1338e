use serde::{Deserialize, Serialize};

use crate::exec::Exec;

use super::dense::DenseMatrix;
use super::sparse::SparseMatrix;

/// A real linear map that can be applied and transposed.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `out = A x`
    fn apply_into(&self, x: &[f64], out: &mut [f64], exec: Exec);
    /// `out = Aᵀ x`
    fn apply_t_into(&self, x: &[f64], out: &mut [f64], exec: Exec);

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nrows()];
        self.apply_into(x, &mut out, Exec::default());
        out
    }

    fn apply_t(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ncols()];
        self.apply_t_into(x, &mut out, Exec::default());
        out
    }
}

impl LinearOperator for DenseMatrix {
    fn nrows(&self) -> usize {
        self.rows()
    }
    fn ncols(&self) -> usize {
        self.cols()
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64], exec: Exec) {
        self.matvec_into(x, out, exec)
    }
    fn apply_t_into(&self, x: &[f64], out: &mut [f64], exec: Exec) {
        self.tr_matvec_into(x, out, exec)
    }
}

impl LinearOperator for SparseMatrix {
    fn nrows(&self) -> usize {
        self.rows()
    }
    fn ncols(&self) -> usize {
        self.cols()
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64], exec: Exec) {
        self.matvec_into(x, out, exec)
    }
    fn apply_t_into(&self, x: &[f64], out: &mut [f64], exec: Exec) {
        self.tr_matvec_into(x, out, exec)
    }
}

/// Storage for a block of `H` or `A`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockMatrix {
    Dense(DenseMatrix),
    Sparse(SparseMatrix),
}

impl BlockMatrix {
    /// A `rows x cols` block with no entries.
    pub fn empty(rows: usize, cols: usize) -> Self {
        BlockMatrix::Dense(DenseMatrix::zeros(rows, cols))
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            BlockMatrix::Dense(d) => d.clone(),
            BlockMatrix::Sparse(s) => s.to_dense(),
        }
    }

    /// True when every entry is zero (including zero-row blocks).
    pub fn is_zero(&self) -> bool {
        match self {
            BlockMatrix::Dense(d) => d.data().iter().all(|&v| v == 0.0),
            BlockMatrix::Sparse(s) => s.triplets().iter().all(|t| t.2 == 0.0),
        }
    }

    /// Diagonal of `BᵀB` if that Gram matrix is diagonal.
    pub fn diagonal_gram(&self) -> Option<Vec<f64>> {
        match self {
            BlockMatrix::Sparse(s) => s.diagonal_gram(),
            BlockMatrix::Dense(d) => {
                if d.rows() == 0 || d.data().iter().all(|&v| v == 0.0) {
                    return Some(vec![0.0; d.cols()]);
                }
                // one nonzero per row means orthogonal columns
                let mut diag = vec![0.0; d.cols()];
                for i in 0..d.rows() {
                    let mut hit = None;
                    for (j, &v) in d.row(i).iter().enumerate() {
                        if v != 0.0 {
                            if hit.is_some() {
                                return None;
                            }
                            hit = Some((j, v));
                        }
                    }
                    if let Some((j, v)) = hit {
                        diag[j] += v * v;
                    }
                }
                Some(diag)
            }
        }
    }
}

impl LinearOperator for BlockMatrix {
    fn nrows(&self) -> usize {
        match self {
            BlockMatrix::Dense(d) => d.rows(),
            BlockMatrix::Sparse(s) => s.rows(),
        }
    }
    fn ncols(&self) -> usize {
        match self {
            BlockMatrix::Dense(d) => d.cols(),
            BlockMatrix::Sparse(s) => s.cols(),
        }
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64], exec: Exec) {
        match self {
            BlockMatrix::Dense(d) => d.matvec_into(x, out, exec),
            BlockMatrix::Sparse(s) => s.matvec_into(x, out, exec),
        }
    }
    fn apply_t_into(&self, x: &[f64], out: &mut [f64], exec: Exec) {
        match self {
            BlockMatrix::Dense(d) => d.tr_matvec_into(x, out, exec),
            BlockMatrix::Sparse(s) => s.tr_matvec_into(x, out, exec),
        }
    }
}

impl From<DenseMatrix> for BlockMatrix {
    fn from(d: DenseMatrix) -> Self {
        BlockMatrix::Dense(d)
    }
}

impl From<SparseMatrix> for BlockMatrix {
    fn from(s: SparseMatrix) -> Self {
        BlockMatrix::Sparse(s)
    }
}
