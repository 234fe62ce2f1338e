use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Result};
use crate::exec::Exec;

use super::dense::DenseMatrix;

/// Compressed sparse row matrix with a cached transpose, so that both
/// `A x` and `Aᵀ x` are row-wise gathers.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    fwd: Csr,
    tr: Csr,
}

#[derive(Clone, Debug, PartialEq)]
struct Csr {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl Csr {
    fn from_sorted(rows: usize, cols: usize, mut trip: Vec<(usize, usize, f64)>) -> Self {
        trip.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(trip.len());
        let mut values: Vec<f64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trip {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            indices.push(c);
            values.push(v);
            indptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        Csr { rows, cols, indptr, indices, values }
    }

    fn transpose(&self) -> Self {
        let mut trip = Vec::with_capacity(self.values.len());
        for r in 0..self.rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                trip.push((self.indices[k], r, self.values[k]));
            }
        }
        Csr::from_sorted(self.cols, self.rows, trip)
    }

    fn apply(&self, x: &[f64], out: &mut [f64], exec: Exec) {
        let avg = self.values.len() / self.rows.max(1) + 1;
        exec.fill(out, avg, |r| {
            let mut s = 0.0;
            for k in self.indptr[r]..self.indptr[r + 1] {
                s += self.values[k] * x[self.indices[k]];
            }
            s
        });
    }
}

impl SparseMatrix {
    /// Builds from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, trip: Vec<(usize, usize, f64)>) -> Result<Self> {
        if let Some(&(r, c, _)) = trip.iter().find(|t| t.0 >= rows || t.1 >= cols) {
            return dim_err(format!("triplet ({r},{c}) outside {rows}x{cols}"));
        }
        let fwd = Csr::from_sorted(rows, cols, trip);
        let tr = fwd.transpose();
        Ok(Self { fwd, tr })
    }

    pub fn rows(&self) -> usize {
        self.fwd.rows
    }

    pub fn cols(&self) -> usize {
        self.fwd.cols
    }

    pub fn nnz(&self) -> usize {
        self.fwd.values.len()
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let f = &self.fwd;
        let mut out = Vec::with_capacity(f.values.len());
        for r in 0..f.rows {
            for k in f.indptr[r]..f.indptr[r + 1] {
                out.push((r, f.indices[k], f.values[k]));
            }
        }
        out
    }

    pub fn matvec_into(&self, x: &[f64], out: &mut [f64], exec: Exec) {
        assert_eq!(x.len(), self.cols(), "sparse matvec: input length");
        assert_eq!(out.len(), self.rows(), "sparse matvec: output length");
        self.fwd.apply(x, out, exec);
    }

    pub fn tr_matvec_into(&self, x: &[f64], out: &mut [f64], exec: Exec) {
        assert_eq!(x.len(), self.rows(), "sparse tr_matvec: input length");
        assert_eq!(out.len(), self.cols(), "sparse tr_matvec: output length");
        self.tr.apply(x, out, exec);
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.rows(), self.cols());
        for (r, c, v) in self.triplets() {
            m.set(r, c, m.get(r, c) + v);
        }
        m
    }

    /// Diagonal of `AᵀA` when `AᵀA` is diagonal (no row touches two columns).
    pub fn diagonal_gram(&self) -> Option<Vec<f64>> {
        let f = &self.fwd;
        let mut d = vec![0.0; f.cols];
        for r in 0..f.rows {
            let (lo, hi) = (f.indptr[r], f.indptr[r + 1]);
            let mut nonzero = (lo..hi).filter(|&k| f.values[k] != 0.0);
            if let Some(k) = nonzero.next() {
                if nonzero.next().is_some() {
                    return None;
                }
                d[f.indices[k]] += f.values[k] * f.values[k];
            }
        }
        Some(d)
    }
}

#[derive(Serialize, Deserialize)]
pub(crate) struct RawSparse {
    pub rows: usize,
    pub cols: usize,
    pub triplets: Vec<(usize, usize, f64)>,
}

impl Serialize for SparseMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawSparse { rows: self.rows(), cols: self.cols(), triplets: self.triplets() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SparseMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawSparse::deserialize(d)?;
        SparseMatrix::from_triplets(raw.rows, raw.cols, raw.triplets).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_dense() {
        let s = SparseMatrix::from_triplets(
            3,
            4,
            vec![(0, 1, 2.0), (2, 3, -1.0), (1, 0, 0.5), (0, 1, 1.0), (2, 0, 4.0)],
        )
        .unwrap();
        let d = s.to_dense();
        assert_eq!(d.get(0, 1), 3.0);
        let x = [1.0, 2.0, 3.0, 4.0];
        let mut y = vec![0.0; 3];
        s.matvec_into(&x, &mut y, Exec::Sequential);
        assert_eq!(y, d.matvec(&x));
        let z = [1.0, -1.0, 2.0];
        let mut w = vec![0.0; 4];
        s.tr_matvec_into(&z, &mut w, Exec::Sequential);
        assert_eq!(w, d.tr_matvec(&z));
    }

    #[test]
    fn diagonal_gram_detection() {
        let sel = SparseMatrix::from_triplets(3, 3, vec![(0, 0, -1.0), (1, 1, -1.0), (2, 2, 1.0)]).unwrap();
        assert_eq!(sel.diagonal_gram(), Some(vec![1.0, 1.0, 1.0]));
        let mixed = SparseMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 1, 1.0)]).unwrap();
        assert_eq!(mixed.diagonal_gram(), None);
    }

    #[test]
    fn out_of_range_triplet() {
        assert!(SparseMatrix::from_triplets(2, 2, vec![(2, 0, 1.0)]).is_err());
    }
}
