use super::dense::DenseMatrix;
use super::factor::thin_qr;

/// Thin singular value decomposition `M = U diag(s) Vᵀ`.
#[derive(Clone, Debug)]
pub struct Svd {
    /// `rows x k`, orthonormal columns, `k = min(rows, cols)`.
    pub u: DenseMatrix,
    /// Nonnegative, descending.
    pub singular_values: Vec<f64>,
    /// `cols x k`, orthonormal columns.
    pub v: DenseMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> DenseMatrix {
        self.reconstruct_with(&self.singular_values)
    }

    /// `U diag(s) Vᵀ` with replacement singular values.
    pub fn reconstruct_with(&self, s: &[f64]) -> DenseMatrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        let mut out = DenseMatrix::zeros(m, n);
        for (k, &sk) in s.iter().enumerate() {
            if sk == 0.0 {
                continue;
            }
            for i in 0..m {
                let uik = self.u.get(i, k) * sk;
                if uik == 0.0 {
                    continue;
                }
                let row = &mut out.data_mut()[i * n..(i + 1) * n];
                for (j, o) in row.iter_mut().enumerate() {
                    *o += uik * self.v.get(j, k);
                }
            }
        }
        out
    }
}

/// Singular value decomposition by one-sided Jacobi rotations, with a
/// Householder QR front end for tall inputs.
pub fn svd(m: &DenseMatrix) -> Svd {
    if m.rows() < m.cols() {
        let t = svd(&m.transpose());
        return Svd { u: t.v, singular_values: t.singular_values, v: t.u };
    }
    if m.cols() > 0 && m.rows() > m.cols() + m.cols() / 4 {
        let (q, r) = thin_qr(m);
        let inner = jacobi_svd(&r);
        let u = q.matmul(&inner.u).expect("shapes agree");
        return Svd { u, singular_values: inner.singular_values, v: inner.v };
    }
    jacobi_svd(m)
}

fn jacobi_svd(a: &DenseMatrix) -> Svd {
    let (m, n) = (a.rows(), a.cols());
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.col(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    let tol = 4.0 * f64::EPSILON;

    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (&cols[p], &cols[q]);
                    let mut al = 0.0;
                    let mut be = 0.0;
                    let mut ga = 0.0;
                    for k in 0..m {
                        al += cp[k] * cp[k];
                        be += cq[k] * cq[k];
                        ga += cp[k] * cq[k];
                    }
                    (al, be, ga)
                };
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = cols.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let mut ucols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut pending = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        if norms[j] > 0.0 {
            ucols.push(cols[j].iter().map(|x| x / norms[j]).collect());
        } else {
            pending.push(k);
            ucols.push(Vec::new());
        }
    }
    complete_basis(&mut ucols, &pending, m);

    let u = DenseMatrix::from_fn(m, n, |i, k| ucols[k][i]);
    let vv = DenseMatrix::from_fn(n, n, |i, k| v[order[k]][i]);
    Svd { u, singular_values: order.iter().map(|&j| norms[j]).collect(), v: vv }
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    let (cp, cq) = (&mut lo[p], &mut hi[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Fills the empty columns listed in `pending` with unit vectors orthogonal
/// to every other column (Gram-Schmidt over the standard basis).
fn complete_basis(cols: &mut [Vec<f64>], pending: &[usize], m: usize) {
    let mut next_unit = 0;
    for &k in pending {
        while next_unit < m {
            let mut cand = vec![0.0; m];
            cand[next_unit] = 1.0;
            next_unit += 1;
            for _ in 0..2 {
                for c in cols.iter().filter(|c| !c.is_empty()) {
                    let d: f64 = c.iter().zip(&cand).map(|(a, b)| a * b).sum();
                    for (x, y) in cand.iter_mut().zip(c) {
                        *x -= d * y;
                    }
                }
            }
            let nrm = cand.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nrm > 0.5 {
                cols[k] = cand.into_iter().map(|x| x / nrm).collect();
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sym_eig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check_invariants(m: &DenseMatrix, s: &Svd) {
        let err = s.reconstruct().sub(m).unwrap().frobenius_norm() / m.frobenius_norm().max(1.0);
        assert!(err < 1e-9, "reconstruction {err}");
        let k = s.singular_values.len();
        assert!(s.u.gram().sub(&DenseMatrix::identity(k)).unwrap().max_abs() < 1e-9);
        assert!(s.v.gram().sub(&DenseMatrix::identity(k)).unwrap().max_abs() < 1e-9);
        assert!(s.singular_values.iter().all(|&x| x >= 0.0));
        assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn diagonal() {
        let m = DenseMatrix::from_diag(&[1.0, 3.0]);
        let s = svd(&m);
        assert_eq!(s.singular_values, vec![3.0, 1.0]);
        check_invariants(&m, &s);
    }

    #[test]
    fn rank_one() {
        let u = [2.0, 0.0, 0.0];
        let v = [0.0, 3.0, 0.0, 0.0];
        let m = DenseMatrix::from_fn(3, 4, |i, j| u[i] * v[j]);
        let s = svd(&m);
        assert!((s.singular_values[0] - 6.0).abs() < 1e-12);
        assert!(s.singular_values[1..].iter().all(|&x| x.abs() < 1e-12));
        check_invariants(&m, &s);
    }

    #[test]
    fn squares_match_gram_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = DenseMatrix::from_fn(20, 5, |_, _| rng.random_range(-1.0..1.0));
        let s = svd(&m);
        check_invariants(&m, &s);
        let e = sym_eig(&m.gram()).unwrap();
        for (sv, ev) in s.singular_values.iter().zip(&e.eigenvalues) {
            assert!((sv * sv - ev).abs() < 1e-9);
        }
    }

    #[test]
    fn wide_and_square_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (r, c) in [(4, 9), (6, 6), (1, 5), (5, 1)] {
            let m = DenseMatrix::from_fn(r, c, |_, _| rng.random_range(-2.0..2.0));
            check_invariants(&m, &svd(&m));
        }
    }

    #[test]
    fn zero_matrix() {
        let m = DenseMatrix::zeros(4, 3);
        let s = svd(&m);
        assert!(s.singular_values.iter().all(|&x| x == 0.0));
        assert!(s.u.gram().sub(&DenseMatrix::identity(3)).unwrap().max_abs() < 1e-12);
    }
}
