//! Per-block solvers for
//! `min ⟨ℓ, x⟩ + g(x) + ½‖x − x^k‖²_P` with `P = (1 − D)G + θI`,
//! `G = HᵀH + βAᵀA`.

use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, vector, Cholesky, DenseMatrix};
use crate::model::BlockProblem;
use crate::prox::ProxOracle;

use super::schedule::INNER_TOL;

/// Largest block that may be handled through a dense Gram matrix.
pub const DENSE_BLOCK_LIMIT: usize = 5000;

#[derive(Clone, Debug)]
enum Kind {
    /// `G = γI` (γ = 0 for linearized blocks): one prox.
    Scaled { gamma: f64 },
    /// Diagonal `G` with coordinatewise `g`.
    Diagonal { gram: Vec<f64> },
    /// `g = 0`: one linear solve, factor cached per `θ`.
    Direct { gram: DenseMatrix, cache: Option<(u64, Cholesky)> },
    /// Restarted FISTA on the block.
    Inner { gram: DenseMatrix, lmax: f64 },
}

#[derive(Clone, Debug)]
pub(crate) struct BlockSub {
    block: usize,
    kind: Kind,
}

impl BlockSub {
    pub fn new(prob: &BlockProblem, i: usize, beta: f64, linearized: bool) -> Result<Self> {
        let n = prob.block_dim(i);
        if linearized {
            return Ok(Self { block: i, kind: Kind::Scaled { gamma: 0.0 } });
        }
        let (h, a) = (prob.h(i), prob.a(i));
        if let (Some(hd), Some(ad)) = (h.diagonal_gram(), a.diagonal_gram()) {
            let gram: Vec<f64> = hd.iter().zip(&ad).map(|(x, y)| x + beta * y).collect();
            if gram.iter().all(|&v| v == gram[0]) {
                return Ok(Self { block: i, kind: Kind::Scaled { gamma: gram.first().copied().unwrap_or(0.0) } });
            }
            if prob.g(i).is_separable() {
                return Ok(Self { block: i, kind: Kind::Diagonal { gram } });
            }
        }
        if n > DENSE_BLOCK_LIMIT {
            return Err(Error::TooLarge(format!(
                "block {i} has {n} coordinates; exact updates with a dense Gram matrix stop at {DENSE_BLOCK_LIMIT}"
            )));
        }
        let gram = h.to_dense().gram().add(&a.to_dense().gram().scaled(beta))?;
        let gram = DenseMatrix::from_fn(n, n, |r, c| 0.5 * (gram.get(r, c) + gram.get(c, r)));
        let kind = if prob.g(i).is_zero() {
            Kind::Direct { gram, cache: None }
        } else {
            let lmax = spectral_norm(&gram);
            Kind::Inner { gram, lmax }
        };
        Ok(Self { block: i, kind })
    }

    #[cfg(test)]
    pub fn method(&self) -> &'static str {
        match self.kind {
            Kind::Scaled { .. } => "prox",
            Kind::Diagonal { .. } => "coordinate prox",
            Kind::Direct { .. } => "cholesky",
            Kind::Inner { .. } => "fista",
        }
    }

    pub fn solve(
        &mut self,
        g: &ProxOracle,
        xk: &[f64],
        lin: &[f64],
        theta: f64,
        inner_cap: usize,
        out: &mut [f64],
    ) -> Result<()> {
        let i = self.block;
        let flat = || Error::SubproblemFailed(format!("block {i} has no curvature (P_i = 0)"));
        match &mut self.kind {
            Kind::Scaled { gamma } => {
                let w = *gamma + theta;
                if !(w > 0.0) {
                    return Err(flat());
                }
                let v: Vec<f64> = xk.iter().zip(lin).map(|(x, l)| x - l / w).collect();
                g.prox_into(&v, w, out)
            }
            Kind::Diagonal { gram } => {
                for k in 0..xk.len() {
                    let w = gram[k] + theta;
                    if !(w > 0.0) {
                        return Err(flat());
                    }
                    out[k] = g.prox_coord(k, xk[k] - lin[k] / w, w)?;
                }
                Ok(())
            }
            Kind::Direct { gram, cache } => {
                let key = theta.to_bits();
                if cache.as_ref().is_none_or(|(k, _)| *k != key) {
                    let n = gram.rows();
                    let mut sys = gram.clone();
                    for r in 0..n {
                        sys.set(r, r, sys.get(r, r) + theta);
                    }
                    let chol = Cholesky::new(&sys).map_err(|_| flat())?;
                    *cache = Some((key, chol));
                }
                let rhs: Vec<f64> = lin.iter().map(|l| -l).collect();
                let delta = cache.as_ref().expect("factor cached above").1.solve(&rhs);
                for ((o, x), d) in out.iter_mut().zip(xk).zip(&delta) {
                    *o = x + d;
                }
                Ok(())
            }
            Kind::Inner { gram, lmax } => {
                let l = *lmax + theta;
                if !(l > 0.0) {
                    return Err(flat());
                }
                fista(gram, theta, l, g, xk, lin, inner_cap, out).map_err(|it| {
                    Error::SubproblemFailed(format!("block {i}: inner loop did not reach {INNER_TOL:e} in {it} iterations"))
                })
            }
        }
    }
}

/// Proximal gradient with momentum and gradient-based restart. `Err` carries
/// the iteration count when the cap is hit.
#[allow(clippy::too_many_arguments)]
fn fista(
    gram: &DenseMatrix,
    theta: f64,
    l: f64,
    g: &ProxOracle,
    xk: &[f64],
    lin: &[f64],
    cap: usize,
    out: &mut [f64],
) -> std::result::Result<(), usize> {
    let n = xk.len();
    let mut x = xk.to_vec();
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut step = vec![0.0; n];
    let mut next = vec![0.0; n];
    for _ in 0..cap {
        let dy: Vec<f64> = y.iter().zip(xk).map(|(a, b)| a - b).collect();
        let gd = gram.matvec(&dy);
        for k in 0..n {
            step[k] = y[k] - (lin[k] + gd[k] + theta * dy[k]) / l;
        }
        if g.prox_into(&step, l, &mut next).is_err() {
            return Err(0);
        }
        let moved = vector::dist(&next, &x);
        if moved <= INNER_TOL * (1.0 + vector::norm(&next)) {
            out.copy_from_slice(&next);
            return Ok(());
        }
        // restart when the momentum direction opposes the gradient step
        let restart = y.iter().zip(&next).zip(&x).map(|((yk, nk), xk)| (yk - nk) * (nk - xk)).sum::<f64>() > 0.0;
        let t_next = if restart { 1.0 } else { 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt()) };
        let mom = if restart { 0.0 } else { (t - 1.0) / t_next };
        for k in 0..n {
            y[k] = next[k] + mom * (next[k] - x[k]);
        }
        std::mem::swap(&mut x, &mut next);
        t = t_next;
    }
    Err(cap)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block_problem(h: DenseMatrix, a: DenseMatrix, g: ProxOracle) -> BlockProblem {
        let b = vec![0.0; a.rows()];
        BlockProblem::new(vec![h.into()], vec![a.into()], b, vec![g], None).unwrap()
    }

    #[test]
    fn picks_methods() {
        let eye = DenseMatrix::identity(3);
        let p = block_problem(DenseMatrix::zeros(0, 3), eye.clone(), ProxOracle::l1(1.0));
        assert_eq!(BlockSub::new(&p, 0, 2.0, false).unwrap().method(), "prox");
        let d = DenseMatrix::from_diag(&[1.0, 2.0, 3.0]);
        let p = block_problem(DenseMatrix::zeros(0, 3), d.clone(), ProxOracle::l1(1.0));
        assert_eq!(BlockSub::new(&p, 0, 1.0, false).unwrap().method(), "coordinate prox");
        let full = DenseMatrix::from_fn(3, 3, |i, j| 1.0 + (i * j) as f64);
        let p = block_problem(full.clone(), eye.clone(), ProxOracle::Zero);
        assert_eq!(BlockSub::new(&p, 0, 1.0, false).unwrap().method(), "cholesky");
        let p = block_problem(full, eye, ProxOracle::NonnegIndicator);
        assert_eq!(BlockSub::new(&p, 0, 1.0, false).unwrap().method(), "fista");
        assert_eq!(BlockSub::new(&p, 0, 1.0, true).unwrap().method(), "prox");
    }

    #[test]
    fn direct_and_inner_agree_without_g() {
        let h = DenseMatrix::from_fn(4, 3, |i, j| ((i + 2 * j) as f64).sin());
        let a = DenseMatrix::from_fn(2, 3, |i, j| ((3 * i + j) as f64).cos());
        let xk = [0.3, -0.2, 0.5];
        let lin = [1.0, -2.0, 0.5];
        let mut d = BlockSub::new(&block_problem(h.clone(), a.clone(), ProxOracle::Zero), 0, 1.5, false).unwrap();
        let mut out_d = [0.0; 3];
        d.solve(&ProxOracle::Zero, &xk, &lin, 0.7, 500, &mut out_d).unwrap();
        // a huge box is inactive, so the inner loop must find the same point
        let big = ProxOracle::box_uniform(-1e6, 1e6);
        let mut f = BlockSub::new(&block_problem(h, a, big.clone()), 0, 1.5, false).unwrap();
        let mut out_f = [0.0; 3];
        f.solve(&big, &xk, &lin, 0.7, 500, &mut out_f).unwrap();
        for k in 0..3 {
            assert!((out_d[k] - out_f[k]).abs() < 1e-8, "{out_d:?} vs {out_f:?}");
        }
    }

    #[test]
    fn inner_cap_is_reported() {
        let h = DenseMatrix::from_fn(6, 6, |i, j| if i == j { 10f64.powi(i as i32 - 3) } else { 0.1 });
        let p = block_problem(h, DenseMatrix::zeros(1, 6), ProxOracle::NonnegIndicator);
        let mut s = BlockSub::new(&p, 0, 1.0, false).unwrap();
        let mut out = [0.0; 6];
        let err = s.solve(&ProxOracle::NonnegIndicator, &[1.0; 6], &[-1.0; 6], 1e-9, 2, &mut out);
        assert!(matches!(err, Err(Error::SubproblemFailed(_))));
    }

    #[test]
    fn zero_curvature_is_an_error() {
        let p = block_problem(DenseMatrix::zeros(0, 2), DenseMatrix::zeros(1, 2), ProxOracle::Zero);
        let mut s = BlockSub::new(&p, 0, 1.0, true).unwrap();
        let mut out = [0.0; 2];
        assert!(s.solve(&ProxOracle::Zero, &[0.0; 2], &[1.0; 2], 0.0, 10, &mut out).is_err());
    }
}
