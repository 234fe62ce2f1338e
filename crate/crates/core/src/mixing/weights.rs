use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sym_eig, DenseMatrix};
use crate::model::BlockProblem;

use super::plan::MixingPlan;

/// Largest total dimension [`certify_p_condition`] will materialize.
pub const CERTIFY_MAX_DIM: usize = 2000;

/// Tolerance on the minimum eigenvalue in [`certify_p_condition`].
pub const CERTIFY_TOL: f64 = 1e-8;

/// `P_i = (1 − D_i)(H_iᵀH_i + βA_iᵀA_i) + scalar·I`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockWeight {
    pub linearized: bool,
    pub h_norm_sq: f64,
    pub a_norm_sq: f64,
    /// Multiple of the identity; `d(‖H_i‖² + β‖A_i‖²)` unless set explicitly.
    pub scalar: f64,
}

/// Symbolic proximal weights for every block. Nothing is materialized
/// unless asked for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProxWeights {
    pub beta: f64,
    pub d: f64,
    pub blocks: Vec<BlockWeight>,
    /// Scalars were given directly and do not follow `d`.
    pub explicit: bool,
}

/// Proximal weights for a plan at proximal scalar `d`.
pub fn build_p(prob: &BlockProblem, plan: &MixingPlan, beta: f64, d: f64) -> Result<ProxWeights> {
    if plan.m != prob.m() {
        return Err(Error::Dimension(format!("plan has {} blocks, problem has {}", plan.m, prob.m())));
    }
    ProxWeights::from_norms(&prob.h_norms_sq(), &prob.a_norms_sq(), &plan.d, beta, d)
}

impl ProxWeights {
    pub fn from_norms(h_norms_sq: &[f64], a_norms_sq: &[f64], flags: &[bool], beta: f64, d: f64) -> Result<Self> {
        if !(beta > 0.0) || !(d >= 0.0) || !d.is_finite() {
            return Err(Error::InvalidParameter(format!("need beta > 0 and d ≥ 0, got beta = {beta}, d = {d}")));
        }
        let blocks = flags
            .iter()
            .zip(h_norms_sq.iter().zip(a_norms_sq))
            .map(|(&linearized, (&h, &a))| BlockWeight {
                linearized,
                h_norm_sq: h,
                a_norm_sq: a,
                scalar: d * (h + beta * a),
            })
            .collect();
        Ok(Self { beta, d, blocks, explicit: false })
    }

    /// Linearized blocks with `P_i = scalars[i]·I`.
    pub fn explicit(prob: &BlockProblem, beta: f64, scalars: &[f64]) -> Result<Self> {
        if scalars.len() != prob.m() || scalars.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::InvalidParameter("explicit weights need one positive scalar per block".into()));
        }
        let (h, a) = (prob.h_norms_sq(), prob.a_norms_sq());
        let blocks = scalars
            .iter()
            .enumerate()
            .map(|(i, &s)| BlockWeight { linearized: true, h_norm_sq: h[i], a_norm_sq: a[i], scalar: s })
            .collect();
        Ok(Self { beta, d: f64::NAN, blocks, explicit: true })
    }

    /// Same blocks at a new `d` (no effect on explicit weights).
    pub fn set_d(&mut self, d: f64) {
        if self.explicit {
            return;
        }
        self.d = d;
        for b in &mut self.blocks {
            b.scalar = d * (b.h_norm_sq + self.beta * b.a_norm_sq);
        }
    }

    /// `‖v‖²_{P_i}` from the pieces `‖H_i v‖²`, `‖A_i v‖²` and `‖v‖²`.
    pub fn quad_form(&self, i: usize, hv_sq: f64, av_sq: f64, v_sq: f64) -> f64 {
        let b = &self.blocks[i];
        let coupled = if b.linearized { 0.0 } else { hv_sq + self.beta * av_sq };
        coupled + b.scalar * v_sq
    }

    /// `P_i` as a dense matrix.
    pub fn dense_block(&self, i: usize, prob: &BlockProblem) -> DenseMatrix {
        let b = &self.blocks[i];
        let n = prob.block_dim(i);
        let mut p = DenseMatrix::from_diag(&vec![b.scalar; n]);
        if !b.linearized {
            let h = prob.h(i).to_dense();
            let a = prob.a(i).to_dense();
            let g = h.gram().add(&a.gram().scaled(self.beta)).expect("same shape");
            p = p.add(&g).expect("same shape");
        }
        p
    }
}

/// Result of [`certify_p_condition`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub ok: bool,
    pub min_eig: f64,
}

/// Smallest eigenvalue of
/// `P̂ = P − D_Hᵀ(M ⊗ I)D_H − βD_Aᵀ(M ⊗ I)D_A` with `M = W − euᵀ + αuuᵀ`,
/// assembled block by block.
pub fn certify_p_condition(prob: &BlockProblem, plan: &MixingPlan, beta: f64, d: f64) -> Result<Certificate> {
    let n = prob.n();
    if n > CERTIFY_MAX_DIM {
        return Err(Error::TooLarge(format!("certification materializes {n}x{n}; limit is {CERTIFY_MAX_DIM}")));
    }
    let coupling = plan.coupling_matrix()?;
    let weights = build_p(prob, plan, beta, d)?;
    let m = prob.m();
    let dims = prob.block_dims();
    let offs: Vec<usize> = dims.iter().scan(0, |acc, &d| {
        let o = *acc;
        *acc += d;
        Some(o)
    }).collect();
    let hs: Vec<DenseMatrix> = (0..m).map(|i| prob.h(i).to_dense()).collect();
    let as_: Vec<DenseMatrix> = (0..m).map(|i| prob.a(i).to_dense()).collect();

    let mut phat = DenseMatrix::zeros(n, n);
    for i in 0..m {
        for j in 0..m {
            let hij = hs[i].transpose().matmul(&hs[j])?;
            let aij = as_[i].transpose().matmul(&as_[j])?;
            let mut blk = hij.add(&aij.scaled(beta))?.scaled(-coupling.get(i, j));
            if i == j {
                blk = blk.add(&weights.dense_block(i, prob))?;
            }
            phat.set_block(offs[i], offs[j], &blk);
        }
    }
    // symmetrize away rounding from the two products
    let sym = DenseMatrix::from_fn(n, n, |r, c| 0.5 * (phat.get(r, c) + phat.get(c, r)));
    let min_eig = sym_eig(&sym)?.min();
    Ok(Certificate { ok: min_eig >= -CERTIFY_TOL, min_eig })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::BlockMatrix;
    use crate::model::gen_qp;
    use crate::prox::ProxOracle;

    #[test]
    fn linearized_block_is_scaled_identity() {
        let q = gen_qp(3, 6, 2, 0).unwrap();
        let plan = MixingPlan::jacobi(vec![true, true]).unwrap();
        let w = build_p(&q, &plan, 0.5, 2.0).unwrap();
        let (h, a) = (q.h_norms_sq(), q.a_norms_sq());
        let dense = w.dense_block(0, &q);
        assert_eq!(dense, DenseMatrix::from_diag(&vec![2.0 * (h[0] + 0.5 * a[0]); 3]));
    }

    #[test]
    fn unlinearized_block_without_h() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
        let prob = BlockProblem::new(
            vec![BlockMatrix::empty(0, 2)],
            vec![a.clone().into()],
            vec![0.0, 0.0],
            vec![ProxOracle::Zero],
            None,
        )
        .unwrap();
        let plan = MixingPlan::from_u(vec![1.0], vec![false], 1.0).unwrap();
        let (beta, d) = (0.3, 1.5);
        let w = build_p(&prob, &plan, beta, d).unwrap();
        let an = crate::linalg::spectral_norm(&a).powi(2);
        let want = a.gram().scaled(beta).add(&DenseMatrix::from_diag(&[d * beta * an; 2])).unwrap();
        assert!(w.dense_block(0, &prob).sub(&want).unwrap().max_abs() < 1e-10);
        // single block: P̂ = P − (1 − 1 + 1)(βAᵀA) ⪰ 0
        assert!(certify_p_condition(&prob, &plan, beta, 0.0).unwrap().ok);
    }

    #[test]
    fn zero_d_jacobi_fails() {
        let q = gen_qp(4, 8, 2, 5).unwrap();
        let plan = MixingPlan::jacobi(vec![true, true]).unwrap();
        let c = certify_p_condition(&q, &plan, 1.0, 0.0).unwrap();
        assert!(!c.ok && c.min_eig < 0.0);
        let c = certify_p_condition(&q, &plan, 1.0, plan.d_max).unwrap();
        assert!(c.ok, "{c:?}");
    }

    #[test]
    fn size_guard() {
        let q = gen_qp(10, 2010, 10, 0).unwrap();
        let plan = MixingPlan::jacobi(vec![true; 10]).unwrap();
        assert!(matches!(certify_p_condition(&q, &plan, 1.0, 1.0), Err(Error::TooLarge(_))));
    }
}
