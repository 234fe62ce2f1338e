use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::json;

use crate::error::{Error, Result};
use crate::linalg::{BlockMatrix, DenseMatrix};
use crate::prox::ProxOracle;

use super::problem::{BlockProblem, Blocks, InstanceMeta};

/// Nonnegative QP `min ½‖Hx‖² + cᵀx  s.t.  [B, I]x = b, x ≥ 0`, split into
/// `m` equal blocks.
///
/// `H` has `n − 10` rows (at least one), so `Q = HᵀH` is singular. Entries
/// of `H`, `c`, `B` are standard normal and `b` is uniform on `[0, 1]`,
/// which makes `x = (0, b)` feasible.
pub fn gen_qp(p: usize, n: usize, m: usize, seed: u64) -> Result<BlockProblem> {
    if m == 0 || n == 0 || n % m != 0 {
        return Err(Error::InvalidParameter(format!("n = {n} must be a positive multiple of m = {m}")));
    }
    if p == 0 || p >= n {
        return Err(Error::InvalidParameter(format!("need 0 < p < n, got p = {p}, n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h_rows = n.saturating_sub(10).max(1);
    let h = DenseMatrix::from_fn(h_rows, n, |_, _| rng.sample(StandardNormal));
    let c: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let nb = n - p;
    let a = DenseMatrix::from_fn(p, n, |i, j| {
        if j < nb {
            rng.sample(StandardNormal)
        } else if j - nb == i {
            1.0
        } else {
            0.0
        }
    });
    let b: Vec<f64> = (0..p).map(|_| rng.random_range(0.0..1.0)).collect();

    let bs = n / m;
    let h_blocks = (0..m).map(|i| BlockMatrix::Dense(h.col_slice(i * bs, bs))).collect();
    let a_blocks = (0..m).map(|i| BlockMatrix::Dense(a.col_slice(i * bs, bs))).collect();
    let c_blocks = (0..m).map(|i| c[i * bs..(i + 1) * bs].to_vec()).collect();
    let meta = InstanceMeta {
        seed,
        name: "qp".into(),
        params: [("p", json!(p)), ("n", json!(n)), ("m", json!(m))]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
    };
    Ok(BlockProblem::new(h_blocks, a_blocks, b, vec![ProxOracle::NonnegIndicator; m], Some(c_blocks))?
        .with_meta(meta))
}

/// A nonnegative QP with a known KKT pair.
#[derive(Clone, Debug)]
pub struct PlantedQp {
    pub problem: BlockProblem,
    pub x_star: Blocks,
    pub lambda_star: Vec<f64>,
}

/// Same `H` and `A` as [`gen_qp`], with `c` and `b` chosen so that a drawn
/// `(x*, λ*)` is a KKT pair: half of `x*` sits on the bound with a positive
/// reduced cost, the rest lies in `[0.5, 1.5]`.
pub fn gen_planted_qp(p: usize, n: usize, m: usize, seed: u64) -> Result<PlantedQp> {
    let base = gen_qp(p, n, m, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let h = base.dense_h();
    let a = base.dense_a();
    let mut x = vec![0.0; n];
    let mut s = vec![0.0; n];
    for k in 0..n {
        if rng.random_bool(0.5) {
            x[k] = rng.random_range(0.5..1.5);
        } else {
            s[k] = rng.random_range(0.1..1.0);
        }
    }
    let lambda: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
    // stationarity: HᵀHx* + c − Aᵀλ* − s = 0
    let qx = h.tr_matvec(&h.matvec(&x));
    let at_l = a.tr_matvec(&lambda);
    let c: Vec<f64> = (0..n).map(|k| at_l[k] + s[k] - qx[k]).collect();
    let b = a.matvec(&x);

    let bs = n / m;
    let split = |v: &[f64]| -> Blocks { (0..m).map(|i| v[i * bs..(i + 1) * bs].to_vec()).collect() };
    let mut meta = base.meta().cloned().unwrap_or_default();
    meta.name = "planted_qp".into();
    let h_blocks = (0..m).map(|i| base.h(i).clone()).collect();
    let a_blocks = (0..m).map(|i| base.a(i).clone()).collect();
    let problem =
        BlockProblem::new(h_blocks, a_blocks, b, vec![ProxOracle::NonnegIndicator; m], Some(split(&c)))?.with_meta(meta);
    Ok(PlantedQp { problem, x_star: split(&x), lambda_star: lambda })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::LinearOperator;

    #[test]
    fn default_scale_partition() {
        let q = gen_qp(200, 2000, 40, 1).unwrap();
        assert_eq!(q.m(), 40);
        assert!(q.block_dims().iter().all(|&d| d == 50));
        assert_eq!(q.h_rows(), 1990);
    }

    #[test]
    fn identity_tail() {
        let q = gen_qp(4, 8, 2, 3).unwrap();
        let a = q.dense_a();
        assert_eq!((a.rows(), a.cols()), (4, 8));
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(a.get(i, 4 + j), if i == j { 1.0 } else { 0.0 });
            }
        }
        assert_eq!(q.a(1).ncols(), 4);
    }

    #[test]
    fn witness_is_feasible() {
        for seed in 0..5 {
            let q = gen_qp(6, 12, 3, seed).unwrap();
            assert!(q.b().iter().all(|&v| v >= 0.0));
            let mut flat = vec![0.0; 12];
            flat[6..].copy_from_slice(q.b());
            let x = q.split(&flat).unwrap();
            assert!(q.feasibility(&x).unwrap() < 1e-14);
            assert!(q.eval_objective(&x).unwrap().is_finite());
        }
    }

    #[test]
    fn deterministic_and_validated() {
        assert_eq!(gen_qp(4, 8, 2, 9).unwrap(), gen_qp(4, 8, 2, 9).unwrap());
        assert_ne!(gen_qp(4, 8, 2, 9).unwrap(), gen_qp(4, 8, 2, 10).unwrap());
        assert!(gen_qp(4, 9, 2, 0).is_err());
        assert!(gen_qp(8, 8, 2, 0).is_err());
    }

    #[test]
    fn planted_pair_is_kkt() {
        let pq = gen_planted_qp(5, 20, 4, 3).unwrap();
        let q = &pq.problem;
        assert!(q.feasibility(&pq.x_star).unwrap() < 1e-12);
        let h = q.dense_h();
        let flat = BlockProblem::flatten(&pq.x_star);
        let grad = h.tr_matvec(&h.matvec(&flat));
        let at_l = q.dense_a().tr_matvec(&pq.lambda_star);
        let c = BlockProblem::flatten(&(0..4).map(|i| q.c(i).unwrap().to_vec()).collect::<Vec<_>>());
        for k in 0..20 {
            let reduced = grad[k] + c[k] - at_l[k];
            if flat[k] > 0.0 {
                assert!(reduced.abs() < 1e-10);
            } else {
                assert!(reduced > 0.0);
            }
        }
    }
}
