use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::linalg::{BlockMatrix, SparseMatrix};
use crate::prox::ProxOracle;

use super::problem::{BlockProblem, InstanceMeta};

/// Which matrix norm penalizes the low-rank block.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum YNorm {
    #[default]
    Nuclear,
    Spectral,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcpParams {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    /// Fraction of entries carrying a sparse outlier.
    pub sparsity: f64,
    /// Fraction of each column that is observed.
    pub sample_frac: f64,
    /// Weight of `‖X‖₁`; defaults to `1/√max(rows, cols)`.
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default)]
    pub y_norm: YNorm,
}

impl PcpParams {
    pub fn new(rows: usize, cols: usize, rank: usize, sparsity: f64, sample_frac: f64) -> Self {
        Self { rows, cols, rank, sparsity, sample_frac, mu: None, y_norm: YNorm::Nuclear }
    }

    pub fn mu(&self) -> f64 {
        self.mu.unwrap_or(1.0 / (self.rows.max(self.cols) as f64).sqrt())
    }
}

/// A compressive PCP instance with the data it was built from.
#[derive(Clone, Debug)]
pub struct PcpInstance {
    pub problem: BlockProblem,
    /// `M = L + S`, column-major.
    pub matrix: Vec<f64>,
    pub low_rank: Vec<f64>,
    pub sparse: Vec<f64>,
    /// Observed positions as column-major linear indices, ascending.
    pub omega: Vec<usize>,
}

/// Synthetic low-rank plus sparse matrix, observed on a uniform random
/// subset of each column, as the three-block problem
/// `min μ‖X‖₁ + ‖Y‖  s.t.  X + Y − Z = 0,  P_Ω(Z) = b`.
pub fn gen_pcp(params: &PcpParams, seed: u64) -> Result<PcpInstance> {
    let PcpParams { rows, cols, rank, sparsity, sample_frac, .. } = *params;
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidParameter("matrix must be nonempty".into()));
    }
    if rank >= rows.min(cols) {
        return Err(Error::InvalidParameter(format!("rank {rank} must be below min(rows, cols)")));
    }
    if !(0.0..=1.0).contains(&sparsity) {
        return Err(Error::InvalidParameter(format!("sparsity {sparsity} outside [0, 1]")));
    }
    check_frac(sample_frac)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: Vec<f64> = (0..rows * rank).map(|_| rng.sample(StandardNormal)).collect();
    let v: Vec<f64> = (0..cols * rank).map(|_| rng.sample(StandardNormal)).collect();
    let mut low_rank = vec![0.0; rows * cols];
    for j in 0..cols {
        for i in 0..rows {
            low_rank[j * rows + i] = (0..rank).map(|k| u[i * rank + k] * v[j * rank + k]).sum();
        }
    }
    let spread = (rank.max(1) as f64).sqrt();
    let sparse: Vec<f64> = (0..rows * cols)
        .map(|_| {
            if rng.random_bool(sparsity) {
                spread * rng.sample::<f64, _>(StandardNormal)
            } else {
                0.0
            }
        })
        .collect();
    let matrix: Vec<f64> = low_rank.iter().zip(&sparse).map(|(l, s)| l + s).collect();
    let omega = sample_omega(rows, cols, sample_frac, &mut rng);

    let meta = InstanceMeta {
        seed,
        name: "pcp".into(),
        params: [
            ("rows", json!(rows)),
            ("cols", json!(cols)),
            ("rank", json!(rank)),
            ("sparsity", json!(sparsity)),
            ("sample_frac", json!(sample_frac)),
            ("mu", json!(params.mu())),
            ("y_norm", json!(params.y_norm)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect(),
    };
    let problem = build_pcp(rows, cols, &matrix, &omega, params.mu(), params.y_norm)?.with_meta(meta);
    Ok(PcpInstance { problem, matrix, low_rank, sparse, omega })
}

fn check_frac(f: f64) -> Result<()> {
    if f > 0.0 && f <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("sample fraction {f} outside (0, 1]")))
    }
}

/// `round(frac·rows)` distinct rows per column (at least one).
pub(crate) fn sample_omega(rows: usize, cols: usize, frac: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let per_col = ((frac * rows as f64).round() as usize).clamp(1, rows);
    let mut omega = Vec::with_capacity(per_col * cols);
    for j in 0..cols {
        let mut idx = sample(rng, rows, per_col).into_vec();
        idx.sort_unstable();
        omega.extend(idx.into_iter().map(|i| j * rows + i));
    }
    omega
}

/// The three-block problem for an observed matrix `m` (column-major).
pub fn build_pcp(
    rows: usize,
    cols: usize,
    m: &[f64],
    omega: &[usize],
    mu: f64,
    y_norm: YNorm,
) -> Result<BlockProblem> {
    let n = rows * cols;
    if m.len() != n {
        return Err(Error::Dimension(format!("matrix data has {} entries, expected {n}", m.len())));
    }
    if omega.iter().any(|&k| k >= n) {
        return Err(Error::Dimension("observed index out of range".into()));
    }
    let q = omega.len();
    let p = n + q;
    let eye = |sign: f64| -> Vec<(usize, usize, f64)> { (0..n).map(|k| (k, k, sign)).collect() };
    let a_x = SparseMatrix::from_triplets(p, n, eye(1.0))?;
    let mut z_trip = eye(-1.0);
    z_trip.extend(omega.iter().enumerate().map(|(r, &k)| (n + r, k, 1.0)));
    let a_z = SparseMatrix::from_triplets(p, n, z_trip)?;
    let mut b = vec![0.0; p];
    for (r, &k) in omega.iter().enumerate() {
        b[n + r] = m[k];
    }
    let y_oracle = match y_norm {
        YNorm::Nuclear => ProxOracle::nuclear(1.0, rows, cols),
        YNorm::Spectral => ProxOracle::spectral(1.0, rows, cols),
    };
    BlockProblem::new(
        vec![BlockMatrix::empty(0, n); 3],
        vec![a_x.clone().into(), a_x.into(), a_z.into()],
        b,
        vec![ProxOracle::l1(mu), y_oracle, ProxOracle::Zero],
        None,
    )
}
