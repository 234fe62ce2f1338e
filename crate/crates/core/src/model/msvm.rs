use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::json;

use crate::error::{Error, Result};
use crate::linalg::{BlockMatrix, SparseMatrix};
use crate::prox::ProxOracle;

use super::problem::{BlockProblem, InstanceMeta};

const CLASSES: usize = 3;

/// A three-class MSVM instance.
#[derive(Clone, Debug)]
pub struct MsvmInstance {
    pub problem: BlockProblem,
    /// Samples, one row of length `p` per sample.
    pub features: Vec<Vec<f64>>,
    /// Class of each sample, `0..3`.
    pub labels: Vec<usize>,
}

/// First feature of class `j`'s window. On `[start, start + s)` the class
/// mean is one and the covariance is `σE + (1 − σ)I`; elsewhere the mean is
/// zero and the covariance is the identity.
fn class_window(j: usize, s: usize) -> usize {
    match j {
        0 => 0,
        1 => s / 2,
        _ => s,
    }
}

/// Draws one sample of class `j`.
fn draw(j: usize, p: usize, s: usize, sigma: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let start = class_window(j, s);
    let shared: f64 = rng.sample(StandardNormal);
    (0..p)
        .map(|k| {
            let z: f64 = rng.sample(StandardNormal);
            if (start..start + s).contains(&k) {
                1.0 + sigma.sqrt() * shared + (1.0 - sigma).sqrt() * z
            } else {
                z
            }
        })
        .collect()
}

/// `min (1/n) Σ_i Σ_{j ≠ b_i} [Y_ij]₊ + μ‖X‖₁  s.t.  AᵀX − Y + 1 = 0, Xe = 0`
/// with blocks `(x₁, x₂, x₃, Y)`. `Y` is stored class-major: entry
/// `(i, j)` sits at `j·n + i`.
pub fn gen_msvm(p: usize, n_per_class: usize, s: usize, sigma: f64, mu: f64, seed: u64) -> Result<MsvmInstance> {
    if s == 0 || s % 2 != 0 {
        return Err(Error::InvalidParameter(format!("s = {s} must be positive and even")));
    }
    if p < 2 * s {
        return Err(Error::InvalidParameter(format!("need p ≥ 2s, got p = {p}, s = {s}")));
    }
    if !(0.0..=1.0).contains(&sigma) || n_per_class == 0 || !(mu >= 0.0) {
        return Err(Error::InvalidParameter("need σ in [0, 1], samples per class > 0, μ ≥ 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = CLASSES * n_per_class;
    let mut features = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for j in 0..CLASSES {
        for _ in 0..n_per_class {
            features.push(draw(j, p, s, sigma, &mut rng));
            labels.push(j);
        }
    }

    let hinge_rows = n * CLASSES;
    let rows = hinge_rows + p;
    let mut a_blocks = Vec::with_capacity(CLASSES + 1);
    for j in 0..CLASSES {
        let mut trip = Vec::with_capacity(n * p + p);
        for (i, a) in features.iter().enumerate() {
            trip.extend(a.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(k, &v)| (j * n + i, k, v)));
        }
        trip.extend((0..p).map(|k| (hinge_rows + k, k, 1.0)));
        a_blocks.push(BlockMatrix::Sparse(SparseMatrix::from_triplets(rows, p, trip)?));
    }
    let y_trip = (0..hinge_rows).map(|r| (r, r, -1.0)).collect();
    a_blocks.push(BlockMatrix::Sparse(SparseMatrix::from_triplets(rows, hinge_rows, y_trip)?));

    let mut b = vec![-1.0; rows];
    b[hinge_rows..].iter_mut().for_each(|v| *v = 0.0);
    let weights = (0..hinge_rows)
        .map(|r| if labels[r % n] != r / n { 1.0 } else { 0.0 })
        .collect();
    let mut g = vec![ProxOracle::l1(mu); CLASSES];
    g.push(ProxOracle::WeightedHinge { weights, scale: 1.0 / n as f64 });
    let h_blocks = vec![
        BlockMatrix::empty(0, p),
        BlockMatrix::empty(0, p),
        BlockMatrix::empty(0, p),
        BlockMatrix::empty(0, hinge_rows),
    ];
    let meta = InstanceMeta {
        seed,
        name: "msvm".into(),
        params: [
            ("p", json!(p)),
            ("n_per_class", json!(n_per_class)),
            ("s", json!(s)),
            ("sigma", json!(sigma)),
            ("mu", json!(mu)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect(),
    };
    let problem = BlockProblem::new(h_blocks, a_blocks, b, g, None)?.with_meta(meta);
    Ok(MsvmInstance { problem, features, labels })
}
