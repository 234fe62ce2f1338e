use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Result};
use crate::exec::Exec;
use crate::linalg::{operator_norm, vector, BlockMatrix, DenseMatrix, LinearOperator};
use crate::prox::ProxOracle;

/// A point split into per-block vectors.
pub type Blocks = Vec<Vec<f64>>;

/// Where an instance came from. Regenerating with the same metadata
/// reproduces it exactly.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub seed: u64,
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
}

/// `min ½‖Hx‖² + cᵀx + Σ g_i(x_i)  s.t.  Σ A_i x_i = b`.
///
/// The quadratic `Q = HᵀH` is only ever touched through `H`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProblem")]
pub struct BlockProblem {
    h_blocks: Vec<BlockMatrix>,
    a_blocks: Vec<BlockMatrix>,
    b: Vec<f64>,
    g: Vec<ProxOracle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c: Option<Blocks>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<InstanceMeta>,
}

#[derive(Deserialize)]
struct RawProblem {
    h_blocks: Vec<BlockMatrix>,
    a_blocks: Vec<BlockMatrix>,
    b: Vec<f64>,
    g: Vec<ProxOracle>,
    #[serde(default)]
    c: Option<Blocks>,
    #[serde(default)]
    meta: Option<InstanceMeta>,
}

impl TryFrom<RawProblem> for BlockProblem {
    type Error = crate::error::Error;

    fn try_from(r: RawProblem) -> Result<Self> {
        let p = Self { h_blocks: r.h_blocks, a_blocks: r.a_blocks, b: r.b, g: r.g, c: r.c, meta: r.meta };
        p.validate()?;
        Ok(p)
    }
}

impl BlockProblem {
    pub fn new(
        h_blocks: Vec<BlockMatrix>,
        a_blocks: Vec<BlockMatrix>,
        b: Vec<f64>,
        g: Vec<ProxOracle>,
        c: Option<Blocks>,
    ) -> Result<Self> {
        let p = Self { h_blocks, a_blocks, b, g, c, meta: None };
        p.validate()?;
        Ok(p)
    }

    pub fn with_meta(mut self, meta: InstanceMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    /// Re-checks every structural invariant (used after deserializing).
    pub fn validate(&self) -> Result<()> {
        let m = self.a_blocks.len();
        if m == 0 {
            return dim_err("a problem needs at least one block");
        }
        if self.h_blocks.len() != m || self.g.len() != m {
            return dim_err(format!(
                "{} A blocks, {} H blocks, {} oracles",
                m,
                self.h_blocks.len(),
                self.g.len()
            ));
        }
        let p = self.b.len();
        let hr = self.h_blocks[0].nrows();
        for i in 0..m {
            let (a, h) = (&self.a_blocks[i], &self.h_blocks[i]);
            if a.nrows() != p {
                return dim_err(format!("A block {i} has {} rows, b has {p}", a.nrows()));
            }
            if h.nrows() != hr {
                return dim_err(format!("H block {i} has {} rows, expected {hr}", h.nrows()));
            }
            if h.ncols() != a.ncols() {
                return dim_err(format!("block {i}: H has {} cols, A has {}", h.ncols(), a.ncols()));
            }
            if a.ncols() == 0 {
                return dim_err(format!("block {i} is empty"));
            }
            self.g[i].validate(a.ncols())?;
        }
        if let Some(c) = &self.c {
            if c.len() != m || c.iter().zip(&self.a_blocks).any(|(ci, a)| ci.len() != a.ncols()) {
                return dim_err("linear term does not match the block partition");
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.a_blocks.len()
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.a_blocks.iter().map(|a| a.ncols()).collect()
    }

    pub fn block_dim(&self, i: usize) -> usize {
        self.a_blocks[i].ncols()
    }

    /// Total variable dimension.
    pub fn n(&self) -> usize {
        self.block_dims().iter().sum()
    }

    /// Number of constraints.
    pub fn p(&self) -> usize {
        self.b.len()
    }

    /// Row count of `H`.
    pub fn h_rows(&self) -> usize {
        self.h_blocks[0].nrows()
    }

    pub fn h(&self, i: usize) -> &BlockMatrix {
        &self.h_blocks[i]
    }

    pub fn a(&self, i: usize) -> &BlockMatrix {
        &self.a_blocks[i]
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn g(&self, i: usize) -> &ProxOracle {
        &self.g[i]
    }

    pub fn c(&self, i: usize) -> Option<&[f64]> {
        self.c.as_ref().map(|c| c[i].as_slice())
    }

    pub fn meta(&self) -> Option<&InstanceMeta> {
        self.meta.as_ref()
    }

    /// True when `H` has no nonzero entries.
    pub fn has_no_quadratic(&self) -> bool {
        self.h_rows() == 0 || self.h_blocks.iter().all(|h| h.is_zero())
    }

    pub fn zeros(&self) -> Blocks {
        self.block_dims().into_iter().map(|d| vec![0.0; d]).collect()
    }

    pub fn check_point(&self, x: &[Vec<f64>]) -> Result<()> {
        if x.len() != self.m() {
            return dim_err(format!("point has {} blocks, problem has {}", x.len(), self.m()));
        }
        for (i, xi) in x.iter().enumerate() {
            if xi.len() != self.block_dim(i) {
                return dim_err(format!("block {i} has length {}, expected {}", xi.len(), self.block_dim(i)));
            }
        }
        Ok(())
    }

    /// `Hx`
    pub fn h_product(&self, x: &[Vec<f64>], exec: Exec) -> Result<Vec<f64>> {
        self.check_point(x)?;
        Ok(stacked_product(&self.h_blocks, x, self.h_rows(), exec))
    }

    /// `Ax − b`
    pub fn residual(&self, x: &[Vec<f64>], exec: Exec) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let mut r = stacked_product(&self.a_blocks, x, self.p(), exec);
        vector::axpy(-1.0, &self.b, &mut r);
        Ok(r)
    }

    /// `½‖Hx‖² + cᵀx`
    pub fn smooth_part(&self, x: &[Vec<f64>], exec: Exec) -> Result<f64> {
        let hx = self.h_product(x, exec)?;
        Ok(0.5 * vector::norm_sq(&hx) + self.linear_term(x))
    }

    fn linear_term(&self, x: &[Vec<f64>]) -> f64 {
        match &self.c {
            Some(c) => c.iter().zip(x).map(|(ci, xi)| vector::dot(ci, xi)).sum(),
            None => 0.0,
        }
    }

    /// `F(x) = ½‖Hx‖² + cᵀx + Σ g_i(x_i)`; `+inf` on indicator violation.
    pub fn eval_objective(&self, x: &[Vec<f64>]) -> Result<f64> {
        self.eval_objective_with(x, Exec::default())
    }

    pub fn eval_objective_with(&self, x: &[Vec<f64>], exec: Exec) -> Result<f64> {
        let smooth = self.smooth_part(x, exec)?;
        Ok(smooth + self.g.iter().zip(x).map(|(g, xi)| g.eval(xi)).sum::<f64>())
    }

    /// `‖Ax − b‖`
    pub fn feasibility(&self, x: &[Vec<f64>]) -> Result<f64> {
        Ok(vector::norm(&self.residual(x, Exec::default())?))
    }

    /// `‖H_i‖₂²` for every block.
    pub fn h_norms_sq(&self) -> Vec<f64> {
        self.h_blocks.iter().map(|h| operator_norm(h).powi(2)).collect()
    }

    /// `‖A_i‖₂²` for every block.
    pub fn a_norms_sq(&self) -> Vec<f64> {
        self.a_blocks.iter().map(|a| operator_norm(a).powi(2)).collect()
    }

    /// The full `H` as one dense matrix (small instances only).
    pub fn dense_h(&self) -> DenseMatrix {
        let parts: Vec<DenseMatrix> = self.h_blocks.iter().map(|h| h.to_dense()).collect();
        hstack_all(&parts, self.h_rows())
    }

    /// The full `A` as one dense matrix (small instances only).
    pub fn dense_a(&self) -> DenseMatrix {
        let parts: Vec<DenseMatrix> = self.a_blocks.iter().map(|a| a.to_dense()).collect();
        hstack_all(&parts, self.p())
    }

    /// Concatenates per-block vectors.
    pub fn flatten(x: &[Vec<f64>]) -> Vec<f64> {
        x.iter().flatten().copied().collect()
    }

    /// Splits a flat vector along the block partition.
    pub fn split(&self, flat: &[f64]) -> Result<Blocks> {
        if flat.len() != self.n() {
            return dim_err(format!("vector has {} entries, problem has {}", flat.len(), self.n()));
        }
        let mut out = Vec::with_capacity(self.m());
        let mut off = 0;
        for d in self.block_dims() {
            out.push(flat[off..off + d].to_vec());
            off += d;
        }
        Ok(out)
    }
}

fn stacked_product(blocks: &[BlockMatrix], x: &[Vec<f64>], rows: usize, exec: Exec) -> Vec<f64> {
    let mut out = vec![0.0; rows];
    let mut tmp = vec![0.0; rows];
    for (blk, xi) in blocks.iter().zip(x) {
        blk.apply_into(xi, &mut tmp, exec);
        vector::axpy(1.0, &tmp, &mut out);
    }
    out
}

fn hstack_all(parts: &[DenseMatrix], rows: usize) -> DenseMatrix {
    let cols: usize = parts.iter().map(|p| p.cols()).sum();
    let mut out = DenseMatrix::zeros(rows, cols);
    let mut c0 = 0;
    for p in parts {
        out.set_block(0, c0, p);
        c0 += p.cols();
    }
    out
}
