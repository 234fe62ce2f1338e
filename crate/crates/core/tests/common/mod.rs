#![allow(dead_code)]

use hybcu::linalg::{DenseMatrix, LinearOperator, Lu};
use hybcu::mixing::MixingPlan;
use hybcu::model::BlockProblem;
use hybcu::prox::ProxOracle;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `(Ax̂ − b, Hx̂)` with `x̂_j = w_ij x_j^k + (1 − w_ij) x_j^{k+1}` for `j < i`
/// and `x̂_j = x_j^k` otherwise, built from the dense matrices.
pub fn dense_mixed(
    prob: &BlockProblem,
    plan: &MixingPlan,
    x_prev: &[Vec<f64>],
    x_new: &[Vec<f64>],
    i: usize,
) -> (Vec<f64>, Vec<f64>) {
    let mut hat = Vec::new();
    for j in 0..prob.m() {
        let w = if j < i { plan.w.get(i, j) } else { 1.0 };
        for k in 0..x_prev[j].len() {
            hat.push(w * x_prev[j][k] + (1.0 - w) * x_new[j][k]);
        }
    }
    let mut a = prob.dense_a().matvec(&hat);
    for (v, b) in a.iter_mut().zip(prob.b()) {
        *v -= b;
    }
    (a, prob.dense_h().matvec(&hat))
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn blocks_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| max_diff(x, y)).fold(0.0, f64::max)
}

/// A strictly convex instance with `g = 0` on every block.
pub fn strongly_convex(n_per: usize, m: usize, p: usize, rng: &mut ChaCha8Rng) -> BlockProblem {
    let n = n_per * m;
    let h = DenseMatrix::from_fn(n + 3, n, |_, _| rng.random_range(-1.0..1.0));
    let a = DenseMatrix::from_fn(p, n, |_, _| rng.random_range(-1.0..1.0));
    let b = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
    let c = (0..m).map(|_| (0..n_per).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    BlockProblem::new(
        (0..m).map(|i| h.col_slice(i * n_per, n_per).into()).collect(),
        (0..m).map(|i| a.col_slice(i * n_per, n_per).into()).collect(),
        b,
        vec![ProxOracle::Zero; m],
        Some(c),
    )
    .unwrap()
}

/// Exact minimizer of `ℓᵀv + ½vᵀKv` over `x^k + v` (g = 0).
pub fn solve_quadratic(k: &DenseMatrix, lin: &[f64]) -> Vec<f64> {
    let neg: Vec<f64> = lin.iter().map(|v| -v).collect();
    Lu::new(k).unwrap().solve(&neg)
}

/// Block Gram `H_iᵀH_i + βA_iᵀA_i` as a dense matrix.
pub fn block_gram(prob: &BlockProblem, i: usize, beta: f64) -> DenseMatrix {
    let h = prob.h(i).to_dense();
    let a = prob.a(i).to_dense();
    h.gram().add(&a.gram().scaled(beta)).unwrap()
}

/// `A_iᵀv`
pub fn at(prob: &BlockProblem, i: usize, v: &[f64]) -> Vec<f64> {
    prob.a(i).apply_t(v)
}

/// `H_iᵀv`
pub fn ht(prob: &BlockProblem, i: usize, v: &[f64]) -> Vec<f64> {
    prob.h(i).apply_t(v)
}
