//! Quantities evaluated blockwise from `H_iv_i` and `A_iv_i`: the
//! adaptive step test, the Lyapunov function and the ergodic bound.

use crate::error::{dim_err, Result};
use crate::linalg::{vector, LinearOperator};
use crate::mixing::{MixingPlan, ProxWeights};
use crate::model::BlockProblem;

/// `Σ_ij U_ij⟨s_i, s_j⟩` with `U = W − euᵀ`, using
/// `U_ij = 1 − u_max(i,j)`.
pub fn v_norm_sq(parts: &[Vec<f64>], u: &[f64]) -> f64 {
    let Some(first) = parts.first() else { return 0.0 };
    let mut prefix = vec![0.0; first.len()];
    let mut corr = 0.0;
    for (s, &ui) in parts.iter().zip(u) {
        corr += ui * (vector::norm_sq(s) + 2.0 * vector::dot(s, &prefix));
        vector::axpy(1.0, s, &mut prefix);
    }
    vector::norm_sq(&prefix) - corr
}

/// `Σ_i u_i s_i`
fn weighted_sum(parts: &[Vec<f64>], u: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; parts.first().map_or(0, |p| p.len())];
    for (s, &ui) in parts.iter().zip(u) {
        vector::axpy(ui, s, &mut out);
    }
    out
}

/// Two sides of the step test. `d` is raised when `lhs ≤ rhs`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptiveSides {
    /// `η‖x^{k+1} − x^k‖²_{P^k}`
    pub lhs: f64,
    /// `‖Δy‖²_V + α‖(uᵀ⊗I)Δy‖² + β(‖Δz‖²_V + α‖(uᵀ⊗I)Δz‖²)`
    pub rhs: f64,
}

impl AdaptiveSides {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

fn products(prob: &BlockProblem, delta: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let m = prob.m();
    let ys = (0..m).map(|i| prob.h(i).apply(&delta[i])).collect();
    let zs = (0..m).map(|i| prob.a(i).apply(&delta[i])).collect();
    (ys, zs)
}

fn diff(prob: &BlockProblem, a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    prob.check_point(a)?;
    prob.check_point(b)?;
    Ok(a.iter().zip(b).map(|(x, y)| vector::sub(x, y)).collect())
}

/// `‖v‖²_P` for a per-block vector `v` given its products.
fn p_norm_sq(weights: &ProxWeights, v: &[Vec<f64>], ys: &[Vec<f64>], zs: &[Vec<f64>]) -> f64 {
    (0..v.len())
        .map(|i| weights.quad_form(i, vector::norm_sq(&ys[i]), vector::norm_sq(&zs[i]), vector::norm_sq(&v[i])))
        .sum()
}

/// The step test between consecutive iterates, recomputing every product.
pub fn adaptive_check(
    prob: &BlockProblem,
    plan: &MixingPlan,
    weights: &ProxWeights,
    eta: f64,
    x_before: &[Vec<f64>],
    x_after: &[Vec<f64>],
) -> Result<AdaptiveSides> {
    let u = plan.require_u()?;
    let delta = diff(prob, x_after, x_before)?;
    let (ys, zs) = products(prob, &delta);
    let lhs = eta * p_norm_sq(weights, &delta, &ys, &zs);
    let side = |parts: &[Vec<f64>]| v_norm_sq(parts, u) + plan.alpha * vector::norm_sq(&weighted_sum(parts, u));
    let rhs = side(&ys) + weights.beta * side(&zs);
    Ok(AdaptiveSides { lhs, rhs })
}

/// `(1/2ρ)‖λ − λ*‖² + ½(‖x − x*‖²_P − ‖y − y*‖²_V − β‖z − z*‖²_V)`,
/// nonincreasing along the iterates when `P̂ ⪰ 0`, `α ≥ 1` and `β ≥ ρ`.
#[allow(clippy::too_many_arguments)]
pub fn lyapunov(
    prob: &BlockProblem,
    plan: &MixingPlan,
    weights: &ProxWeights,
    rho: f64,
    x: &[Vec<f64>],
    lambda: &[f64],
    x_star: &[Vec<f64>],
    lambda_star: &[f64],
) -> Result<f64> {
    let u = plan.require_u()?;
    if lambda.len() != prob.p() || lambda_star.len() != prob.p() {
        return dim_err("multiplier length differs from the number of constraints");
    }
    let e = diff(prob, x, x_star)?;
    let (ys, zs) = products(prob, &e);
    let primal = p_norm_sq(weights, &e, &ys, &zs) - v_norm_sq(&ys, u) - weights.beta * v_norm_sq(&zs, u);
    let dual = if rho > 0.0 { vector::dist(lambda, lambda_star).powi(2) / (2.0 * rho) } else { 0.0 };
    Ok(dual + 0.5 * primal)
}

/// `C` such that `|F(x̄^{t+1}) − F*| ≤ C/(2t)` and `‖Ax̄^{t+1} − b‖ ≤ C/(2t)`,
/// from the start `x¹` and a KKT pair.
#[allow(clippy::too_many_arguments)]
pub fn ergodic_constant(
    prob: &BlockProblem,
    plan: &MixingPlan,
    weights: &ProxWeights,
    rho: f64,
    x1: &[Vec<f64>],
    x_star: &[Vec<f64>],
    lambda_star: &[f64],
) -> Result<f64> {
    let u = plan.require_u()?;
    let e = diff(prob, x1, x_star)?;
    let (ys, zs) = products(prob, &e);
    let primal = p_norm_sq(weights, &e, &ys, &zs) - v_norm_sq(&ys, u) - weights.beta * v_norm_sq(&zs, u);
    let l = vector::norm(lambda_star);
    Ok((1.0 + l).powi(2).max(4.0 * l * l) / rho + primal)
}
