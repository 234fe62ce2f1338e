use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::error::{Error, Result};
use crate::linalg::{vector, LinearOperator};
use crate::mixing::ProxWeights;
use crate::model::BlockProblem;

use super::engine::{initial_point, is_diverged, keep_record, make_record, raised_d, tolerance_met, RunOptions};
use super::report::{RunReport, Status};
use super::schedule::{ProxSchedule, ScheduleMode};
use super::subproblem::BlockSub;

/// Randomized baseline: each update picks one block uniformly, minimizes
/// its proximal model at the current iterate, then takes a dual step with
/// `ρ = β/m` (the schedule's `rho` is not used). `m` updates count as one
/// epoch.
///
/// In adaptive mode `d` is raised after an update of a linearized block
/// when `η‖Δ_i‖²_{P_i} ≤ ‖H_iΔ_i‖² + β‖A_iΔ_i‖²`, i.e. when `P_i` looks
/// smaller than the block curvature.
pub fn run_random_bcu(
    prob: &BlockProblem,
    linearized: &[bool],
    sched: &ProxSchedule,
    opts: &RunOptions,
    seed: u64,
) -> Result<RunReport> {
    sched.validate()?;
    let m = prob.m();
    if linearized.len() != m {
        return Err(Error::Dimension(format!("{} linearization flags for {m} blocks", linearized.len())));
    }
    let beta = sched.beta;
    let rho = beta / m as f64;
    let mut d = sched.initial_d();
    let mut weights = match &sched.explicit_weights {
        Some(s) => ProxWeights::explicit(prob, beta, s)?,
        None => ProxWeights::from_norms(&prob.h_norms_sq(), &prob.a_norms_sq(), linearized, beta, d)?,
    };
    for (i, b) in weights.blocks.iter().enumerate() {
        if b.linearized && !(b.scalar > 0.0) {
            return Err(Error::InvalidParameter(format!("linearized block {i} needs a positive proximal weight")));
        }
    }
    let mut subs = (0..m)
        .map(|i| BlockSub::new(prob, i, beta, weights.blocks[i].linearized))
        .collect::<Result<Vec<_>>>()?;

    let exec = opts.exec;
    let mut x = match &opts.x0 {
        Some(x0) => {
            prob.check_point(x0)?;
            x0.clone()
        }
        None => initial_point(prob)?,
    };
    let mut lambda = vec![0.0; prob.p()];
    let mut r_a = prob.residual(&x, exec)?;
    let mut r_h = prob.h_product(&x, exec)?;
    let mut ergodic = prob.zeros();
    let mut triggers = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let start = Instant::now();
    let initial = make_record(prob, &x, &r_a, &r_h, 0, opts.f_star, d, 0, 0.0);
    let mut records = Vec::with_capacity(opts.max_epochs);
    let mut status = Status::MaxEpochs;
    let mut x_prev = x.clone();
    let mut epochs_run = 0;
    for epoch in 1..=opts.max_epochs {
        x_prev.clone_from(&x);
        for _ in 0..m {
            let i = rng.random_range(0..m);
            let n_i = prob.block_dim(i);
            let v: Vec<f64> = r_a.iter().zip(&lambda).map(|(a, l)| beta * a - l).collect();
            let mut lin = vec![0.0; n_i];
            prob.a(i).apply_t_into(&v, &mut lin, exec);
            if prob.h_rows() > 0 {
                let mut tmp = vec![0.0; n_i];
                prob.h(i).apply_t_into(&r_h, &mut tmp, exec);
                vector::axpy(1.0, &tmp, &mut lin);
            }
            if let Some(c) = prob.c(i) {
                vector::axpy(1.0, c, &mut lin);
            }
            let mut new = vec![0.0; n_i];
            subs[i].solve(prob.g(i), &x[i], &lin, weights.blocks[i].scalar, sched.inner_cap, &mut new)?;
            let delta = vector::sub(&new, &x[i]);
            let mut s_a = vec![0.0; prob.p()];
            prob.a(i).apply_into(&delta, &mut s_a, exec);
            let mut s_h = vec![0.0; prob.h_rows()];
            prob.h(i).apply_into(&delta, &mut s_h, exec);
            vector::axpy(1.0, &s_a, &mut r_a);
            vector::axpy(1.0, &s_h, &mut r_h);
            x[i] = new;
            vector::axpy(-rho, &r_a, &mut lambda);

            if sched.mode == ScheduleMode::Adaptive && weights.blocks[i].linearized {
                let (sa, sh) = (vector::norm_sq(&s_a), vector::norm_sq(&s_h));
                let lhs = sched.eta * weights.quad_form(i, sh, sa, vector::norm_sq(&delta));
                let rhs = sh + beta * sa;
                if rhs > 0.0 && lhs <= rhs {
                    if let Some(next) = raised_d(d, sched) {
                        d = next;
                        triggers += 1;
                        weights.set_d(d);
                    }
                }
            }
        }
        if opts.refresh_every > 0 && epoch % opts.refresh_every == 0 {
            r_a = prob.residual(&x, exec)?;
            r_h = prob.h_product(&x, exec)?;
        }
        for (acc, xi) in ergodic.iter_mut().zip(&x) {
            vector::axpy(1.0, xi, acc);
        }
        epochs_run = epoch;
        let rec = make_record(prob, &x, &r_a, &r_h, epoch, opts.f_star, d, triggers, start.elapsed().as_secs_f64());
        if is_diverged(&x, &lambda) {
            status = Status::Diverged;
        } else if opts.tol.is_some_and(|t| tolerance_met(&rec, t, opts.f_star, &x, &x_prev)) {
            status = Status::ToleranceMet;
        }
        if keep_record(epoch, opts, status) {
            records.push(rec);
        }
        if status != Status::MaxEpochs {
            break;
        }
    }
    let t = epochs_run;
    let ergodic_x = if t == 0 {
        x.clone()
    } else {
        ergodic.iter().map(|b| b.iter().map(|v| v / t as f64).collect()).collect()
    };
    Ok(RunReport {
        method: opts.method.clone(),
        status,
        initial,
        records,
        f_star: opts.f_star,
        startup: None,
        x,
        lambda,
        ergodic_x,
        config: json!({
            "schedule": sched,
            "linearized": linearized,
            "rho_used": rho,
            "seed": seed,
            "max_epochs": opts.max_epochs,
            "tol": opts.tol,
            "record_every": opts.record_every,
        }),
        meta: prob.meta().cloned(),
    })
}
