use std::time::Instant;

use serde_json::json;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{vector, LinearOperator};
use crate::mixing::{build_p, MixingPlan, ProxWeights};
use crate::model::{BlockProblem, Blocks};

use super::monitor::AdaptiveSides;
use super::report::{EpochRecord, RunReport, StartupChoice, Status};
use super::schedule::{ProxSchedule, ScheduleMode, Startup};
use super::subproblem::BlockSub;

/// A run stops as diverged once `‖x‖` passes this.
pub const DIVERGENCE_NORM: f64 = 1e12;

/// Epochs between dense recomputations of the cached residuals.
pub const REFRESH_EVERY: usize = 50;

/// Epochs per probe of the grid startup.
pub const GRID_EPOCHS: usize = 20;

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub max_epochs: usize,
    /// Stop once the run is this accurate; see [`run`].
    pub tol: Option<f64>,
    pub f_star: Option<f64>,
    /// Start point; defaults to [`initial_point`].
    pub x0: Option<Blocks>,
    pub exec: Exec,
    pub refresh_every: usize,
    /// Keep every `record_every`-th epoch record (the last one is always kept).
    pub record_every: usize,
    /// Label written into the report.
    pub method: String,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            max_epochs: 100,
            tol: None,
            f_star: None,
            x0: None,
            exec: Exec::default(),
            refresh_every: REFRESH_EVERY,
            record_every: 1,
            method: "jags".into(),
        }
    }
}

/// `prox_{g_i}(0)` per block, which is zero unless an indicator excludes it.
pub fn initial_point(prob: &BlockProblem) -> Result<Blocks> {
    (0..prob.m()).map(|i| prob.g(i).prox(&vec![0.0; prob.block_dim(i)], 1.0)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    pub x: Blocks,
    /// Iterate at the start of the current epoch.
    pub x_prev: Blocks,
    pub lambda: Vec<f64>,
    /// `Σ_{j<i} s_j` and `Σ_{j<i} b_j s_j` for `s_j = A_jΔ_j`.
    pub s1_a: Vec<f64>,
    pub s2_a: Vec<f64>,
    /// The same sums for `H_jΔ_j`.
    pub s1_h: Vec<f64>,
    pub s2_h: Vec<f64>,
    /// `Ax^k − b`
    pub r_a: Vec<f64>,
    /// `Hx^k`
    pub r_h: Vec<f64>,
    pub k: usize,
    pub d_k: f64,
    pub triggers: usize,
    pub ergodic_sum: Blocks,
    pub ergodic_count: usize,
}

impl SolverState {
    fn new(prob: &BlockProblem, x: Blocks, lambda: Vec<f64>, d: f64, exec: Exec) -> Result<Self> {
        prob.check_point(&x)?;
        if lambda.len() != prob.p() {
            return Err(Error::Dimension(format!("multiplier has {} entries, expected {}", lambda.len(), prob.p())));
        }
        let (p, hr) = (prob.p(), prob.h_rows());
        Ok(Self {
            r_a: prob.residual(&x, exec)?,
            r_h: prob.h_product(&x, exec)?,
            x_prev: x.clone(),
            ergodic_sum: prob.zeros(),
            x,
            lambda,
            s1_a: vec![0.0; p],
            s2_a: vec![0.0; p],
            s1_h: vec![0.0; hr],
            s2_h: vec![0.0; hr],
            k: 0,
            d_k: d,
            triggers: 0,
            ergodic_count: 0,
        })
    }

    /// Mean of the iterates produced so far, or the current point before any epoch.
    pub fn ergodic_x(&self) -> Blocks {
        if self.ergodic_count == 0 {
            return self.x.clone();
        }
        let t = self.ergodic_count as f64;
        self.ergodic_sum.iter().map(|b| b.iter().map(|v| v / t).collect()).collect()
    }
}

/// Result of closing an epoch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochOutcome {
    /// Step test at the `d` used during the epoch; `None` without `u`.
    pub sides: Option<AdaptiveSides>,
    pub triggered: bool,
}

#[derive(Clone, Debug, Default)]
struct SweepAcc {
    p_norm: f64,
    corr_a: f64,
    corr_h: f64,
}

/// Hybrid Jacobian/Gauss-Seidel sweeps over one problem.
pub struct Solver<'a> {
    prob: &'a BlockProblem,
    plan: &'a MixingPlan,
    sched: ProxSchedule,
    exec: Exec,
    lead_lag: Option<(Vec<f64>, Vec<f64>)>,
    weights: ProxWeights,
    subs: Vec<BlockSub>,
    state: SolverState,
    next_block: usize,
    parts_a: Vec<Vec<f64>>,
    parts_h: Vec<Vec<f64>>,
    acc: SweepAcc,
    refresh_every: usize,
}

impl<'a> Solver<'a> {
    pub fn new(prob: &'a BlockProblem, plan: &'a MixingPlan, sched: &ProxSchedule, exec: Exec) -> Result<Self> {
        sched.validate()?;
        plan.validate()?;
        if plan.m != prob.m() {
            return Err(Error::Dimension(format!("plan has {} blocks, problem has {}", plan.m, prob.m())));
        }
        if sched.mode == ScheduleMode::Adaptive {
            plan.require_u()?;
            if sched.explicit_weights.is_some() {
                return Err(Error::InvalidParameter("explicit weights do not follow an adaptive d".into()));
            }
        }
        let d = sched.initial_d();
        let weights = match &sched.explicit_weights {
            Some(s) => ProxWeights::explicit(prob, sched.beta, s)?,
            None => build_p(prob, plan, sched.beta, d)?,
        };
        check_linearized(&weights)?;
        let subs = (0..prob.m())
            .map(|i| BlockSub::new(prob, i, sched.beta, weights.blocks[i].linearized))
            .collect::<Result<Vec<_>>>()?;
        let state = SolverState::new(prob, initial_point(prob)?, vec![0.0; prob.p()], d, exec)?;
        Ok(Self {
            prob,
            plan,
            sched: sched.clone(),
            exec,
            lead_lag: plan.lead_lag(),
            weights,
            subs,
            state,
            next_block: 0,
            parts_a: Vec::new(),
            parts_h: Vec::new(),
            acc: SweepAcc::default(),
            refresh_every: REFRESH_EVERY,
        })
    }

    /// Restarts from `(x, λ)` with fresh caches and counters.
    pub fn set_start(&mut self, x: Blocks, lambda: Vec<f64>) -> Result<()> {
        self.state = SolverState::new(self.prob, x, lambda, self.state.d_k, self.exec)?;
        self.clear_sums();
        self.next_block = 0;
        Ok(())
    }

    /// `0` disables the periodic dense refresh.
    pub fn set_refresh_every(&mut self, epochs: usize) {
        self.refresh_every = epochs;
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn weights(&self) -> &ProxWeights {
        &self.weights
    }

    pub fn schedule(&self) -> &ProxSchedule {
        &self.sched
    }

    /// Index of the block the sweep will update next.
    pub fn next_block(&self) -> usize {
        self.next_block
    }

    /// `(Ax̂ − b, Hx̂)` at the mixed point of the next block, from the caches.
    pub fn mixed_products(&self) -> (Vec<f64>, Vec<f64>) {
        let i = self.next_block;
        let st = &self.state;
        let mut a_hat = st.r_a.clone();
        let mut h_hat = st.r_h.clone();
        match &self.lead_lag {
            Some((lead, _)) => {
                for (out, s1, s2) in [(&mut a_hat, &st.s1_a, &st.s2_a), (&mut h_hat, &st.s1_h, &st.s2_h)] {
                    for ((o, a), b) in out.iter_mut().zip(s1).zip(s2) {
                        *o += lead[i] * a - b;
                    }
                }
            }
            None => {
                for j in 0..i {
                    let c = 1.0 - self.plan.w.get(i, j);
                    vector::axpy(c, &self.parts_a[j], &mut a_hat);
                    vector::axpy(c, &self.parts_h[j], &mut h_hat);
                }
            }
        }
        (a_hat, h_hat)
    }

    /// Updates block `i`, which must be the next block of the sweep.
    pub fn step_block(&mut self, i: usize) -> Result<()> {
        if i != self.next_block || i >= self.prob.m() {
            return Err(Error::InvalidParameter(format!("block {i} is out of sweep order (next is {})", self.next_block)));
        }
        if i == 0 {
            self.begin_sweep();
        }
        let prob = self.prob;
        let exec = self.exec;
        let beta = self.sched.beta;
        let (a_hat, h_hat) = self.mixed_products();
        let n_i = prob.block_dim(i);

        // ℓ = H_iᵀĥ + c_i + A_iᵀ(βâ − λ)
        let v: Vec<f64> = a_hat.iter().zip(&self.state.lambda).map(|(a, l)| beta * a - l).collect();
        let mut lin = vec![0.0; n_i];
        prob.a(i).apply_t_into(&v, &mut lin, exec);
        if prob.h_rows() > 0 {
            let mut tmp = vec![0.0; n_i];
            prob.h(i).apply_t_into(&h_hat, &mut tmp, exec);
            vector::axpy(1.0, &tmp, &mut lin);
        }
        if let Some(c) = prob.c(i) {
            vector::axpy(1.0, c, &mut lin);
        }

        let theta = self.weights.blocks[i].scalar;
        let mut new = vec![0.0; n_i];
        self.subs[i].solve(prob.g(i), &self.state.x_prev[i], &lin, theta, self.sched.inner_cap, &mut new)?;

        let delta = vector::sub(&new, &self.state.x_prev[i]);
        let mut s_a = vec![0.0; prob.p()];
        prob.a(i).apply_into(&delta, &mut s_a, exec);
        let mut s_h = vec![0.0; prob.h_rows()];
        prob.h(i).apply_into(&delta, &mut s_h, exec);

        let (sa_sq, sh_sq) = (vector::norm_sq(&s_a), vector::norm_sq(&s_h));
        self.acc.p_norm += self.weights.quad_form(i, sh_sq, sa_sq, vector::norm_sq(&delta));
        let st = &mut self.state;
        if let Some(u) = &self.plan.u {
            self.acc.corr_a += u[i] * (sa_sq + 2.0 * vector::dot(&s_a, &st.s1_a));
            self.acc.corr_h += u[i] * (sh_sq + 2.0 * vector::dot(&s_h, &st.s1_h));
        }
        let lag = self.lead_lag.as_ref().map_or(0.0, |(_, b)| b[i]);
        vector::axpy(1.0, &s_a, &mut st.s1_a);
        vector::axpy(lag, &s_a, &mut st.s2_a);
        vector::axpy(1.0, &s_h, &mut st.s1_h);
        vector::axpy(lag, &s_h, &mut st.s2_h);
        if self.lead_lag.is_none() {
            self.parts_a.push(s_a);
            self.parts_h.push(s_h);
        }
        st.x[i] = new;
        self.next_block += 1;
        Ok(())
    }

    fn begin_sweep(&mut self) {
        let st = &mut self.state;
        for (p, x) in st.x_prev.iter_mut().zip(&st.x) {
            p.copy_from_slice(x);
        }
    }

    fn clear_sums(&mut self) {
        let st = &mut self.state;
        for v in [&mut st.s1_a, &mut st.s2_a, &mut st.s1_h, &mut st.s2_h] {
            v.fill(0.0);
        }
        self.parts_a.clear();
        self.parts_h.clear();
        self.acc = SweepAcc::default();
    }

    /// Multiplier step, cache update, ergodic sum and adaptive test after a full sweep.
    pub fn finish_epoch(&mut self) -> Result<EpochOutcome> {
        let m = self.prob.m();
        if self.next_block != m {
            return Err(Error::InvalidParameter(format!("sweep stopped at block {} of {m}", self.next_block)));
        }
        let rho = self.sched.rho;
        let st = &mut self.state;
        vector::axpy(1.0, &st.s1_a, &mut st.r_a);
        vector::axpy(1.0, &st.s1_h, &mut st.r_h);
        if rho != 0.0 {
            vector::axpy(-rho, &st.r_a, &mut st.lambda);
        }
        st.k += 1;
        if self.refresh_every > 0 && st.k % self.refresh_every == 0 {
            st.r_a = self.prob.residual(&st.x, self.exec)?;
            st.r_h = self.prob.h_product(&st.x, self.exec)?;
        }
        for (acc, x) in st.ergodic_sum.iter_mut().zip(&st.x) {
            vector::axpy(1.0, x, acc);
        }
        st.ergodic_count += 1;

        let sides = self.plan.u.as_ref().map(|_| {
            let alpha = self.plan.alpha;
            let rhs_h = vector::norm_sq(&st.s1_h) - self.acc.corr_h + alpha * vector::norm_sq(&st.s2_h);
            let rhs_a = vector::norm_sq(&st.s1_a) - self.acc.corr_a + alpha * vector::norm_sq(&st.s2_a);
            AdaptiveSides { lhs: self.sched.eta * self.acc.p_norm, rhs: rhs_h + self.weights.beta * rhs_a }
        });
        let mut triggered = false;
        if self.sched.mode == ScheduleMode::Adaptive && sides.is_some_and(|s| s.holds()) {
            if let Some(d) = raised_d(st.d_k, &self.sched) {
                st.d_k = d;
                st.triggers += 1;
                self.weights.set_d(d);
                triggered = true;
            }
        }
        self.clear_sums();
        self.next_block = 0;
        Ok(EpochOutcome { sides, triggered })
    }

    pub fn step_epoch(&mut self) -> Result<EpochOutcome> {
        for i in self.next_block..self.prob.m() {
            self.step_block(i)?;
        }
        self.finish_epoch()
    }

    pub fn diverged(&self) -> bool {
        is_diverged(&self.state.x, &self.state.lambda)
    }

    pub fn record(&self, epoch: usize, f_star: Option<f64>, seconds: f64) -> EpochRecord {
        let st = &self.state;
        make_record(self.prob, &st.x, &st.r_a, &st.r_h, epoch, f_star, st.d_k, st.triggers, seconds)
    }
}

fn check_linearized(weights: &ProxWeights) -> Result<()> {
    for (i, b) in weights.blocks.iter().enumerate() {
        if b.linearized && !(b.scalar > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "linearized block {i} needs a positive proximal weight (got {})",
                b.scalar
            )));
        }
    }
    Ok(())
}

/// Next `d` after a trigger, or `None` when `d` cannot grow.
pub(crate) fn raised_d(d: f64, sched: &ProxSchedule) -> Option<f64> {
    if d >= sched.d_max || sched.d_inc <= 0.0 {
        return None;
    }
    let next = d + sched.d_inc;
    // snap so that float drift cannot cost an extra trigger
    if next >= sched.d_max - 1e-12 * sched.d_max.max(1.0) {
        Some(sched.d_max)
    } else {
        Some(next)
    }
}

pub(crate) fn is_diverged(x: &[Vec<f64>], lambda: &[f64]) -> bool {
    let mut sq = 0.0;
    for v in x.iter().flatten() {
        if !v.is_finite() {
            return true;
        }
        sq += v * v;
    }
    lambda.iter().any(|v| !v.is_finite()) || sq.sqrt() > DIVERGENCE_NORM
}

/// Objective from the cached `Hx` plus `cᵀx + Σ g_i(x_i)`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn make_record(
    prob: &BlockProblem,
    x: &[Vec<f64>],
    r_a: &[f64],
    r_h: &[f64],
    epoch: usize,
    f_star: Option<f64>,
    d_k: f64,
    triggers: usize,
    seconds: f64,
) -> EpochRecord {
    let mut objective = 0.5 * vector::norm_sq(r_h);
    for (i, xi) in x.iter().enumerate() {
        if let Some(c) = prob.c(i) {
            objective += vector::dot(c, xi);
        }
        objective += prob.g(i).eval(xi);
    }
    EpochRecord {
        epoch,
        objective,
        obj_gap: f_star.map(|f| (objective - f).abs()),
        feasibility: vector::norm(r_a),
        d_k,
        triggers,
        seconds,
    }
}

pub(crate) fn keep_record(epoch: usize, opts: &RunOptions, status: Status) -> bool {
    epoch % opts.record_every.max(1) == 0 || epoch == opts.max_epochs || status != Status::MaxEpochs
}

/// With `F*`: `|F − F*| ≤ tol(1 + |F*|)` and `‖Ax − b‖ ≤ tol`. Without it the
/// objective test is replaced by `‖x^{k+1} − x^k‖ ≤ tol(1 + ‖x^{k+1}‖)`.
pub(crate) fn tolerance_met(rec: &EpochRecord, tol: f64, f_star: Option<f64>, x: &[Vec<f64>], x_prev: &[Vec<f64>]) -> bool {
    if !(rec.feasibility <= tol) {
        return false;
    }
    match f_star {
        Some(f) => (rec.objective - f).abs() <= tol * (1.0 + f.abs()),
        None => {
            let step: f64 = x.iter().zip(x_prev).map(|(a, b)| vector::dist(a, b).powi(2)).sum::<f64>().sqrt();
            let size: f64 = x.iter().map(|a| vector::norm_sq(a)).sum::<f64>().sqrt();
            step <= tol * (1.0 + size)
        }
    }
}

/// Probes `(d1, d_inc)` pairs for [`GRID_EPOCHS`] epochs each and returns
/// the schedule for the real run: the first pair whose step test fails at
/// least once, or `d ≡ d_max` when none does. Pairs with `d1 = 0` are
/// skipped when a block is linearized, and pairs with `d1 > d_max` always.
pub fn grid_startup(
    prob: &BlockProblem,
    plan: &MixingPlan,
    sched: &ProxSchedule,
    x0: Option<&Blocks>,
    exec: Exec,
) -> Result<(ProxSchedule, StartupChoice)> {
    let any_linearized = plan.d.iter().any(|&b| b);
    for d1 in [0.0, 0.5, 1.0] {
        if (d1 == 0.0 && any_linearized) || d1 > sched.d_max {
            continue;
        }
        for d_inc in [0.01, 0.1] {
            let probe = ProxSchedule { d1, d_inc, mode: ScheduleMode::Adaptive, startup: Startup::None, ..sched.clone() };
            let mut solver = Solver::new(prob, plan, &probe, exec)?;
            if let Some(x0) = x0 {
                solver.set_start(x0.clone(), vec![0.0; prob.p()])?;
            }
            let mut always = true;
            for _ in 0..GRID_EPOCHS {
                let out = solver.step_epoch()?;
                if !out.sides.is_some_and(|s| s.holds()) {
                    always = false;
                    break;
                }
            }
            if !always {
                return Ok((probe, StartupChoice::Pair { d1, d_inc }));
            }
        }
    }
    let fixed = ProxSchedule { mode: ScheduleMode::Fixed, startup: Startup::None, ..sched.clone() };
    Ok((fixed, StartupChoice::Fallback))
}

/// Runs hybrid sweeps from `x¹` (or `opts.x0`) and `λ¹ = 0` until
/// `max_epochs`, the tolerance, or divergence.
pub fn run(prob: &BlockProblem, plan: &MixingPlan, sched: &ProxSchedule, opts: &RunOptions) -> Result<RunReport> {
    sched.validate()?;
    let (sched, startup) = if sched.mode == ScheduleMode::Adaptive && sched.startup == Startup::Grid20 {
        let (s, c) = grid_startup(prob, plan, sched, opts.x0.as_ref(), opts.exec)?;
        (s, Some(c))
    } else {
        (sched.clone(), None)
    };
    let mut solver = Solver::new(prob, plan, &sched, opts.exec)?;
    solver.set_refresh_every(opts.refresh_every);
    if let Some(x0) = &opts.x0 {
        solver.set_start(x0.clone(), vec![0.0; prob.p()])?;
    }
    let start = Instant::now();
    let initial = solver.record(0, opts.f_star, 0.0);
    let mut records = Vec::with_capacity(opts.max_epochs);
    let mut status = Status::MaxEpochs;
    for epoch in 1..=opts.max_epochs {
        solver.step_epoch()?;
        let rec = solver.record(epoch, opts.f_star, start.elapsed().as_secs_f64());
        let st = solver.state();
        if solver.diverged() {
            status = Status::Diverged;
        } else if opts.tol.is_some_and(|t| tolerance_met(&rec, t, opts.f_star, &st.x, &st.x_prev)) {
            status = Status::ToleranceMet;
        }
        if keep_record(epoch, opts, status) {
            records.push(rec);
        }
        if status != Status::MaxEpochs {
            break;
        }
    }
    let st = solver.state();
    Ok(RunReport {
        method: opts.method.clone(),
        status,
        initial,
        records,
        f_star: opts.f_star,
        startup,
        x: st.x.clone(),
        lambda: st.lambda.clone(),
        ergodic_x: st.ergodic_x(),
        config: json!({
            "schedule": sched,
            "plan": plan,
            "max_epochs": opts.max_epochs,
            "tol": opts.tol,
            "refresh_every": opts.refresh_every,
            "record_every": opts.record_every,
        }),
        meta: prob.meta().cloned(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{BlockMatrix, DenseMatrix};
    use crate::model::gen_qp;
    use crate::prox::ProxOracle;

    #[test]
    fn jacobi_mixed_point_is_the_cached_residual() {
        let q = gen_qp(6, 12, 3, 1).unwrap();
        let plan = MixingPlan::jacobi(vec![true; 3]).unwrap();
        let mut s = Solver::new(&q, &plan, &ProxSchedule::fixed(1.0, 1.0, 3.0), Exec::Sequential).unwrap();
        s.step_epoch().unwrap();
        let r = s.state().r_a.clone();
        for i in 0..3 {
            assert_eq!(s.mixed_products().0, r);
            s.step_block(i).unwrap();
        }
    }

    #[test]
    fn single_block_is_a_prox_gradient_step() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [0.0, 1.0], [3.0, -1.0]]).unwrap();
        let b = vec![1.0, -1.0, 0.5];
        let prob =
            BlockProblem::new(vec![BlockMatrix::empty(0, 2)], vec![a.clone().into()], b.clone(), vec![ProxOracle::Zero], None)
                .unwrap();
        let plan = MixingPlan::jacobi(vec![true]).unwrap();
        let sched = ProxSchedule::fixed(0.8, 0.5, 1.5);
        let mut s = Solver::new(&prob, &plan, &sched, Exec::Sequential).unwrap();
        let x0 = vec![vec![0.3, -0.7]];
        let lam0 = vec![0.2, 0.1, -0.4];
        s.set_start(x0.clone(), lam0.clone()).unwrap();
        s.step_epoch().unwrap();
        // gradient of (β/2)‖Ax − b‖² − λᵀ(Ax − b) with step 1/θ
        let r = vector::sub(&a.matvec(&x0[0]), &b);
        let v: Vec<f64> = r.iter().zip(&lam0).map(|(r, l)| 0.8 * r - l).collect();
        let grad = a.tr_matvec(&v);
        let theta = s.weights().blocks[0].scalar;
        for k in 0..2 {
            let want = x0[0][k] - grad[k] / theta;
            assert!((s.state().x[0][k] - want).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_zero_weight_on_linearized_blocks() {
        let q = gen_qp(4, 8, 2, 2).unwrap();
        let plan = MixingPlan::jacobi(vec![true; 2]).unwrap();
        assert!(Solver::new(&q, &plan, &ProxSchedule::fixed(1.0, 1.0, 0.0), Exec::Sequential).is_err());
    }

    #[test]
    fn out_of_order_block_is_rejected() {
        let q = gen_qp(4, 8, 2, 2).unwrap();
        let plan = MixingPlan::jacobi(vec![true; 2]).unwrap();
        let mut s = Solver::new(&q, &plan, &ProxSchedule::fixed(1.0, 1.0, 3.0), Exec::Sequential).unwrap();
        assert!(s.step_block(1).is_err());
        assert!(s.finish_epoch().is_err());
    }

    #[test]
    fn raised_d_snaps_to_cap() {
        let s = ProxSchedule::adaptive(1.0, 1.0, 0.0, 0.1, 0.3);
        let mut d = 0.0;
        let mut n = 0;
        while let Some(next) = raised_d(d, &s) {
            d = next;
            n += 1;
        }
        assert_eq!(d, 0.3);
        assert_eq!(n, 3);
    }
}
