//! Three scalar blocks with nearly parallel columns, where plain
//! Gauss-Seidel updates with a too-large step blow up.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{spectral_radius, DenseMatrix, Lu};
use crate::mixing::MixingPlan;
use crate::model::BlockProblem;
use crate::prox::ProxOracle;

use super::engine::{run, RunOptions};
use super::report::RunReport;
use super::schedule::ProxSchedule;

/// Smallest step the table scan will try before giving up.
pub const TAU_FLOOR: f64 = 1e-8;

/// Columns `A_1, A_2, A_3` of the instance.
pub fn columns(eps: f64) -> [[f64; 3]; 3] {
    [[1.0, 1.0 - eps, 1.0 - eps], [1.0, 1.0, 1.0 - eps], [1.0, 1.0, 1.0]]
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `max_j ‖A_j‖²`
pub fn max_col_norm_sq(eps: f64) -> f64 {
    columns(eps).iter().map(|c| dot3(c, c)).fold(0.0, f64::max)
}

/// `min 0 s.t. A_1x_1 + A_2x_2 + A_3x_3 = 0` as a block problem.
pub fn divergence_instance(eps: f64) -> Result<BlockProblem> {
    let cols = columns(eps);
    let a = cols.iter().map(|c| DenseMatrix::new(3, 1, c.to_vec()).map(Into::into)).collect::<Result<Vec<_>>>()?;
    let h = (0..3).map(|_| crate::linalg::BlockMatrix::empty(0, 1)).collect();
    BlockProblem::new(h, a, vec![0.0; 3], vec![ProxOracle::Zero; 3], None)
}

/// The 6×6 matrix advancing `(x_1, x_2, x_3, λ)` by one Gauss-Seidel
/// linearized sweep with `β = ρ = 1` and `P_i = max_j‖A_j‖²/τ`.
pub fn build_gs_iteration_matrix(eps: f64, tau: f64) -> Result<DenseMatrix> {
    if eps == 0.0 || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!("eps must be nonzero, got {eps}")));
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
    }
    let a = columns(eps);
    let step = tau / max_col_norm_sq(eps);
    let mut left = DenseMatrix::identity(6);
    let mut right = DenseMatrix::identity(6);
    for i in 0..3 {
        for j in 0..3 {
            let g = step * dot3(&a[i], &a[j]);
            if j < i {
                left.set(i, j, g);
            } else {
                right.set(i, j, if i == j { 1.0 - g } else { -g });
            }
        }
        for r in 0..3 {
            right.set(i, 3 + r, step * a[i][r]);
            left.set(3 + r, i, a[i][r]);
        }
    }
    let lu = Lu::new(&left)?;
    Ok(lu.solve_matrix(&right))
}

fn stable(eps: f64, tau: f64) -> Result<bool> {
    Ok(spectral_radius(&build_gs_iteration_matrix(eps, tau)?)? < 1.0)
}

/// Largest `τ = tau_start − k·tau_step` with spectral radius below one.
pub fn largest_stable_tau(eps: f64, tau_start: f64, tau_step: f64) -> Result<f64> {
    if !(tau_step > 0.0) || !(tau_start > 0.0) {
        return Err(Error::InvalidParameter("tau_start and tau_step must be positive".into()));
    }
    let mut k = 0u64;
    loop {
        let tau = tau_start - k as f64 * tau_step;
        if tau < TAU_FLOOR {
            return Err(Error::NoStableStep(TAU_FLOOR));
        }
        if stable(eps, tau)? {
            return Ok(tau);
        }
        k += 1;
    }
}

/// `(ε, largest stable τ)` for each `ε`, scanned independently.
pub fn divergence_table(eps_list: &[f64], tau_start: f64, tau_step: f64, exec: Exec) -> Result<Vec<(f64, f64)>> {
    exec.map(eps_list.len(), |k| largest_stable_tau(eps_list[k], tau_start, tau_step).map(|t| (eps_list[k], t)))
        .into_iter()
        .collect()
}

/// Fully Gauss-Seidel linearized run on the instance from `x = (1, 1, 1)`,
/// `λ = 0`. `opts.x0` and `opts.method` are overridden.
pub fn divergence_demo(eps: f64, tau: f64, opts: &RunOptions) -> Result<RunReport> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
    }
    let prob = divergence_instance(eps)?;
    let plan = MixingPlan::gauss_seidel(vec![true; 3]);
    let opts = RunOptions { x0: Some(vec![vec![1.0]; 3]), method: "gs".into(), ..opts.clone() };
    run(&prob, &plan, &demo_schedule(eps, tau), &opts)
}

/// `β = ρ = 1` with `P_i = max_j‖A_j‖²/τ`.
pub fn demo_schedule(eps: f64, tau: f64) -> ProxSchedule {
    let mut sched = ProxSchedule::fixed(1.0, 1.0, 0.0);
    sched.explicit_weights = Some(vec![max_col_norm_sq(eps) / tau; 3]);
    sched
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector;

    #[test]
    fn zero_is_fixed() {
        let m = build_gs_iteration_matrix(0.1, 0.2).unwrap();
        assert!(m.matvec(&[0.0; 6]).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn matrix_matches_one_sweep() {
        let (eps, tau) = (0.05, 0.3);
        let m = build_gs_iteration_matrix(eps, tau).unwrap();
        let prob = divergence_instance(eps).unwrap();
        let plan = MixingPlan::gauss_seidel(vec![true; 3]);
        let sched = demo_schedule(eps, tau);
        let mut s = super::super::Solver::new(&prob, &plan, &sched, Exec::Sequential).unwrap();
        let z = [0.3, -1.2, 0.8, 0.5, -0.25, 1.0];
        s.set_start(vec![vec![z[0]], vec![z[1]], vec![z[2]]], z[3..].to_vec()).unwrap();
        s.step_epoch().unwrap();
        let st = s.state();
        let got = [st.x[0][0], st.x[1][0], st.x[2][0], st.lambda[0], st.lambda[1], st.lambda[2]];
        assert!(vector::dist(&got, &m.matvec(&z)) < 1e-13);
    }

    #[test]
    fn already_stable_start() {
        assert_eq!(largest_stable_tau(0.1, 0.1, 1e-5).unwrap(), 0.1);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(build_gs_iteration_matrix(0.0, 0.1).is_err());
        assert!(build_gs_iteration_matrix(0.1, 0.0).is_err());
        assert!(largest_stable_tau(0.1, 0.3, 0.0).is_err());
    }
}
