//! Hybrid Jacobian/Gauss-Seidel proximal block coordinate updates.

pub mod divergence;
mod engine;
pub mod monitor;
mod random;
mod report;
mod schedule;
mod subproblem;

pub use engine::{
    grid_startup, initial_point, run, EpochOutcome, RunOptions, Solver, SolverState, DIVERGENCE_NORM,
    GRID_EPOCHS, REFRESH_EVERY,
};
pub use monitor::{adaptive_check, ergodic_constant, lyapunov, v_norm_sq, AdaptiveSides};
pub use random::run_random_bcu;
pub use report::{EpochRecord, RunReport, StartupChoice, Status, CSV_HEADER};
pub use schedule::{ProxSchedule, ScheduleMode, Startup, DEFAULT_INNER_CAP, INNER_TOL};
pub use subproblem::DENSE_BLOCK_LIMIT;
