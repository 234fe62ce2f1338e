use std::path::{Path, PathBuf};

use hybcu::mixing::{MixingPlan, Pin, SdpSolution};
use hybcu::model::{gen_msvm, gen_pcp, gen_qp, load_problem, BlockProblem};
use hybcu::solver::divergence::divergence_table;
use hybcu::solver::{run, run_random_bcu, ProxSchedule, RunOptions, RunReport, ScheduleMode};
use hybcu::Exec;

use crate::config::{Experiment, Method, RunConfig};
use crate::CliError;

pub struct MixOutcome {
    pub plan: MixingPlan,
    pub solution: SdpSolution,
    pub path: PathBuf,
}

/// Solves the mixing design for the pattern `d` and writes the plan as JSON.
pub fn cmd_mix(d: Vec<bool>, pins: &[Pin], alpha: f64, output: &Path) -> Result<MixOutcome, CliError> {
    if d.is_empty() {
        return Err(CliError::Config("m must be at least 1".into()));
    }
    let m = d.len();
    for p in pins {
        if p.i >= m || p.j >= p.i {
            return Err(CliError::Config(format!("pin ({}, {}) is not a strict-lower entry of a {m}x{m} W", p.i, p.j)));
        }
    }
    let (mut plan, solution) = MixingPlan::solve(d, pins)?;
    plan.alpha = alpha;
    plan.validate()?;
    write_file(output, serde_json::to_string_pretty(&plan).map_err(hybcu::Error::from)?)?;
    Ok(MixOutcome { plan, solution, path: output.to_path_buf() })
}

pub struct RunOutcome {
    pub f_star: Option<f64>,
    pub reports: Vec<RunReport>,
    /// CSV and JSON files written, in method order.
    pub files: Vec<PathBuf>,
}

/// Generates the instance, runs every requested method and writes one CSV
/// and one JSON summary per method.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    cfg.validate()?;
    let (prob, linearize) = build_instance(cfg)?;
    let exec = if cfg.sequential { Exec::Sequential } else { Exec::Parallel };
    let jags_plan = match &cfg.plan {
        Some(path) => load_plan(path, &linearize)?,
        None if cfg.methods.contains(&Method::Jags) || needs_reference(cfg) => {
            MixingPlan::solve(linearize.clone(), &[])?.0
        }
        None => MixingPlan::jacobi(linearize.clone())?,
    };

    let f_star = match cfg.f_star {
        Some(f) => Some(f),
        None if needs_reference(cfg) => {
            // fixed d = d_max: the convergent regime, whatever the adaptive settings
            let sched = ProxSchedule { mode: ScheduleMode::Fixed, ..cfg.schedule_for(Method::Jags, &jags_plan) };
            let opts = RunOptions {
                max_epochs: cfg.reference_epochs(),
                exec,
                record_every: cfg.reference_epochs().max(1),
                method: "reference".into(),
                ..Default::default()
            };
            Some(run(&prob, &jags_plan, &sched, &opts)?.last().objective)
        }
        None => None,
    };

    let one = |k: usize| -> Result<RunReport, CliError> {
        let method = cfg.methods[k];
        let plan = match method {
            Method::Jags => jags_plan.clone(),
            Method::Jacobi | Method::Random => MixingPlan::jacobi(linearize.clone())?,
            Method::Gs => MixingPlan::gauss_seidel(linearize.clone()),
            Method::Admm => MixingPlan::gauss_seidel(vec![false; prob.m()]),
        };
        let sched = cfg.schedule_for(method, &plan);
        let opts = RunOptions {
            max_epochs: cfg.max_epochs(),
            tol: cfg.tol,
            f_star,
            // the method fan-out already occupies the pool
            exec: if cfg.methods.len() > 1 { Exec::Sequential } else { exec },
            record_every: cfg.record_every,
            method: method.name().into(),
            ..Default::default()
        };
        let report = match method {
            Method::Random => run_random_bcu(&prob, &linearize, &sched, &opts, cfg.seed)?,
            _ => run(&prob, &plan, &sched, &opts)?,
        };
        Ok(report)
    };
    let reports = exec.map(cfg.methods.len(), one).into_iter().collect::<Result<Vec<_>, _>>()?;

    let dir = cfg.output_dir();
    std::fs::create_dir_all(&dir).map_err(hybcu::Error::from)?;
    let mut files = Vec::new();
    for r in &reports {
        let stem = format!("{}_{}", cfg.experiment.name(), r.method);
        let csv = dir.join(format!("{stem}.csv"));
        let json = dir.join(format!("{stem}.json"));
        r.write_csv(&csv, cfg.timing)?;
        r.write_summary(&json, cfg.timing)?;
        files.extend([csv, json]);
    }
    Ok(RunOutcome { f_star, reports, files })
}

fn needs_reference(cfg: &RunConfig) -> bool {
    cfg.f_star.is_none() && cfg.reference_epochs() > 0
}

/// The problem and its default linearization pattern.
pub fn build_instance(cfg: &RunConfig) -> Result<(BlockProblem, Vec<bool>), CliError> {
    Ok(match cfg.experiment {
        Experiment::Qp => {
            let q = &cfg.qp;
            (gen_qp(q.p, q.n, q.m, cfg.seed)?, vec![true; q.m])
        }
        Experiment::Pcp => (gen_pcp(&cfg.pcp, cfg.seed)?.problem, vec![false; 3]),
        Experiment::Msvm => {
            let c = &cfg.msvm;
            (gen_msvm(c.p, c.n_per_class, c.s, c.sigma, c.mu, cfg.seed)?.problem, vec![true; 4])
        }
        Experiment::Custom => {
            let path = cfg.problem.as_ref().expect("validated");
            let prob = load_problem(path)
                .map_err(|e| CliError::Config(format!("cannot load problem {}: {e}", path.display())))?;
            let d = cfg.linearize.clone().unwrap_or_else(|| vec![true; prob.m()]);
            if d.len() != prob.m() {
                return Err(CliError::Config(format!("{} linearization flags for {} blocks", d.len(), prob.m())));
            }
            (prob, d)
        }
    })
}

fn load_plan(path: &Path, linearize: &[bool]) -> Result<MixingPlan, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read plan {}: {e}", path.display())))?;
    let plan: MixingPlan =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("plan {}: {e}", path.display())))?;
    plan.validate().map_err(|e| CliError::Config(format!("plan {}: {e}", path.display())))?;
    if plan.d != linearize {
        return Err(CliError::Config(format!(
            "plan {} has linearization pattern {:?}, the instance needs {:?}",
            path.display(),
            plan.d,
            linearize
        )));
    }
    Ok(plan)
}

/// Largest stable step per `ε`, written as `eps,tau` CSV rows.
pub fn cmd_divergence(
    eps: &[f64],
    tau_start: f64,
    tau_step: f64,
    output: &Path,
    exec: Exec,
) -> Result<Vec<(f64, f64)>, CliError> {
    if eps.is_empty() {
        return Err(CliError::Config("no eps values".into()));
    }
    if let Some(e) = eps.iter().find(|e| !(e.is_finite() && **e != 0.0)) {
        return Err(CliError::Config(format!("eps must be finite and nonzero, got {e}")));
    }
    if !(tau_step > 0.0 && tau_start > 0.0) {
        return Err(CliError::Config(format!("tau_start and tau_step must be positive, got {tau_start}, {tau_step}")));
    }
    let rows = divergence_table(eps, tau_start, tau_step, exec)?;
    let mut csv = String::from("eps,tau\n");
    for (e, t) in &rows {
        csv.push_str(&format!("{e:e},{t:.6e}\n"));
    }
    write_file(output, csv)?;
    Ok(rows)
}

fn write_file(path: &Path, contents: String) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(hybcu::Error::from)?;
    }
    std::fs::write(path, contents).map_err(hybcu::Error::from)?;
    Ok(())
}
