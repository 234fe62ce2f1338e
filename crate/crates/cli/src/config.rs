//! Run configuration: experiment defaults, JSON loading and flag overrides.

use std::path::{Path, PathBuf};

use hybcu::mixing::MixingPlan;
use hybcu::model::PcpParams;
use hybcu::solver::{ProxSchedule, ScheduleMode, Startup};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "HYBCU_OUTPUT_DIR";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    #[default]
    Qp,
    Pcp,
    Msvm,
    /// A problem loaded from a JSON file.
    Custom,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Qp => "qp",
            Experiment::Pcp => "pcp",
            Experiment::Msvm => "msvm",
            Experiment::Custom => "custom",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Hybrid sweep with the optimized mixing matrix.
    Jags,
    /// All-ones mixing matrix.
    Jacobi,
    /// Upper-triangular mixing matrix; no convergence guarantee.
    Gs,
    /// One uniformly drawn block per update.
    Random,
    /// Gauss-Seidel sweep, no linearization, no proximal term.
    Admm,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Jags => "jags",
            Method::Jacobi => "jacobi",
            Method::Gs => "gs",
            Method::Random => "random",
            Method::Admm => "admm",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QpConfig {
    pub p: usize,
    pub n: usize,
    pub m: usize,
}

impl Default for QpConfig {
    fn default() -> Self {
        Self { p: 200, n: 2000, m: 40 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MsvmConfig {
    pub p: usize,
    pub n_per_class: usize,
    /// Width of each class's mean window.
    pub s: usize,
    pub sigma: f64,
    pub mu: f64,
}

impl Default for MsvmConfig {
    fn default() -> Self {
        Self { p: 200, n_per_class: 100, s: 20, sigma: 0.1, mu: 0.001 }
    }
}

fn default_pcp() -> PcpParams {
    PcpParams::new(400, 100, 5, 0.05, 0.5)
}

/// Schedule fields left unset fall back to the experiment's defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScheduleOverrides {
    pub beta: Option<f64>,
    pub rho: Option<f64>,
    pub d1: Option<f64>,
    pub d_inc: Option<f64>,
    pub d_max: Option<f64>,
    pub eta: Option<f64>,
    pub mode: Option<ScheduleMode>,
    pub startup: Option<Startup>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub methods: Vec<Method>,
    pub seed: u64,
    pub qp: QpConfig,
    #[serde(default = "default_pcp")]
    pub pcp: PcpParams,
    pub msvm: MsvmConfig,
    /// Problem file for the custom experiment.
    pub problem: Option<PathBuf>,
    /// Linearization flags for the custom experiment; all blocks by default.
    pub linearize: Option<Vec<bool>>,
    /// Mixing plan for jags; solved on the fly when absent.
    pub plan: Option<PathBuf>,
    pub schedule: ScheduleOverrides,
    pub max_epochs: Option<usize>,
    pub tol: Option<f64>,
    /// Known optimal value; skips the reference run.
    pub f_star: Option<f64>,
    /// Epochs of the jags reference run that supplies `F*` (0 disables it).
    pub reference_epochs: Option<usize>,
    pub record_every: usize,
    /// Write wall-clock seconds into the reports.
    pub timing: bool,
    /// Required for the gs method.
    pub acknowledge_gs: bool,
    /// Run the data-parallel kernels and the method fan-out sequentially.
    pub sequential: bool,
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::Qp,
            methods: vec![Method::Jags],
            seed: 1,
            qp: QpConfig::default(),
            pcp: default_pcp(),
            msvm: MsvmConfig::default(),
            problem: None,
            linearize: None,
            plan: None,
            schedule: ScheduleOverrides::default(),
            max_epochs: None,
            tol: None,
            f_star: None,
            reference_epochs: None,
            record_every: 1,
            timing: true,
            acknowledge_gs: false,
            sequential: false,
            output_dir: None,
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn max_epochs(&self) -> usize {
        self.max_epochs.unwrap_or(500)
    }

    pub fn reference_epochs(&self) -> usize {
        self.reference_epochs.unwrap_or(match self.experiment {
            Experiment::Qp => 5_000,
            Experiment::Pcp => 10_000,
            Experiment::Msvm => 20_000,
            Experiment::Custom => 0,
        })
    }

    /// Flag, then config file, then `HYBCU_OUTPUT_DIR`, then the working
    /// directory.
    pub fn output_dir(&self) -> PathBuf {
        resolve_output_dir(self.output_dir.as_deref())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.methods.is_empty() {
            return bad("no method selected".into());
        }
        if self.methods.contains(&Method::Gs) && !self.acknowledge_gs {
            return bad("method gs has no convergence guarantee; pass --acknowledge-gs to run it anyway".into());
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1".into());
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("tol must be positive, got {t}"));
            }
        }
        if let Some(f) = self.f_star {
            if !f.is_finite() {
                return bad(format!("f_star must be finite, got {f}"));
            }
        }
        let s = &self.schedule;
        for (name, v, positive) in [
            ("beta", s.beta, true),
            ("rho", s.rho, false),
            ("d1", s.d1, false),
            ("d_inc", s.d_inc, false),
            ("d_max", s.d_max, false),
        ] {
            if let Some(v) = v {
                if !v.is_finite() || v < 0.0 || (positive && v == 0.0) {
                    let need = if positive { "positive" } else { "nonnegative" };
                    return bad(format!("{name} must be {need}, got {v}"));
                }
            }
        }
        match self.experiment {
            Experiment::Qp => {
                let q = &self.qp;
                if q.m == 0 || q.n % q.m != 0 || q.p == 0 || q.p >= q.n {
                    return bad(format!("qp needs 0 < p < n and m dividing n, got p = {}, n = {}, m = {}", q.p, q.n, q.m));
                }
            }
            Experiment::Pcp => {
                let p = &self.pcp;
                if p.rows == 0 || p.cols == 0 || p.rank == 0 || p.rank > p.rows.min(p.cols) {
                    return bad(format!("pcp needs 0 < rank ≤ min(rows, cols), got {}x{} rank {}", p.rows, p.cols, p.rank));
                }
                if !(0.0..=1.0).contains(&p.sparsity) || !(p.sample_frac > 0.0 && p.sample_frac <= 1.0) {
                    return bad("pcp sparsity must lie in [0, 1] and sample_frac in (0, 1]".into());
                }
            }
            Experiment::Msvm => {
                let c = &self.msvm;
                if c.n_per_class == 0 || !(c.sigma >= 0.0 && c.sigma <= 1.0) || !(c.mu >= 0.0) {
                    return bad("msvm needs n_per_class ≥ 1, sigma in [0, 1] and mu ≥ 0".into());
                }
            }
            Experiment::Custom => {
                if self.problem.is_none() {
                    return bad("the custom experiment needs --problem".into());
                }
            }
        }
        Ok(())
    }

    /// Schedule for one method after experiment defaults and overrides.
    pub fn schedule_for(&self, method: Method, plan: &MixingPlan) -> ProxSchedule {
        let any_linearized = plan.d.iter().any(|&f| f);
        let (beta, rho, d1, d_inc) = match self.experiment {
            Experiment::Qp | Experiment::Custom => (1.0, 1.0, 0.5, 0.1),
            Experiment::Pcp => (0.05, 0.05, if method == Method::Jacobi { 1.0 } else { 0.0 }, 0.01),
            Experiment::Msvm => (0.005, 0.005, if method == Method::Jacobi { 1.0 } else { 0.5 }, 0.1),
        };
        let (mode, d_max) = match method {
            Method::Jags | Method::Jacobi => (ScheduleMode::Adaptive, plan.d_max),
            Method::Random if self.experiment == Experiment::Pcp => (ScheduleMode::Fixed, 0.0),
            Method::Random => (ScheduleMode::Adaptive, 1.0),
            Method::Gs => (ScheduleMode::Fixed, if any_linearized { 1.0 } else { 0.0 }),
            Method::Admm => (ScheduleMode::Fixed, 0.0),
        };
        let o = &self.schedule;
        let beta = o.beta.unwrap_or(beta);
        let mut sched = ProxSchedule {
            beta,
            rho: o.rho.unwrap_or(if o.beta.is_some() { beta } else { rho }),
            d1: o.d1.unwrap_or(d1),
            d_inc: o.d_inc.unwrap_or(d_inc),
            d_max: o.d_max.unwrap_or(d_max),
            mode: o.mode.unwrap_or(mode),
            startup: o.startup.unwrap_or(Startup::None),
            ..ProxSchedule::fixed(beta, beta, 0.0)
        };
        if let Some(eta) = o.eta {
            sched.eta = eta;
        }
        if method == Method::Admm {
            sched.mode = ScheduleMode::Fixed;
            sched.d_max = 0.0;
        }
        if sched.mode == ScheduleMode::Adaptive {
            sched.d1 = sched.d1.min(sched.d_max);
        }
        sched
    }
}

pub fn resolve_output_dir(explicit: Option<&Path>) -> PathBuf {
    match explicit {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".")),
    }
}
