//! Command-line surface. Flags override the JSON config file.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hybcu::mixing::Pin;
use hybcu::model::YNorm;
use hybcu::solver::{ScheduleMode, Startup};
use hybcu::Exec;

use crate::commands::{cmd_divergence, cmd_mix, cmd_run};
use crate::config::{resolve_output_dir, Experiment, Method, RunConfig};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "hybcu", version, about = "Hybrid Jacobian/Gauss-Seidel proximal block coordinate updates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for a mixing plan and write it as JSON.
    Mix(MixArgs),
    /// Generate an instance and run one or more methods on it.
    Run(Box<RunArgs>),
    /// Largest stable Gauss-Seidel step on the three-block example.
    Divergence(DivergenceArgs),
}

#[derive(Debug, Args)]
pub struct MixArgs {
    /// Number of blocks.
    #[arg(long)]
    pub m: usize,
    /// Linearization pattern: `I` (all blocks), `0` (none) or a comma list
    /// of 0/1 flags.
    #[arg(long, default_value = "I")]
    pub pattern: String,
    /// Pinned strict-lower entries of W as `i:j:value` (1-based), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub pin: Vec<String>,
    /// Pin every entry below the first subdiagonal to zero.
    #[arg(long)]
    pub banded: bool,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Plan file; defaults to `plan_m<m>.json` in the output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON config file; flags given here take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub experiment: Option<Experiment>,
    /// Comma-separated methods; several run concurrently.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub method: Vec<Method>,
    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long)]
    pub qp_p: Option<usize>,
    #[arg(long)]
    pub qp_n: Option<usize>,
    #[arg(long)]
    pub qp_m: Option<usize>,

    #[arg(long)]
    pub pcp_rows: Option<usize>,
    #[arg(long)]
    pub pcp_cols: Option<usize>,
    #[arg(long)]
    pub pcp_rank: Option<usize>,
    #[arg(long)]
    pub pcp_sparsity: Option<f64>,
    #[arg(long)]
    pub pcp_sample_frac: Option<f64>,
    #[arg(long)]
    pub pcp_mu: Option<f64>,
    /// `nuclear` or `spectral`.
    #[arg(long, value_parser = parse_y_norm)]
    pub pcp_y_norm: Option<YNorm>,

    #[arg(long)]
    pub msvm_p: Option<usize>,
    #[arg(long)]
    pub msvm_n_per_class: Option<usize>,
    #[arg(long)]
    pub msvm_s: Option<usize>,
    #[arg(long)]
    pub msvm_sigma: Option<f64>,
    #[arg(long)]
    pub msvm_mu: Option<f64>,

    /// Problem JSON for `--experiment custom`.
    #[arg(long)]
    pub problem: Option<PathBuf>,
    /// Linearization flags for a custom problem, e.g. `1,1,0`.
    #[arg(long)]
    pub linearize: Option<String>,
    /// Mixing plan from `hybcu mix` for the jags method.
    #[arg(long)]
    pub plan: Option<PathBuf>,

    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub d1: Option<f64>,
    #[arg(long)]
    pub d_inc: Option<f64>,
    #[arg(long)]
    pub d_max: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    /// `fixed` or `adaptive`.
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<ScheduleMode>,
    /// `none` or `grid20`.
    #[arg(long, value_parser = parse_startup)]
    pub startup: Option<Startup>,

    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Known optimal value; no reference run is made.
    #[arg(long)]
    pub f_star: Option<f64>,
    /// Length of the jags run that supplies the optimal value (0 disables).
    #[arg(long)]
    pub reference_epochs: Option<usize>,
    #[arg(long)]
    pub record_every: Option<usize>,
    /// Leave the seconds column empty so reruns are byte-identical.
    #[arg(long)]
    pub no_timing: bool,
    /// Allow the gs method, which has no convergence guarantee.
    #[arg(long)]
    pub acknowledge_gs: bool,
    #[arg(long)]
    pub sequential: bool,
    /// Defaults to `$HYBCU_OUTPUT_DIR`, then the working directory.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DivergenceArgs {
    #[arg(long, value_delimiter = ',', default_value = "1e-1,1e-2,1e-3,1e-4")]
    pub eps: Vec<f64>,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub tau_start: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub tau_step: f64,
    /// Table file; defaults to `divergence.csv` in the output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub sequential: bool,
}

fn parse_quoted<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_str(&format!("\"{s}\"")).map_err(|_| format!("unknown value `{s}`"))
}

fn parse_y_norm(s: &str) -> Result<YNorm, String> {
    parse_quoted(s)
}

fn parse_mode(s: &str) -> Result<ScheduleMode, String> {
    parse_quoted(s)
}

fn parse_startup(s: &str) -> Result<Startup, String> {
    parse_quoted(s)
}

/// `I`/`identity`, `0`/`zero`, or a comma list of 0/1 flags.
pub fn parse_pattern(pattern: &str, m: usize) -> Result<Vec<bool>, CliError> {
    match pattern.trim() {
        "I" | "i" | "identity" => Ok(vec![true; m]),
        "0" | "zero" if m != 1 => Ok(vec![false; m]),
        p => {
            let flags = parse_flags(p)?;
            if flags.len() != m {
                return Err(CliError::Config(format!("pattern has {} flags, m = {m}", flags.len())));
            }
            Ok(flags)
        }
    }
}

fn parse_flags(s: &str) -> Result<Vec<bool>, CliError> {
    s.split(',')
        .map(|t| match t.trim() {
            "1" | "true" => Ok(true),
            "0" | "false" => Ok(false),
            other => Err(CliError::Config(format!("bad linearization flag `{other}`"))),
        })
        .collect()
}

/// `i:j:value` with 1-based indices.
fn parse_pin(s: &str) -> Result<Pin, CliError> {
    let bad = || CliError::Config(format!("bad pin `{s}`, expected i:j:value"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let i: usize = parts[0].trim().parse().map_err(|_| bad())?;
    let j: usize = parts[1].trim().parse().map_err(|_| bad())?;
    let value: f64 = parts[2].trim().parse().map_err(|_| bad())?;
    if i == 0 || j == 0 || !value.is_finite() {
        return Err(bad());
    }
    Ok(Pin { i: i - 1, j: j - 1, value })
}

impl RunArgs {
    /// The config file (or defaults) with every given flag applied.
    pub fn into_config(self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_json_file(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($dst:expr => $src:expr),* $(,)?) => {
                $(if let Some(v) = $src { $dst = v; })*
            };
        }
        set! {
            c.experiment => self.experiment,
            c.seed => self.seed,
            c.qp.p => self.qp_p,
            c.qp.n => self.qp_n,
            c.qp.m => self.qp_m,
            c.pcp.rows => self.pcp_rows,
            c.pcp.cols => self.pcp_cols,
            c.pcp.rank => self.pcp_rank,
            c.pcp.sparsity => self.pcp_sparsity,
            c.pcp.sample_frac => self.pcp_sample_frac,
            c.pcp.y_norm => self.pcp_y_norm,
            c.msvm.p => self.msvm_p,
            c.msvm.n_per_class => self.msvm_n_per_class,
            c.msvm.s => self.msvm_s,
            c.msvm.sigma => self.msvm_sigma,
            c.msvm.mu => self.msvm_mu,
            c.record_every => self.record_every,
        }
        if !self.method.is_empty() {
            c.methods = self.method;
        }
        if self.pcp_mu.is_some() {
            c.pcp.mu = self.pcp_mu;
        }
        if let Some(s) = &self.linearize {
            c.linearize = Some(parse_flags(s)?);
        }
        let s = &mut c.schedule;
        for (dst, src) in [
            (&mut s.beta, self.beta),
            (&mut s.rho, self.rho),
            (&mut s.d1, self.d1),
            (&mut s.d_inc, self.d_inc),
            (&mut s.d_max, self.d_max),
            (&mut s.eta, self.eta),
        ] {
            if src.is_some() {
                *dst = src;
            }
        }
        if self.mode.is_some() {
            s.mode = self.mode;
        }
        if self.startup.is_some() {
            s.startup = self.startup;
        }
        for (dst, src) in [(&mut c.max_epochs, self.max_epochs), (&mut c.reference_epochs, self.reference_epochs)] {
            if src.is_some() {
                *dst = src;
            }
        }
        for (dst, src) in [(&mut c.tol, self.tol), (&mut c.f_star, self.f_star)] {
            if src.is_some() {
                *dst = src;
            }
        }
        for (dst, src) in [(&mut c.problem, self.problem), (&mut c.plan, self.plan), (&mut c.output_dir, self.output_dir)] {
            if src.is_some() {
                *dst = src;
            }
        }
        if self.no_timing {
            c.timing = false;
        }
        c.acknowledge_gs |= self.acknowledge_gs;
        c.sequential |= self.sequential;
        Ok(c)
    }
}

/// Runs one parsed command, printing a short human-readable summary.
pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Mix(a) => {
            if a.m == 0 {
                return Err(CliError::Config("m must be at least 1".into()));
            }
            let d = parse_pattern(&a.pattern, a.m)?;
            let mut pins = a.pin.iter().map(|s| parse_pin(s)).collect::<Result<Vec<_>, _>>()?;
            if a.banded {
                pins.extend(Pin::banded(a.m));
            }
            let output = a
                .output
                .unwrap_or_else(|| resolve_output_dir(a.output_dir.as_deref()).join(format!("plan_m{}.json", a.m)));
            let out = cmd_mix(d, &pins, a.alpha, &output)?;
            println!("sigma = {:.6}", out.solution.sigma);
            println!("d_max = {:.6}", out.plan.d_max);
            println!("u = {:?}", out.solution.u.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>());
            println!("W =");
            for i in 0..out.plan.m {
                let row: Vec<String> = (0..out.plan.m).map(|j| format!("{:8.4}", out.plan.w.get(i, j))).collect();
                println!("  {}", row.join(" "));
            }
            println!("wrote {}", out.path.display());
        }
        Command::Run(a) => {
            let cfg = a.into_config()?;
            let out = cmd_run(&cfg)?;
            if let Some(f) = out.f_star {
                println!("F* = {f:.10e}");
            }
            println!("{:<8} {:<14} {:>7} {:>16} {:>12} {:>12} {:>9}", "method", "status", "epochs", "objective", "obj_gap", "feas", "d_k");
            for r in &out.reports {
                let last = r.last();
                let gap = last.obj_gap.map_or("-".to_string(), |g| format!("{g:.4e}"));
                let status = serde_json::to_value(r.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
                println!(
                    "{:<8} {:<14} {:>7} {:>16.8e} {:>12} {:>12.4e} {:>9.4}",
                    r.method,
                    status,
                    r.epochs(),
                    last.objective,
                    gap,
                    last.feasibility,
                    last.d_k
                );
            }
            for f in &out.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Divergence(a) => {
            let output = a.output.unwrap_or_else(|| resolve_output_dir(a.output_dir.as_deref()).join("divergence.csv"));
            let exec = if a.sequential { Exec::Sequential } else { Exec::Parallel };
            let rows = cmd_divergence(&a.eps, a.tau_start, a.tau_step, &output, exec)?;
            println!("{:>10} {:>14}", "eps", "tau");
            for (e, t) in rows {
                println!("{e:>10.0e} {t:>14.5e}");
            }
            println!("wrote {}", output.display());
        }
    }
    Ok(())
}
