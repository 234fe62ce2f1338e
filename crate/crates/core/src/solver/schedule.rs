use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inner iterations allowed for a `D_i = 0` block whose `g_i` has no
/// closed-form composition with the block quadratic.
pub const DEFAULT_INNER_CAP: usize = 500;

/// Stopping tolerance of that inner loop.
pub const INNER_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleMode {
    /// `d^k = d_max` throughout.
    #[default]
    Fixed,
    /// Start at `d1`, add `d_inc` whenever the step looks too long, cap at `d_max`.
    Adaptive,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Startup {
    #[default]
    None,
    /// Probe `(d1, d_inc) ∈ {0, 0.5, 1} × {0.01, 0.1}` for 20 epochs each.
    Grid20,
}

/// Penalty, dual step and proximal scalar schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProxSchedule {
    pub beta: f64,
    pub rho: f64,
    #[serde(default)]
    pub d1: f64,
    #[serde(default)]
    pub d_inc: f64,
    pub d_max: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default)]
    pub mode: ScheduleMode,
    #[serde(default)]
    pub startup: Startup,
    /// Per-block `P_i = s_i·I`, bypassing `d` entirely.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit_weights: Option<Vec<f64>>,
    #[serde(default = "default_inner_cap")]
    pub inner_cap: usize,
}

fn default_eta() -> f64 {
    0.999
}

fn default_inner_cap() -> usize {
    DEFAULT_INNER_CAP
}

impl ProxSchedule {
    pub fn fixed(beta: f64, rho: f64, d: f64) -> Self {
        Self {
            beta,
            rho,
            d1: d,
            d_inc: 0.0,
            d_max: d,
            eta: default_eta(),
            mode: ScheduleMode::Fixed,
            startup: Startup::None,
            explicit_weights: None,
            inner_cap: DEFAULT_INNER_CAP,
        }
    }

    pub fn adaptive(beta: f64, rho: f64, d1: f64, d_inc: f64, d_max: f64) -> Self {
        Self { d1, d_inc, mode: ScheduleMode::Adaptive, ..Self::fixed(beta, rho, d_max) }
    }

    pub fn with_startup(mut self, startup: Startup) -> Self {
        self.startup = startup;
        self
    }

    /// `d` used for the first epoch.
    pub fn initial_d(&self) -> f64 {
        match self.mode {
            ScheduleMode::Fixed => self.d_max,
            ScheduleMode::Adaptive => self.d1,
        }
    }

    /// `ρ = 0` is accepted so that the multiplier can be frozen.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        if !(self.rho >= 0.0) || self.rho > self.beta {
            return bad(format!("need 0 ≤ rho ≤ beta, got rho = {}, beta = {}", self.rho, self.beta));
        }
        for (name, v) in [("d1", self.d1), ("d_inc", self.d_inc), ("d_max", self.d_max)] {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(format!("{name} must be finite and nonnegative, got {v}"));
            }
        }
        if self.mode == ScheduleMode::Adaptive && self.d1 > self.d_max {
            return bad(format!("d1 = {} exceeds d_max = {}", self.d1, self.d_max));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return bad(format!("eta must lie in (0, 1), got {}", self.eta));
        }
        if self.inner_cap == 0 {
            return bad("inner_cap must be at least 1".into());
        }
        if let Some(w) = &self.explicit_weights {
            if w.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
                return bad("explicit weights must be positive".into());
            }
        }
        Ok(())
    }
}
