use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Result;
use crate::model::{Blocks, InstanceMeta};

pub const CSV_HEADER: &str = "epoch,objective,obj_gap,feasibility,d_k,triggers,seconds";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    MaxEpochs,
    ToleranceMet,
    Diverged,
}

/// Metrics after one epoch (epoch 0 is the starting point).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub objective: f64,
    /// `|F − F*|`, present when `F*` was supplied.
    pub obj_gap: Option<f64>,
    pub feasibility: f64,
    pub d_k: f64,
    /// Cumulative number of times `d` was raised.
    pub triggers: usize,
    pub seconds: f64,
}

/// What the grid startup settled on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "choice")]
pub enum StartupChoice {
    Pair { d1: f64, d_inc: f64 },
    /// Every probe triggered on all 20 epochs; `d` stays at `d_max`.
    Fallback,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub method: String,
    pub status: Status,
    pub initial: EpochRecord,
    pub records: Vec<EpochRecord>,
    pub f_star: Option<f64>,
    pub startup: Option<StartupChoice>,
    pub x: Blocks,
    pub lambda: Vec<f64>,
    /// Average of `x^2, …, x^{t+1}`; equals the start when no epoch ran.
    pub ergodic_x: Blocks,
    pub config: Value,
    pub meta: Option<InstanceMeta>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|g| g.to_string()).unwrap_or_default()
}

impl RunReport {
    pub fn epochs(&self) -> usize {
        self.records.last().map_or(0, |r| r.epoch)
    }

    pub fn last(&self) -> &EpochRecord {
        self.records.last().unwrap_or(&self.initial)
    }

    pub fn triggers(&self) -> usize {
        self.last().triggers
    }

    /// One row per epoch record; the start point is not written. With
    /// `timing = false` the seconds column is left empty so that repeated
    /// runs produce identical files.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let secs = if timing { r.seconds.to_string() } else { String::new() };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.epoch,
                r.objective,
                fmt_opt(r.obj_gap),
                r.feasibility,
                r.d_k,
                r.triggers,
                secs
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path, timing: bool) -> Result<()> {
        std::fs::write(path, self.to_csv(timing))?;
        Ok(())
    }

    /// Terminal status, totals, config echo and instance metadata.
    pub fn summary(&self, timing: bool) -> Value {
        let last = self.last();
        json!({
            "method": self.method,
            "status": self.status,
            "epochs": self.epochs(),
            "final": {
                "objective": last.objective,
                "obj_gap": last.obj_gap,
                "feasibility": last.feasibility,
                "d_k": last.d_k,
            },
            "initial_objective": self.initial.objective,
            "triggers": last.triggers,
            "seconds": if timing { json!(last.seconds) } else { Value::Null },
            "f_star": self.f_star,
            "startup": self.startup,
            "config": self.config,
            "meta": self.meta,
        })
    }

    pub fn write_summary(&self, path: &Path, timing: bool) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.summary(timing))?)?;
        Ok(())
    }

    /// Equality with every wall-clock field ignored.
    pub fn same_outcome(&self, other: &Self) -> bool {
        let strip = |r: &Self| {
            let mut r = r.clone();
            r.initial.seconds = 0.0;
            r.records.iter_mut().for_each(|e| e.seconds = 0.0);
            r
        };
        strip(self) == strip(other)
    }
}
