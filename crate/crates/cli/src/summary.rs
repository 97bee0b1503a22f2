//! JSON summaries written by `solve` and `path`.
//!
//! The published schemas live in `schema/` and are regenerated from these
//! types by `approx schema`.

use restarted_approx::engine::RunStatus;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Duality gap at or below the tolerance
    GapReached,
    /// Coordinate-update budget used up
    BudgetExhausted,
    /// Fixed iteration count or schedule finished
    Completed,
}

impl From<RunStatus> for Status {
    fn from(s: RunStatus) -> Self {
        match s {
            RunStatus::GapReached => Status::GapReached,
            RunStatus::BudgetExhausted => Status::BudgetExhausted,
            RunStatus::Completed => Status::Completed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RunSummary {
    pub run_id: u64,
    pub seed: u64,
    pub status: Status,
    pub final_objective: f64,
    pub duality_gap: f64,
    pub coord_updates: u64,
    pub iterations: u64,
    /// Coordinate updates divided by n
    pub epochs: f64,
    /// APPROX runs started (0 for coordinate descent)
    pub restarts: u64,
    pub elapsed_seconds: f64,
    pub trace_file: Option<String>,
    pub restarts_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SolveSummary {
    pub schema_version: u32,
    pub command: String,
    pub model: String,
    pub algorithm: String,
    pub data: String,
    pub n: usize,
    pub m: usize,
    pub lambda: f64,
    pub tau: usize,
    pub schedule: Option<String>,
    pub policy: Option<String>,
    pub eps: f64,
    pub budget: Option<u64>,
    pub rng: String,
    pub runs: Vec<RunSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PathPoint {
    pub t: usize,
    pub lambda: f64,
    pub status: Status,
    pub coord_updates: u64,
    pub iterations: u64,
    /// APPROX runs started at this lambda
    pub restarts: u64,
    /// Base period in force when this lambda finished
    pub k0: Option<u64>,
    pub final_objective: f64,
    pub duality_gap: f64,
    pub nnz: usize,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PathSummary {
    pub schema_version: u32,
    pub command: String,
    pub algorithm: String,
    pub data: String,
    pub n: usize,
    pub m: usize,
    pub tau: usize,
    pub seed: u64,
    pub eps: f64,
    pub lambda_max: f64,
    pub alpha: f64,
    pub policy: Option<String>,
    pub k0_initial: Option<u64>,
    pub double_every: Option<u64>,
    pub warmup_coord_updates: u64,
    pub budget_per_lambda: Option<u64>,
    pub total_coord_updates: u64,
    pub rng: String,
    pub points: Vec<PathPoint>,
    pub trace_file: Option<String>,
    pub restarts_file: Option<String>,
}

pub fn solve_schema() -> serde_json::Value {
    serde_json::to_value(schemars::schema_for!(SolveSummary)).expect("schema serializes")
}

pub fn path_schema() -> serde_json::Value {
    serde_json::to_value(schemars::schema_for!(PathSummary)).expect("schema serializes")
}
