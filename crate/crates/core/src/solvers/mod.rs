//! Solution pipelines: duality reformulation, cutting planes, nominal.

mod check;
mod cutting_plane;
mod master;
mod nominal;
mod reformulation;

pub use check::{check_robust_feasibility, Point, RobustnessReport, RowCheck, RulePoint};
pub use cutting_plane::{solve_cutting_plane, CutGenerator};
pub use nominal::solve_nominal;
pub use reformulation::solve_reformulation;
pub use robustkit_lp::Status;

use std::fmt;
use std::str::FromStr;

use robustkit_lp::{LpError, LpOptions};
use serde::{Deserialize, Serialize};

use crate::model::{Model, ModelError, UncParamId};
use crate::transform::{LdrCoefficients, LdrMode, TransformError};
use crate::uncset::SetError;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error("no separation oracle for constraint `{constraint}`: {reason}")]
    SeparationUnavailable { constraint: String, reason: String },
    #[error(transparent)]
    Kernel(#[from] LpError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Set(#[from] SetError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Separation tolerance of the cutting-plane loop.
    pub cut_tol: f64,
    /// Master solves allowed in the cutting-plane and conic loops.
    pub max_iter: usize,
    /// Tolerance on conic rows in the outer-approximation loop.
    pub conic_tol: f64,
    /// Absolute branch-and-bound gap.
    pub mip_gap: f64,
    pub ldr: LdrMode,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { cut_tol: 1e-6, max_iter: 200, conic_tol: 1e-6, mip_gap: 1e-6, ldr: LdrMode::Affine }
    }
}

impl SolveOptions {
    pub(crate) fn lp_options(&self) -> LpOptions {
        LpOptions { mip_gap: self.mip_gap, ..LpOptions::default() }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Reformulate,
    Cuts,
    Nominal,
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Reformulate => "reformulate",
            SolverKind::Cuts => "cuts",
            SolverKind::Nominal => "nominal",
        })
    }
}

impl FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reformulate" => Ok(SolverKind::Reformulate),
            "cuts" => Ok(SolverKind::Cuts),
            "nominal" => Ok(SolverKind::Nominal),
            other => Err(format!("unknown solver `{other}`")),
        }
    }
}

/// Decision rule of one adjustable variable with solved coefficients.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RuleValue {
    pub adjustable: String,
    pub intercept: f64,
    pub slopes: Vec<(UncParamId, f64)>,
}

impl RuleValue {
    pub fn evaluate(&self, xi: &[f64]) -> f64 {
        self.intercept + self.slopes.iter().map(|&(p, v)| v * xi[p.0]).sum::<f64>()
    }
}

/// Worst case of one uncertain constraint at the returned solution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowReport {
    pub label: String,
    /// `rhs - max lhs`; absent when the set admits no separation oracle.
    pub slack: Option<f64>,
    pub worst_xi: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SolveStats {
    pub cuts_added: usize,
    /// Rounds of the outer loop (one for a single kernel solve).
    pub iterations: usize,
    pub master_solves: usize,
    pub separation_solves: usize,
    pub lp_iterations: usize,
    pub nodes: usize,
    pub transform_ms: f64,
    pub solve_ms: f64,
    /// Master objective after each round.
    pub master_objectives: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveResult {
    pub solver: SolverKind,
    pub status: Status,
    pub objective: Option<f64>,
    pub var_names: Vec<String>,
    /// Decision values indexed by variable id; empty without a point.
    pub x: Vec<f64>,
    pub rules: Vec<RuleValue>,
    pub worst_case: Vec<RowReport>,
    /// Largest worst-case violation over the uncertain constraints.
    pub max_violation: f64,
    pub stats: SolveStats,
}

impl SolveResult {
    pub(crate) fn empty(solver: SolverKind, status: Status, model: &Model, stats: SolveStats) -> Self {
        SolveResult {
            solver,
            status,
            objective: None,
            var_names: model.vars().iter().map(|v| v.name.clone()).collect(),
            x: Vec::new(),
            rules: Vec::new(),
            worst_case: Vec::new(),
            max_violation: 0.0,
            stats,
        }
    }
}

pub(crate) fn rule_values(model: &Model, rules: &LdrCoefficients, z: &[f64]) -> Vec<RuleValue> {
    rules
        .rules
        .iter()
        .map(|r| RuleValue {
            adjustable: model.adjustables()[r.adjustable.0].name.clone(),
            intercept: z[r.intercept.0],
            slopes: r.slopes.iter().map(|&(p, v)| (p, z[v.0])).collect(),
        })
        .collect()
}

/// Runs the named pipeline.
pub fn solve(model: &Model, solver: SolverKind, opts: &SolveOptions) -> Result<SolveResult, SolveError> {
    match solver {
        SolverKind::Reformulate => solve_reformulation(model, opts),
        SolverKind::Cuts => solve_cutting_plane(model, opts),
        SolverKind::Nominal => solve_nominal(model, opts),
    }
}

pub(crate) fn elapsed_ms(start: std::time::Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}
