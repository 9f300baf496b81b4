use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::{CaseGeometry, CaseKind, CaseSpec};
use crate::solvers::{solve, solve_nominal, SolveOptions, SolverKind, Status};

/// Grid of set scales for one case, geometry and seed.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub case: CaseKind,
    pub size: Vec<usize>,
    pub alphas: Vec<f64>,
    pub geometry: CaseGeometry,
    pub seed: u64,
    pub solver: SolverKind,
    pub options: SolveOptions,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
}

/// One CSV line of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub case: String,
    pub seed: u64,
    pub alpha: f64,
    pub geometry: String,
    pub solver: String,
    pub status: String,
    pub objective: Option<f64>,
    /// Robust objective divided by the nominal objective.
    pub normalized: Option<f64>,
    pub cuts_added: usize,
    pub iterations: usize,
    pub transform_ms: f64,
    pub solve_ms: f64,
}

pub(crate) fn status_name(s: Status) -> &'static str {
    match s {
        Status::Optimal => "optimal",
        Status::Infeasible => "infeasible",
        Status::Unbounded => "unbounded",
        Status::IterLimit => "iter_limit",
        Status::NodeLimit => "node_limit",
    }
}

fn instance(spec: &SweepSpec, alpha: f64) -> CaseSpec {
    CaseSpec { case: spec.case, size: spec.size.clone(), geometry: spec.geometry, alpha, seed: spec.seed }
}

/// Solves every grid point; a failing instance becomes a row whose status
/// names the error and the sweep continues.
pub fn run_sweep(spec: &SweepSpec) -> Vec<SweepRow> {
    let nominal = solve_nominal(&instance(spec, 0.0).generate(), &spec.options)
        .ok()
        .filter(|r| r.status == Status::Optimal)
        .and_then(|r| r.objective);
    let one = |&alpha: &f64| -> SweepRow {
        let mut row = SweepRow {
            case: spec.case.to_string(),
            seed: spec.seed,
            alpha,
            geometry: spec.geometry.to_string(),
            solver: spec.solver.to_string(),
            status: String::new(),
            objective: None,
            normalized: None,
            cuts_added: 0,
            iterations: 0,
            transform_ms: 0.0,
            solve_ms: 0.0,
        };
        match solve(&instance(spec, alpha).generate(), spec.solver, &spec.options) {
            Ok(res) => {
                row.status = status_name(res.status).to_string();
                row.objective = res.objective;
                row.normalized = match (res.objective, nominal) {
                    (Some(r), Some(n)) if n != 0.0 && res.status == Status::Optimal => Some(r / n),
                    _ => None,
                };
                row.cuts_added = res.stats.cuts_added;
                row.iterations = res.stats.iterations;
                row.transform_ms = res.stats.transform_ms;
                row.solve_ms = res.stats.solve_ms;
            }
            Err(e) => {
                log::warn!("alpha {alpha}: {e}");
                row.status = format!("error: {e}");
            }
        }
        row
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(spec.jobs).build();
    match pool {
        Ok(pool) => pool.install(|| spec.alphas.par_iter().map(one).collect()),
        Err(_) => spec.alphas.iter().map(one).collect(),
    }
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Median of a nonempty sample; the mean of the middle pair for even sizes.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}
