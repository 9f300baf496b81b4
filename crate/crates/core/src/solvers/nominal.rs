use std::time::Instant;

use robustkit_lp::{solve, Status};

use super::check::worst_case_reports;
use super::{elapsed_ms, RuleValue, SolveError, SolveOptions, SolveResult, SolveStats, SolverKind};
use crate::model::Model;
use crate::transform::{apply_ldr_labeled, nominal_substitute, resolve_groups, uncertain_rows, LdrMode};

/// Fixes every parameter at its nominal value and solves once. The
/// worst-case report treats adjustable variables as fixed at their values.
pub fn solve_nominal(model: &Model, opts: &SolveOptions) -> Result<SolveResult, SolveError> {
    model.validate()?;
    let mut stats = SolveStats::default();
    let t0 = Instant::now();
    let dm = nominal_substitute(model);
    let (lp, integer) = dm.to_lp();
    stats.transform_ms = elapsed_ms(t0);

    let t1 = Instant::now();
    let sol = solve(&lp, &integer, &opts.lp_options())?;
    stats.iterations = 1;
    stats.master_solves = 1;
    stats.lp_iterations = sol.iterations;
    stats.nodes = sol.nodes;
    let mut result = SolveResult::empty(SolverKind::Nominal, sol.status, model, SolveStats::default());
    if !sol.x.is_empty() && sol.status != Status::Infeasible && sol.status != Status::Unbounded {
        stats.master_objectives.push(sol.objective);
        let n = model.vars().len();
        result.objective = Some(sol.objective);
        result.x = sol.x[..n].to_vec();
        result.rules = model
            .adjustables()
            .iter()
            .zip(&sol.x[n..])
            .map(|(a, &v)| RuleValue { adjustable: a.name.clone(), intercept: v, slopes: Vec::new() })
            .collect();
        let (pm, _, _) = apply_ldr_labeled(model, LdrMode::Static);
        let labels: Vec<String> = (0..pm.constraints().len()).map(|i| format!("c{i}")).collect();
        let rows = uncertain_rows(&pm, &labels);
        let (reports, worst) = worst_case_reports(&pm, &rows, &sol.x, &resolve_groups(&pm));
        result.worst_case = reports;
        result.max_violation = worst.max(0.0);
    }
    stats.solve_ms = elapsed_ms(t1);
    result.stats = stats;
    Ok(result)
}
