use std::time::Instant;

use robustkit_lp::{Relation, Status};

use super::check::worst_case_reports;
use super::master::Master;
use super::{elapsed_ms, rule_values, SolveError, SolveOptions, SolveResult, SolveStats, SolverKind};
use crate::model::{ConstraintKind, Model};
use crate::transform::{expr_to_lin, prepare, resolve_groups, uncertain_rows, DeterministicModel, LinearRow, RowOrigin, UncertainRow};
use crate::transform::ColumnOrigin;

/// Scenario generator of one uncertain row; starts from the nominal point.
#[derive(Clone, Debug, PartialEq)]
pub struct CutGenerator {
    pub row: UncertainRow,
    pub scenarios: Vec<Vec<f64>>,
}

impl CutGenerator {
    pub fn new(row: UncertainRow, nominal: Vec<f64>) -> Self {
        CutGenerator { row, scenarios: vec![nominal] }
    }

    /// Deterministic row `g(x, xi) <= rhs` at a scenario.
    pub fn scenario_row(&self, xi: &[f64]) -> LinearRow {
        LinearRow::from_expr(&self.row.instantiate(xi), Relation::Le, self.row.rhs, RowOrigin::Scenario { source: self.row.label.clone() })
    }

    /// Records `xi` and returns its row.
    pub fn add_scenario(&mut self, xi: Vec<f64>) -> LinearRow {
        let row = self.scenario_row(&xi);
        self.scenarios.push(xi);
        row
    }
}

/// Alternates master solves with separation until every uncertain row is
/// satisfied within `opts.cut_tol` at the master solution.
pub fn solve_cutting_plane(model: &Model, opts: &SolveOptions) -> Result<SolveResult, SolveError> {
    model.validate()?;
    let mut stats = SolveStats::default();
    let t0 = Instant::now();
    let prepared = prepare(model, opts.ldr);
    let pm = &prepared.model;
    let sets = resolve_groups(pm);
    let rows = uncertain_rows(pm, &prepared.labels);
    for row in &rows {
        for g in row.groups(pm) {
            if let Err(e) = &sets[g] {
                return Err(SolveError::SeparationUnavailable { constraint: row.label.clone(), reason: e.to_string() });
            }
        }
    }
    let nominal = pm.nominal_point();
    let mut generators: Vec<CutGenerator> = rows.iter().map(|r| CutGenerator::new(r.clone(), nominal.clone())).collect();

    let mut dm = DeterministicModel::new(pm.sense());
    for (j, v) in pm.vars().iter().enumerate() {
        dm.add_column(v.name.clone(), v.domain, v.lower, v.upper, ColumnOrigin::Model(j));
    }
    dm.objective = expr_to_lin(pm.objective());
    for (i, c) in pm.constraints().iter().enumerate() {
        if c.kind() == ConstraintKind::Deterministic {
            dm.rows.push(LinearRow::from_expr(
                &expr_to_lin(&c.expr),
                c.relation,
                c.rhs,
                RowOrigin::Constraint { source: prepared.labels[i].clone() },
            ));
        }
    }
    for g in &generators {
        dm.rows.push(g.scenario_row(&nominal));
    }
    let (lp, integer) = dm.to_lp();
    let mut master = Master::new(lp, integer, opts.lp_options(), true);
    stats.transform_ms = elapsed_ms(t0);

    let t1 = Instant::now();
    let mut result = SolveResult::empty(SolverKind::Cuts, Status::IterLimit, model, SolveStats::default());
    loop {
        stats.iterations += 1;
        let sol = master.solve(&mut stats)?;
        match sol.status {
            Status::Optimal => {}
            Status::Infeasible | Status::Unbounded => {
                result.status = sol.status;
                break;
            }
            Status::IterLimit | Status::NodeLimit => {
                result.status = sol.status;
                if !sol.x.is_empty() {
                    result.objective = Some(sol.objective);
                    fill_point(&mut result, model, &prepared, &rows, &sets, &sol.x);
                }
                break;
            }
        }
        stats.master_objectives.push(sol.objective);

        let mut cuts = Vec::new();
        for g in &generators {
            stats.separation_solves += g.row.groups(pm).len();
            let s = g.row.separate(&sol.x, pm, &sets)?;
            if s.value > opts.cut_tol {
                log::trace!("round {}: `{}` violated by {:e}", stats.iterations, g.row.label, s.value);
                cuts.push(s.xi);
            } else {
                cuts.push(Vec::new());
            }
        }
        let violated = cuts.iter().filter(|c| !c.is_empty()).count();
        if violated == 0 {
            if master.at_box(&sol.x) {
                result.status = Status::Unbounded;
            } else {
                result.status = Status::Optimal;
                result.objective = Some(sol.objective);
                fill_point(&mut result, model, &prepared, &rows, &sets, &sol.x);
            }
            break;
        }
        if stats.iterations >= opts.max_iter {
            result.status = Status::IterLimit;
            result.objective = Some(sol.objective);
            fill_point(&mut result, model, &prepared, &rows, &sets, &sol.x);
            break;
        }
        for (g, xi) in generators.iter_mut().zip(cuts) {
            if !xi.is_empty() {
                let row = g.add_scenario(xi);
                master.add_cut(&row);
                stats.cuts_added += 1;
            }
        }
        log::debug!("round {}: {violated} cuts, master objective {}", stats.iterations, sol.objective);
    }
    stats.solve_ms = elapsed_ms(t1);
    result.stats = stats;
    Ok(result)
}

pub(crate) fn fill_point(
    result: &mut SolveResult,
    model: &Model,
    prepared: &crate::transform::Prepared,
    rows: &[UncertainRow],
    sets: &[Result<crate::uncset::ResolvedSet, crate::uncset::SetError>],
    z: &[f64],
) {
    let z = &z[..prepared.model.vars().len()];
    result.x = z[..prepared.original_vars].to_vec();
    result.rules = rule_values(model, &prepared.rules, z);
    let (reports, worst) = worst_case_reports(&prepared.model, rows, z, sets);
    result.worst_case = reports;
    result.max_violation = worst.max(0.0);
}
