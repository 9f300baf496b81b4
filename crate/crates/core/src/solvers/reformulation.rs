use std::time::Instant;

use robustkit_lp::{Relation, Status};

use super::cutting_plane::fill_point;
use super::master::Master;
use super::{elapsed_ms, SolveError, SolveOptions, SolveResult, SolveStats, SolverKind};
use crate::model::Model;
use crate::transform::{resolve_groups, robust_counterpart, ConicRow, LinExpr, LinearRow, RowOrigin};

/// Master columns standing in for one cone: `u = L' a(z)` and `t >= |u|`.
struct LiftedCone {
    row: usize,
    u: Vec<usize>,
    t: usize,
}

impl LiftedCone {
    /// Gap `|u| - t` at `x` and the tangent row `t - u0'u / |u0| >= 0`.
    fn cut(&self, x: &[f64], source: &str) -> Option<(f64, LinearRow)> {
        let u0: Vec<f64> = self.u.iter().map(|&j| x[j]).collect();
        let s = u0.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(s > 0.0) {
            return None;
        }
        Some((s - x[self.t], self.tangent(&u0, s, source)))
    }

    fn tangent(&self, dir: &[f64], len: f64, source: &str) -> LinearRow {
        let mut lhs = LinExpr::default();
        lhs.add_term(self.t, 1.0);
        for (&j, d) in self.u.iter().zip(dir) {
            lhs.add_term(j, -d / len);
        }
        LinearRow::from_expr(&lhs, Relation::Ge, 0.0, RowOrigin::ConicCut { source: source.to_string() })
    }
}

/// Axis directions, plus the sign vectors when the cone is small.
fn seed_directions(dim: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for k in 0..dim {
        for sign in [1.0, -1.0] {
            let mut d = vec![0.0; dim];
            d[k] = sign;
            out.push(d);
        }
    }
    if (2..=4).contains(&dim) {
        for mask in 0..(1usize << dim) {
            out.push((0..dim).map(|k| if mask >> k & 1 == 1 { -1.0 } else { 1.0 }).collect());
        }
    }
    out
}

/// Replaces each conic row by its linear part plus one epigraph column per
/// cone, seeded with a coarse polyhedral approximation of every cone.
fn lift(master: &mut Master, conic: &[ConicRow]) -> Vec<LiftedCone> {
    let mut lifted = Vec::new();
    for (r, row) in conic.iter().enumerate() {
        let origin = || RowOrigin::ConicCut { source: row.source.clone() };
        let mut lhs = row.linear.clone();
        for cone in &row.cones {
            let t = master.add_column(0.0, f64::INFINITY);
            let mut u = Vec::new();
            for comp in cone.scaled_components() {
                let j = master.add_column(f64::NEG_INFINITY, f64::INFINITY);
                let mut link = comp;
                link.add_term(j, -1.0);
                master.add_row(&LinearRow::from_expr(&link, Relation::Eq, 0.0, origin()));
                u.push(j);
            }
            lhs.add_term(t, 1.0);
            let cone = LiftedCone { row: r, u, t };
            for d in seed_directions(cone.u.len()) {
                let len = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                master.add_row(&cone.tangent(&d, len, &row.source));
            }
            lifted.push(cone);
        }
        master.add_row(&LinearRow::from_expr(&lhs, Relation::Le, row.rhs, origin()));
    }
    lifted
}

/// Solves the duality-based counterpart. Conic rows from ellipsoidal sets
/// are handled by outer approximation: each round adds a supporting
/// hyperplane for every cone of a row violated by more than `opts.conic_tol`.
pub fn solve_reformulation(model: &Model, opts: &SolveOptions) -> Result<SolveResult, SolveError> {
    model.validate()?;
    let mut stats = SolveStats::default();
    let t0 = Instant::now();
    let cp = robust_counterpart(model, opts.ldr)?;
    let (lp, integer) = cp.model.to_lp();
    let conic = &cp.model.conic_rows;
    let mut master = Master::new(lp, integer, opts.lp_options(), !conic.is_empty());
    let lifted = lift(&mut master, conic);
    stats.transform_ms = elapsed_ms(t0);

    let t1 = Instant::now();
    let sets = resolve_groups(&cp.prepared.model);
    let mut result = SolveResult::empty(SolverKind::Reformulate, Status::IterLimit, model, SolveStats::default());
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
                    fill_point(&mut result, model, &cp.prepared, &cp.rows, &sets, &sol.x);
                }
                break;
            }
        }
        stats.master_objectives.push(sol.objective);
        let violated: Vec<bool> = conic.iter().map(|r| r.violation(&sol.x) > opts.conic_tol).collect();
        let cuts: Vec<LinearRow> = lifted
            .iter()
            .filter(|c| violated[c.row])
            .filter_map(|c| c.cut(&sol.x, &conic[c.row].source))
            .filter(|(gap, _)| *gap > 0.0)
            .map(|(_, cut)| cut)
            .collect();
        if cuts.is_empty() {
            if master.at_box(&sol.x) {
                result.status = Status::Unbounded;
            } else {
                result.status = Status::Optimal;
                result.objective = Some(sol.objective);
                fill_point(&mut result, model, &cp.prepared, &cp.rows, &sets, &sol.x);
            }
            break;
        }
        if stats.iterations >= opts.max_iter {
            result.status = Status::IterLimit;
            result.objective = Some(sol.objective);
            fill_point(&mut result, model, &cp.prepared, &cp.rows, &sets, &sol.x);
            break;
        }
        master.prune(&sol.x);
        for cut in &cuts {
            master.add_cut(cut);
        }
        stats.cuts_added += cuts.len();
    }
    stats.solve_ms = elapsed_ms(t1);
    if result.status == Status::Optimal && result.max_violation > 10.0 * opts.cut_tol.max(opts.conic_tol) {
        log::warn!("reformulation optimum violates a robust row by {:e}", result.max_violation);
    }
    result.stats = stats;
    Ok(result)
}
