//! Best-bound branch-and-bound over the simplex kernel.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::problem::{Lp, LpOptions, LpSolution, Status};
use crate::simplex::{solve_lp, Basis, Simplex};
use crate::LpError;

struct Node {
    /// Relaxation bound inherited from the parent, in minimization form.
    bound: f64,
    id: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Optimal basis of the parent relaxation.
    basis: Option<Basis>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // BinaryHeap is a max-heap: the smallest bound, then the oldest node,
    // must compare greatest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

/// Solves `lp` with the columns flagged in `integer` restricted to integers.
///
/// Nodes are explored best-bound first; the branching column is the most
/// fractional one, ties going to the lowest index. The search stops once
/// the best open bound is within `opts.mip_gap` (absolute) of the incumbent.
/// The returned duals are those of the LP relaxation at the incumbent node.
pub fn solve_milp(lp: &Lp, integer: &[bool], opts: &LpOptions) -> Result<LpSolution, LpError> {
    let mut simplex = Simplex::new(lp.clone(), opts.clone());
    branch_and_bound(&mut simplex, integer)
}

/// [`solve_milp`] over a warm simplex. Each node starts from its parent's
/// basis; afterwards the original bounds are reinstated and the simplex
/// holds the root basis, so a caller adding rows re-solves from there.
pub fn branch_and_bound(simplex: &mut Simplex, integer: &[bool]) -> Result<LpSolution, LpError> {
    let lp = simplex.lp().clone();
    let opts = simplex.options().clone();
    lp.check()?;
    if integer.len() != lp.num_columns() {
        return Err(LpError::Malformed(format!(
            "integrality mask has {} entries for {} columns",
            integer.len(),
            lp.num_columns()
        )));
    }
    for (j, &is_int) in integer.iter().enumerate() {
        if is_int && !(lp.lower[j].is_finite() && lp.upper[j].is_finite()) {
            return Err(LpError::UnboundedInteger(j));
        }
    }

    let sign = lp.direction.sign();
    // Integer columns carry integral bounds from the start.
    let mut lower = lp.lower.clone();
    let mut upper = lp.upper.clone();
    for j in 0..lp.num_columns() {
        if integer[j] {
            lower[j] = (lp.lower[j] - opts.int_tol).ceil();
            upper[j] = (lp.upper[j] + opts.int_tol).floor();
            if lower[j] > upper[j] {
                return Ok(LpSolution::without_point(Status::Infeasible, 0, 0));
            }
        }
    }

    let mut heap = BinaryHeap::new();
    heap.push(Node { bound: f64::NEG_INFINITY, id: 0, lower, upper, basis: None });
    let mut next_id = 1;
    let mut nodes = 0usize;
    let mut iterations = 0usize;
    let mut incumbent: Option<LpSolution> = None;
    let mut best = f64::INFINITY;
    let mut root_basis = None;

    let outcome = loop {
        let Some(node) = heap.pop() else {
            break Status::Optimal;
        };
        if node.bound >= best - opts.mip_gap {
            // Best-bound order: every remaining node is at least as bad.
            break Status::Optimal;
        }
        if nodes >= opts.max_nodes {
            break Status::NodeLimit;
        }
        for j in 0..lp.num_columns() {
            if simplex.lp().lower[j] != node.lower[j] || simplex.lp().upper[j] != node.upper[j] {
                simplex.set_bounds(j, node.lower[j], node.upper[j]);
            }
        }
        if let Some(basis) = &node.basis {
            simplex.restore(basis);
        }
        let sol = simplex.solve()?;
        nodes += 1;
        iterations += sol.iterations;
        if nodes == 1 {
            root_basis = simplex.basis();
        }
        match sol.status {
            Status::Optimal => {}
            Status::Infeasible => continue,
            Status::Unbounded => {
                incumbent = None;
                break Status::Unbounded;
            }
            Status::IterLimit | Status::NodeLimit => break Status::IterLimit,
        }
        let value = sign * sol.objective;
        if value >= best - opts.mip_gap {
            continue;
        }

        match branching_column(&sol.x, integer, opts.int_tol) {
            None => {
                let mut sol = sol;
                for (j, v) in sol.x.iter_mut().enumerate() {
                    if integer[j] {
                        *v = v.round();
                    }
                }
                sol.objective = lp.objective_value(&sol.x);
                best = sign * sol.objective;
                incumbent = Some(sol);
            }
            Some(j) => {
                let v = sol.x[j];
                let basis = simplex.basis();
                let mut down_upper = node.upper.clone();
                down_upper[j] = v.floor();
                heap.push(Node {
                    bound: value,
                    id: next_id,
                    lower: node.lower.clone(),
                    upper: down_upper,
                    basis: basis.clone(),
                });
                let mut up_lower = node.lower;
                up_lower[j] = v.ceil();
                heap.push(Node { bound: value, id: next_id + 1, lower: up_lower, upper: node.upper, basis });
                next_id += 2;
            }
        }
    };

    for j in 0..lp.num_columns() {
        if simplex.lp().lower[j] != lp.lower[j] || simplex.lp().upper[j] != lp.upper[j] {
            simplex.set_bounds(j, lp.lower[j], lp.upper[j]);
        }
    }
    if let Some(basis) = &root_basis {
        simplex.restore(basis);
    }
    if outcome == Status::Unbounded {
        return Ok(LpSolution::without_point(Status::Unbounded, iterations, nodes));
    }
    Ok(finish(incumbent, outcome, iterations, nodes))
}

fn finish(incumbent: Option<LpSolution>, status: Status, iterations: usize, nodes: usize) -> LpSolution {
    match incumbent {
        Some(mut sol) => {
            sol.status = status;
            sol.iterations = iterations;
            sol.nodes = nodes;
            sol
        }
        None if status == Status::Optimal => LpSolution::without_point(Status::Infeasible, iterations, nodes),
        None => LpSolution::without_point(status, iterations, nodes),
    }
}

/// Most fractional integer column, lowest index on ties.
fn branching_column(x: &[f64], integer: &[bool], tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, &v) in x.iter().enumerate() {
        if !integer[j] {
            continue;
        }
        let frac = v - v.floor();
        let dist = frac.min(1.0 - frac);
        if dist <= tol {
            continue;
        }
        if best.map_or(true, |(_, d)| dist > d) {
            best = Some((j, dist));
        }
    }
    best.map(|(j, _)| j)
}

/// Convenience dispatch: MILP when any column is integer, LP otherwise.
pub fn solve(lp: &Lp, integer: &[bool], opts: &LpOptions) -> Result<LpSolution, LpError> {
    if integer.iter().any(|&b| b) {
        solve_milp(lp, integer, opts)
    } else {
        solve_lp(lp, opts)
    }
}
