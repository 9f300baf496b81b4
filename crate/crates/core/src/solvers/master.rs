use robustkit_lp::{branch_and_bound, Lp, LpError, LpOptions, LpSolution, Simplex, Status};

use super::SolveStats;
use crate::transform::LinearRow;

/// Bound placed on columns with an infinite bound when a master relaxation
/// is unbounded; a final point resting on it is reported unbounded.
pub(crate) const BIG_BOX: f64 = 1e6;

/// Master problem of an iterative loop over the LP/MILP kernel. Rows added
/// between solves are reoptimized from the previous basis.
pub(crate) struct Master {
    simplex: Simplex,
    integer: Vec<bool>,
    allow_box: bool,
    boxed: Vec<usize>,
    /// Index of the first cut row; every row from here on is prunable.
    first_cut: usize,
    /// Consecutive solves each cut row has been slack.
    age: Vec<usize>,
}

/// Solves a cut may stay slack before it is dropped.
const PRUNE_AGE: usize = 8;

impl Master {
    pub(crate) fn new(lp: Lp, integer: Vec<bool>, opts: LpOptions, allow_box: bool) -> Self {
        let first_cut = lp.num_rows();
        Master { simplex: Simplex::new(lp, opts), integer, allow_box, boxed: Vec::new(), first_cut, age: Vec::new() }
    }

    pub(crate) fn add_column(&mut self, lower: f64, upper: f64) -> usize {
        self.integer.push(false);
        self.simplex.add_column(0.0, lower, upper)
    }

    /// Adds a permanent row; must precede every cut.
    pub(crate) fn add_row(&mut self, row: &LinearRow) {
        debug_assert!(self.age.is_empty());
        self.simplex.add_row(row.coeffs.iter().map(|(&j, &v)| (j, v)).collect(), row.relation, row.rhs);
        self.first_cut = self.simplex.lp().num_rows();
    }

    /// Adds a row that may later be pruned once it stays slack.
    pub(crate) fn add_cut(&mut self, row: &LinearRow) {
        self.simplex.add_row(row.coeffs.iter().map(|(&j, &v)| (j, v)).collect(), row.relation, row.rhs);
        self.age.push(0);
    }

    /// Ages cut rows at `x` and removes those slack for `PRUNE_AGE` solves.
    /// Returns the number removed.
    pub(crate) fn prune(&mut self, x: &[f64]) -> usize {
        let rows = &self.simplex.lp().rows[self.first_cut..];
        let mut drop = Vec::new();
        for (k, (row, age)) in rows.iter().zip(self.age.iter_mut()).enumerate() {
            let slack = -row.relation.violation(row.activity(x), row.rhs);
            if slack > 1e-6 * (1.0 + row.rhs.abs()) {
                *age += 1;
                if *age >= PRUNE_AGE {
                    drop.push(k);
                }
            } else {
                *age = 0;
            }
        }
        if drop.is_empty() {
            return 0;
        }
        for &k in drop.iter().rev() {
            self.age.remove(k);
        }
        let rows: Vec<usize> = drop.iter().map(|k| k + self.first_cut).collect();
        self.simplex.remove_rows(&rows);
        rows.len()
    }

    pub(crate) fn solve(&mut self, stats: &mut SolveStats) -> Result<LpSolution, LpError> {
        let mut sol = self.solve_once(stats)?;
        if sol.status == Status::Unbounded && self.allow_box && self.boxed.is_empty() {
            let (lower, upper) = (self.simplex.lp().lower.clone(), self.simplex.lp().upper.clone());
            for j in 0..lower.len() {
                if lower[j] == f64::NEG_INFINITY || upper[j] == f64::INFINITY {
                    self.simplex.set_bounds(j, lower[j].max(-BIG_BOX), upper[j].min(BIG_BOX));
                    self.boxed.push(j);
                }
            }
            log::debug!("master unbounded; boxing {} columns at {BIG_BOX:e}", self.boxed.len());
            sol = self.solve_once(stats)?;
        }
        Ok(sol)
    }

    fn solve_once(&mut self, stats: &mut SolveStats) -> Result<LpSolution, LpError> {
        let sol = if self.integer.iter().any(|&b| b) {
            branch_and_bound(&mut self.simplex, &self.integer)?
        } else {
            self.simplex.solve()?
        };
        stats.master_solves += 1;
        stats.lp_iterations += sol.iterations;
        stats.nodes += sol.nodes;
        Ok(sol)
    }

    /// True when a boxed column sits on the artificial bound.
    pub(crate) fn at_box(&self, x: &[f64]) -> bool {
        self.boxed.iter().any(|&j| x[j].abs() >= BIG_BOX * (1.0 - 1e-9))
    }
}
