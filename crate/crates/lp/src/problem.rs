use serde::{Deserialize, Serialize};

use crate::LpError;

/// Optimization direction of an objective.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "min")]
    Minimize,
    #[serde(rename = "max")]
    Maximize,
}

impl Direction {
    /// `+1` for minimization, `-1` for maximization.
    pub fn sign(self) -> f64 {
        match self {
            Direction::Minimize => 1.0,
            Direction::Maximize => -1.0,
        }
    }

    /// True when `a` is strictly better than `b` by more than `tol`.
    pub fn improves(self, a: f64, b: f64, tol: f64) -> bool {
        match self {
            Direction::Minimize => a < b - tol,
            Direction::Maximize => a > b + tol,
        }
    }
}

/// Row relation `activity ? rhs`.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[default]
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl Relation {
    pub fn flipped(self) -> Relation {
        match self {
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            Relation::Eq => Relation::Eq,
        }
    }

    /// Signed violation of `activity ? rhs`; zero or negative when satisfied.
    pub fn violation(self, activity: f64, rhs: f64) -> f64 {
        match self {
            Relation::Le => activity - rhs,
            Relation::Ge => rhs - activity,
            Relation::Eq => (activity - rhs).abs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Row {
    pub fn new(coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> Self {
        Row { coeffs, relation, rhs }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }
}

/// A linear program over bounded columns:
///
/// ```text
/// min/max  c'x + offset
/// s.t.     rows[i].coeffs . x  (<=, >=, =)  rows[i].rhs
///          lower <= x <= upper
/// ```
///
/// Bounds may be infinite. Duplicate column indices within a row are summed.
#[derive(Clone, Debug, PartialEq)]
pub struct Lp {
    pub direction: Direction,
    pub objective: Vec<f64>,
    pub offset: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
}

impl Lp {
    pub fn new(direction: Direction) -> Self {
        Lp {
            direction,
            objective: Vec::new(),
            offset: 0.0,
            lower: Vec::new(),
            upper: Vec::new(),
            rows: Vec::new(),
        }
    }

    /// Appends a column and returns its index.
    pub fn add_column(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.len() - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> usize {
        self.rows.push(Row::new(coeffs, relation, rhs));
        self.rows.len() - 1
    }

    pub fn num_columns(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.offset + self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    pub(crate) fn check(&self) -> Result<(), LpError> {
        let n = self.objective.len();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::Malformed(format!(
                "{} objective entries but {} lower / {} upper bounds",
                n,
                self.lower.len(),
                self.upper.len()
            )));
        }
        for j in 0..n {
            if self.lower[j].is_nan() || self.upper[j].is_nan() || !self.objective[j].is_finite() {
                return Err(LpError::Malformed(format!("column {j} has NaN bound or non-finite cost")));
            }
            if self.lower[j] > self.upper[j] {
                return Err(LpError::Malformed(format!(
                    "column {j} has crossed bounds [{}, {}]",
                    self.lower[j], self.upper[j]
                )));
            }
            if self.lower[j] == f64::INFINITY || self.upper[j] == f64::NEG_INFINITY {
                return Err(LpError::Malformed(format!("column {j} has an empty bound interval")));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(LpError::Malformed(format!("row {i} has non-finite rhs")));
            }
            for &(j, a) in &row.coeffs {
                if j >= n {
                    return Err(LpError::Malformed(format!("row {i} references column {j} of {n}")));
                }
                if !a.is_finite() {
                    return Err(LpError::Malformed(format!("row {i} has a non-finite coefficient")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    IterLimit,
    NodeLimit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: Status,
    /// Objective including `offset`; NaN unless a point is available.
    pub objective: f64,
    pub x: Vec<f64>,
    /// One multiplier per row, in the sign convention of the problem's
    /// direction: for a maximization `<=` rows carry nonnegative duals,
    /// for a minimization they carry nonpositive duals.
    pub duals: Vec<f64>,
    pub iterations: usize,
    /// LP relaxations solved (1 for a pure LP).
    pub nodes: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    pub(crate) fn without_point(status: Status, iterations: usize, nodes: usize) -> Self {
        LpSolution {
            status,
            objective: f64::NAN,
            x: Vec::new(),
            duals: Vec::new(),
            iterations,
            nodes,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpOptions {
    pub max_iters: usize,
    pub feas_tol: f64,
    pub opt_tol: f64,
    /// Smallest usable pivot, relative to the largest entry (or one) of
    /// the entering column.
    pub pivot_tol: f64,
    pub refactor_every: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub stall_limit: usize,
    /// Absolute optimality gap for branch-and-bound.
    pub mip_gap: f64,
    pub int_tol: f64,
    pub max_nodes: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            max_iters: 50_000,
            feas_tol: 1e-7,
            opt_tol: 1e-7,
            pivot_tol: 1e-7,
            refactor_every: 50,
            stall_limit: 30,
            mip_gap: 1e-6,
            int_tol: 1e-6,
            max_nodes: 100_000,
        }
    }
}
