//! Embedded linear and mixed-integer programming kernel.
//!
//! [`solve_lp`] runs a bounded-variable revised simplex (dense basis inverse,
//! Dantzig pricing with a Bland fallback on degenerate stalls, Harris ratio
//! test). [`Simplex`] keeps the basis between solves and re-solves with the
//! dual simplex after rows are added or bounds change. [`solve_milp`] wraps
//! it in a deterministic best-bound branch-and-bound. [`verify_solution`] recomputes primal and dual
//! optimality conditions independently of the solver.

mod milp;
mod problem;
mod simplex;
mod verify;

pub use milp::{branch_and_bound, solve, solve_milp};
pub use problem::{Direction, Lp, LpOptions, LpSolution, Relation, Row, Status};
pub use simplex::{solve_lp, Basis, Simplex};
pub use verify::{verify_solution, VerifyReport};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum LpError {
    #[error("malformed problem: {0}")]
    Malformed(String),
    #[error("integer column {0} needs finite bounds")]
    UnboundedInteger(usize),
}
