use robustkit_lp::{solve_lp, Direction, Lp, LpOptions, Relation, Status};

use super::{SetError, Support};
use crate::linalg::{dot, Matrix};

/// `{ xi : P xi <= b }`, validated nonempty and bounded at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyhedralSet {
    mat: Matrix,
    rhs: Vec<f64>,
}

impl PolyhedralSet {
    pub fn new(mat: Matrix, rhs: Vec<f64>) -> Result<Self, SetError> {
        let k = mat.first().map_or(0, Vec::len);
        if k == 0 {
            return Err(SetError::DimensionMismatch("polyhedral set needs at least one row and column".into()));
        }
        if mat.len() != rhs.len() {
            return Err(SetError::DimensionMismatch(format!(
                "{} matrix rows but {} right-hand sides",
                mat.len(),
                rhs.len()
            )));
        }
        if let Some(i) = mat.iter().position(|r| r.len() != k) {
            return Err(SetError::DimensionMismatch(format!("row {i} has {} entries, expected {k}", mat[i].len())));
        }
        if mat.iter().flatten().chain(&rhs).any(|v| !v.is_finite()) {
            return Err(SetError::DimensionMismatch("non-finite entry in polyhedral data".into()));
        }
        let set = PolyhedralSet { mat, rhs };
        set.validate()?;
        Ok(set)
    }

    /// Axis-aligned box `lower <= xi <= upper`.
    pub fn boxed(lower: &[f64], upper: &[f64]) -> Result<Self, SetError> {
        let k = lower.len();
        if upper.len() != k {
            return Err(SetError::DimensionMismatch("box bounds differ in length".into()));
        }
        let mut mat = Vec::with_capacity(2 * k);
        let mut rhs = Vec::with_capacity(2 * k);
        for j in 0..k {
            let mut row = vec![0.0; k];
            row[j] = 1.0;
            mat.push(row);
            rhs.push(upper[j]);
        }
        for j in 0..k {
            let mut row = vec![0.0; k];
            row[j] = -1.0;
            mat.push(row);
            rhs.push(-lower[j]);
        }
        PolyhedralSet::new(mat, rhs)
    }

    pub fn dim(&self) -> usize {
        self.mat[0].len()
    }

    pub fn num_facets(&self) -> usize {
        self.rhs.len()
    }

    pub fn mat(&self) -> &Matrix {
        &self.mat
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// Largest row violation `max_i (P xi - b)_i`.
    pub fn violation(&self, xi: &[f64]) -> f64 {
        self.mat
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| dot(row, xi) - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn lp(&self, direction: Direction, cost: &[f64]) -> Lp {
        let k = self.dim();
        let mut lp = Lp::new(direction);
        for &c in cost.iter().take(k) {
            lp.add_column(c, f64::NEG_INFINITY, f64::INFINITY);
        }
        for (row, &b) in self.mat.iter().zip(&self.rhs) {
            let coeffs = row.iter().copied().enumerate().filter(|&(_, a)| a != 0.0).collect();
            lp.add_row(coeffs, Relation::Le, b);
        }
        lp
    }

    fn validate(&self) -> Result<(), SetError> {
        let k = self.dim();
        let opts = LpOptions::default();
        let feas = solve_lp(&self.lp(Direction::Minimize, &vec![0.0; k]), &opts)?;
        match feas.status {
            Status::Optimal => {}
            Status::Infeasible => return Err(SetError::EmptySet),
            other => return Err(SetError::Kernel(format!("feasibility check ended with {other:?}"))),
        }
        for j in 0..k {
            for s in [1.0, -1.0] {
                let mut cost = vec![0.0; k];
                cost[j] = s;
                let sol = solve_lp(&self.lp(Direction::Maximize, &cost), &opts)?;
                match sol.status {
                    Status::Optimal => {}
                    Status::Unbounded => return Err(SetError::UnboundedSet),
                    other => return Err(SetError::Kernel(format!("boundedness check ended with {other:?}"))),
                }
            }
        }
        Ok(())
    }

    /// `max { a' xi : P xi <= b }` by the simplex kernel.
    pub fn support(&self, a: &[f64]) -> Result<Support, SetError> {
        if a.len() != self.dim() {
            return Err(SetError::DimensionMismatch(format!("direction of length {} for a {}-dimensional set", a.len(), self.dim())));
        }
        let sol = solve_lp(&self.lp(Direction::Maximize, a), &LpOptions::default())?;
        match sol.status {
            Status::Optimal => Ok(Support { value: sol.objective, argmax: sol.x }),
            Status::Infeasible => Err(SetError::EmptySet),
            Status::Unbounded => Err(SetError::UnboundedSet),
            other => Err(SetError::Kernel(format!("support LP ended with {other:?}"))),
        }
    }
}
