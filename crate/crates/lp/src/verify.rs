use crate::problem::{Lp, LpSolution, Relation};

/// Independent recomputation of the optimality conditions of a solution.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyReport {
    /// Largest row or bound violation.
    pub max_primal_violation: f64,
    /// Largest sign violation of a row dual or reduced cost.
    pub max_dual_violation: f64,
    /// Largest complementary-slackness product.
    pub max_complementarity: f64,
    /// `|c'x + offset - reported objective|`.
    pub objective_mismatch: f64,
    /// Dual objective recomputed from the row duals and reduced costs.
    pub dual_objective: f64,
    pub duality_gap: f64,
}

impl VerifyReport {
    pub fn passes(&self, primal_tol: f64, dual_tol: f64) -> bool {
        self.max_primal_violation <= primal_tol
            && self.max_dual_violation <= dual_tol
            && self.max_complementarity <= dual_tol
            && self.objective_mismatch <= primal_tol * (1.0 + self.dual_objective.abs())
    }
}

/// Recomputes row activities and reduced costs for a claimed optimum.
pub fn verify_solution(lp: &Lp, sol: &LpSolution) -> VerifyReport {
    let n = lp.num_columns();
    let x = &sol.x;
    let sign = lp.direction.sign();
    let mut report = VerifyReport::default();
    if x.len() != n || sol.duals.len() != lp.num_rows() {
        report.max_primal_violation = f64::INFINITY;
        report.max_dual_violation = f64::INFINITY;
        return report;
    }

    for j in 0..n {
        let v = (lp.lower[j] - x[j]).max(x[j] - lp.upper[j]).max(0.0);
        report.max_primal_violation = report.max_primal_violation.max(v);
    }

    // Work in minimization form: y_min = sign * y, d_min = sign * d.
    let mut reduced: Vec<f64> = lp.objective.iter().map(|c| sign * c).collect();
    let mut dual_obj = 0.0;
    for (row, &dual) in lp.rows.iter().zip(&sol.duals) {
        let y = sign * dual;
        let activity = row.activity(x);
        let viol = row.relation.violation(activity, row.rhs).max(0.0);
        report.max_primal_violation = report.max_primal_violation.max(viol);

        let wrong_sign = match row.relation {
            Relation::Le => y.max(0.0),
            Relation::Ge => (-y).max(0.0),
            Relation::Eq => 0.0,
        };
        report.max_dual_violation = report.max_dual_violation.max(wrong_sign);
        if row.relation != Relation::Eq {
            let slack = (activity - row.rhs).abs();
            report.max_complementarity = report.max_complementarity.max(y.abs() * slack);
        }
        for &(j, a) in &row.coeffs {
            reduced[j] -= a * y;
        }
        dual_obj += row.rhs * y;
    }

    for j in 0..n {
        let d = reduced[j];
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        if d > 0.0 {
            if lo.is_finite() {
                report.max_complementarity = report.max_complementarity.max(d * (x[j] - lo).abs());
                dual_obj += d * lo;
            } else {
                report.max_dual_violation = report.max_dual_violation.max(d);
                dual_obj += d * x[j];
            }
        } else if d < 0.0 {
            if hi.is_finite() {
                report.max_complementarity = report.max_complementarity.max(-d * (hi - x[j]).abs());
                dual_obj += d * hi;
            } else {
                report.max_dual_violation = report.max_dual_violation.max(-d);
                dual_obj += d * x[j];
            }
        }
    }

    let primal = lp.objective_value(x);
    report.dual_objective = sign * dual_obj + lp.offset;
    report.objective_mismatch = (primal - sol.objective).abs();
    report.duality_gap = (primal - report.dual_objective).abs();
    report
}
