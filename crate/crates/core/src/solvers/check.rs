use serde::{Deserialize, Serialize};

use super::{RowReport, SolveError};
use crate::model::{ConstraintKind, Model, ModelError};
use crate::transform::{LdrMode, UncertainRow};
use crate::transform::apply_ldr_labeled;
use crate::transform::{resolve_groups, uncertain_rows};
use crate::uncset::{ResolvedSet, SetError};

/// Coefficients of one decision rule; slopes follow the dependency order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RulePoint {
    pub intercept: f64,
    #[serde(default)]
    pub slopes: Vec<f64>,
}

/// Candidate solution: decision values and, for adjustable models, one
/// decision rule per adjustable variable.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Point {
    pub x: Vec<f64>,
    #[serde(default)]
    pub rules: Vec<RulePoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowCheck {
    pub label: String,
    /// `max lhs - rhs` over the set; positive when violated.
    pub value: f64,
    pub worst_xi: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RobustnessReport {
    pub rows: Vec<RowCheck>,
    /// Largest violation of bounds and certain constraints.
    pub deterministic_violation: f64,
    pub max_violation: f64,
    pub tol: f64,
    pub feasible: bool,
}

/// Worst case of every uncertain row at `z`; rows over a set without a
/// separation oracle get no value.
pub(crate) fn worst_case_reports(
    model: &Model,
    rows: &[UncertainRow],
    z: &[f64],
    sets: &[Result<ResolvedSet, SetError>],
) -> (Vec<RowReport>, f64) {
    let mut worst = 0.0f64;
    let reports = rows
        .iter()
        .map(|row| match row.separate(z, model, sets) {
            Ok(s) => {
                worst = worst.max(s.value);
                RowReport { label: row.label.clone(), slack: Some(-s.value), worst_xi: Some(s.xi) }
            }
            Err(_) => RowReport { label: row.label.clone(), slack: None, worst_xi: None },
        })
        .collect();
    (reports, worst)
}

/// Separation value and worst-case scenario of every uncertain constraint
/// at a candidate point.
pub fn check_robust_feasibility(model: &Model, point: &Point, tol: f64) -> Result<RobustnessReport, SolveError> {
    let n = model.vars().len();
    if point.x.len() != n {
        return Err(ModelError::DimensionMismatch(format!("point has {} values for {n} variables", point.x.len())).into());
    }
    if point.rules.len() != model.adjustables().len() {
        return Err(ModelError::DimensionMismatch(format!(
            "point has {} decision rules for {} adjustable variables",
            point.rules.len(),
            model.adjustables().len()
        ))
        .into());
    }
    let mut z = point.x.clone();
    for (adj, rule) in model.adjustables().iter().zip(&point.rules) {
        if rule.slopes.len() != adj.deps.len() {
            return Err(ModelError::DimensionMismatch(format!(
                "rule for `{}` has {} slopes for {} dependencies",
                adj.name,
                rule.slopes.len(),
                adj.deps.len()
            ))
            .into());
        }
        z.push(rule.intercept);
        z.extend(&rule.slopes);
    }

    let (pm, _, bound_labels) = apply_ldr_labeled(model, LdrMode::Affine);
    let mut labels: Vec<String> = (0..model.constraints().len()).map(|i| format!("c{i}")).collect();
    labels.extend(bound_labels);
    let sets = resolve_groups(&pm);
    let rows = uncertain_rows(&pm, &labels);

    let mut checks = Vec::with_capacity(rows.len());
    let mut max_violation = 0.0f64;
    for row in &rows {
        let s = row.separate(&z, &pm, &sets).map_err(|e| SolveError::SeparationUnavailable {
            constraint: row.label.clone(),
            reason: e.to_string(),
        })?;
        max_violation = max_violation.max(s.value);
        checks.push(RowCheck { label: row.label.clone(), value: s.value, worst_xi: s.xi });
    }

    let mut det = 0.0f64;
    for (v, &val) in model.vars().iter().zip(&point.x) {
        det = det.max(v.lower - val).max(val - v.upper);
    }
    let nominal = pm.nominal_point();
    for c in pm.constraints().iter().filter(|c| c.kind() == ConstraintKind::Deterministic) {
        let lhs = c.expr.evaluate(&z, &nominal, &[])?;
        det = det.max(c.relation.violation(lhs, c.rhs));
    }
    let max_violation = max_violation.max(det);
    Ok(RobustnessReport { rows: checks, deterministic_violation: det, max_violation, tol, feasible: max_violation <= tol })
}
