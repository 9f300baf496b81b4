use serde::{Deserialize, Serialize};

use crate::model::{AdjVarId, Constraint, Direction, Domain, Expr, Model, Relation, UncParamId, VarId};

/// How adjustable variables are replaced by here-and-now variables.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LdrMode {
    /// `y(xi) = y0 + sum_j Y_j xi_j` over the declared dependencies.
    #[default]
    Affine,
    /// `y(xi) = y0`; the bounds of `y` become bounds of `y0`.
    Static,
}

/// Decision rule of one adjustable variable in terms of new model variables.
#[derive(Clone, Debug, PartialEq)]
pub struct DecisionRule {
    pub adjustable: AdjVarId,
    pub name: String,
    pub intercept: VarId,
    pub slopes: Vec<(UncParamId, VarId)>,
}

impl DecisionRule {
    /// `y0 + sum_j Y_j xi_j` with variable values `values` (indexed by VarId).
    pub fn evaluate(&self, values: &[f64], xi: &[f64]) -> f64 {
        values[self.intercept.0] + self.slopes.iter().map(|&(p, v)| values[v.0] * xi[p.0]).sum::<f64>()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LdrCoefficients {
    pub rules: Vec<DecisionRule>,
}

fn substitute(expr: &Expr, rules: &[DecisionRule]) -> Expr {
    let mut out = expr.without_adjustables();
    for (&y, &c) in expr.lin_y() {
        let rule = &rules[y.0];
        out.add_x(rule.intercept, c);
        for &(p, v) in &rule.slopes {
            out.add_bilin(v, p, c);
        }
    }
    out
}

/// Replaces adjustable variables by decision rules. New variables follow
/// the existing ones, one intercept then one slope per dependency for each
/// adjustable in order. In affine mode every finite bound of `y` becomes an
/// uncertain constraint appended after the existing ones; the labels of
/// those rows are returned alongside.
pub(crate) fn apply_ldr_labeled(model: &Model, mode: LdrMode) -> (Model, LdrCoefficients, Vec<String>) {
    let mut out = model.clone();
    out.adjustables.clear();
    let mut rules = Vec::with_capacity(model.adjustables.len());
    for adj in &model.adjustables {
        let (lo, hi) = match mode {
            LdrMode::Affine => (f64::NEG_INFINITY, f64::INFINITY),
            LdrMode::Static => (adj.lower, adj.upper),
        };
        let intercept = out.push_var(format!("{}.0", adj.name), Domain::Continuous, lo, hi);
        let slopes = match mode {
            LdrMode::Affine => adj
                .deps
                .iter()
                .map(|&p| (p, out.push_var(format!("{}.{p}", adj.name), Domain::Continuous, f64::NEG_INFINITY, f64::INFINITY)))
                .collect(),
            LdrMode::Static => Vec::new(),
        };
        rules.push(DecisionRule { adjustable: adj.id, name: adj.name.clone(), intercept, slopes });
    }
    for c in &mut out.constraints {
        if c.expr.has_adjustables() {
            c.expr = substitute(&c.expr, &rules);
        }
    }
    out.objective = substitute(&out.objective, &rules);

    let mut labels = Vec::new();
    if mode == LdrMode::Affine {
        for (adj, rule) in model.adjustables.iter().zip(&rules) {
            let y = substitute(&Expr::adjustable(adj.id), &rules);
            if adj.lower.is_finite() {
                out.constraints.push(Constraint { expr: y.clone(), relation: Relation::Ge, rhs: adj.lower });
                labels.push(format!("{}.lb", rule.name));
            }
            if adj.upper.is_finite() {
                out.constraints.push(Constraint { expr: y, relation: Relation::Le, rhs: adj.upper });
                labels.push(format!("{}.ub", rule.name));
            }
        }
    }
    (out, LdrCoefficients { rules }, labels)
}

/// Replaces adjustable variables by decision rules; see [`LdrMode`].
pub fn apply_ldr(model: &Model, mode: LdrMode) -> (Model, LdrCoefficients) {
    let (m, rules, _) = apply_ldr_labeled(model, mode);
    (m, rules)
}

/// Moves an uncertain objective into an epigraph constraint appended last:
/// `f - t <= 0` when minimizing, `t - f <= 0` when maximizing. Models with
/// a certain objective are returned unchanged.
pub fn lift_objective(model: &Model) -> (Model, Option<VarId>) {
    if !model.objective.is_uncertain() {
        return (model.clone(), None);
    }
    let mut out = model.clone();
    let t = out.push_var("epigraph".to_string(), Domain::Continuous, f64::NEG_INFINITY, f64::INFINITY);
    let f = std::mem::take(&mut out.objective);
    let expr = match model.sense {
        Direction::Minimize => f - t,
        Direction::Maximize => Expr::var(t) - f,
    };
    out.constraints.push(Constraint { expr, relation: Relation::Le, rhs: 0.0 });
    out.objective = Expr::var(t);
    (out, Some(t))
}

/// A model with decision rules applied and the objective lifted, ready for
/// any robust pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct Prepared {
    pub model: Model,
    /// Label of every constraint of `model`.
    pub labels: Vec<String>,
    pub rules: LdrCoefficients,
    pub epigraph: Option<VarId>,
    /// Number of variables of the source model.
    pub original_vars: usize,
}

/// Decision rules first, so an objective that mentions adjustable variables
/// is lifted once it has become uncertain.
pub fn prepare(model: &Model, mode: LdrMode) -> Prepared {
    let (ruled, rules, bound_labels) = apply_ldr_labeled(model, mode);
    let (lifted, epigraph) = lift_objective(&ruled);
    let mut labels: Vec<String> = (0..model.constraints.len()).map(|i| format!("c{i}")).collect();
    labels.extend(bound_labels);
    if epigraph.is_some() {
        labels.push("objective".to_string());
    }
    debug_assert_eq!(labels.len(), lifted.constraints.len());
    Prepared { model: lifted, labels, rules, epigraph, original_vars: model.vars.len() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ConstraintKind;
    use crate::uncset::{PolyhedralSet, UncertaintySet};

    fn unit_interval() -> UncertaintySet {
        UncertaintySet::Polyhedral(PolyhedralSet::boxed(&[0.0], &[1.0]).unwrap())
    }

    #[test]
    fn tracking_rule() {
        // y >= xi with y(xi) = y0 + Y xi.
        let mut m = Model::new(Direction::Minimize);
        let xi = m.add_unc_params("d", 1, vec![0.5], unit_interval()).unwrap();
        let y = m.add_adjustable("y", &xi, f64::NEG_INFINITY, f64::INFINITY).unwrap();
        m.add_constraint(Expr::adjustable(y) - xi[0], Relation::Ge, 0.0).unwrap();
        let (out, rules) = apply_ldr(&m, LdrMode::Affine);
        assert!(out.adjustables().is_empty());
        assert_eq!(out.constraints().len(), 1);
        let rule = &rules.rules[0];
        let c = &out.constraints()[0];
        assert_eq!(c.kind(), ConstraintKind::Uncertain);
        // At y0 = 0, Y = 1 the row reads xi - xi >= 0 for every xi.
        let mut vals = vec![0.0; out.vars().len()];
        vals[rule.slopes[0].1 .0] = 1.0;
        for t in [0.0, 0.3, 1.0] {
            assert_eq!(c.expr.evaluate(&vals, &[t], &[]).unwrap(), 0.0);
            assert_eq!(rule.evaluate(&vals, &[t]), t);
        }
    }

    #[test]
    fn bounds_become_rows() {
        let mut m = Model::new(Direction::Minimize);
        let xi = m.add_unc_params("d", 1, vec![0.5], unit_interval()).unwrap();
        m.add_adjustable("y", &xi, 0.0, 1.0).unwrap();
        let p = prepare(&m, LdrMode::Affine);
        assert_eq!(p.labels, vec!["y.lb", "y.ub"]);
        assert_eq!(p.model.constraints()[0].relation, Relation::Ge);
        assert_eq!(p.model.constraints()[1].relation, Relation::Le);
        assert!(p.model.constraints().iter().all(|c| c.kind() == ConstraintKind::Uncertain));

        let s = prepare(&m, LdrMode::Static);
        assert!(s.labels.is_empty());
        assert_eq!((s.model.vars()[0].lower, s.model.vars()[0].upper), (0.0, 1.0));
    }

    #[test]
    fn epigraph() {
        let mut m = Model::new(Direction::Maximize);
        let x = m.add_var("x", Domain::Continuous, 0.0, 1.0).unwrap();
        let xi = m.add_unc_params("c", 1, vec![0.5], unit_interval()).unwrap();
        m.set_objective((xi[0] * x).into()).unwrap();
        let (out, t) = lift_objective(&m);
        let t = t.unwrap();
        assert_eq!(out.objective(), &Expr::var(t));
        let row = out.constraints().last().unwrap();
        // t - xi x <= 0 at t = 2, x = 1, xi = 0.5 gives 1.5.
        assert_eq!(row.expr.evaluate(&[1.0, 2.0], &[0.5], &[]).unwrap(), 1.5);

        let mut d = Model::new(Direction::Minimize);
        let x = d.add_var("x", Domain::Continuous, 0.0, 1.0).unwrap();
        d.set_objective(Expr::var(x)).unwrap();
        assert_eq!(lift_objective(&d), (d.clone(), None));
    }

    #[test]
    fn objective_with_adjustable_is_lifted_after_rules() {
        let mut m = Model::new(Direction::Minimize);
        let xi = m.add_unc_params("d", 1, vec![0.5], unit_interval()).unwrap();
        let y = m.add_adjustable("y", &xi, 0.0, f64::INFINITY).unwrap();
        m.set_objective(Expr::adjustable(y)).unwrap();
        let p = prepare(&m, LdrMode::Affine);
        assert!(p.epigraph.is_some());
        assert_eq!(p.labels, vec!["y.lb", "objective"]);
        let s = prepare(&m, LdrMode::Static);
        assert!(s.epigraph.is_none());
    }
}
