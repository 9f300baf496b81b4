use std::collections::BTreeMap;

use super::LinExpr;
use crate::model::{Constraint, ConstraintKind, Model, Relation, UncParamId};
use crate::uncset::{ResolvedSet, SetError};

/// Uncertain constraint in normal form
/// `f(z) + sum_p a_p(z) xi_p <= rhs` for every `xi` in the set.
#[derive(Clone, Debug, PartialEq)]
pub struct UncertainRow {
    pub label: String,
    /// Index of the constraint this row came from.
    pub source: usize,
    pub f: LinExpr,
    pub a: BTreeMap<UncParamId, LinExpr>,
    pub rhs: f64,
}

/// Worst case of an uncertain row at a fixed point.
#[derive(Clone, Debug, PartialEq)]
pub struct Separation {
    /// `max_xi (f + a' xi) - rhs`; positive when violated.
    pub value: f64,
    /// Maximizer over all parameters; untouched groups sit at nominal.
    pub xi: Vec<f64>,
}

impl UncertainRow {
    fn signed(label: String, source: usize, c: &Constraint, sign: f64) -> Self {
        let e = &c.expr;
        let mut f = LinExpr::constant(sign * e.constant_term());
        for (&x, &v) in e.lin_x() {
            f.add_term(x.0, sign * v);
        }
        let mut a: BTreeMap<UncParamId, LinExpr> = BTreeMap::new();
        for (&p, &v) in e.lin_xi() {
            a.entry(p).or_default().constant += sign * v;
        }
        for (&(x, p), &v) in e.bilin() {
            a.entry(p).or_default().add_term(x.0, sign * v);
        }
        UncertainRow { label, source, f, a, rhs: sign * c.rhs }
    }

    /// Normal form of an uncertain constraint: `>=` rows are negated and
    /// `=` rows give one row per direction.
    pub fn from_constraint(label: &str, source: usize, c: &Constraint) -> Vec<UncertainRow> {
        match c.relation {
            Relation::Le => vec![Self::signed(label.to_string(), source, c, 1.0)],
            Relation::Ge => vec![Self::signed(label.to_string(), source, c, -1.0)],
            Relation::Eq => vec![
                Self::signed(format!("{label}.le"), source, c, 1.0),
                Self::signed(format!("{label}.ge"), source, c, -1.0),
            ],
        }
    }

    /// Parameter groups the row depends on, in group order.
    pub fn groups(&self, model: &Model) -> Vec<usize> {
        let mut g: Vec<usize> = self.a.keys().filter_map(|&p| model.param_location(p).map(|l| l.0)).collect();
        g.dedup();
        g
    }

    /// Coefficient vector `a(z)` over the coordinates of one group.
    pub fn direction(&self, z: &[f64], model: &Model, group: usize) -> Vec<f64> {
        model.groups()[group].ids.iter().map(|p| self.a.get(p).map_or(0.0, |e| e.evaluate(z))).collect()
    }

    /// Left-hand side minus right-hand side at a scenario.
    pub fn value(&self, z: &[f64], xi: &[f64]) -> f64 {
        self.f.evaluate(z) + self.a.iter().map(|(p, e)| e.evaluate(z) * xi[p.0]).sum::<f64>() - self.rhs
    }

    /// Deterministic left-hand side `f(z) + a(z)' xi` at a fixed scenario.
    pub fn instantiate(&self, xi: &[f64]) -> LinExpr {
        let mut out = self.f.clone();
        for (p, e) in &self.a {
            out.add_scaled(e, xi[p.0]);
        }
        out
    }

    /// `max_xi f(z) + a(z)' xi - rhs` over the product of the group sets.
    pub fn separate(&self, z: &[f64], model: &Model, sets: &[Result<ResolvedSet, SetError>]) -> Result<Separation, SetError> {
        let mut xi = model.nominal_point();
        let mut value = self.f.evaluate(z) - self.rhs;
        for g in self.groups(model) {
            let set = sets[g].as_ref().map_err(Clone::clone)?;
            let support = set.support(&self.direction(z, model, g))?;
            value += support.value;
            for (p, v) in model.groups()[g].ids.iter().zip(support.argmax) {
                xi[p.0] = v;
            }
        }
        Ok(Separation { value, xi })
    }
}

/// Normal-form rows of every uncertain constraint of a prepared model.
pub(crate) fn uncertain_rows(model: &Model, labels: &[String]) -> Vec<UncertainRow> {
    model
        .constraints()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.kind() == ConstraintKind::Uncertain)
        .flat_map(|(i, c)| UncertainRow::from_constraint(&labels[i], i, c))
        .collect()
}

/// Geometry of every group, resolved once per solve.
pub(crate) fn resolve_groups(model: &Model) -> Vec<Result<ResolvedSet, SetError>> {
    model.groups().iter().map(|g| g.set.resolve()).collect()
}
