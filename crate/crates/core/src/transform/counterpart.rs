use super::deterministic::{ColumnOrigin, ConeTerm, ConicRow, DeterministicModel, LinExpr, LinearRow, RowOrigin};
use super::ldr::{prepare, LdrMode, Prepared};
use super::rows::{resolve_groups, UncertainRow};
use super::TransformError;
use crate::model::{ConstraintKind, Domain, Expr, Model, Relation, UncParamId};
use crate::uncset::{EllipsoidalSet, PolyhedralSet, ResolvedSet};

/// Robust counterpart together with the rewritten model it was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct Counterpart {
    pub model: DeterministicModel,
    pub prepared: Prepared,
    /// Normal form of every uncertain constraint of `prepared.model`.
    pub rows: Vec<UncertainRow>,
}

/// Dualizes `max { a(x)' xi : P xi <= b }` for one group: adds multipliers
/// `lam[source][first_row + i] >= 0`, one row `P' lam = a(x)` per set
/// coordinate, and returns `b' lam` for the budget row.
pub fn reformulate_polyhedral(
    dm: &mut DeterministicModel,
    source: &str,
    a: &[LinExpr],
    params: &[UncParamId],
    set: &PolyhedralSet,
    first_row: usize,
) -> LinExpr {
    let lam: Vec<usize> = (0..set.num_facets())
        .map(|i| {
            let row = first_row + i;
            dm.add_column(
                format!("lam[{source}][{row}]"),
                Domain::Continuous,
                0.0,
                f64::INFINITY,
                ColumnOrigin::Dual { source: source.to_string(), row },
            )
        })
        .collect();
    for (j, (aj, &param)) in a.iter().zip(params).enumerate() {
        let mut lhs = LinExpr::default();
        for (i, &col) in lam.iter().enumerate() {
            lhs.add_term(col, set.mat()[i][j]);
        }
        lhs.add_scaled(aj, -1.0);
        dm.rows.push(LinearRow::from_expr(
            &lhs,
            Relation::Eq,
            0.0,
            RowOrigin::DualEquality { source: source.to_string(), param },
        ));
    }
    let mut budget = LinExpr::default();
    for (&col, &b) in lam.iter().zip(set.rhs()) {
        budget.add_term(col, b);
    }
    budget
}

/// Splits `max { a(x)' xi : xi in E }` into the linear part `a(x)' mean`
/// and the cone `sqrt(a(x)' cov a(x))`.
pub fn reformulate_ellipsoidal(a: &[LinExpr], group: &str, params: &[UncParamId], set: &EllipsoidalSet) -> (LinExpr, ConeTerm) {
    let mut center = LinExpr::default();
    for (aj, &m) in a.iter().zip(set.mean()) {
        center.add_scaled(aj, m);
    }
    let cone = ConeTerm {
        group: group.to_string(),
        params: params.to_vec(),
        components: a.to_vec(),
        mean: set.mean().to_vec(),
        cov: set.cov().clone(),
        factor: set.factor().clone(),
    };
    (center, cone)
}

pub(crate) fn expr_to_lin(e: &Expr) -> LinExpr {
    debug_assert!(!e.is_uncertain() && !e.has_adjustables());
    let mut out = LinExpr::constant(e.constant_term());
    for (&x, &v) in e.lin_x() {
        out.add_term(x.0, v);
    }
    out
}

fn reformulate_row(
    dm: &mut DeterministicModel,
    row: &UncertainRow,
    model: &Model,
    sets: &[Result<ResolvedSet, crate::uncset::SetError>],
) -> Result<(), TransformError> {
    let mut linear = row.f.clone();
    let mut cones = Vec::new();
    let mut dual_rows = 0;
    for g in row.groups(model) {
        let group = &model.groups()[g];
        let set = sets[g].as_ref().map_err(|e| TransformError::NoApplicableReformulation {
            constraint: row.label.clone(),
            reason: format!("group `{}`: {e}", group.name),
        })?;
        let a: Vec<LinExpr> = group.ids.iter().map(|p| row.a.get(p).cloned().unwrap_or_default()).collect();
        match set {
            ResolvedSet::Polyhedral(s) => {
                let budget = reformulate_polyhedral(dm, &row.label, &a, &group.ids, s, dual_rows);
                dual_rows += s.num_facets();
                linear.add_scaled(&budget, 1.0);
            }
            ResolvedSet::Ellipsoidal(s) => {
                let (center, cone) = reformulate_ellipsoidal(&a, &group.name, &group.ids, s);
                linear.add_scaled(&center, 1.0);
                cones.push(cone);
            }
        }
    }
    if cones.is_empty() {
        dm.rows.push(LinearRow::from_expr(&linear, Relation::Le, row.rhs, RowOrigin::DualBudget { source: row.label.clone() }));
    } else {
        dm.conic_rows.push(ConicRow { source: row.label.clone(), linear, cones, rhs: row.rhs });
    }
    Ok(())
}

/// Applies decision rules, lifts an uncertain objective, and replaces every
/// uncertain constraint by its duality-based counterpart.
pub fn robust_counterpart(model: &Model, mode: LdrMode) -> Result<Counterpart, TransformError> {
    let prepared = prepare(model, mode);
    let pm = &prepared.model;
    let sets = resolve_groups(pm);
    let mut dm = DeterministicModel::new(pm.sense());
    for (j, v) in pm.vars().iter().enumerate() {
        dm.add_column(v.name.clone(), v.domain, v.lower, v.upper, ColumnOrigin::Model(j));
    }
    dm.objective = expr_to_lin(pm.objective());
    let mut rows = Vec::new();
    for (i, c) in pm.constraints().iter().enumerate() {
        let label = &prepared.labels[i];
        match c.kind() {
            ConstraintKind::Deterministic => {
                dm.rows.push(LinearRow::from_expr(
                    &expr_to_lin(&c.expr),
                    c.relation,
                    c.rhs,
                    RowOrigin::Constraint { source: label.clone() },
                ));
            }
            ConstraintKind::Uncertain => {
                for row in UncertainRow::from_constraint(label, i, c) {
                    reformulate_row(&mut dm, &row, pm, &sets)?;
                    rows.push(row);
                }
            }
        }
    }
    Ok(Counterpart { model: dm, prepared, rows })
}

