use super::deterministic::{ColumnOrigin, DeterministicModel, LinExpr, LinearRow, RowOrigin};
use crate::model::{Domain, Expr, Model};

fn frozen(e: &Expr, xi: &[f64], y_offset: usize) -> LinExpr {
    let e = e.substitute_params(xi);
    let mut out = LinExpr::constant(e.constant_term());
    for (&x, &v) in e.lin_x() {
        out.add_term(x.0, v);
    }
    for (&y, &v) in e.lin_y() {
        out.add_term(y_offset + y.0, v);
    }
    out
}

/// Fixes every parameter at its nominal value. Adjustable variables become
/// ordinary continuous columns after the decision variables.
pub fn nominal_substitute(model: &Model) -> DeterministicModel {
    let xi = model.nominal_point();
    let n = model.vars().len();
    let mut dm = DeterministicModel::new(model.sense());
    for (j, v) in model.vars().iter().enumerate() {
        dm.add_column(v.name.clone(), v.domain, v.lower, v.upper, ColumnOrigin::Model(j));
    }
    for (k, a) in model.adjustables().iter().enumerate() {
        dm.add_column(a.name.clone(), Domain::Continuous, a.lower, a.upper, ColumnOrigin::Adjustable(k));
    }
    for (i, c) in model.constraints().iter().enumerate() {
        dm.rows.push(LinearRow::from_expr(
            &frozen(&c.expr, &xi, n),
            c.relation,
            c.rhs,
            RowOrigin::Constraint { source: format!("c{i}") },
        ));
    }
    dm.objective = frozen(model.objective(), &xi, n);
    dm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Direction, Relation, VarId};
    use crate::uncset::{PolyhedralSet, UncertaintySet};

    #[test]
    fn nominal_coefficients() {
        let mut m = Model::new(Direction::Maximize);
        let x: Vec<VarId> = (0..3).map(|i| m.add_var(&format!("x{i}"), Domain::Continuous, 0.0, 1.0).unwrap()).collect();
        let set = UncertaintySet::Polyhedral(PolyhedralSet::boxed(&[0.0; 3], &[1.0; 3]).unwrap());
        let c = m.add_unc_params("c", 3, vec![0.1, 0.2, 0.3], set).unwrap();
        m.add_constraint(Expr::sum((0..3).map(|i| (c[i] * x[i]).into())), Relation::Le, 0.0).unwrap();
        let dm = nominal_substitute(&m);
        let row = &dm.rows[0];
        assert_eq!(row.coeffs.values().copied().collect::<Vec<_>>(), vec![0.1, 0.2, 0.3]);
        assert_eq!(row.rhs, 0.0);
        assert!(dm.columns.len() == 3 && dm.conic_rows.is_empty());
    }

    #[test]
    fn bilinear_collapses() {
        // (1 + xi) x <= 2 with nominal xi = 0.
        let mut m = Model::new(Direction::Maximize);
        let x = m.add_var("x", Domain::Continuous, 0.0, f64::INFINITY).unwrap();
        let set = UncertaintySet::Polyhedral(PolyhedralSet::boxed(&[-0.5], &[0.5]).unwrap());
        let xi = m.add_unc_params("e", 1, vec![0.0], set).unwrap();
        m.add_constraint(Expr::var(x) + xi[0] * x, Relation::Le, 2.0).unwrap();
        let dm = nominal_substitute(&m);
        assert_eq!(dm.rows[0].coeffs.get(&0), Some(&1.0));
        assert_eq!(dm.rows[0].rhs, 2.0);
    }
}
