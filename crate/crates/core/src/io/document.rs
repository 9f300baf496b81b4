//! Serde mirror of [`Model`] for the JSON exchange format.

use serde::{Deserialize, Serialize};

use crate::model::{Direction, Domain, Expr, Model, Relation, UncParamId, VarId, AdjVarId};
use crate::uncset::{SetConstraint, UncertaintySet};

pub const FORMAT_VERSION: &str = "1.0";

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub format_version: String,
    pub sense: Direction,
    #[serde(default)]
    pub variables: Vec<VariableDoc>,
    #[serde(default)]
    pub unc_groups: Vec<GroupDoc>,
    #[serde(default)]
    pub adjustables: Vec<AdjustableDoc>,
    #[serde(default)]
    pub constraints: Vec<ConstraintDoc>,
    #[serde(default)]
    pub objective: ExprDoc,
}

/// Bounds use `null` for an infinite value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableDoc {
    pub name: String,
    pub domain: Domain,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDoc {
    pub name: String,
    pub size: usize,
    pub nominal: Vec<f64>,
    pub uncset: SetDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetDoc {
    Polyhedral { mat: Vec<Vec<f64>>, rhs: Vec<f64> },
    Ellipsoidal { mean: Vec<f64>, cov: Vec<Vec<f64>> },
    Generic { constraints: Vec<SetConstraintDoc> },
    GaussianConfidence { mean: Vec<f64>, cov: Vec<Vec<f64>>, alpha: f64 },
}

/// `constant + linear + quadratic (sense) rhs` over group coordinates;
/// `linear` holds `[j, v]` pairs and `quadratic` holds `[i, j, v]` triplets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetConstraintDoc {
    #[serde(default, skip_serializing_if = "is_zero")]
    pub constant: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub linear: Vec<(usize, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub quadratic: Vec<(usize, usize, f64)>,
    pub sense: Relation,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdjustableDoc {
    pub name: String,
    pub deps: Vec<usize>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintDoc {
    pub expr: ExprDoc,
    pub sense: Relation,
    pub rhs: f64,
}

/// Expression as coefficient lists: `lin_x`, `lin_xi`, `lin_y` hold
/// `[id, v]` pairs and `bilin` holds `[var, param, v]` triplets.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExprDoc {
    #[serde(default, skip_serializing_if = "is_zero")]
    pub constant: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lin_x: Vec<(usize, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lin_xi: Vec<(usize, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bilin: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lin_y: Vec<(usize, f64)>,
}

impl ExprDoc {
    pub fn from_expr(e: &Expr) -> Self {
        ExprDoc {
            constant: e.constant_term(),
            lin_x: e.lin_x().iter().map(|(k, &v)| (k.0, v)).collect(),
            lin_xi: e.lin_xi().iter().map(|(k, &v)| (k.0, v)).collect(),
            bilin: e.bilin().iter().map(|(k, &v)| (k.0 .0, k.1 .0, v)).collect(),
            lin_y: e.lin_y().iter().map(|(k, &v)| (k.0, v)).collect(),
        }
    }

    pub fn to_expr(&self) -> Expr {
        let mut e = Expr::constant(self.constant);
        for &(j, v) in &self.lin_x {
            e.add_x(VarId(j), v);
        }
        for &(p, v) in &self.lin_xi {
            e.add_xi(UncParamId(p), v);
        }
        for &(j, p, v) in &self.bilin {
            e.add_bilin(VarId(j), UncParamId(p), v);
        }
        for &(k, v) in &self.lin_y {
            e.add_y(AdjVarId(k), v);
        }
        e
    }
}

pub(crate) fn lower_doc(v: f64) -> Option<f64> {
    (v != f64::NEG_INFINITY).then_some(v)
}

pub(crate) fn upper_doc(v: f64) -> Option<f64> {
    (v != f64::INFINITY).then_some(v)
}

impl SetConstraintDoc {
    pub fn from_constraint(c: &SetConstraint) -> Self {
        SetConstraintDoc {
            constant: c.constant,
            linear: c.linear.iter().map(|(&j, &v)| (j, v)).collect(),
            quadratic: c.quadratic.iter().map(|(&(i, j), &v)| (i, j, v)).collect(),
            sense: c.relation,
            rhs: c.rhs,
        }
    }

    pub fn to_constraint(&self) -> SetConstraint {
        let mut c = SetConstraint { constant: self.constant, relation: self.sense, rhs: self.rhs, ..SetConstraint::default() };
        for &(j, v) in &self.linear {
            c.add_linear(j, v);
        }
        for &(i, j, v) in &self.quadratic {
            c.add_quadratic(i, j, v);
        }
        c
    }
}

impl SetDoc {
    pub fn from_set(s: &UncertaintySet) -> Self {
        match s {
            UncertaintySet::Polyhedral(p) => SetDoc::Polyhedral { mat: p.mat().clone(), rhs: p.rhs().to_vec() },
            UncertaintySet::Ellipsoidal(e) => SetDoc::Ellipsoidal { mean: e.mean().to_vec(), cov: e.cov().clone() },
            UncertaintySet::Generic(g) => {
                SetDoc::Generic { constraints: g.constraints.iter().map(SetConstraintDoc::from_constraint).collect() }
            }
        }
    }
}

impl ModelDocument {
    pub fn from_model(m: &Model) -> Self {
        ModelDocument {
            format_version: FORMAT_VERSION.to_string(),
            sense: m.sense(),
            variables: m
                .vars()
                .iter()
                .map(|v| VariableDoc { name: v.name.clone(), domain: v.domain, lower: lower_doc(v.lower), upper: upper_doc(v.upper) })
                .collect(),
            unc_groups: m
                .groups()
                .iter()
                .map(|g| GroupDoc { name: g.name.clone(), size: g.ids.len(), nominal: g.nominal.clone(), uncset: SetDoc::from_set(&g.set) })
                .collect(),
            adjustables: m
                .adjustables()
                .iter()
                .map(|a| AdjustableDoc {
                    name: a.name.clone(),
                    deps: a.deps.iter().map(|p| p.0).collect(),
                    lower: lower_doc(a.lower),
                    upper: upper_doc(a.upper),
                })
                .collect(),
            constraints: m
                .constraints()
                .iter()
                .map(|c| ConstraintDoc { expr: ExprDoc::from_expr(&c.expr), sense: c.relation, rhs: c.rhs })
                .collect(),
            objective: ExprDoc::from_expr(m.objective()),
        }
    }
}
