use std::collections::BTreeMap;

use robustkit_lp::{Direction, Lp, Relation};

use crate::linalg::{dot, lower_transposed_vec, mat_vec, norm, Matrix};
use crate::model::{Domain, UncParamId};

/// `constant + sum terms[j] z_j` over counterpart columns.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinExpr {
    pub constant: f64,
    pub terms: BTreeMap<usize, f64>,
}

impl LinExpr {
    pub fn constant(c: f64) -> Self {
        LinExpr { constant: c, terms: BTreeMap::new() }
    }

    pub fn add_term(&mut self, j: usize, coef: f64) {
        if coef == 0.0 {
            return;
        }
        let e = self.terms.entry(j).or_insert(0.0);
        *e += coef;
        if *e == 0.0 {
            self.terms.remove(&j);
        }
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, other: &LinExpr, scale: f64) {
        self.constant += scale * other.constant;
        for (&j, &v) in &other.terms {
            self.add_term(j, scale * v);
        }
    }

    pub fn evaluate(&self, z: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|(&j, v)| v * z[j]).sum::<f64>()
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.terms.is_empty()
    }
}

/// What a counterpart column stands for.
#[derive(Clone, Debug, PartialEq)]
pub enum ColumnOrigin {
    /// Variable of the (possibly rewritten) model, by index.
    Model(usize),
    /// Adjustable variable frozen to a single value.
    Adjustable(usize),
    /// Dual multiplier of facet `row` of the set behind constraint `source`.
    Dual { source: String, row: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetColumn {
    pub name: String,
    pub domain: Domain,
    pub lower: f64,
    pub upper: f64,
    pub origin: ColumnOrigin,
}

/// What a counterpart row stands for.
#[derive(Clone, Debug, PartialEq)]
pub enum RowOrigin {
    /// Certain constraint, or an uncertain one with parameters fixed.
    Constraint { source: String },
    /// `P' lam = a(x)` row for one coordinate of the set.
    DualEquality { source: String, param: UncParamId },
    /// `b' lam + f(x) <= rhs` row.
    DualBudget { source: String },
    /// Constraint instantiated at a worst-case scenario.
    Scenario { source: String },
    /// Supporting hyperplane of a conic row.
    ConicCut { source: String },
}

impl RowOrigin {
    pub fn source(&self) -> &str {
        match self {
            RowOrigin::Constraint { source }
            | RowOrigin::DualEquality { source, .. }
            | RowOrigin::DualBudget { source }
            | RowOrigin::Scenario { source }
            | RowOrigin::ConicCut { source } => source,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearRow {
    pub coeffs: BTreeMap<usize, f64>,
    pub relation: Relation,
    pub rhs: f64,
    pub origin: RowOrigin,
}

impl LinearRow {
    pub fn activity(&self, z: &[f64]) -> f64 {
        self.coeffs.iter().map(|(&j, v)| v * z[j]).sum()
    }

    /// `expr (relation) rhs` with the constant of `expr` moved right.
    pub fn from_expr(expr: &LinExpr, relation: Relation, rhs: f64, origin: RowOrigin) -> Self {
        LinearRow { coeffs: expr.terms.clone(), relation, rhs: rhs - expr.constant, origin }
    }
}

/// `sqrt(a(z)' cov a(z))` for the coordinates of one ellipsoidal group.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeTerm {
    pub group: String,
    pub params: Vec<UncParamId>,
    pub components: Vec<LinExpr>,
    pub mean: Vec<f64>,
    pub cov: Matrix,
    pub(crate) factor: Matrix,
}

impl ConeTerm {
    pub fn direction(&self, z: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.evaluate(z)).collect()
    }

    pub fn value(&self, z: &[f64]) -> f64 {
        norm(&lower_transposed_vec(&self.factor, &self.direction(z)))
    }

    /// Supporting hyperplane `(cov a0)' a(z) / sqrt(a0' cov a0)` at `z0`;
    /// `None` where the cone is at its apex.
    pub fn tangent(&self, z0: &[f64]) -> Option<LinExpr> {
        let a0 = self.direction(z0);
        let s = norm(&lower_transposed_vec(&self.factor, &a0));
        if !(s > 0.0) {
            return None;
        }
        let g = mat_vec(&self.cov, &a0);
        let mut out = LinExpr::default();
        for (gi, comp) in g.iter().zip(&self.components) {
            out.add_scaled(comp, gi / s);
        }
        debug_assert!((dot(&g, &a0) / s - s).abs() <= 1e-8 * (1.0 + s));
        Some(out)
    }

    /// `L' a(z)` as one expression per component; the cone is its norm.
    pub fn scaled_components(&self) -> Vec<LinExpr> {
        (0..self.components.len())
            .map(|k| {
                let mut out = LinExpr::default();
                for (i, comp) in self.components.iter().enumerate().skip(k) {
                    out.add_scaled(comp, self.factor[i][k]);
                }
                out
            })
            .collect()
    }
}

/// `linear(z) + sum_k cones[k](z) <= rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConicRow {
    pub source: String,
    pub linear: LinExpr,
    pub cones: Vec<ConeTerm>,
    pub rhs: f64,
}

impl ConicRow {
    /// `lhs - rhs`; positive when violated.
    pub fn violation(&self, z: &[f64]) -> f64 {
        self.linear.evaluate(z) + self.cones.iter().map(|c| c.value(z)).sum::<f64>() - self.rhs
    }

    /// Linear row through the tangents of every cone at `z0`.
    pub fn cut(&self, z0: &[f64]) -> LinearRow {
        let mut lhs = self.linear.clone();
        for cone in &self.cones {
            if let Some(t) = cone.tangent(z0) {
                lhs.add_scaled(&t, 1.0);
            }
        }
        LinearRow::from_expr(&lhs, Relation::Le, self.rhs, RowOrigin::ConicCut { source: self.source.clone() })
    }
}

/// Deterministic LP/MILP with provenance, possibly with conic rows.
#[derive(Clone, Debug, PartialEq)]
pub struct DeterministicModel {
    pub sense: Direction,
    pub columns: Vec<DetColumn>,
    pub rows: Vec<LinearRow>,
    pub conic_rows: Vec<ConicRow>,
    pub objective: LinExpr,
}

impl DeterministicModel {
    pub fn new(sense: Direction) -> Self {
        DeterministicModel { sense, columns: Vec::new(), rows: Vec::new(), conic_rows: Vec::new(), objective: LinExpr::default() }
    }

    pub fn add_column(&mut self, name: String, domain: Domain, lower: f64, upper: f64, origin: ColumnOrigin) -> usize {
        self.columns.push(DetColumn { name, domain, lower, upper, origin });
        self.columns.len() - 1
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn is_integer(&self) -> bool {
        self.columns.iter().any(|c| c.domain != Domain::Continuous)
    }

    /// Linear part as a kernel problem plus its integrality mask; conic rows
    /// are left out.
    pub fn to_lp(&self) -> (Lp, Vec<bool>) {
        let mut lp = Lp::new(self.sense);
        for (j, c) in self.columns.iter().enumerate() {
            lp.add_column(self.objective.terms.get(&j).copied().unwrap_or(0.0), c.lower, c.upper);
        }
        lp.offset = self.objective.constant;
        for r in &self.rows {
            lp.add_row(r.coeffs.iter().map(|(&j, &v)| (j, v)).collect(), r.relation, r.rhs);
        }
        let integer = self.columns.iter().map(|c| c.domain != Domain::Continuous).collect();
        (lp, integer)
    }
}
