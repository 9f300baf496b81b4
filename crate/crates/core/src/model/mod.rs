//! Model container: decisions, uncertain parameter groups, adjustable
//! variables, constraints and objective.

mod expr;

pub use expr::{AdjVarId, Expr, UncParamId, VarId};
pub use robustkit_lp::{Direction, Relation};

use serde::{Deserialize, Serialize};

use crate::uncset::{SetError, UncertaintySet};

/// Tolerance for the nominal point to lie in its set.
pub const NOMINAL_TOL: f64 = 1e-8;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("nominal point of group `{group}` lies outside its set (violation {violation:e})")]
    NominalOutsideSet { group: String, violation: f64 },
    #[error("unknown uncertain parameter {0}")]
    UnknownUncParam(String),
    #[error("adjustable variable `{0}` has no dependencies")]
    EmptyDeps(String),
    #[error("adjustable variable `{adj}` lists {dep} twice")]
    DuplicateDep { adj: String, dep: String },
    #[error("unknown decision variable {0}")]
    UnknownVar(String),
    #[error("unknown adjustable variable {0}")]
    UnknownAdjVar(String),
    #[error("constraint {0} is an equality with uncertain parameters")]
    UncertainEquality(usize),
    #[error("malformed expression: {0}")]
    MalformedExpr(String),
    #[error("no value assigned to {0}")]
    MissingAssignment(String),
    #[error(transparent)]
    Set(#[from] SetError),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Continuous,
    Binary,
    Integer,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecisionVar {
    pub id: VarId,
    pub name: String,
    pub domain: Domain,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UncParamGroup {
    pub name: String,
    pub ids: Vec<UncParamId>,
    pub nominal: Vec<f64>,
    pub set: UncertaintySet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdjVar {
    pub id: AdjVarId,
    pub name: String,
    pub deps: Vec<UncParamId>,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    Deterministic,
    Uncertain,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub expr: Expr,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn kind(&self) -> ConstraintKind {
        if self.expr.is_uncertain() {
            ConstraintKind::Uncertain
        } else {
            ConstraintKind::Deterministic
        }
    }
}

/// A robust model `opt_x max/min_xi f(x, y, xi)` subject to constraints
/// that hold for every `xi` in the product of the group sets.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub(crate) sense: Direction,
    pub(crate) vars: Vec<DecisionVar>,
    pub(crate) groups: Vec<UncParamGroup>,
    pub(crate) adjustables: Vec<AdjVar>,
    pub(crate) constraints: Vec<Constraint>,
    pub(crate) objective: Expr,
    /// `(group, position)` of every parameter, indexed by id.
    pub(crate) param_index: Vec<(usize, usize)>,
}

fn check_bounds(name: &str, lower: f64, upper: f64) -> Result<(), ModelError> {
    if lower.is_nan() || upper.is_nan() || lower > upper || lower == f64::INFINITY || upper == f64::NEG_INFINITY {
        return Err(ModelError::InvalidBounds(format!("`{name}` has lower {lower} and upper {upper}")));
    }
    Ok(())
}

impl Model {
    pub fn new(sense: Direction) -> Self {
        Model {
            sense,
            vars: Vec::new(),
            groups: Vec::new(),
            adjustables: Vec::new(),
            constraints: Vec::new(),
            objective: Expr::new(),
            param_index: Vec::new(),
        }
    }

    pub fn sense(&self) -> Direction {
        self.sense
    }

    pub fn vars(&self) -> &[DecisionVar] {
        &self.vars
    }

    pub fn groups(&self) -> &[UncParamGroup] {
        &self.groups
    }

    pub fn adjustables(&self) -> &[AdjVar] {
        &self.adjustables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &Expr {
        &self.objective
    }

    pub fn num_params(&self) -> usize {
        self.param_index.len()
    }

    /// Group index and position within the group of a parameter.
    pub fn param_location(&self, p: UncParamId) -> Option<(usize, usize)> {
        self.param_index.get(p.0).copied()
    }

    /// Nominal values of all parameters, indexed by id.
    pub fn nominal_point(&self) -> Vec<f64> {
        self.param_index.iter().map(|&(g, k)| self.groups[g].nominal[k]).collect()
    }

    pub fn add_var(&mut self, name: &str, domain: Domain, lower: f64, upper: f64) -> Result<VarId, ModelError> {
        check_bounds(name, lower, upper)?;
        if domain == Domain::Binary && (lower < 0.0 || upper > 1.0) {
            return Err(ModelError::InvalidBounds(format!("binary `{name}` must have bounds within [0, 1]")));
        }
        let id = VarId(self.vars.len());
        self.vars.push(DecisionVar { id, name: name.to_string(), domain, lower, upper });
        Ok(id)
    }

    /// Registers a group of `size` parameters with nominal point and set.
    pub fn add_unc_params(
        &mut self,
        name: &str,
        size: usize,
        nominal: Vec<f64>,
        set: UncertaintySet,
    ) -> Result<Vec<UncParamId>, ModelError> {
        check_group(name, size, &nominal, &set)?;
        let g = self.groups.len();
        let start = self.param_index.len();
        let ids: Vec<UncParamId> = (start..start + size).map(UncParamId).collect();
        self.param_index.extend((0..size).map(|k| (g, k)));
        self.groups.push(UncParamGroup { name: name.to_string(), ids: ids.clone(), nominal, set });
        Ok(ids)
    }

    /// Swaps the set of a group, checking that the nominal point stays inside.
    pub fn replace_uncset(&mut self, group: usize, set: UncertaintySet) -> Result<(), ModelError> {
        let g = self
            .groups
            .get(group)
            .ok_or_else(|| ModelError::DimensionMismatch(format!("no parameter group {group}")))?;
        check_group(&g.name, g.ids.len(), &g.nominal, &set)?;
        self.groups[group].set = set;
        Ok(())
    }

    pub fn add_adjustable(
        &mut self,
        name: &str,
        deps: &[UncParamId],
        lower: f64,
        upper: f64,
    ) -> Result<AdjVarId, ModelError> {
        check_bounds(name, lower, upper)?;
        self.check_deps(name, deps)?;
        let id = AdjVarId(self.adjustables.len());
        self.adjustables.push(AdjVar { id, name: name.to_string(), deps: deps.to_vec(), lower, upper });
        Ok(id)
    }

    /// Overrides the dependency list of one adjustable variable.
    pub fn set_uncparams(&mut self, y: AdjVarId, deps: &[UncParamId]) -> Result<(), ModelError> {
        let name = self.adjustables.get(y.0).ok_or_else(|| ModelError::UnknownAdjVar(y.to_string()))?.name.clone();
        self.check_deps(&name, deps)?;
        self.adjustables[y.0].deps = deps.to_vec();
        Ok(())
    }

    fn check_deps(&self, name: &str, deps: &[UncParamId]) -> Result<(), ModelError> {
        if deps.is_empty() {
            return Err(ModelError::EmptyDeps(name.to_string()));
        }
        for (i, p) in deps.iter().enumerate() {
            if p.0 >= self.num_params() {
                return Err(ModelError::UnknownUncParam(p.to_string()));
            }
            if deps[..i].contains(p) {
                return Err(ModelError::DuplicateDep { adj: name.to_string(), dep: p.to_string() });
            }
        }
        Ok(())
    }

    fn check_expr(&self, expr: &Expr) -> Result<(), ModelError> {
        if let Some(x) = expr.referenced_vars().find(|x| x.0 >= self.vars.len()) {
            return Err(ModelError::UnknownVar(x.to_string()));
        }
        if let Some(p) = expr.params().find(|p| p.0 >= self.num_params()) {
            return Err(ModelError::UnknownUncParam(p.to_string()));
        }
        if let Some(y) = expr.lin_y().keys().find(|y| y.0 >= self.adjustables.len()) {
            return Err(ModelError::UnknownAdjVar(y.to_string()));
        }
        let coefs = std::iter::once(expr.constant_term())
            .chain(expr.lin_x().values().copied())
            .chain(expr.lin_xi().values().copied())
            .chain(expr.bilin().values().copied())
            .chain(expr.lin_y().values().copied());
        if coefs.into_iter().any(|c| !c.is_finite()) {
            return Err(ModelError::MalformedExpr("non-finite coefficient".into()));
        }
        Ok(())
    }

    fn check_constraint(&self, index: usize, c: &Constraint) -> Result<(), ModelError> {
        self.check_expr(&c.expr)?;
        if !c.rhs.is_finite() {
            return Err(ModelError::MalformedExpr(format!("constraint {index} has non-finite right-hand side")));
        }
        if c.relation == Relation::Eq && c.kind() == ConstraintKind::Uncertain {
            return Err(ModelError::UncertainEquality(index));
        }
        Ok(())
    }

    /// Adds `expr (relation) rhs`; returns the constraint index.
    pub fn add_constraint(&mut self, expr: Expr, relation: Relation, rhs: f64) -> Result<usize, ModelError> {
        let c = Constraint { expr, relation, rhs };
        let index = self.constraints.len();
        self.check_constraint(index, &c)?;
        self.constraints.push(c);
        Ok(index)
    }

    pub fn set_objective(&mut self, expr: Expr) -> Result<(), ModelError> {
        self.check_expr(&expr)?;
        self.objective = expr;
        Ok(())
    }

    /// Re-checks every invariant of the model.
    pub fn validate(&self) -> Result<(), ModelError> {
        for v in &self.vars {
            check_bounds(&v.name, v.lower, v.upper)?;
        }
        for g in &self.groups {
            check_group(&g.name, g.ids.len(), &g.nominal, &g.set)?;
        }
        for a in &self.adjustables {
            check_bounds(&a.name, a.lower, a.upper)?;
            self.check_deps(&a.name, &a.deps)?;
        }
        for (i, c) in self.constraints.iter().enumerate() {
            self.check_constraint(i, c)?;
        }
        self.check_expr(&self.objective)
    }

    /// Appends a variable without checks; for rewrites that create
    /// auxiliaries with known-good bounds.
    pub(crate) fn push_var(&mut self, name: String, domain: Domain, lower: f64, upper: f64) -> VarId {
        let id = VarId(self.vars.len());
        self.vars.push(DecisionVar { id, name, domain, lower, upper });
        id
    }

    pub fn has_uncertain_objective(&self) -> bool {
        self.objective.is_uncertain()
    }

    pub fn is_integer(&self) -> bool {
        self.vars.iter().any(|v| v.domain != Domain::Continuous)
    }
}

fn check_group(name: &str, size: usize, nominal: &[f64], set: &UncertaintySet) -> Result<(), ModelError> {
    if size == 0 || nominal.len() != size {
        return Err(ModelError::DimensionMismatch(format!(
            "group `{name}` has size {size} but {} nominal values",
            nominal.len()
        )));
    }
    if set.dim() != size {
        return Err(ModelError::DimensionMismatch(format!(
            "group `{name}` has size {size} but its set has dimension {}",
            set.dim()
        )));
    }
    if nominal.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::DimensionMismatch(format!("group `{name}` has a non-finite nominal value")));
    }
    let violation = set.violation(nominal);
    if violation > NOMINAL_TOL {
        return Err(ModelError::NominalOutsideSet { group: name.to_string(), violation });
    }
    Ok(())
}
