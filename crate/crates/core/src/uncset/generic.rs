use std::collections::BTreeMap;

use robustkit_lp::Relation;

use crate::linalg::{cholesky, cholesky_solve, dot, mat_vec, Matrix, PD_TOL};

/// One constraint over the coordinates of a single parameter group:
/// `constant + sum linear[j] xi_j + sum quadratic[(i, j)] xi_i xi_j  (rel)  rhs`.
/// Quadratic keys are stored with `i <= j`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SetConstraint {
    pub constant: f64,
    pub linear: BTreeMap<usize, f64>,
    pub quadratic: BTreeMap<(usize, usize), f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl SetConstraint {
    pub fn affine(linear: impl IntoIterator<Item = (usize, f64)>, relation: Relation, rhs: f64) -> Self {
        let mut c = SetConstraint { relation, rhs, ..SetConstraint::default() };
        for (j, v) in linear {
            c.add_linear(j, v);
        }
        c
    }

    pub fn add_linear(&mut self, j: usize, v: f64) -> &mut Self {
        *self.linear.entry(j).or_insert(0.0) += v;
        self.linear.retain(|_, v| *v != 0.0);
        self
    }

    pub fn add_quadratic(&mut self, i: usize, j: usize, v: f64) -> &mut Self {
        let key = (i.min(j), i.max(j));
        *self.quadratic.entry(key).or_insert(0.0) += v;
        self.quadratic.retain(|_, v| *v != 0.0);
        self
    }

    pub fn is_affine(&self) -> bool {
        self.quadratic.is_empty()
    }

    /// Largest coordinate index referenced, if any.
    pub fn max_index(&self) -> Option<usize> {
        let lin = self.linear.keys().copied();
        let quad = self.quadratic.keys().map(|&(_, j)| j);
        lin.chain(quad).max()
    }

    pub fn lhs(&self, xi: &[f64]) -> f64 {
        let lin: f64 = self.linear.iter().map(|(&j, v)| v * xi[j]).sum();
        let quad: f64 = self.quadratic.iter().map(|(&(i, j), v)| v * xi[i] * xi[j]).sum();
        self.constant + lin + quad
    }

    /// Positive amount by which `xi` violates the constraint.
    pub fn violation(&self, xi: &[f64]) -> f64 {
        self.relation.violation(self.lhs(xi), self.rhs)
    }
}

/// Uncertainty set given as a list of constraints on the group coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct GenericSet {
    pub dim: usize,
    pub constraints: Vec<SetConstraint>,
}

/// Result of geometry detection on a [`GenericSet`].
#[derive(Clone, Debug, PartialEq)]
pub enum Geometry {
    Polyhedral { mat: Matrix, rhs: Vec<f64> },
    Ellipsoidal { mean: Vec<f64>, cov: Matrix },
    Unsupported(String),
}

impl GenericSet {
    pub fn new(dim: usize, constraints: Vec<SetConstraint>) -> Self {
        GenericSet { dim, constraints }
    }

    pub fn violation(&self, xi: &[f64]) -> f64 {
        self.constraints.iter().map(|c| c.violation(xi)).fold(0.0, f64::max)
    }
}

/// Classifies a generic set. All-affine constraint lists become `P xi <= b`
/// (`>=` rows negated, `=` rows split); a single quadratic constraint with
/// a positive definite form is completed to a square.
pub fn detect_geometry(set: &GenericSet) -> Geometry {
    if let Some(bad) = set.constraints.iter().filter_map(SetConstraint::max_index).find(|&j| j >= set.dim) {
        return Geometry::Unsupported(format!("constraint references coordinate {bad} of a {}-dimensional set", set.dim));
    }
    if set.constraints.is_empty() {
        return Geometry::Unsupported("set has no constraints".into());
    }
    if set.constraints.iter().all(SetConstraint::is_affine) {
        return polyhedral_rows(set);
    }
    match set.constraints.as_slice() {
        [single] => quadratic_form(single, set.dim),
        _ => Geometry::Unsupported("quadratic constraint mixed with other constraints".into()),
    }
}

fn polyhedral_rows(set: &GenericSet) -> Geometry {
    let mut mat = Vec::new();
    let mut rhs = Vec::new();
    for c in &set.constraints {
        let mut row = vec![0.0; set.dim];
        for (&j, &v) in &c.linear {
            row[j] = v;
        }
        let b = c.rhs - c.constant;
        let negated = || (row.iter().map(|v| -v).collect::<Vec<f64>>(), -b);
        match c.relation {
            Relation::Le => {
                mat.push(row.clone());
                rhs.push(b);
            }
            Relation::Ge => {
                let (r, nb) = negated();
                mat.push(r);
                rhs.push(nb);
            }
            Relation::Eq => {
                let (r, nb) = negated();
                mat.push(row.clone());
                rhs.push(b);
                mat.push(r);
                rhs.push(nb);
            }
        }
    }
    Geometry::Polyhedral { mat, rhs }
}

fn quadratic_form(c: &SetConstraint, k: usize) -> Geometry {
    // Bring the constraint to xi'A xi + l'xi + c0 <= 0.
    let sign = match c.relation {
        Relation::Le => 1.0,
        Relation::Ge => -1.0,
        Relation::Eq => return Geometry::Unsupported("quadratic equality is not convex".into()),
    };
    let mut a = vec![vec![0.0; k]; k];
    for (&(i, j), &v) in &c.quadratic {
        if i == j {
            a[i][i] += sign * v;
        } else {
            a[i][j] += sign * v / 2.0;
            a[j][i] += sign * v / 2.0;
        }
    }
    let mut l = vec![0.0; k];
    for (&j, &v) in &c.linear {
        l[j] = sign * v;
    }
    let c0 = sign * (c.constant - c.rhs);

    let Some(chol) = cholesky(&a, PD_TOL) else {
        return Geometry::Unsupported("quadratic form is not positive definite".into());
    };
    // xi'A xi + l'xi + c0 = (xi - mu)'A(xi - mu) - r with mu = -A^-1 l / 2.
    let half: Vec<f64> = l.iter().map(|v| -v / 2.0).collect();
    let mean = cholesky_solve(&chol, &half);
    let r = dot(&mean, &mat_vec(&a, &mean)) - c0;
    if !(r > 0.0) {
        return Geometry::Unsupported("quadratic constraint describes an empty or single-point set".into());
    }
    let mut cov = vec![vec![0.0; k]; k];
    for j in 0..k {
        let mut e = vec![0.0; k];
        e[j] = 1.0;
        let col = cholesky_solve(&chol, &e);
        for i in 0..k {
            cov[i][j] = r * col[i];
        }
    }
    for i in 0..k {
        for j in 0..i {
            let m = (cov[i][j] + cov[j][i]) / 2.0;
            cov[i][j] = m;
            cov[j][i] = m;
        }
    }
    Geometry::Ellipsoidal { mean, cov }
}
