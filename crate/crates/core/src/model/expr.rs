use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::ModelError;

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident, $prefix:literal) => {
        $(#[$doc])*
        #[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub usize);

        impl $name {
            pub fn index(self) -> usize {
                self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_type!(
    /// Index of a here-and-now decision variable.
    VarId, "x"
);
id_type!(
    /// Index of a scalar uncertain parameter; unique across all groups.
    UncParamId, "xi"
);
id_type!(
    /// Index of an adjustable (wait-and-see) variable.
    AdjVarId, "y"
);

/// Scalar expression affine in the uncertain parameters for fixed
/// decisions, and affine in the decisions for fixed parameters:
///
/// ```text
/// constant + sum lin_x[j] x_j + sum lin_xi[p] xi_p
///          + sum bilin[(j, p)] x_j xi_p + sum lin_y[k] y_k
/// ```
///
/// The maps are kept canonical: no zero coefficients are stored, so two
/// expressions that denote the same function compare equal.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Expr {
    constant: f64,
    lin_x: BTreeMap<VarId, f64>,
    lin_xi: BTreeMap<UncParamId, f64>,
    bilin: BTreeMap<(VarId, UncParamId), f64>,
    lin_y: BTreeMap<AdjVarId, f64>,
}

fn accumulate<K: Ord>(map: &mut BTreeMap<K, f64>, key: K, coef: f64) {
    if coef == 0.0 {
        return;
    }
    match map.entry(key) {
        Entry::Vacant(slot) => {
            slot.insert(coef);
        }
        Entry::Occupied(mut slot) => {
            *slot.get_mut() += coef;
            if *slot.get() == 0.0 {
                slot.remove();
            }
        }
    }
}

impl Expr {
    pub fn new() -> Self {
        Expr::default()
    }

    pub fn constant(c: f64) -> Self {
        Expr { constant: c, ..Expr::default() }
    }

    pub fn var(x: VarId) -> Self {
        let mut e = Expr::default();
        e.add_x(x, 1.0);
        e
    }

    pub fn param(p: UncParamId) -> Self {
        let mut e = Expr::default();
        e.add_xi(p, 1.0);
        e
    }

    pub fn adjustable(y: AdjVarId) -> Self {
        let mut e = Expr::default();
        e.add_y(y, 1.0);
        e
    }

    /// `coef * x * xi`.
    pub fn bilinear(x: VarId, p: UncParamId, coef: f64) -> Self {
        let mut e = Expr::default();
        e.add_bilin(x, p, coef);
        e
    }

    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Self {
        terms.into_iter().fold(Expr::default(), |acc, t| acc + t)
    }

    pub fn add_constant(&mut self, c: f64) -> &mut Self {
        self.constant += c;
        self
    }

    pub fn add_x(&mut self, x: VarId, coef: f64) -> &mut Self {
        accumulate(&mut self.lin_x, x, coef);
        self
    }

    pub fn add_xi(&mut self, p: UncParamId, coef: f64) -> &mut Self {
        accumulate(&mut self.lin_xi, p, coef);
        self
    }

    pub fn add_bilin(&mut self, x: VarId, p: UncParamId, coef: f64) -> &mut Self {
        accumulate(&mut self.bilin, (x, p), coef);
        self
    }

    pub fn add_y(&mut self, y: AdjVarId, coef: f64) -> &mut Self {
        accumulate(&mut self.lin_y, y, coef);
        self
    }

    pub fn constant_term(&self) -> f64 {
        self.constant
    }

    pub fn lin_x(&self) -> &BTreeMap<VarId, f64> {
        &self.lin_x
    }

    pub fn lin_xi(&self) -> &BTreeMap<UncParamId, f64> {
        &self.lin_xi
    }

    pub fn bilin(&self) -> &BTreeMap<(VarId, UncParamId), f64> {
        &self.bilin
    }

    pub fn lin_y(&self) -> &BTreeMap<AdjVarId, f64> {
        &self.lin_y
    }

    /// True when any uncertain parameter appears, linearly or bilinearly.
    pub fn is_uncertain(&self) -> bool {
        !self.lin_xi.is_empty() || !self.bilin.is_empty()
    }

    pub fn has_adjustables(&self) -> bool {
        !self.lin_y.is_empty()
    }

    fn is_scalar(&self) -> bool {
        self.lin_x.is_empty() && self.lin_xi.is_empty() && self.bilin.is_empty() && self.lin_y.is_empty()
    }

    /// Affine in the decisions only (no parameters, no adjustables).
    fn is_decision_affine(&self) -> bool {
        self.lin_xi.is_empty() && self.bilin.is_empty() && self.lin_y.is_empty()
    }

    /// Affine in the parameters only.
    fn is_param_affine(&self) -> bool {
        self.lin_x.is_empty() && self.bilin.is_empty() && self.lin_y.is_empty()
    }

    /// Uncertain parameters referenced anywhere in the expression.
    pub fn params(&self) -> impl Iterator<Item = UncParamId> + '_ {
        let mut ids: Vec<UncParamId> = self.lin_xi.keys().copied().chain(self.bilin.keys().map(|k| k.1)).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.into_iter()
    }

    /// Product of two expressions, accepted only when the result stays
    /// within the expression class: a scalar times anything, or a
    /// decision-affine factor times a parameter-affine factor.
    pub fn try_mul(&self, other: &Expr) -> Result<Expr, ModelError> {
        if self.is_scalar() {
            return Ok(other.clone() * self.constant);
        }
        if other.is_scalar() {
            return Ok(self.clone() * other.constant);
        }
        let (dec, par) = if self.is_decision_affine() && other.is_param_affine() {
            (self, other)
        } else if other.is_decision_affine() && self.is_param_affine() {
            (other, self)
        } else {
            return Err(ModelError::MalformedExpr(
                "product leaves the class affine in parameters times affine in decisions".into(),
            ));
        };
        let mut out = Expr::constant(dec.constant * par.constant);
        for (&x, &a) in &dec.lin_x {
            out.add_x(x, a * par.constant);
        }
        for (&p, &b) in &par.lin_xi {
            out.add_xi(p, dec.constant * b);
        }
        for (&x, &a) in &dec.lin_x {
            for (&p, &b) in &par.lin_xi {
                out.add_bilin(x, p, a * b);
            }
        }
        Ok(out)
    }

    /// Evaluates at a full assignment; slices are indexed by id.
    pub fn evaluate(&self, x: &[f64], xi: &[f64], y: &[f64]) -> Result<f64, ModelError> {
        fn get<I: fmt::Display + Copy>(v: &[f64], id: I, idx: usize) -> Result<f64, ModelError> {
            match v.get(idx) {
                Some(val) if !val.is_nan() => Ok(*val),
                _ => Err(ModelError::MissingAssignment(id.to_string())),
            }
        }
        let mut total = self.constant;
        for (&j, &a) in &self.lin_x {
            total += a * get(x, j, j.0)?;
        }
        for (&p, &a) in &self.lin_xi {
            total += a * get(xi, p, p.0)?;
        }
        for (&(j, p), &a) in &self.bilin {
            total += a * get(x, j, j.0)? * get(xi, p, p.0)?;
        }
        for (&k, &a) in &self.lin_y {
            total += a * get(y, k, k.0)?;
        }
        Ok(total)
    }

    /// Replaces every parameter by the given value, folding bilinear terms
    /// into the linear decision part.
    pub fn substitute_params(&self, xi: &[f64]) -> Expr {
        let mut out = Expr {
            constant: self.constant,
            lin_x: self.lin_x.clone(),
            lin_xi: BTreeMap::new(),
            bilin: BTreeMap::new(),
            lin_y: self.lin_y.clone(),
        };
        for (&p, &a) in &self.lin_xi {
            out.constant += a * xi[p.0];
        }
        for (&(j, p), &a) in &self.bilin {
            out.add_x(j, a * xi[p.0]);
        }
        out
    }

    pub(crate) fn referenced_vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.lin_x.keys().copied().chain(self.bilin.keys().map(|k| k.0))
    }

    pub(crate) fn without_adjustables(&self) -> Expr {
        Expr { lin_y: BTreeMap::new(), ..self.clone() }
    }
}

impl From<VarId> for Expr {
    fn from(x: VarId) -> Self {
        Expr::var(x)
    }
}

impl From<UncParamId> for Expr {
    fn from(p: UncParamId) -> Self {
        Expr::param(p)
    }
}

impl From<AdjVarId> for Expr {
    fn from(y: AdjVarId) -> Self {
        Expr::adjustable(y)
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Self {
        Expr::constant(c)
    }
}

impl AddAssign<Expr> for Expr {
    fn add_assign(&mut self, rhs: Expr) {
        self.constant += rhs.constant;
        for (k, v) in rhs.lin_x {
            accumulate(&mut self.lin_x, k, v);
        }
        for (k, v) in rhs.lin_xi {
            accumulate(&mut self.lin_xi, k, v);
        }
        for (k, v) in rhs.bilin {
            accumulate(&mut self.bilin, k, v);
        }
        for (k, v) in rhs.lin_y {
            accumulate(&mut self.lin_y, k, v);
        }
    }
}

impl<T: Into<Expr>> Add<T> for Expr {
    type Output = Expr;
    fn add(mut self, rhs: T) -> Expr {
        self += rhs.into();
        self
    }
}

impl<T: Into<Expr>> Sub<T> for Expr {
    type Output = Expr;
    fn sub(mut self, rhs: T) -> Expr {
        self += -rhs.into();
        self
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self * -1.0
    }
}

impl Mul<f64> for Expr {
    type Output = Expr;
    fn mul(mut self, k: f64) -> Expr {
        if k == 0.0 {
            return Expr::default();
        }
        self.constant *= k;
        for v in self
            .lin_x
            .values_mut()
            .chain(self.lin_xi.values_mut())
            .chain(self.bilin.values_mut())
            .chain(self.lin_y.values_mut())
        {
            *v *= k;
        }
        self
    }
}

impl Mul<Expr> for f64 {
    type Output = Expr;
    fn mul(self, e: Expr) -> Expr {
        e * self
    }
}

impl Mul<VarId> for UncParamId {
    type Output = Expr;
    fn mul(self, x: VarId) -> Expr {
        Expr::bilinear(x, self, 1.0)
    }
}

impl Mul<UncParamId> for VarId {
    type Output = Expr;
    fn mul(self, p: UncParamId) -> Expr {
        Expr::bilinear(self, p, 1.0)
    }
}

impl Mul<VarId> for f64 {
    type Output = Expr;
    fn mul(self, x: VarId) -> Expr {
        let mut e = Expr::default();
        e.add_x(x, self);
        e
    }
}

impl Mul<UncParamId> for f64 {
    type Output = Expr;
    fn mul(self, p: UncParamId) -> Expr {
        let mut e = Expr::default();
        e.add_xi(p, self);
        e
    }
}

impl Mul<AdjVarId> for f64 {
    type Output = Expr;
    fn mul(self, y: AdjVarId) -> Expr {
        let mut e = Expr::default();
        e.add_y(y, self);
        e
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nominal_coefficients_sum() {
        let c = [0.1, 0.2, 0.3];
        let e = Expr::sum((0..3).map(|i| c[i] * VarId(i)));
        assert!((e.evaluate(&[1.0, 1.0, 1.0], &[], &[]).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn bilinear_product() {
        let e = UncParamId(0) * VarId(0);
        assert_eq!(e.evaluate(&[2.0], &[0.5], &[]).unwrap(), 1.0);
    }

    #[test]
    fn annihilating_factor() {
        let factor = Expr::constant(1.0) + UncParamId(0);
        let e = factor.try_mul(&Expr::var(VarId(0))).unwrap();
        assert_eq!(e.evaluate(&[3.0], &[-1.0], &[]).unwrap(), 0.0);
        assert_eq!(e.lin_x().get(&VarId(0)), Some(&1.0));
        assert_eq!(e.bilin().get(&(VarId(0), UncParamId(0))), Some(&1.0));
    }

    #[test]
    fn products_outside_the_class_are_rejected() {
        let xi = Expr::param(UncParamId(0));
        assert!(matches!(xi.try_mul(&xi), Err(ModelError::MalformedExpr(_))));
        let x = Expr::var(VarId(0));
        assert!(x.try_mul(&x).is_err());
        let y = Expr::adjustable(AdjVarId(0));
        assert!(y.try_mul(&xi).is_err());
    }

    #[test]
    fn cancellation_is_canonical() {
        let e = Expr::var(VarId(1)) - VarId(1) + UncParamId(2) - UncParamId(2);
        assert_eq!(e, Expr::default());
        assert!(!e.is_uncertain());
    }

    #[test]
    fn missing_assignment() {
        let e = Expr::var(VarId(4));
        assert!(matches!(e.evaluate(&[1.0], &[], &[]), Err(ModelError::MissingAssignment(s)) if s == "x4"));
    }

    #[test]
    fn substitution_folds_bilinear_terms() {
        let e = (Expr::constant(1.0) + UncParamId(0)).try_mul(&Expr::var(VarId(0))).unwrap();
        let s = e.substitute_params(&[0.0]);
        assert_eq!(s, Expr::var(VarId(0)));
    }
}
