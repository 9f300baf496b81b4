//! Uncertainty sets: library polyhedra and ellipsoids, constraint-defined
//! generic sets with geometry detection, and support functions.

mod chi2;
mod ellipsoidal;
mod generic;
mod polyhedral;

pub use chi2::{chi_square_cdf, chi_square_quantile};
pub use ellipsoidal::EllipsoidalSet;
pub use generic::{detect_geometry, GenericSet, Geometry, SetConstraint};
pub use polyhedral::PolyhedralSet;

use robustkit_lp::LpError;

use crate::linalg::Matrix;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SetError {
    #[error("uncertainty set is empty")]
    EmptySet,
    #[error("uncertainty set is unbounded")]
    UnboundedSet,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("covariance matrix is not symmetric")]
    NotSymmetric,
    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("confidence level {0} is outside (0, 1)")]
    AlphaOutOfRange(f64),
    #[error("unsupported set geometry: {0}")]
    Unsupported(String),
    #[error("LP kernel: {0}")]
    Kernel(String),
}

impl From<LpError> for SetError {
    fn from(e: LpError) -> Self {
        SetError::Kernel(e.to_string())
    }
}

/// Value and a maximizer of `max { a' xi : xi in U }`.
#[derive(Clone, Debug, PartialEq)]
pub struct Support {
    pub value: f64,
    pub argmax: Vec<f64>,
}

/// Uncertainty set attached to a parameter group.
#[derive(Clone, Debug, PartialEq)]
pub enum UncertaintySet {
    Polyhedral(PolyhedralSet),
    Ellipsoidal(EllipsoidalSet),
    Generic(GenericSet),
}

/// A set whose geometry is known, so it can be reformulated and separated.
#[derive(Clone, Debug, PartialEq)]
pub enum ResolvedSet {
    Polyhedral(PolyhedralSet),
    Ellipsoidal(EllipsoidalSet),
}

impl UncertaintySet {
    pub fn polyhedral(mat: Matrix, rhs: Vec<f64>) -> Result<Self, SetError> {
        PolyhedralSet::new(mat, rhs).map(UncertaintySet::Polyhedral)
    }

    pub fn ellipsoidal(mean: Vec<f64>, cov: Matrix) -> Result<Self, SetError> {
        EllipsoidalSet::new(mean, cov).map(UncertaintySet::Ellipsoidal)
    }

    pub fn dim(&self) -> usize {
        match self {
            UncertaintySet::Polyhedral(s) => s.dim(),
            UncertaintySet::Ellipsoidal(s) => s.dim(),
            UncertaintySet::Generic(s) => s.dim,
        }
    }

    /// Nonnegative exactly when `xi` is outside the set; the scale depends on
    /// the representation (row excess, or Mahalanobis radius minus one).
    pub fn violation(&self, xi: &[f64]) -> f64 {
        match self {
            UncertaintySet::Polyhedral(s) => s.violation(xi).max(0.0),
            UncertaintySet::Ellipsoidal(s) => s.violation(xi).max(0.0),
            UncertaintySet::Generic(s) => s.violation(xi),
        }
    }

    pub fn contains(&self, xi: &[f64], tol: f64) -> bool {
        xi.len() == self.dim() && self.violation(xi) <= tol
    }

    /// Library sets pass through; generic sets go through geometry detection
    /// and are validated like their library counterparts.
    pub fn resolve(&self) -> Result<ResolvedSet, SetError> {
        match self {
            UncertaintySet::Polyhedral(s) => Ok(ResolvedSet::Polyhedral(s.clone())),
            UncertaintySet::Ellipsoidal(s) => Ok(ResolvedSet::Ellipsoidal(s.clone())),
            UncertaintySet::Generic(g) => match detect_geometry(g) {
                Geometry::Polyhedral { mat, rhs } => PolyhedralSet::new(mat, rhs).map(ResolvedSet::Polyhedral),
                Geometry::Ellipsoidal { mean, cov } => EllipsoidalSet::new(mean, cov).map(ResolvedSet::Ellipsoidal),
                Geometry::Unsupported(why) => Err(SetError::Unsupported(why)),
            },
        }
    }
}

impl ResolvedSet {
    pub fn dim(&self) -> usize {
        match self {
            ResolvedSet::Polyhedral(s) => s.dim(),
            ResolvedSet::Ellipsoidal(s) => s.dim(),
        }
    }

    pub fn support(&self, a: &[f64]) -> Result<Support, SetError> {
        match self {
            ResolvedSet::Polyhedral(s) => s.support(a),
            ResolvedSet::Ellipsoidal(s) => s.support(a),
        }
    }

    pub fn violation(&self, xi: &[f64]) -> f64 {
        match self {
            ResolvedSet::Polyhedral(s) => s.violation(xi).max(0.0),
            ResolvedSet::Ellipsoidal(s) => s.violation(xi).max(0.0),
        }
    }
}

/// `max { a' xi : xi in set }` with a maximizer.
pub fn support_function(set: &UncertaintySet, a: &[f64]) -> Result<Support, SetError> {
    match set {
        UncertaintySet::Polyhedral(s) => s.support(a),
        UncertaintySet::Ellipsoidal(s) => s.support(a),
        UncertaintySet::Generic(_) => set.resolve()?.support(a),
    }
}

/// Ellipsoid `{ xi : (xi - mean)' cov^-1 (xi - mean) <= r^2 }` holding a
/// Gaussian(mean, cov) draw with probability `alpha`.
pub fn gaussian_confidence_set(mean: Vec<f64>, cov: Matrix, alpha: f64) -> Result<EllipsoidalSet, SetError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(SetError::AlphaOutOfRange(alpha));
    }
    let base = EllipsoidalSet::new(mean, cov)?;
    let r2 = chi_square_quantile(alpha, base.dim());
    base.scaled(r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confidence_radius_two_dims() {
        let s = gaussian_confidence_set(vec![0.0, 0.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]], 0.95).unwrap();
        assert!((s.cov()[0][0] - 5.991_464_547_107_979).abs() < 1e-9);
    }

    #[test]
    fn confidence_alpha_range() {
        let id = vec![vec![1.0]];
        assert_eq!(gaussian_confidence_set(vec![0.0], id.clone(), 1.0), Err(SetError::AlphaOutOfRange(1.0)));
        assert_eq!(gaussian_confidence_set(vec![0.0], id, 0.0), Err(SetError::AlphaOutOfRange(0.0)));
        assert_eq!(
            gaussian_confidence_set(vec![0.0, 0.0], vec![vec![1.0, 2.0], vec![2.0, 1.0]], 0.5),
            Err(SetError::NotPositiveDefinite)
        );
    }

    #[test]
    fn generic_resolves_through_detection() {
        let set = UncertaintySet::Generic(GenericSet::new(
            1,
            vec![
                SetConstraint::affine([(0, 1.0)], robustkit_lp::Relation::Le, 2.0),
                SetConstraint::affine([(0, 1.0)], robustkit_lp::Relation::Ge, 1.0),
            ],
        ));
        assert_eq!(support_function(&set, &[1.0]).unwrap().value, 2.0);
        assert_eq!(support_function(&set, &[-1.0]).unwrap().value, -1.0);
        assert!(set.contains(&[1.5], 0.0));
        assert!(!set.contains(&[2.5], 1e-8));
    }
}
