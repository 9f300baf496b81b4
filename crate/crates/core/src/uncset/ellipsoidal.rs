use super::{SetError, Support};
use crate::linalg::{cholesky, dot, forward_sub, is_square, is_symmetric, lower_transposed_vec, mat_vec, norm, Matrix, PD_TOL};

/// `{ xi : (xi - mean)' cov^-1 (xi - mean) <= 1 }` with `cov` positive definite.
#[derive(Clone, Debug, PartialEq)]
pub struct EllipsoidalSet {
    mean: Vec<f64>,
    cov: Matrix,
    /// Lower Cholesky factor of `cov`.
    chol: Matrix,
}

impl EllipsoidalSet {
    pub fn new(mean: Vec<f64>, cov: Matrix) -> Result<Self, SetError> {
        let k = mean.len();
        if k == 0 || !is_square(&cov, k) {
            return Err(SetError::DimensionMismatch(format!("mean has length {k}, covariance must be {k}x{k}")));
        }
        if mean.iter().chain(cov.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(SetError::DimensionMismatch("non-finite entry in ellipsoid data".into()));
        }
        if !is_symmetric(&cov, 1e-10) {
            return Err(SetError::NotSymmetric);
        }
        let chol = cholesky(&cov, PD_TOL).ok_or(SetError::NotPositiveDefinite)?;
        Ok(EllipsoidalSet { mean, cov, chol })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn cov(&self) -> &Matrix {
        &self.cov
    }

    /// Lower Cholesky factor `L` with `cov = L L'`.
    pub fn factor(&self) -> &Matrix {
        &self.chol
    }

    /// Mahalanobis radius `(xi - mean)' cov^-1 (xi - mean)`.
    pub fn radius2(&self, xi: &[f64]) -> f64 {
        let d: Vec<f64> = xi.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        let z = forward_sub(&self.chol, &d);
        dot(&z, &z)
    }

    pub fn violation(&self, xi: &[f64]) -> f64 {
        self.radius2(xi) - 1.0
    }

    /// `sqrt(a' cov a)`, evaluated as `||L' a||`.
    pub fn scaled_norm(&self, a: &[f64]) -> f64 {
        norm(&lower_transposed_vec(&self.chol, a))
    }

    /// Closed form: value `a'mean + sqrt(a' cov a)`, attained at
    /// `mean + cov a / sqrt(a' cov a)`; the mean itself when `a = 0`.
    pub fn support(&self, a: &[f64]) -> Result<Support, SetError> {
        if a.len() != self.dim() {
            return Err(SetError::DimensionMismatch(format!("direction of length {} for a {}-dimensional set", a.len(), self.dim())));
        }
        let s = self.scaled_norm(a);
        let center = dot(a, &self.mean);
        if s == 0.0 {
            return Ok(Support { value: center, argmax: self.mean.clone() });
        }
        let sa = mat_vec(&self.cov, a);
        let argmax = self.mean.iter().zip(&sa).map(|(m, v)| m + v / s).collect();
        Ok(Support { value: center + s, argmax })
    }

    /// Same ellipsoid with covariance multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self, SetError> {
        let cov = self.cov.iter().map(|r| r.iter().map(|v| v * factor).collect()).collect();
        EllipsoidalSet::new(self.mean.clone(), cov)
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_ball_support() {
        let s = EllipsoidalSet::new(vec![0.0, 0.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let sup = s.support(&[3.0, 4.0]).unwrap();
        assert!((sup.value - 5.0).abs() < 1e-14);
        assert!((sup.argmax[0] - 0.6).abs() < 1e-14 && (sup.argmax[1] - 0.8).abs() < 1e-14);
    }

    #[test]
    fn shifted_ball() {
        let s = EllipsoidalSet::new(
            vec![0.5, 0.3, 0.1],
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
        )
        .unwrap();
        assert!((s.support(&[1.0, 0.0, 0.0]).unwrap().value - 1.5).abs() < 1e-14);
    }

    #[test]
    fn semi_axes() {
        let s = EllipsoidalSet::new(vec![0.0, 0.0], vec![vec![4.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(s.support(&[1.0, 0.0]).unwrap().value, 2.0);
        assert_eq!(s.support(&[0.0, 1.0]).unwrap().value, 1.0);
        assert!((s.radius2(&[2.0, 0.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_direction_returns_mean() {
        let s = EllipsoidalSet::new(vec![1.0, 2.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let sup = s.support(&[0.0, 0.0]).unwrap();
        assert_eq!(sup.value, 0.0);
        assert_eq!(sup.argmax, vec![1.0, 2.0]);
    }

    #[test]
    fn indefinite_and_asymmetric() {
        assert_eq!(
            EllipsoidalSet::new(vec![0.0, 0.0], vec![vec![1.0, 2.0], vec![2.0, 1.0]]),
            Err(SetError::NotPositiveDefinite)
        );
        assert_eq!(
            EllipsoidalSet::new(vec![0.0, 0.0], vec![vec![1.0, 0.5], vec![0.0, 1.0]]),
            Err(SetError::NotSymmetric)
        );
    }
}
