//! Small dense helpers for covariance and quadratic-form work.

pub(crate) type Matrix = Vec<Vec<f64>>;

/// Relative pivot tolerance for positive-definiteness checks.
pub(crate) const PD_TOL: f64 = 1e-10;

pub(crate) fn is_square(a: &Matrix, n: usize) -> bool {
    a.len() == n && a.iter().all(|r| r.len() == n)
}

pub(crate) fn is_symmetric(a: &Matrix, tol: f64) -> bool {
    let n = a.len();
    let scale = a.iter().flatten().fold(1.0f64, |acc, v| acc.max(v.abs()));
    (0..n).all(|i| (0..i).all(|j| (a[i][j] - a[j][i]).abs() <= tol * scale))
}

/// Lower Cholesky factor `L` with `A = L L'`. Fails when a pivot drops to
/// or below `rel_tol` times the largest diagonal entry.
pub(crate) fn cholesky(a: &Matrix, rel_tol: f64) -> Option<Matrix> {
    let n = a.len();
    let scale = (0..n).fold(0.0f64, |acc, i| acc.max(a[i][i]));
    if !(scale > 0.0) {
        return None;
    }
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if !(d > rel_tol * scale) {
                    return None;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

/// Solves `L z = b` for lower-triangular `L`.
pub(crate) fn forward_sub(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut z = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i][k] * z[k]).sum();
        z[i] = (b[i] - s) / l[i][i];
    }
    z
}

/// Solves `L' z = b` for lower-triangular `L`.
pub(crate) fn backward_sub_transposed(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut z = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k][i] * z[k]).sum();
        z[i] = (b[i] - s) / l[i][i];
    }
    z
}

/// Solves `A z = b` given the Cholesky factor of `A`.
pub(crate) fn cholesky_solve(l: &Matrix, b: &[f64]) -> Vec<f64> {
    backward_sub_transposed(l, &forward_sub(l, b))
}

pub(crate) fn mat_vec(a: &Matrix, v: &[f64]) -> Vec<f64> {
    a.iter().map(|row| dot(row, v)).collect()
}

/// `L' v` for lower-triangular `L`.
pub(crate) fn lower_transposed_vec(l: &Matrix, v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|j| (j..n).map(|i| l[i][j] * v[i]).sum()).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_and_solve() {
        let a = vec![vec![4.0, 2.0], vec![2.0, 3.0]];
        let l = cholesky(&a, PD_TOL).unwrap();
        let z = cholesky_solve(&l, &[2.0, 1.0]);
        let back = mat_vec(&a, &z);
        assert!((back[0] - 2.0).abs() < 1e-14 && (back[1] - 1.0).abs() < 1e-14);
        // L' v agrees with an explicit transpose.
        let v = [1.0, -2.0];
        let lt = lower_transposed_vec(&l, &v);
        assert!((lt[0] - (l[0][0] * v[0] + l[1][0] * v[1])).abs() < 1e-15);
        assert!((lt[1] - l[1][1] * v[1]).abs() < 1e-15);
    }

    #[test]
    fn indefinite_rejected() {
        assert!(cholesky(&vec![vec![1.0, 2.0], vec![2.0, 1.0]], PD_TOL).is_none());
        assert!(cholesky(&vec![vec![1.0, 0.0], vec![0.0, 0.0]], PD_TOL).is_none());
    }

    #[test]
    fn tolerance_is_scale_free() {
        let tiny = vec![vec![1e-14, 0.0], vec![0.0, 2e-14]];
        assert!(cholesky(&tiny, PD_TOL).is_some());
    }
}
