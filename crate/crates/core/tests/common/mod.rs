//! Independent oracles for integration tests: polytope vertex enumeration
//! and robust optima through explicit scenario programs.
#![allow(dead_code)]

use robustkit::model::{ConstraintKind, Domain, Model};
use robustkit::transform::{prepare, LdrMode};
use robustkit::uncset::UncertaintySet;
use robustkit_lp::{Lp, LpOptions, Status};

/// Gaussian elimination with partial pivoting; `None` when singular.
pub fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-10 {
            return None;
        }
        a.swap(p, c);
        b.swap(p, c);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn combinations(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if cur.len() == k {
        f(cur);
        return;
    }
    for i in start..n {
        cur.push(i);
        combinations(n, k, i + 1, cur, f);
        cur.pop();
    }
}

/// Vertices of the bounded polytope `{ xi : mat xi <= rhs }`, deduplicated.
pub fn polytope_vertices(mat: &[Vec<f64>], rhs: &[f64]) -> Vec<Vec<f64>> {
    let k = mat.first().map_or(0, Vec::len);
    let mut out: Vec<Vec<f64>> = Vec::new();
    combinations(mat.len(), k, 0, &mut Vec::new(), &mut |idx| {
        let a = idx.iter().map(|&i| mat[i].clone()).collect();
        let b = idx.iter().map(|&i| rhs[i]).collect();
        let Some(v) = solve_square(a, b) else { return };
        let inside = mat.iter().zip(rhs).all(|(row, &r)| row.iter().zip(&v).map(|(a, x)| a * x).sum::<f64>() <= r + 1e-9);
        if inside && !out.iter().any(|w| w.iter().zip(&v).all(|(a, b)| (a - b).abs() < 1e-9)) {
            out.push(v);
        }
    });
    out
}

/// Robust optimum of a model whose sets are all polyhedral: decision rules
/// are applied, then every uncertain constraint is imposed at every vertex
/// combination of the groups it mentions, and the resulting program is
/// solved by the kernel directly.
pub fn vertex_oracle(model: &Model) -> (Status, Option<f64>) {
    let pm = prepare(model, LdrMode::Affine).model;
    let nominal = pm.nominal_point();
    let vertices: Vec<Vec<Vec<f64>>> = pm
        .groups()
        .iter()
        .map(|g| match &g.set {
            UncertaintySet::Polyhedral(p) => polytope_vertices(p.mat(), p.rhs()),
            other => panic!("vertex oracle needs polyhedral sets, got {other:?}"),
        })
        .collect();

    let mut lp = Lp::new(pm.sense());
    let objective = pm.objective().substitute_params(&nominal);
    assert!(!pm.objective().is_uncertain());
    for v in pm.vars() {
        lp.add_column(objective.lin_x().get(&v.id).copied().unwrap_or(0.0), v.lower, v.upper);
    }
    lp.offset = objective.constant_term();
    let integer: Vec<bool> = pm.vars().iter().map(|v| v.domain != Domain::Continuous).collect();

    for c in pm.constraints() {
        let mut scenarios = vec![nominal.clone()];
        if c.kind() == ConstraintKind::Uncertain {
            let params: Vec<usize> = c.expr.params().map(|p| p.0).collect();
            for (g, group) in pm.groups().iter().enumerate() {
                if !group.ids.iter().any(|p| params.contains(&p.0)) {
                    continue;
                }
                let mut next = Vec::new();
                for base in &scenarios {
                    for v in &vertices[g] {
                        let mut xi = base.clone();
                        for (p, &val) in group.ids.iter().zip(v) {
                            xi[p.0] = val;
                        }
                        next.push(xi);
                    }
                }
                scenarios = next;
            }
        }
        for xi in &scenarios {
            let e = c.expr.substitute_params(xi);
            let coeffs = e.lin_x().iter().map(|(x, &v)| (x.0, v)).collect();
            lp.add_row(coeffs, c.relation, c.rhs - e.constant_term());
        }
    }
    let sol = robustkit_lp::solve(&lp, &integer, &LpOptions::default()).unwrap();
    let objective = (sol.status == Status::Optimal).then_some(sol.objective);
    (sol.status, objective)
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
}
