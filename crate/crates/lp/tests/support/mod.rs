//! Brute-force oracles and a seeded corpus for kernel tests.
#![allow(dead_code)]

use robustkit_lp::{Direction, Lp, Relation};

/// Small deterministic generator (xorshift64*) for test corpora.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        self.0.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
        lo + (self.next_u64() % (hi - lo + 1) as u64) as i64
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Solves a square system by Gaussian elimination with partial pivoting.
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

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Optimum of a box-bounded LP by enumerating every basic point.
/// Returns `None` when no feasible vertex exists.
pub fn vertex_enumeration(lp: &Lp) -> Option<(f64, Vec<f64>)> {
    let n = lp.num_columns();
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for row in &lp.rows {
        let mut a = vec![0.0; n];
        for &(j, v) in &row.coeffs {
            a[j] += v;
        }
        planes.push((a, row.rhs));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        assert!(lp.lower[j].is_finite() && lp.upper[j].is_finite(), "oracle needs a box");
        planes.push((e.clone(), lp.lower[j]));
        planes.push((e, lp.upper[j]));
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for idx in combinations(planes.len(), n) {
        let a = idx.iter().map(|&i| planes[i].0.clone()).collect();
        let b = idx.iter().map(|&i| planes[i].1).collect();
        let Some(x) = solve_square(a, b) else { continue };
        let feasible = (0..n).all(|j| x[j] >= lp.lower[j] - 1e-9 && x[j] <= lp.upper[j] + 1e-9)
            && lp.rows.iter().all(|r| r.relation.violation(r.activity(&x), r.rhs) <= 1e-9);
        if !feasible {
            continue;
        }
        let v = lp.objective_value(&x);
        let better = match &best {
            None => true,
            Some((bv, _)) => lp.direction.improves(v, *bv, 0.0),
        };
        if better {
            best = Some((v, x));
        }
    }
    best
}

/// Optimum over all 0/1 assignments of a pure binary problem.
pub fn exhaustive_binary(lp: &Lp) -> Option<(f64, Vec<f64>)> {
    let n = lp.num_columns();
    assert!(n <= 16);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << n) {
        let x: Vec<f64> = (0..n).map(|j| ((mask >> j) & 1) as f64).collect();
        if !lp.rows.iter().all(|r| r.relation.violation(r.activity(&x), r.rhs) <= 1e-9) {
            continue;
        }
        let v = lp.objective_value(&x);
        if best.as_ref().map_or(true, |(bv, _)| lp.direction.improves(v, *bv, 0.0)) {
            best = Some((v, x));
        }
    }
    best
}

/// Random box-bounded LP with at most 3 columns and 6 rows.
pub fn random_small_lp(rng: &mut Rng) -> Lp {
    let n = rng.int(1, 3) as usize;
    let m = rng.int(1, 6) as usize;
    let dir = if rng.int(0, 1) == 0 { Direction::Minimize } else { Direction::Maximize };
    let mut lp = Lp::new(dir);
    for _ in 0..n {
        let lo = rng.int(-5, 0) as f64;
        let hi = lo + rng.int(1, 8) as f64;
        lp.add_column(rng.int(-5, 5) as f64, lo, hi);
    }
    for _ in 0..m {
        let coeffs = (0..n)
            .map(|j| (j, rng.int(-4, 4) as f64))
            .filter(|&(_, a)| a != 0.0)
            .collect();
        let rel = match rng.int(0, 6) {
            0 => Relation::Eq,
            1 | 2 => Relation::Ge,
            _ => Relation::Le,
        };
        lp.add_row(coeffs, rel, rng.int(-6, 10) as f64);
    }
    lp
}

/// Random multi-constraint binary program.
pub fn random_binary(rng: &mut Rng, n: usize) -> Lp {
    let dir = if rng.int(0, 1) == 0 { Direction::Minimize } else { Direction::Maximize };
    let mut lp = Lp::new(dir);
    for _ in 0..n {
        lp.add_column(rng.int(-10, 20) as f64, 0.0, 1.0);
    }
    let m = rng.int(1, 3) as usize;
    for _ in 0..m {
        let coeffs: Vec<(usize, f64)> = (0..n).map(|j| (j, rng.int(1, 9) as f64)).collect();
        let total: f64 = coeffs.iter().map(|c| c.1).sum();
        let rel = if rng.int(0, 3) == 0 { Relation::Ge } else { Relation::Le };
        let rhs = match rel {
            Relation::Ge => (0.2 * total).round(),
            _ => (0.5 * total).round(),
        };
        lp.add_row(coeffs, rel, rhs);
    }
    lp
}
