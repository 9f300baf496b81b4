mod support;

use proptest::prelude::*;
use robustkit_lp::{solve_lp, solve_milp, verify_solution, Direction, Lp, LpOptions, Relation, Status};
use support::{exhaustive_binary, random_binary, random_small_lp, vertex_enumeration, Rng};

#[test]
fn textbook_lp_matches_vertex_enumeration() {
    let mut lp = Lp::new(Direction::Maximize);
    lp.add_column(3.0, 0.0, 10.0);
    lp.add_column(2.0, 0.0, 10.0);
    lp.add_row(vec![(0, 1.0), (1, 1.0)], Relation::Le, 4.0);
    lp.add_row(vec![(0, 1.0)], Relation::Le, 2.0);
    let (oracle, at) = vertex_enumeration(&lp).unwrap();
    assert_eq!(oracle, 10.0);
    assert_eq!(at, vec![2.0, 2.0]);
    let sol = solve_lp(&lp, &LpOptions::default()).unwrap();
    assert!((sol.objective - oracle).abs() < 1e-9);
}

#[test]
fn simplex_matches_vertex_enumeration_on_corpus() {
    let mut rng = Rng::new(7);
    let opts = LpOptions::default();
    for case in 0..400 {
        let lp = random_small_lp(&mut rng);
        let sol = solve_lp(&lp, &opts).unwrap();
        match vertex_enumeration(&lp) {
            None => assert_eq!(sol.status, Status::Infeasible, "case {case}: {lp:?}"),
            Some((v, _)) => {
                assert_eq!(sol.status, Status::Optimal, "case {case}: {lp:?}");
                assert!((sol.objective - v).abs() <= 1e-7 * (1.0 + v.abs()), "case {case}: {} vs {v}", sol.objective);
                let r = verify_solution(&lp, &sol);
                assert!(r.max_primal_violation <= 1e-7, "case {case}: {r:?}");
                assert!(r.max_complementarity <= 1e-6 && r.max_dual_violation <= 1e-7, "case {case}: {r:?}");
                assert!(r.duality_gap <= 1e-7 * (1.0 + v.abs()), "case {case}: {r:?}");
            }
        }
    }
}

#[test]
fn branch_and_bound_matches_enumeration() {
    let mut rng = Rng::new(11);
    let opts = LpOptions::default();
    for case in 0..60 {
        let n = rng.int(2, 12) as usize;
        let lp = random_binary(&mut rng, n);
        let sol = solve_milp(&lp, &vec![true; n], &opts).unwrap();
        match exhaustive_binary(&lp) {
            None => assert_eq!(sol.status, Status::Infeasible, "case {case}"),
            Some((v, _)) => {
                assert_eq!(sol.status, Status::Optimal, "case {case}");
                assert!((sol.objective - v).abs() <= 1e-6, "case {case}: {} vs {v}", sol.objective);
            }
        }
    }
}

#[test]
fn repeated_solves_are_bit_identical() {
    let mut rng = Rng::new(3);
    for _ in 0..50 {
        let lp = random_small_lp(&mut rng);
        let a = solve_lp(&lp, &LpOptions::default()).unwrap();
        let b = solve_lp(&lp, &LpOptions::default()).unwrap();
        assert_eq!(a.status, b.status);
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
        let bits = |v: &[f64]| v.iter().map(|f| f.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.x), bits(&b.x));
        assert_eq!(bits(&a.duals), bits(&b.duals));
    }
}

fn weak_duality_holds(lp: &Lp) {
    let sol = solve_lp(lp, &LpOptions::default()).unwrap();
    if sol.status != Status::Optimal {
        return;
    }
    let r = verify_solution(lp, &sol);
    // Any dual-feasible point bounds the primal: from above for a
    // maximization, from below for a minimization.
    match lp.direction {
        Direction::Maximize => assert!(r.dual_objective >= sol.objective - 1e-7 * (1.0 + sol.objective.abs())),
        Direction::Minimize => assert!(r.dual_objective <= sol.objective + 1e-7 * (1.0 + sol.objective.abs())),
    }
    assert!(r.duality_gap <= 1e-7 * (1.0 + sol.objective.abs()));
}

proptest! {
    #[test]
    fn duality_on_random_lps(seed in 0u64..10_000) {
        let mut rng = Rng::new(seed);
        weak_duality_holds(&random_small_lp(&mut rng));
    }
}
