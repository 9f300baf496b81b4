use robustkit::model::{Direction, Domain, Expr, Model, Relation, VarId};
use robustkit::solvers::{
    check_robust_feasibility, solve_cutting_plane, solve_nominal, solve_reformulation, Point, SolveOptions, Status,
};
use robustkit::uncset::{support_function, PolyhedralSet, UncertaintySet};

fn interval(lo: f64, hi: f64) -> UncertaintySet {
    UncertaintySet::Polyhedral(PolyhedralSet::boxed(&[lo], &[hi]).unwrap())
}

fn diamond() -> UncertaintySet {
    UncertaintySet::polyhedral(
        vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, 1.0], vec![-1.0, -1.0]],
        vec![1.0; 4],
    )
    .unwrap()
}

fn unit_disc() -> UncertaintySet {
    UncertaintySet::ellipsoidal(vec![0.0, 0.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
}

/// max x0 + x1 on [0, 1]^2 subject to xi'x <= 1 for xi in `set`.
fn two_d(set: UncertaintySet) -> Model {
    let mut m = Model::new(Direction::Maximize);
    let x: Vec<VarId> = (0..2).map(|i| m.add_var(&format!("x{i}"), Domain::Continuous, 0.0, 1.0).unwrap()).collect();
    let xi = m.add_unc_params("w", 2, vec![0.0, 0.0], set).unwrap();
    m.add_constraint(Expr::from(xi[0] * x[0]) + xi[1] * x[1], Relation::Le, 1.0).unwrap();
    m.set_objective(Expr::from(x[0]) + x[1]).unwrap();
    m
}

#[test]
fn scalar_interval_cuts_once() {
    let mut m = Model::new(Direction::Maximize);
    let x = m.add_var("x", Domain::Continuous, 0.0, f64::INFINITY).unwrap();
    let xi = m.add_unc_params("a", 1, vec![1.0], interval(1.0, 2.0)).unwrap();
    m.add_constraint((xi[0] * x).into(), Relation::Le, 1.0).unwrap();
    m.set_objective(Expr::var(x)).unwrap();

    let cuts = solve_cutting_plane(&m, &SolveOptions::default()).unwrap();
    assert_eq!(cuts.status, Status::Optimal);
    assert!((cuts.x[0] - 0.5).abs() < 1e-12);
    assert_eq!(cuts.stats.cuts_added, 1);

    let reform = solve_reformulation(&m, &SolveOptions::default()).unwrap();
    assert_eq!(reform.status, Status::Optimal);
    assert!((reform.objective.unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(reform.stats.cuts_added, 0);

    let nominal = solve_nominal(&m, &SolveOptions::default()).unwrap();
    assert_eq!(nominal.objective, Some(1.0));
    assert!(nominal.max_violation > 0.9);
}

#[test]
fn diamond_solution_is_robust() {
    let m = two_d(diamond());
    for res in [
        solve_cutting_plane(&m, &SolveOptions::default()).unwrap(),
        solve_reformulation(&m, &SolveOptions::default()).unwrap(),
    ] {
        assert_eq!(res.status, Status::Optimal);
        // Support of the diamond is max(|a0|, |a1|), so (1, 1) is feasible.
        assert!((res.objective.unwrap() - 2.0).abs() < 1e-9);
        let s = support_function(&diamond(), &res.x).unwrap();
        assert!(s.value <= 1.0 + 1e-6);
    }
}

#[test]
fn disc_agrees_across_solvers() {
    let m = two_d(unit_disc());
    let opts = SolveOptions::default();
    let r = solve_reformulation(&m, &opts).unwrap();
    let c = solve_cutting_plane(&m, &opts).unwrap();
    assert_eq!(r.status, Status::Optimal);
    assert_eq!(c.status, Status::Optimal);
    let exact = 2f64.sqrt();
    assert!((r.objective.unwrap() - exact).abs() < 1e-5, "{:?}", r.objective);
    assert!((c.objective.unwrap() - exact).abs() < 1e-5, "{:?}", c.objective);
    for res in [&r, &c] {
        let report = check_robust_feasibility(&m, &Point { x: res.x.clone(), rules: vec![] }, 1e-5).unwrap();
        assert!(report.feasible, "{report:?}");
    }
}

#[test]
fn unbounded_master_is_boxed_then_reported() {
    // max x + y with only x constrained robustly.
    let mut m = Model::new(Direction::Maximize);
    let x = m.add_var("x", Domain::Continuous, 0.0, f64::INFINITY).unwrap();
    let y = m.add_var("y", Domain::Continuous, 0.0, f64::INFINITY).unwrap();
    let xi = m.add_unc_params("a", 1, vec![1.0], interval(1.0, 2.0)).unwrap();
    m.add_constraint((xi[0] * x).into(), Relation::Le, 1.0).unwrap();
    m.set_objective(Expr::from(x) + y).unwrap();
    assert_eq!(solve_cutting_plane(&m, &SolveOptions::default()).unwrap().status, Status::Unbounded);
    assert_eq!(solve_reformulation(&m, &SolveOptions::default()).unwrap().status, Status::Unbounded);
}

#[test]
fn uncertain_objective_is_lifted() {
    // max xi x with x in [0, 1], xi in [0.5, 2]: worst case 0.5.
    let mut m = Model::new(Direction::Maximize);
    let x = m.add_var("x", Domain::Continuous, 0.0, 1.0).unwrap();
    let xi = m.add_unc_params("c", 1, vec![1.0], interval(0.5, 2.0)).unwrap();
    m.set_objective((xi[0] * x).into()).unwrap();
    for res in [
        solve_cutting_plane(&m, &SolveOptions::default()).unwrap(),
        solve_reformulation(&m, &SolveOptions::default()).unwrap(),
    ] {
        assert_eq!(res.status, Status::Optimal);
        assert!((res.objective.unwrap() - 0.5).abs() < 1e-9);
        assert_eq!(res.x.len(), 1);
    }
}

#[test]
fn infeasible_robust_model() {
    // x >= 1 and xi x <= 1 for xi in [1, 2].
    let mut m = Model::new(Direction::Minimize);
    let x = m.add_var("x", Domain::Continuous, 1.0, 5.0).unwrap();
    let xi = m.add_unc_params("a", 1, vec![1.0], interval(1.0, 2.0)).unwrap();
    m.add_constraint((xi[0] * x).into(), Relation::Le, 1.0).unwrap();
    m.set_objective(Expr::var(x)).unwrap();
    assert_eq!(solve_reformulation(&m, &SolveOptions::default()).unwrap().status, Status::Infeasible);
    assert_eq!(solve_cutting_plane(&m, &SolveOptions::default()).unwrap().status, Status::Infeasible);
    assert_eq!(solve_nominal(&m, &SolveOptions::default()).unwrap().status, Status::Optimal);
}

#[test]
fn adjustable_tracking_rule() {
    // min worst-case y subject to y >= xi, xi in [1, 2]; rule y = xi costs 2.
    let mut m = Model::new(Direction::Minimize);
    let d = m.add_unc_params("d", 1, vec![1.5], interval(1.0, 2.0)).unwrap();
    let y = m.add_adjustable("y", &d, 0.0, f64::INFINITY).unwrap();
    m.add_constraint(Expr::adjustable(y) - d[0], Relation::Ge, 0.0).unwrap();
    m.set_objective(Expr::adjustable(y)).unwrap();
    for res in [
        solve_cutting_plane(&m, &SolveOptions::default()).unwrap(),
        solve_reformulation(&m, &SolveOptions::default()).unwrap(),
    ] {
        assert_eq!(res.status, Status::Optimal);
        assert!((res.objective.unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(res.rules.len(), 1);
        let rule = &res.rules[0];
        for t in [1.0, 1.5, 2.0] {
            assert!(rule.evaluate(&[t]) >= t - 1e-9);
        }
    }
}
