mod common;

use robustkit::cases::{gen_knapsack, gen_portfolio, run_sweep, CaseGeometry, CaseKind, CaseSpec, SweepSpec};
use robustkit::io::serialize_model;
use robustkit::solvers::{solve, solve_nominal, SolveOptions, SolverKind, Status};
use robustkit::uncset::support_function;

fn bounds(model: &robustkit::model::Model) -> (Vec<f64>, Vec<f64>) {
    let g = &model.groups()[0];
    let k = g.ids.len();
    (0..k)
        .map(|j| {
            let mut e = vec![0.0; k];
            e[j] = -1.0;
            let lo = -support_function(&g.set, &e).unwrap().value;
            e[j] = 1.0;
            (lo, support_function(&g.set, &e).unwrap().value)
        })
        .unzip()
}

#[test]
fn generation_is_deterministic() {
    for case in [CaseKind::Portfolio, CaseKind::Knapsack, CaseKind::Facility] {
        for geometry in [CaseGeometry::Polyhedral, CaseGeometry::Ellipsoidal] {
            let spec = CaseSpec { case, size: CaseSpec::default_size(case), geometry, alpha: 0.5, seed: 42 };
            assert_eq!(serialize_model(&spec.generate()), serialize_model(&spec.generate()));
            let other = CaseSpec { seed: 43, ..spec.clone() };
            assert_ne!(serialize_model(&spec.generate()), serialize_model(&other.generate()));
        }
    }
}

#[test]
fn two_asset_box_portfolio_is_analytic() {
    for seed in 0..10 {
        let m = gen_portfolio(2, CaseGeometry::Polyhedral, 0.6, seed);
        let (lo, _) = bounds(&m);
        let r = solve(&m, SolverKind::Reformulate, &SolveOptions::default()).unwrap();
        let best = lo[0].max(lo[1]);
        assert!((r.objective.unwrap() - best).abs() < 1e-12, "seed {seed}: {:?} vs {best}", r.objective);
    }
}

#[test]
fn zero_alpha_matches_nominal() {
    for seed in 0..5 {
        for geometry in [CaseGeometry::Polyhedral, CaseGeometry::Ellipsoidal] {
            for m in [gen_portfolio(4, geometry, 0.0, seed), gen_knapsack(6, geometry, 0.0, seed)] {
                let nominal = solve_nominal(&m, &SolveOptions::default()).unwrap().objective.unwrap();
                for solver in [SolverKind::Reformulate, SolverKind::Cuts] {
                    let robust = solve(&m, solver, &SolveOptions::default()).unwrap().objective.unwrap();
                    assert!((robust - nominal).abs() <= 1e-9 * nominal.abs(), "{robust} vs {nominal}");
                }
            }
        }
    }
}

#[test]
fn full_range_knapsack_uses_upper_weights() {
    for seed in 0..10 {
        let m = gen_knapsack(3, CaseGeometry::Polyhedral, 2.5, seed);
        let (_, hi) = bounds(&m);
        let cap = m.constraints()[0].rhs;
        let values: Vec<f64> = (0..3).map(|i| m.objective().lin_x()[&robustkit::model::VarId(i)]).collect();
        let mut best = 0.0f64;
        for mask in 0..8u32 {
            let pick = |i: usize| ((mask >> i) & 1) as f64;
            if (0..3).map(|i| hi[i] * pick(i)).sum::<f64>() <= cap {
                best = best.max((0..3).map(|i| values[i] * pick(i)).sum());
            }
        }
        let r = solve(&m, SolverKind::Reformulate, &SolveOptions::default()).unwrap();
        assert!((r.objective.unwrap() - best).abs() < 1e-9, "seed {seed}: {:?} vs {best}", r.objective);
    }
}

#[test]
fn knapsack_sweep_is_monotone() {
    let alphas: Vec<f64> = (0..=12).map(|i| i as f64 / 8.0).collect();
    for solver in [SolverKind::Reformulate, SolverKind::Cuts] {
        let rows = run_sweep(&SweepSpec {
            case: CaseKind::Knapsack,
            size: vec![8],
            alphas: alphas.clone(),
            geometry: CaseGeometry::Polyhedral,
            seed: 3,
            solver,
            options: SolveOptions::default(),
            jobs: 2,
        });
        let objs: Vec<f64> = rows.iter().map(|r| r.objective.unwrap()).collect();
        assert!(objs.windows(2).all(|w| w[1] <= w[0]), "{objs:?}");
        assert_eq!(rows.iter().map(|r| r.alpha).collect::<Vec<_>>(), alphas);
    }
}

#[test]
fn facility_vertex_oracle_with_decision_rules() {
    for seed in 0..4 {
        let m = robustkit::cases::gen_facility(2, 2, CaseGeometry::Polyhedral, 0.8, seed);
        let r = solve(&m, SolverKind::Cuts, &SolveOptions::default()).unwrap();
        assert_eq!(r.status, Status::Optimal);
        let (status, oracle) = common::vertex_oracle(&m);
        assert_eq!(status, Status::Optimal);
        assert!(common::rel_diff(r.objective.unwrap(), oracle.unwrap()) < 1e-6);
    }
}
