//! Bounded-variable revised simplex.
//!
//! Every row gets a slack column so the working system is `A x + s = b`
//! with `s` bounded according to the row relation. Rows whose slack cannot
//! absorb the initial residual receive an artificial column; phase one
//! drives the artificials to zero, phase two optimizes the real cost.
//!
//! The basis inverse is held densely and updated by elementary row
//! operations after each pivot; it is recomputed from scratch every
//! `refactor_every` pivots, more often once the updates start to drift.
//!
//! [`Simplex`] keeps the final basis between solves. Added rows and changed
//! bounds leave that basis dual feasible, so a re-solve runs the dual
//! simplex from it instead of starting over.

use crate::problem::{Lp, LpOptions, LpSolution, Relation, Status};
use crate::verify::verify_solution;
use crate::LpError;

/// Relative disagreement between updated and recomputed basic values that
/// signals an inaccurate inverse. Harris steps alone move values by up to
/// the feasibility tolerance, so this sits well above it.
const DRIFT_TOL: f64 = 1e-6;

#[derive(Copy, Clone, Debug, PartialEq)]
enum State {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free column parked at zero.
    Free,
}

#[derive(Copy, Clone, Debug, PartialEq)]
enum Rule {
    Dantzig,
    Bland,
}

#[derive(Copy, Clone, Debug)]
enum Attempt {
    Cold,
    /// Refactorizes after every pivot.
    Careful,
    Perturbed,
}

/// Singular-basis rollbacks allowed per tableau.
const MAX_RECOVERIES: usize = 20;

/// Relative cost shift applied when the dual simplex stalls.
const COST_PERTURBATION: f64 = 1e-7;

/// Relative relaxation applied to row bounds by the perturbed attempt.
const PERTURBATION: f64 = 1e-6;

#[derive(Copy, Clone, Debug, PartialEq)]
enum Phase {
    Done,
    Unbounded,
    IterLimit,
    /// The basis matrix could not be inverted.
    Singular,
    /// No objective progress within the anti-cycling budget.
    Stalled,
}

/// Terminal state of one simplex pass.
#[derive(Copy, Clone, Debug, PartialEq)]
enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
    IterLimit,
    /// Numerical breakdown; the caller starts over more carefully.
    Failed,
}

/// Basis of a solved problem, restorable into a [`Simplex`] over the same
/// rows and columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Basis {
    basis: Vec<usize>,
    state: Vec<State>,
}

#[derive(Clone)]
struct Tableau {
    m: usize,
    /// Column-major sparse matrix over structurals, slacks, artificials.
    cols: Vec<Vec<(usize, f64)>>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    cost: Vec<f64>,
    rhs: Vec<f64>,
    x: Vec<f64>,
    state: Vec<State>,
    /// Column in each basis position.
    basis: Vec<usize>,
    /// Dense row-major inverse of the basis matrix.
    binv: Vec<f64>,
    /// Slack column of each row.
    slack: Vec<usize>,
    since_refactor: usize,
    /// Pivots between refactorizations; halved whenever the updated basic
    /// values drift from the recomputed ones by more than `DRIFT_TOL`
    /// (relative), doubled back while they agree closely.
    refactor_every: usize,
    singular: bool,
    iterations: usize,
    /// Columns barred from entering (artificials after phase one).
    frozen: Vec<bool>,
    /// Last basis that factorized cleanly.
    good: Option<Basis>,
    /// Columns whose entry made the basis singular; barred until the
    /// objective next improves.
    banned: Vec<usize>,
    recoveries: usize,
    /// True once the real costs are installed.
    phase_two: bool,
    opts: LpOptions,
}

/// Solves `lp` with the bounded-variable simplex.
///
/// A claimed optimum is re-checked against the original rows; when the
/// check fails, or the basis turns singular, the solve is repeated with a
/// fresh factorization after every pivot.
pub fn solve_lp(lp: &Lp, opts: &LpOptions) -> Result<LpSolution, LpError> {
    lp.check()?;
    Ok(Simplex::new(lp.clone(), opts.clone()).solve_checked())
}

/// An LP together with the basis of its last solve.
#[derive(Clone)]
pub struct Simplex {
    lp: Lp,
    opts: LpOptions,
    tab: Option<Tableau>,
}

impl Simplex {
    pub fn new(lp: Lp, opts: LpOptions) -> Self {
        Simplex { lp, opts, tab: None }
    }

    pub fn lp(&self) -> &Lp {
        &self.lp
    }

    pub fn options(&self) -> &LpOptions {
        &self.opts
    }

    /// Appends a column; the next solve starts from scratch.
    pub fn add_column(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        self.tab = None;
        self.lp.add_column(cost, lower, upper)
    }

    /// Appends a row; the current basis is extended by its slack.
    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> usize {
        if let Some(tab) = self.tab.as_mut() {
            tab.add_row(&coeffs, relation, rhs);
        }
        self.lp.add_row(coeffs, relation, rhs)
    }

    /// Removes rows (indices into the current problem). The stored basis
    /// survives when every removed row has a basic slack.
    pub fn remove_rows(&mut self, rows: &[usize]) {
        let mut rows = rows.to_vec();
        rows.sort_unstable();
        rows.dedup();
        for &i in rows.iter().rev() {
            if let Some(tab) = self.tab.as_mut() {
                if !tab.remove_row(i) {
                    self.tab = None;
                }
            }
            self.lp.rows.remove(i);
        }
    }

    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lp.lower[j] = lower;
        self.lp.upper[j] = upper;
        if let Some(tab) = self.tab.as_mut() {
            tab.set_bounds(j, lower, upper);
        }
    }

    /// Basis of the last successful solve.
    pub fn basis(&self) -> Option<Basis> {
        self.tab.as_ref().map(|t| Basis { basis: t.basis.clone(), state: t.state.clone() })
    }

    /// Reinstates a basis taken from this problem with the same rows and
    /// columns; mismatched snapshots are ignored.
    pub fn restore(&mut self, basis: &Basis) {
        if let Some(tab) = self.tab.as_mut() {
            if tab.basis.len() == basis.basis.len() && tab.state.len() == basis.state.len() {
                tab.restore(basis);
                if tab.singular {
                    self.tab = None;
                }
            }
        }
    }

    /// Solves from the stored basis when there is one.
    pub fn solve(&mut self) -> Result<LpSolution, LpError> {
        self.lp.check()?;
        Ok(self.solve_checked())
    }

    fn solve_checked(&mut self) -> LpSolution {
        if let Some(mut tab) = self.tab.take() {
            tab.iterations = 0;
            tab.recoveries = 0;
            tab.banned.clear();
            let outcome = match tab.reoptimize() {
                // A stalled warm start may still succeed from scratch.
                Outcome::IterLimit => Outcome::Failed,
                other => other,
            };
            if let Some(sol) = self.accept(tab, outcome) {
                return sol;
            }
        }
        let mut iterations = 0;
        for attempt in [Attempt::Cold, Attempt::Perturbed, Attempt::Careful] {
            let (mut tab, outcome) = match attempt {
                Attempt::Cold => Tableau::cold(&self.lp, &self.opts),
                Attempt::Careful => Tableau::cold(&self.lp, &LpOptions { refactor_every: 1, ..self.opts.clone() }),
                Attempt::Perturbed => self.perturbed(),
            };
            tab.iterations += iterations;
            iterations = tab.iterations;
            if let Some(sol) = self.accept(tab, outcome) {
                return sol;
            }
        }
        LpSolution::without_point(Status::IterLimit, iterations, 1)
    }

    /// Cold solve with every inequality relaxed by a small pseudo-random
    /// amount, then a re-solve of the exact data from the basis found.
    /// Breaks the ties that let degenerate vertices stall the pivoting.
    fn perturbed(&self) -> (Tableau, Outcome) {
        let mut lp = self.lp.clone();
        let mut state = 0x2545_f491_4f6c_dd1du64;
        for row in &mut lp.rows {
            state = state.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1_442_695_040_888_963_407);
            let u = (state >> 11) as f64 / (1u64 << 53) as f64;
            let delta = PERTURBATION * (1.0 + row.rhs.abs()) * (1.0 + u);
            match row.relation {
                Relation::Le => row.rhs += delta,
                Relation::Ge => row.rhs -= delta,
                Relation::Eq => {}
            }
        }
        let (mut tab, outcome) = Tableau::cold(&lp, &self.opts);
        if outcome != Outcome::Optimal {
            // A relaxed problem without a point says nothing definite
            // about the exact one, except that infeasibility carries over.
            let outcome = if outcome == Outcome::Infeasible { Outcome::Infeasible } else { Outcome::Failed };
            return (tab, outcome);
        }
        tab.rhs = self.lp.rows.iter().map(|r| r.rhs).collect();
        tab.refactor();
        if tab.singular {
            return (tab, Outcome::Failed);
        }
        let outcome = tab.reoptimize();
        (tab, outcome)
    }

    /// Keeps `tab` and returns its solution unless it broke down or its
    /// optimum fails an independent check.
    fn accept(&mut self, tab: Tableau, outcome: Outcome) -> Option<LpSolution> {
        match outcome {
            Outcome::Failed => None,
            Outcome::Optimal => {
                let sol = tab.solution(&self.lp, outcome);
                if !trustworthy(&self.lp, &sol, &self.opts) {
                    return None;
                }
                self.tab = Some(tab);
                Some(sol)
            }
            Outcome::Infeasible => {
                let sol = tab.solution(&self.lp, outcome);
                // A dual-simplex infeasibility proof leaves a dual feasible
                // basis that later bound changes can start from.
                if tab.phase_two {
                    self.tab = Some(tab);
                }
                Some(sol)
            }
            Outcome::Unbounded | Outcome::IterLimit => Some(tab.solution(&self.lp, outcome)),
        }
    }
}

fn trustworthy(lp: &Lp, sol: &LpSolution, opts: &LpOptions) -> bool {
    let report = verify_solution(lp, sol);
    let rhs_scale = lp.rows.iter().fold(1.0f64, |acc, r| acc.max(r.rhs.abs()));
    let cost_scale = lp.objective.iter().fold(1.0f64, |acc, c| acc.max(c.abs()));
    report.max_primal_violation <= 100.0 * opts.feas_tol * rhs_scale
        && report.max_dual_violation <= 100.0 * opts.opt_tol * cost_scale
}

fn slack_bounds(relation: Relation) -> (f64, f64) {
    match relation {
        Relation::Le => (0.0, f64::INFINITY),
        Relation::Ge => (f64::NEG_INFINITY, 0.0),
        Relation::Eq => (0.0, 0.0),
    }
}

/// Nonbasic resting state and value for a column with the given bounds.
fn park(lower: f64, upper: f64) -> (State, f64) {
    if lower.is_finite() {
        (State::AtLower, lower)
    } else if upper.is_finite() {
        (State::AtUpper, upper)
    } else {
        (State::Free, 0.0)
    }
}

impl Tableau {
    /// Slack basis plus artificials for rows the slacks cannot satisfy.
    fn new(lp: &Lp, opts: &LpOptions) -> Tableau {
        let n = lp.num_columns();
        let m = lp.num_rows();

        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, row) in lp.rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                push_entry(&mut cols[j], i, a);
            }
        }

        let mut lb = lp.lower.clone();
        let mut ub = lp.upper.clone();
        let mut state = Vec::with_capacity(n + 2 * m);
        let mut x = Vec::with_capacity(n + 2 * m);
        for j in 0..n {
            let (s, v) = park(lb[j], ub[j]);
            state.push(s);
            x.push(v);
        }

        let mut residual: Vec<f64> = lp.rows.iter().map(|r| r.rhs).collect();
        for (j, col) in cols.iter().enumerate() {
            if x[j] != 0.0 {
                for &(i, a) in col {
                    residual[i] -= a * x[j];
                }
            }
        }

        let mut basis = vec![usize::MAX; m];
        let mut binv = vec![0.0; m * m];
        let mut artificials = Vec::new();
        for (i, row) in lp.rows.iter().enumerate() {
            let (slo, shi) = slack_bounds(row.relation);
            let s = n + i;
            cols.push(vec![(i, 1.0)]);
            lb.push(slo);
            ub.push(shi);
            let r = residual[i];
            if r >= slo - opts.feas_tol && r <= shi + opts.feas_tol {
                state.push(State::Basic);
                x.push(r);
                basis[i] = s;
                binv[i * m + i] = 1.0;
            } else {
                let (parked, st) = if r < slo { (slo, State::AtLower) } else { (shi, State::AtUpper) };
                state.push(st);
                x.push(parked);
                artificials.push((i, r - parked));
            }
        }
        let first_artificial = cols.len();
        for (i, gap) in artificials {
            let sign = if gap >= 0.0 { 1.0 } else { -1.0 };
            cols.push(vec![(i, sign)]);
            lb.push(0.0);
            ub.push(f64::INFINITY);
            state.push(State::Basic);
            x.push(gap.abs());
            basis[i] = cols.len() - 1;
            binv[i * m + i] = sign;
        }

        let total = cols.len();
        let mut cost = vec![0.0; total];
        for c in &mut cost[first_artificial..] {
            *c = 1.0;
        }
        Tableau {
            m,
            cols,
            lb,
            ub,
            cost,
            rhs: lp.rows.iter().map(|r| r.rhs).collect(),
            x,
            state,
            basis,
            binv,
            slack: (n..n + m).collect(),
            since_refactor: 0,
            refactor_every: opts.refactor_every.max(1),
            singular: false,
            iterations: 0,
            frozen: vec![false; total],
            good: None,
            banned: Vec::new(),
            recoveries: 0,
            phase_two: false,
            opts: opts.clone(),
        }
    }

    /// Two-phase solve from the slack basis.
    fn cold(lp: &Lp, opts: &LpOptions) -> (Tableau, Outcome) {
        let mut tab = Tableau::new(lp, opts);
        let n = lp.num_columns();
        let first_artificial = n + lp.num_rows();
        let total = tab.cols.len();
        if total > first_artificial {
            match tab.run() {
                Phase::IterLimit => return (tab, Outcome::IterLimit),
                // Phase one is bounded below by zero, so an unbounded ray
                // means the factorization broke down.
                Phase::Unbounded | Phase::Singular | Phase::Stalled => return (tab, Outcome::Failed),
                Phase::Done => {}
            }
            tab.refactor();
            if tab.singular {
                return (tab, Outcome::Failed);
            }
            let infeas: f64 = (first_artificial..total).map(|j| tab.x[j].max(0.0)).sum();
            let scale = 1.0 + tab.rhs.iter().fold(0.0f64, |acc, b| acc.max(b.abs()));
            if infeas > opts.feas_tol * scale {
                return (tab, Outcome::Infeasible);
            }
            for j in first_artificial..total {
                tab.cost[j] = 0.0;
                tab.ub[j] = 0.0;
                tab.frozen[j] = true;
                if tab.state[j] != State::Basic {
                    tab.x[j] = 0.0;
                    tab.state[j] = State::AtLower;
                }
            }
            tab.refactor();
            if tab.singular {
                return (tab, Outcome::Failed);
            }
        }
        let sign = lp.direction.sign();
        for j in 0..n {
            tab.cost[j] = sign * lp.objective[j];
        }
        tab.phase_two = true;
        let outcome = tab.optimize();
        (tab, outcome)
    }

    /// Primal simplex to optimality, then dual cleanup of any basic column
    /// left outside its bounds by the relaxed ratio test.
    fn optimize(&mut self) -> Outcome {
        let mut polish_rounds = 0;
        loop {
            match self.run() {
                Phase::IterLimit => return Outcome::IterLimit,
                Phase::Unbounded => return Outcome::Unbounded,
                Phase::Singular | Phase::Stalled => return Outcome::Failed,
                Phase::Done => {}
            }
            self.refactor();
            if self.singular {
                return Outcome::Failed;
            }
            if self.primal_infeasibility() <= self.opts.feas_tol {
                return Outcome::Optimal;
            }
            if polish_rounds == 3 {
                return Outcome::Failed;
            }
            polish_rounds += 1;
            let before = Basis { basis: self.basis.clone(), state: self.state.clone() };
            match self.dual_run() {
                Phase::IterLimit => return Outcome::IterLimit,
                Phase::Unbounded => return Outcome::Infeasible,
                Phase::Singular => return Outcome::Failed,
                Phase::Stalled => {
                    // Rounding noise the dual cannot remove. Fall back to the
                    // primal optimum; the caller's independent check decides
                    // whether it is usable.
                    self.restore(&before);
                    let scale = 1.0 + self.rhs.iter().fold(0.0f64, |acc, b| acc.max(b.abs()));
                    if !self.singular && self.primal_infeasibility() <= 10.0 * self.opts.feas_tol * scale {
                        return Outcome::Optimal;
                    }
                    return Outcome::Failed;
                }
                Phase::Done => {}
            }
        }
    }

    /// Re-solve after rows or bounds changed under a stored basis.
    fn reoptimize(&mut self) -> Outcome {
        let y = self.row_prices();
        let dual_feasible = self.price(&y, Rule::Dantzig).is_none();
        if self.primal_infeasibility() > self.opts.feas_tol {
            if !dual_feasible {
                return Outcome::Failed;
            }
            match self.dual_run() {
                Phase::IterLimit => return Outcome::IterLimit,
                Phase::Unbounded => return Outcome::Infeasible,
                Phase::Singular | Phase::Stalled => return Outcome::Failed,
                Phase::Done => {}
            }
        }
        self.optimize()
    }

    fn solution(&self, lp: &Lp, outcome: Outcome) -> LpSolution {
        let status = match outcome {
            Outcome::Optimal => Status::Optimal,
            Outcome::Infeasible => Status::Infeasible,
            Outcome::Unbounded => Status::Unbounded,
            Outcome::IterLimit | Outcome::Failed => Status::IterLimit,
        };
        if status != Status::Optimal {
            return LpSolution::without_point(status, self.iterations, 1);
        }
        let n = lp.num_columns();
        let sign = lp.direction.sign();
        let x: Vec<f64> = self.x[..n].to_vec();
        let duals = self.row_prices().iter().map(|v| sign * v).collect();
        LpSolution { status, objective: lp.objective_value(&x), x, duals, iterations: self.iterations, nodes: 1 }
    }

    /// Appends a row whose slack joins the basis. The inverse grows by the
    /// row `-a_B' B^-1` and a unit diagonal entry.
    fn add_row(&mut self, coeffs: &[(usize, f64)], relation: Relation, rhs: f64) {
        let m = self.m;
        let i = m;
        let mut basic_coef = vec![0.0; m];
        let mut activity = 0.0;
        for &(j, a) in coeffs {
            push_entry(&mut self.cols[j], i, a);
            activity += a * self.x[j];
        }
        for (p, &b) in self.basis.iter().enumerate() {
            if let Some(&(_, a)) = self.cols[b].iter().find(|&&(r, _)| r == i) {
                basic_coef[p] = a;
            }
        }
        let mut binv = vec![0.0; (m + 1) * (m + 1)];
        for p in 0..m {
            binv[p * (m + 1)..p * (m + 1) + m].copy_from_slice(&self.binv[p * m..(p + 1) * m]);
        }
        for k in 0..m {
            let v: f64 = (0..m).map(|p| basic_coef[p] * self.binv[p * m + k]).sum();
            binv[m * (m + 1) + k] = -v;
        }
        binv[m * (m + 1) + m] = 1.0;

        let (slo, shi) = slack_bounds(relation);
        self.cols.push(vec![(i, 1.0)]);
        self.lb.push(slo);
        self.ub.push(shi);
        self.cost.push(0.0);
        self.x.push(rhs - activity);
        self.state.push(State::Basic);
        self.frozen.push(false);
        self.good = None;
        self.basis.push(self.cols.len() - 1);
        self.slack.push(self.cols.len() - 1);
        self.rhs.push(rhs);
        self.binv = binv;
        self.m = m + 1;
    }

    /// Drops row `i` when its slack is basic: the inverse loses that basis
    /// position and column `i`, which is exact because the slack is a unit
    /// column. The slack column stays behind empty and frozen. Returns
    /// false, changing nothing, when the slack is nonbasic.
    fn remove_row(&mut self, i: usize) -> bool {
        self.good = None;
        let m = self.m;
        let s = self.slack[i];
        let Some(p) = self.basis.iter().position(|&b| b == s) else {
            return false;
        };
        let mut binv = Vec::with_capacity((m - 1) * (m - 1));
        for r in (0..m).filter(|&r| r != p) {
            for k in (0..m).filter(|&k| k != i) {
                binv.push(self.binv[r * m + k]);
            }
        }
        self.binv = binv;
        self.basis.remove(p);
        self.slack.remove(i);
        self.rhs.remove(i);
        self.m = m - 1;
        for col in &mut self.cols {
            col.retain(|&(r, _)| r != i);
            for entry in col.iter_mut() {
                if entry.0 > i {
                    entry.0 -= 1;
                }
            }
        }
        self.lb[s] = 0.0;
        self.ub[s] = 0.0;
        self.x[s] = 0.0;
        self.state[s] = State::AtLower;
        self.frozen[s] = true;
        true
    }

    fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lb[j] = lower;
        self.ub[j] = upper;
        if self.state[j] == State::Basic {
            return;
        }
        let (state, value) = match self.state[j] {
            State::AtUpper if upper.is_finite() => (State::AtUpper, upper),
            _ => park(lower, upper),
        };
        let delta = value - self.x[j];
        self.state[j] = state;
        if delta != 0.0 {
            self.x[j] = value;
            let mut column = vec![0.0; self.m];
            self.ftran(j, &mut column);
            for (p, &alpha) in column.iter().enumerate() {
                if alpha != 0.0 {
                    self.x[self.basis[p]] -= delta * alpha;
                }
            }
        }
    }

    fn restore(&mut self, snapshot: &Basis) {
        self.basis.clone_from(&snapshot.basis);
        self.state.clone_from(&snapshot.state);
        for j in 0..self.cols.len() {
            match self.state[j] {
                State::Basic => {}
                State::AtLower if self.lb[j].is_finite() => self.x[j] = self.lb[j],
                State::AtUpper if self.ub[j].is_finite() => self.x[j] = self.ub[j],
                _ => {
                    let (s, v) = park(self.lb[j], self.ub[j]);
                    self.state[j] = s;
                    self.x[j] = v;
                }
            }
        }
        self.singular = false;
        self.refactor_measuring(false);
    }

    fn run(&mut self) -> Phase {
        let mut rule = Rule::Dantzig;
        let mut degenerate_run = 0usize;
        let mut best_objective = f64::INFINITY;
        let mut column = vec![0.0; self.m];
        loop {
            if self.iterations >= self.opts.max_iters {
                return Phase::IterLimit;
            }
            let y = self.row_prices();
            let Some((q, dir)) = self.price(&y, rule) else {
                if self.banned.is_empty() {
                    return Phase::Done;
                }
                self.banned.clear();
                continue;
            };
            self.ftran(q, &mut column);
            let step = match self.ratio_test(q, dir, &column, rule) {
                Some(step) => step,
                None => return Phase::Unbounded,
            };
            self.iterations += 1;

            // Progress is judged against the best objective seen, so that
            // runs of tiny steps that cancel out still trigger Bland's rule.
            let t = step.length;
            let objective = self.objective();
            if objective < best_objective - 1e-12 * (1.0 + best_objective.abs()) {
                best_objective = objective;
                self.banned.clear();
                degenerate_run = 0;
                rule = Rule::Dantzig;
            } else {
                degenerate_run += 1;
                if degenerate_run > self.opts.stall_limit {
                    rule = Rule::Bland;
                }
                if degenerate_run > self.opts.stall_limit + 2 * self.m + 20 {
                    return Phase::Stalled;
                }
            }

            if t != 0.0 {
                self.x[q] += dir * t;
                for (p, &alpha) in column.iter().enumerate() {
                    if alpha != 0.0 {
                        self.x[self.basis[p]] -= dir * t * alpha;
                    }
                }
            }

            match step.leaving {
                None => {
                    // Bound flip of the entering column.
                    let (s, v) = if dir > 0.0 {
                        (State::AtUpper, self.ub[q])
                    } else {
                        (State::AtLower, self.lb[q])
                    };
                    self.state[q] = s;
                    self.x[q] = v;
                }
                Some((p, to_upper)) => {
                    let leaving = self.basis[p];
                    if to_upper {
                        self.state[leaving] = State::AtUpper;
                        self.x[leaving] = self.ub[leaving];
                    } else {
                        self.state[leaving] = State::AtLower;
                        self.x[leaving] = self.lb[leaving];
                    }
                    self.state[q] = State::Basic;
                    self.basis[p] = q;
                    if self.pivot_and_maybe_refactor(p, &column) {
                        return Phase::Singular;
                    }
                }
            }
        }
    }

    /// Applies the pivot; true when a due refactorization found the basis
    /// singular.
    fn pivot_and_maybe_refactor(&mut self, p: usize, column: &[f64]) -> bool {
        let entering = self.basis[p];
        self.pivot(p, column);
        self.since_refactor += 1;
        if self.since_refactor >= self.refactor_every {
            self.refactor();
        }
        if self.singular {
            self.recover(entering);
        }
        self.singular
    }

    /// Steps back to the last basis that factorized, bars `entering`, and
    /// checks every pivot from then on. Leaves `singular` set when there is
    /// nothing to return to.
    fn recover(&mut self, entering: usize) {
        let Some(good) = self.good.clone() else {
            return;
        };
        if self.recoveries >= MAX_RECOVERIES {
            return;
        }
        self.recoveries += 1;
        self.banned.push(entering);
        self.refactor_every = 1;
        self.restore(&good);
    }

    /// Largest bound violation among basic columns.
    fn primal_infeasibility(&self) -> f64 {
        self.basis
            .iter()
            .map(|&b| (self.lb[b] - self.x[b]).max(self.x[b] - self.ub[b]))
            .fold(0.0f64, f64::max)
    }

    /// Dual simplex from a dual feasible basis. `Unbounded` means the dual
    /// is unbounded, so the primal is infeasible.
    fn dual_run(&mut self) -> Phase {
        let cost = self.cost.clone();
        let phase = self.dual_loop();
        self.cost = cost;
        phase
    }

    /// Widens the reduced costs of nonbasic columns by small pseudo-random
    /// amounts in the direction that keeps the basis dual feasible.
    fn perturb_costs(&mut self) {
        let mut state = 0x9e37_79b9_7f4a_7c15u64;
        for j in 0..self.cols.len() {
            if self.frozen[j] || self.lb[j] == self.ub[j] {
                continue;
            }
            state = state.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1_442_695_040_888_963_407);
            let u = (state >> 11) as f64 / (1u64 << 53) as f64;
            let delta = COST_PERTURBATION * (1.0 + self.cost[j].abs()) * (1.0 + u);
            match self.state[j] {
                State::AtLower => self.cost[j] += delta,
                State::AtUpper => self.cost[j] -= delta,
                State::Basic | State::Free => {}
            }
        }
    }

    fn dual_loop(&mut self) -> Phase {
        let m = self.m;
        let tol = self.opts.feas_tol;
        let mut column = vec![0.0; m];
        let mut rule = Rule::Dantzig;
        let mut degenerate_run = 0usize;
        let mut best_objective = f64::NEG_INFINITY;
        let mut perturbed = false;
        loop {
            if self.iterations >= self.opts.max_iters {
                return Phase::IterLimit;
            }
            // Leaving row: the basic column furthest outside its bounds, or
            // the lowest-indexed infeasible one once progress stalls.
            let mut leave: Option<(usize, f64, f64)> = None;
            for (p, &b) in self.basis.iter().enumerate() {
                let below = self.lb[b] - self.x[b];
                let above = self.x[b] - self.ub[b];
                let v = below.max(above);
                if v <= tol {
                    continue;
                }
                let better = match (leave, rule) {
                    (None, _) => true,
                    (Some((_, _, w)), Rule::Dantzig) => v > w,
                    (Some((lp, _, _)), Rule::Bland) => b < self.basis[lp],
                };
                if better {
                    leave = Some((p, if below > above { -1.0 } else { 1.0 }, v));
                }
            }
            let Some((p, side, _)) = leave else {
                return Phase::Done;
            };
            let leaving = self.basis[p];
            let y = self.row_prices();
            let rho = &self.binv[p * m..(p + 1) * m];

            // x_leaving moves by -alpha_j * delta_j when column j moves by
            // delta_j; it must move towards its violated bound.
            let mut alphas = Vec::new();
            let mut amax = 1.0f64;
            for j in 0..self.cols.len() {
                if self.state[j] == State::Basic {
                    continue;
                }
                let a: f64 = self.cols[j].iter().map(|&(i, v)| rho[i] * v).sum();
                amax = amax.max(a.abs());
                alphas.push((j, a));
            }
            let ptol = self.opts.pivot_tol * amax;
            let mut best: Option<(usize, f64, f64, f64)> = None;
            for (j, a) in alphas {
                if self.frozen[j] || self.banned.contains(&j) || a.abs() <= ptol || self.lb[j] == self.ub[j] {
                    continue;
                }
                let dir = side * a.signum();
                let allowed = match self.state[j] {
                    State::AtLower => dir > 0.0,
                    State::AtUpper => dir < 0.0,
                    State::Free => true,
                    State::Basic => false,
                };
                if !allowed {
                    continue;
                }
                let ratio = (self.reduced_cost(j, &y) * dir).max(0.0) / a.abs();
                let better = match best {
                    None => true,
                    Some((bj, _, r, ba)) => {
                        ratio < r - 1e-12
                            || (ratio <= r + 1e-12
                                && match rule {
                                    Rule::Dantzig => a.abs() > ba,
                                    Rule::Bland => j < bj,
                                })
                    }
                };
                if better {
                    best = Some((j, dir, ratio, a.abs()));
                }
            }
            let Some((q, dir, _, _)) = best else {
                if self.banned.is_empty() {
                    return Phase::Unbounded;
                }
                self.banned.clear();
                continue;
            };
            self.iterations += 1;
            // The objective rises monotonically in exact arithmetic; steps
            // that fail to beat the best value so far count as degenerate.
            let objective = self.objective();
            if objective > best_objective + 1e-12 * (1.0 + best_objective.abs()) {
                best_objective = objective;
                self.banned.clear();
                degenerate_run = 0;
                rule = Rule::Dantzig;
            } else {
                degenerate_run += 1;
                if degenerate_run > self.opts.stall_limit && !perturbed {
                    self.perturb_costs();
                    perturbed = true;
                    degenerate_run = 0;
                    best_objective = f64::NEG_INFINITY;
                } else if degenerate_run > self.opts.stall_limit {
                    rule = Rule::Bland;
                }
                if degenerate_run > self.opts.stall_limit + 2 * m + 20 {
                    return Phase::Stalled;
                }
            }
            self.ftran(q, &mut column);
            let target = if side < 0.0 { self.lb[leaving] } else { self.ub[leaving] };
            let t = (self.x[leaving] - target) / (dir * column[p]);
            self.x[q] += dir * t;
            for (r, &alpha) in column.iter().enumerate() {
                if alpha != 0.0 {
                    self.x[self.basis[r]] -= dir * t * alpha;
                }
            }
            self.x[leaving] = target;
            self.state[leaving] = if side < 0.0 { State::AtLower } else { State::AtUpper };
            self.state[q] = State::Basic;
            self.basis[p] = q;
            if self.pivot_and_maybe_refactor(p, &column) {
                return Phase::Singular;
            }
        }
    }

    /// Current value of the internal objective.
    fn objective(&self) -> f64 {
        self.cost.iter().zip(&self.x).map(|(c, v)| c * v).sum()
    }

    /// Simplex multipliers `y = c_B' B^-1`.
    fn row_prices(&self) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for p in 0..m {
            let c = self.cost[self.basis[p]];
            if c != 0.0 {
                let row = &self.binv[p * m..(p + 1) * m];
                for (yi, b) in y.iter_mut().zip(row) {
                    *yi += c * b;
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, y: &[f64]) -> f64 {
        self.cost[j] - self.cols[j].iter().map(|&(i, a)| a * y[i]).sum::<f64>()
    }

    /// Chooses an entering column and its direction of motion.
    fn price(&self, y: &[f64], rule: Rule) -> Option<(usize, f64)> {
        let tol = self.opts.opt_tol;
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.cols.len() {
            if self.frozen[j] || self.banned.contains(&j) {
                continue;
            }
            let dir = match self.state[j] {
                State::Basic => continue,
                State::AtLower => {
                    if self.lb[j] == self.ub[j] {
                        continue;
                    }
                    let d = self.reduced_cost(j, y);
                    if d < -tol {
                        Some((1.0, -d))
                    } else {
                        None
                    }
                }
                State::AtUpper => {
                    if self.lb[j] == self.ub[j] {
                        continue;
                    }
                    let d = self.reduced_cost(j, y);
                    if d > tol {
                        Some((-1.0, d))
                    } else {
                        None
                    }
                }
                State::Free => {
                    let d = self.reduced_cost(j, y);
                    if d.abs() > tol {
                        Some((-d.signum(), d.abs()))
                    } else {
                        None
                    }
                }
            };
            if let Some((dir, score)) = dir {
                match rule {
                    Rule::Bland => return Some((j, dir)),
                    Rule::Dantzig => {
                        if best.map_or(true, |(_, _, s)| score > s) {
                            best = Some((j, dir, score));
                        }
                    }
                }
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    /// `column = B^-1 a_q`.
    fn ftran(&self, q: usize, column: &mut [f64]) {
        let m = self.m;
        column.iter_mut().for_each(|v| *v = 0.0);
        for &(i, a) in &self.cols[q] {
            for p in 0..m {
                column[p] += self.binv[p * m + i] * a;
            }
        }
    }

    fn ratio_test(&self, q: usize, dir: f64, column: &[f64], rule: Rule) -> Option<Step> {
        let tol = self.opts.feas_tol;
        let ptol = self.opts.pivot_tol * column.iter().fold(1.0f64, |acc, a| acc.max(a.abs()));
        let flip = self.ub[q] - self.lb[q];

        // Pass one: largest step keeping every basic within relaxed bounds.
        let mut relaxed = f64::INFINITY;
        for (p, &alpha) in column.iter().enumerate() {
            if alpha.abs() <= ptol {
                continue;
            }
            let b = self.basis[p];
            let rate = -dir * alpha;
            let limit = if rate < 0.0 {
                if self.lb[b].is_finite() {
                    (self.x[b] - self.lb[b] + tol) / -rate
                } else {
                    continue;
                }
            } else if self.ub[b].is_finite() {
                (self.ub[b] + tol - self.x[b]) / rate
            } else {
                continue;
            };
            relaxed = relaxed.min(limit);
        }

        if flip.is_finite() && flip <= relaxed {
            return Some(Step { length: flip, leaving: None });
        }
        if relaxed == f64::INFINITY {
            return None;
        }

        // Pass two: among rows blocking within the relaxed step, prefer the
        // largest pivot (Dantzig) or the lowest column index (Bland).
        let mut chosen: Option<(usize, f64, bool, f64)> = None;
        for (p, &alpha) in column.iter().enumerate() {
            if alpha.abs() <= ptol {
                continue;
            }
            let b = self.basis[p];
            let rate = -dir * alpha;
            let (ratio, to_upper) = if rate < 0.0 {
                if !self.lb[b].is_finite() {
                    continue;
                }
                ((self.x[b] - self.lb[b]) / -rate, false)
            } else {
                if !self.ub[b].is_finite() {
                    continue;
                }
                ((self.ub[b] - self.x[b]) / rate, true)
            };
            if ratio > relaxed {
                continue;
            }
            // Basics already past a bound block at zero.
            let ratio = ratio.max(0.0);
            let better = match chosen {
                None => true,
                Some((cp, cratio, _, calpha)) => match rule {
                    Rule::Dantzig => alpha.abs() > calpha.abs(),
                    Rule::Bland => {
                        ratio < cratio - 1e-12
                            || (ratio <= cratio + 1e-12 && self.basis[p] < self.basis[cp])
                    }
                },
            };
            if better {
                chosen = Some((p, ratio, to_upper, alpha));
            }
        }
        let (p, ratio, to_upper, _) = chosen?;
        Some(Step { length: ratio, leaving: Some((p, to_upper)) })
    }

    fn pivot(&mut self, p: usize, column: &[f64]) {
        let m = self.m;
        let pivot = column[p];
        for k in 0..m {
            self.binv[p * m + k] /= pivot;
        }
        for i in 0..m {
            if i == p || column[i] == 0.0 {
                continue;
            }
            let f = column[i];
            for k in 0..m {
                self.binv[i * m + k] -= f * self.binv[p * m + k];
            }
        }
    }

    /// Inverse of the basis matrix. Singleton columns (slacks, artificials,
    /// singleton structurals) are eliminated directly, so only the block
    /// of the remaining columns on the uncovered rows is inverted densely.
    fn basis_inverse(&self) -> Option<Vec<f64>> {
        let m = self.m;
        let mut row_owner = vec![usize::MAX; m];
        let mut singles = Vec::new();
        let mut others = Vec::new();
        for (p, &j) in self.basis.iter().enumerate() {
            match self.cols[j].as_slice() {
                &[(i, a)] if row_owner[i] == usize::MAX && a.abs() > 1e-14 => {
                    row_owner[i] = p;
                    singles.push((p, i, a));
                }
                _ => others.push(p),
            }
        }
        let free_rows: Vec<usize> = (0..m).filter(|&i| row_owner[i] == usize::MAX).collect();
        let s = others.len();
        if free_rows.len() != s {
            return None;
        }
        let mut row_index = vec![usize::MAX; m];
        for (k, &i) in free_rows.iter().enumerate() {
            row_index[i] = k;
        }
        // Block of the non-singleton columns restricted to uncovered rows.
        let mut block = vec![0.0; s * s];
        for (c, &p) in others.iter().enumerate() {
            for &(i, a) in &self.cols[self.basis[p]] {
                if row_index[i] != usize::MAX {
                    block[row_index[i] * s + c] = a;
                }
            }
        }
        let block_inv = invert(&block, s)?;

        let mut binv = vec![0.0; m * m];
        for (c, &p) in others.iter().enumerate() {
            for (k, &i) in free_rows.iter().enumerate() {
                binv[p * m + i] = block_inv[c * s + k];
            }
        }
        // Singleton position u on row r: a z_u + sum_v B[r][v] z_v = e_r.
        let mut coupling: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        for &p in &others {
            for &(i, a) in &self.cols[self.basis[p]] {
                if row_owner[i] != usize::MAX {
                    coupling[i].push((p, a));
                }
            }
        }
        for &(u, r, a) in &singles {
            let mut row = vec![0.0; m];
            row[r] = 1.0;
            for &(v, b) in &coupling[r] {
                for &i in &free_rows {
                    row[i] -= b * binv[v * m + i];
                }
            }
            for (dst, v) in binv[u * m..(u + 1) * m].iter_mut().zip(&row) {
                *dst = v / a;
            }
        }
        Some(binv)
    }

    /// Recomputes the basis inverse and the basic values from scratch.
    fn refactor(&mut self) {
        self.refactor_measuring(true);
    }

    fn refactor_measuring(&mut self, measure_drift: bool) {
        self.since_refactor = 0;
        let m = self.m;
        if m == 0 {
            return;
        }
        match self.basis_inverse() {
            Some(inv) => self.binv = inv,
            None => {
                self.singular = true;
                return;
            }
        }
        self.good = Some(Basis { basis: self.basis.clone(), state: self.state.clone() });
        let mut r = self.rhs.clone();
        for (j, col) in self.cols.iter().enumerate() {
            if self.state[j] != State::Basic && self.x[j] != 0.0 {
                for &(i, a) in col {
                    r[i] -= a * self.x[j];
                }
            }
        }
        let mut drift = 0.0f64;
        for p in 0..m {
            let row = &self.binv[p * m..(p + 1) * m];
            let fresh: f64 = row.iter().zip(&r).map(|(a, b)| a * b).sum();
            let old = self.x[self.basis[p]];
            drift = drift.max((fresh - old).abs() / (1.0 + fresh.abs()));
            self.x[self.basis[p]] = fresh;
        }
        if measure_drift {
            if drift > DRIFT_TOL && self.refactor_every > 1 {
                self.refactor_every /= 2;
            } else if drift < DRIFT_TOL * 1e-3 {
                self.refactor_every = (2 * self.refactor_every).min(self.opts.refactor_every.max(1));
            }
        }
    }
}

/// Adds `a` to the entry of row `i`, which is the last entry whenever the
/// row was just opened.
fn push_entry(col: &mut Vec<(usize, f64)>, i: usize, a: f64) {
    if a == 0.0 {
        return;
    }
    match col.last_mut() {
        Some((r, v)) if *r == i => *v += a,
        _ => col.push((i, a)),
    }
}

struct Step {
    length: f64,
    /// Basis position leaving and whether it exits at its upper bound.
    leaving: Option<(usize, bool)>,
}

/// Gauss-Jordan inverse with partial pivoting of a dense row-major matrix.
fn invert(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut work = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for c in 0..n {
        let (piv, mag) = (c..n)
            .map(|r| (r, work[r * n + c].abs()))
            .fold((c, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
        if mag <= 1e-14 {
            return None;
        }
        if piv != c {
            for k in 0..n {
                work.swap(piv * n + k, c * n + k);
                inv.swap(piv * n + k, c * n + k);
            }
        }
        let d = work[c * n + c];
        for k in 0..n {
            work[c * n + k] /= d;
            inv[c * n + k] /= d;
        }
        for r in 0..n {
            if r == c {
                continue;
            }
            let f = work[r * n + c];
            if f != 0.0 {
                for k in 0..n {
                    work[r * n + k] -= f * work[c * n + k];
                    inv[r * n + k] -= f * inv[c * n + k];
                }
            }
        }
    }
    Some(inv)
}
