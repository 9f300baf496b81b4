//! Seeded generators for portfolio, knapsack and facility-location
//! instances, and the conservatism sweep over the set scale `alpha`.
//!
//! Every generator draws its data from [`Lcg`] in a fixed documented order,
//! so a `(case, size, geometry, alpha, seed)` tuple always yields the same
//! model. Polyhedral sets are boxes `|xi_i - nominal_i| <= alpha * sigma_i`;
//! ellipsoidal sets circumscribe that box with covariance
//! `k * diag((alpha * sigma_i)^2)`. At `alpha = 0` both geometries give the
//! singleton set `{nominal}`.

mod sweep;

pub use sweep::{median, run_sweep, write_csv, SweepRow, SweepSpec};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{Direction, Domain, Expr, Model, Relation, UncParamId, VarId};
use crate::uncset::{PolyhedralSet, UncertaintySet};

/// 64-bit linear congruential generator,
/// `s <- 6364136223846793005 s + 1442695040888963407 (mod 2^64)`.
#[derive(Clone, Debug)]
pub struct Lcg {
    state: u64,
}

impl Lcg {
    pub const MULTIPLIER: u64 = 6_364_136_223_846_793_005;
    pub const INCREMENT: u64 = 1_442_695_040_888_963_407;

    pub fn new(seed: u64) -> Self {
        Lcg { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(Self::MULTIPLIER).wrapping_add(Self::INCREMENT);
        self.state
    }

    /// Uniform on `[0, 1)` from the top 53 bits of the next state.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseGeometry {
    #[serde(rename = "poly")]
    Polyhedral,
    #[serde(rename = "ellip")]
    Ellipsoidal,
}

impl fmt::Display for CaseGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseGeometry::Polyhedral => "poly",
            CaseGeometry::Ellipsoidal => "ellip",
        })
    }
}

impl FromStr for CaseGeometry {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "poly" | "polyhedral" => Ok(CaseGeometry::Polyhedral),
            "ellip" | "ellipsoidal" => Ok(CaseGeometry::Ellipsoidal),
            other => Err(format!("unknown geometry `{other}` (expected poly or ellip)")),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseKind {
    Portfolio,
    Knapsack,
    Facility,
}

impl fmt::Display for CaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseKind::Portfolio => "portfolio",
            CaseKind::Knapsack => "knapsack",
            CaseKind::Facility => "facility",
        })
    }
}

impl FromStr for CaseKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "portfolio" => Ok(CaseKind::Portfolio),
            "knapsack" => Ok(CaseKind::Knapsack),
            "facility" => Ok(CaseKind::Facility),
            other => Err(format!("unknown case `{other}` (expected portfolio, knapsack or facility)")),
        }
    }
}

/// One generated instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseSpec {
    pub case: CaseKind,
    /// `[n]` for portfolio and knapsack, `[m, n]` for facility.
    pub size: Vec<usize>,
    pub geometry: CaseGeometry,
    pub alpha: f64,
    pub seed: u64,
}

impl CaseSpec {
    pub fn default_size(case: CaseKind) -> Vec<usize> {
        match case {
            CaseKind::Portfolio => vec![4],
            CaseKind::Knapsack => vec![6],
            CaseKind::Facility => vec![2, 3],
        }
    }

    pub fn generate(&self) -> Model {
        let dim = |i: usize| self.size.get(i).copied().unwrap_or(1);
        match self.case {
            CaseKind::Portfolio => gen_portfolio(dim(0), self.geometry, self.alpha, self.seed),
            CaseKind::Knapsack => gen_knapsack(dim(0), self.geometry, self.alpha, self.seed),
            CaseKind::Facility => gen_facility(dim(0), dim(1), self.geometry, self.alpha, self.seed),
        }
    }
}

/// Box of half-widths `alpha * sigma` around `nominal`, or the ellipsoid
/// through its corners.
pub fn scaled_set(nominal: &[f64], sigma: &[f64], geometry: CaseGeometry, alpha: f64) -> UncertaintySet {
    let k = nominal.len();
    let half: Vec<f64> = sigma.iter().map(|s| alpha * s).collect();
    if alpha == 0.0 || geometry == CaseGeometry::Polyhedral {
        let lo: Vec<f64> = nominal.iter().zip(&half).map(|(m, h)| m - h).collect();
        let hi: Vec<f64> = nominal.iter().zip(&half).map(|(m, h)| m + h).collect();
        return UncertaintySet::Polyhedral(PolyhedralSet::boxed(&lo, &hi).expect("a box around a finite point is valid"));
    }
    let cov = (0..k)
        .map(|i| (0..k).map(|j| if i == j { k as f64 * half[i] * half[i] } else { 0.0 }).collect())
        .collect();
    UncertaintySet::ellipsoidal(nominal.to_vec(), cov).expect("positive widths give a valid ellipsoid")
}

/// `max xi'x` over the simplex with uncertain returns `xi`.
/// Draws per asset: nominal return `U(0.05, 0.15)`, then width factor
/// `U(0.2, 0.8)` with `sigma = factor * nominal`.
pub fn gen_portfolio(n: usize, geometry: CaseGeometry, alpha: f64, seed: u64) -> Model {
    assert!(n >= 2, "portfolio needs at least two assets");
    let mut rng = Lcg::new(seed);
    let mut nominal = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    for _ in 0..n {
        let r = rng.range(0.05, 0.15);
        nominal.push(r);
        sigma.push(rng.range(0.2, 0.8) * r);
    }
    let mut m = Model::new(Direction::Maximize);
    let x: Vec<VarId> = (0..n).map(|i| m.add_var(&format!("x{i}"), Domain::Continuous, 0.0, 1.0).expect("valid bounds")).collect();
    let set = scaled_set(&nominal, &sigma, geometry, alpha);
    let r = m.add_unc_params("r", n, nominal, set).expect("nominal lies in its set");
    m.add_constraint(Expr::sum(x.iter().map(|&v| Expr::var(v))), Relation::Eq, 1.0).expect("certain row");
    m.set_objective(Expr::sum((0..n).map(|i| Expr::from(r[i] * x[i])))).expect("known ids");
    m
}

/// Binary knapsack with uncertain weights. Draws per item: value
/// `U(10, 30)`, nominal weight `U(5, 15)`; `sigma = 0.4 * weight`,
/// capacity is half the total nominal weight.
pub fn gen_knapsack(n: usize, geometry: CaseGeometry, alpha: f64, seed: u64) -> Model {
    assert!(n >= 1, "knapsack needs at least one item");
    let mut rng = Lcg::new(seed);
    let mut values = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for _ in 0..n {
        values.push(rng.range(10.0, 30.0));
        weights.push(rng.range(5.0, 15.0));
    }
    let sigma: Vec<f64> = weights.iter().map(|w| 0.4 * w).collect();
    let cap = 0.5 * weights.iter().sum::<f64>();
    let mut m = Model::new(Direction::Maximize);
    let x: Vec<VarId> = (0..n).map(|i| m.add_var(&format!("x{i}"), Domain::Binary, 0.0, 1.0).expect("valid bounds")).collect();
    let set = scaled_set(&weights, &sigma, geometry, alpha);
    let w = m.add_unc_params("w", n, weights, set).expect("nominal lies in its set");
    m.add_constraint(Expr::sum((0..n).map(|i| Expr::from(w[i] * x[i]))), Relation::Le, cap).expect("inequality row");
    m.set_objective(Expr::sum((0..n).map(|i| values[i] * x[i]))).expect("known ids");
    m
}

struct FacilityData {
    fixed: Vec<f64>,
    demand: Vec<f64>,
    cost: Vec<Vec<f64>>,
    capacity: Vec<f64>,
}

/// Draws: fixed costs `U(20, 40)` per facility, demands `U(5, 15)` per
/// customer, unit costs `U(1, 5)` row by row, then capacities
/// `1.6 * total demand / m * U(1, 1.5)`.
fn facility_data(m: usize, n: usize, seed: u64) -> FacilityData {
    let mut rng = Lcg::new(seed);
    let fixed: Vec<f64> = (0..m).map(|_| rng.range(20.0, 40.0)).collect();
    let demand: Vec<f64> = (0..n).map(|_| rng.range(5.0, 15.0)).collect();
    let cost: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.range(1.0, 5.0)).collect()).collect();
    let total: f64 = demand.iter().sum();
    let capacity = (0..m).map(|_| 1.6 * total / m as f64 * rng.range(1.0, 1.5)).collect();
    FacilityData { fixed, demand, cost, capacity }
}

enum Supply {
    Adjustable,
    Static,
}

fn facility(m: usize, n: usize, geometry: CaseGeometry, alpha: f64, seed: u64, supply: Supply) -> Model {
    assert!(m >= 1 && n >= 1, "facility location needs a facility and a customer");
    let d = facility_data(m, n, seed);
    let sigma: Vec<f64> = d.demand.iter().map(|v| 0.5 * v).collect();
    let mut model = Model::new(Direction::Minimize);
    let open: Vec<VarId> =
        (0..m).map(|i| model.add_var(&format!("open{i}"), Domain::Binary, 0.0, 1.0).expect("valid bounds")).collect();
    let set = scaled_set(&d.demand, &sigma, geometry, alpha);
    let xi: Vec<UncParamId> = model.add_unc_params("demand", n, d.demand.clone(), set).expect("nominal lies in its set");
    let mut ship = vec![Vec::with_capacity(n); m];
    for (i, row) in ship.iter_mut().enumerate() {
        for j in 0..n {
            let name = format!("ship{i}_{j}");
            let e = match supply {
                Supply::Adjustable => Expr::adjustable(model.add_adjustable(&name, &xi, 0.0, f64::INFINITY).expect("valid deps")),
                Supply::Static => Expr::var(model.add_var(&name, Domain::Continuous, 0.0, f64::INFINITY).expect("valid bounds")),
            };
            row.push(e);
        }
    }
    for j in 0..n {
        let served = Expr::sum((0..m).map(|i| ship[i][j].clone()));
        model.add_constraint(served - xi[j], Relation::Ge, 0.0).expect("inequality row");
    }
    for i in 0..m {
        let sent = Expr::sum(ship[i].iter().cloned());
        model.add_constraint(sent - d.capacity[i] * open[i], Relation::Le, 0.0).expect("inequality row");
    }
    let build = Expr::sum((0..m).map(|i| d.fixed[i] * open[i]));
    let transport = Expr::sum((0..m).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| ship[i][j].clone() * d.cost[i][j]));
    model.set_objective(build + transport).expect("known ids");
    model
}

/// Facility location with supply decided after demand is observed:
/// `ship_ij(xi)` adjustable on all demands, `sum_i ship_ij >= xi_j`,
/// `sum_j ship_ij <= cap_i open_i`, minimizing fixed plus transport cost.
pub fn gen_facility(m: usize, n: usize, geometry: CaseGeometry, alpha: f64, seed: u64) -> Model {
    facility(m, n, geometry, alpha, seed, Supply::Adjustable)
}

/// [`gen_facility`] with supply fixed before demand is observed.
pub fn gen_facility_static(m: usize, n: usize, geometry: CaseGeometry, alpha: f64, seed: u64) -> Model {
    facility(m, n, geometry, alpha, seed, Supply::Static)
}
