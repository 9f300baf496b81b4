use serde::Serialize;

use super::document::{lower_doc, upper_doc, FORMAT_VERSION};
use crate::model::{Direction, Domain, Relation};
use crate::transform::{ColumnOrigin, ConicRow, DeterministicModel, LinExpr, LinearRow, RowOrigin};

#[derive(Serialize)]
struct LinDoc {
    constant: f64,
    terms: Vec<(usize, f64)>,
}

impl From<&LinExpr> for LinDoc {
    fn from(e: &LinExpr) -> Self {
        LinDoc { constant: e.constant, terms: e.terms.iter().map(|(&j, &v)| (j, v)).collect() }
    }
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ColumnOriginDoc<'a> {
    Model { index: usize },
    Adjustable { index: usize },
    Dual { source: &'a str, row: usize },
}

#[derive(Serialize)]
struct ColumnDoc<'a> {
    name: &'a str,
    domain: Domain,
    lower: Option<f64>,
    upper: Option<f64>,
    origin: ColumnOriginDoc<'a>,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RowOriginDoc<'a> {
    Constraint { source: &'a str },
    DualEquality { source: &'a str, param: usize },
    DualBudget { source: &'a str },
    Scenario { source: &'a str },
    ConicCut { source: &'a str },
}

#[derive(Serialize)]
struct RowDoc<'a> {
    coeffs: Vec<(usize, f64)>,
    sense: Relation,
    rhs: f64,
    origin: RowOriginDoc<'a>,
}

#[derive(Serialize)]
struct ConeDoc<'a> {
    group: &'a str,
    params: Vec<usize>,
    components: Vec<LinDoc>,
    mean: &'a [f64],
    cov: &'a [Vec<f64>],
}

#[derive(Serialize)]
struct ConicDoc<'a> {
    source: &'a str,
    linear: LinDoc,
    cones: Vec<ConeDoc<'a>>,
    rhs: f64,
}

#[derive(Serialize)]
struct CounterpartDoc<'a> {
    format_version: &'static str,
    sense: Direction,
    columns: Vec<ColumnDoc<'a>>,
    rows: Vec<RowDoc<'a>>,
    conic_rows: Vec<ConicDoc<'a>>,
    objective: LinDoc,
}

fn row_doc(r: &LinearRow) -> RowDoc<'_> {
    let origin = match &r.origin {
        RowOrigin::Constraint { source } => RowOriginDoc::Constraint { source },
        RowOrigin::DualEquality { source, param } => RowOriginDoc::DualEquality { source, param: param.0 },
        RowOrigin::DualBudget { source } => RowOriginDoc::DualBudget { source },
        RowOrigin::Scenario { source } => RowOriginDoc::Scenario { source },
        RowOrigin::ConicCut { source } => RowOriginDoc::ConicCut { source },
    };
    RowDoc { coeffs: r.coeffs.iter().map(|(&j, &v)| (j, v)).collect(), sense: r.relation, rhs: r.rhs, origin }
}

fn conic_doc(r: &ConicRow) -> ConicDoc<'_> {
    ConicDoc {
        source: &r.source,
        linear: (&r.linear).into(),
        cones: r
            .cones
            .iter()
            .map(|c| ConeDoc {
                group: &c.group,
                params: c.params.iter().map(|p| p.0).collect(),
                components: c.components.iter().map(LinDoc::from).collect(),
                mean: &c.mean,
                cov: &c.cov,
            })
            .collect(),
        rhs: r.rhs,
    }
}

/// JSON form of a deterministic model, with every generated column and row
/// tagged by the constraint it came from.
pub fn export_counterpart(dm: &DeterministicModel) -> String {
    let doc = CounterpartDoc {
        format_version: FORMAT_VERSION,
        sense: dm.sense,
        columns: dm
            .columns
            .iter()
            .map(|c| ColumnDoc {
                name: &c.name,
                domain: c.domain,
                lower: lower_doc(c.lower),
                upper: upper_doc(c.upper),
                origin: match &c.origin {
                    ColumnOrigin::Model(i) => ColumnOriginDoc::Model { index: *i },
                    ColumnOrigin::Adjustable(i) => ColumnOriginDoc::Adjustable { index: *i },
                    ColumnOrigin::Dual { source, row } => ColumnOriginDoc::Dual { source, row: *row },
                },
            })
            .collect(),
        rows: dm.rows.iter().map(row_doc).collect(),
        conic_rows: dm.conic_rows.iter().map(conic_doc).collect(),
        objective: (&dm.objective).into(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("counterparts always serialize");
    s.push('\n');
    s
}
