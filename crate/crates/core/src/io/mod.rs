//! JSON exchange: model documents, counterpart export, result emission.

mod counterpart;
mod document;
mod result;

pub use counterpart::export_counterpart;
pub use document::{
    AdjustableDoc, ConstraintDoc, ExprDoc, GroupDoc, ModelDocument, SetConstraintDoc, SetDoc, VariableDoc, FORMAT_VERSION,
};
pub use result::{emit_result, OutputFormat};

use crate::model::{Model, ModelError, UncParamId};
use crate::solvers::Point;
use crate::uncset::{gaussian_confidence_set, GenericSet, UncertaintySet};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum IoError {
    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("validation error at `{path}`: {message}")]
    Validation { path: String, message: String },
}

fn validation(path: String, e: impl std::fmt::Display) -> IoError {
    IoError::Validation { path, message: e.to_string() }
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, IoError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        IoError::Parse { path, message: e.into_inner().to_string() }
    })
}

fn build_set(doc: &SetDoc, size: usize) -> Result<UncertaintySet, crate::uncset::SetError> {
    Ok(match doc {
        SetDoc::Polyhedral { mat, rhs } => UncertaintySet::polyhedral(mat.clone(), rhs.clone())?,
        SetDoc::Ellipsoidal { mean, cov } => UncertaintySet::ellipsoidal(mean.clone(), cov.clone())?,
        SetDoc::GaussianConfidence { mean, cov, alpha } => {
            UncertaintySet::Ellipsoidal(gaussian_confidence_set(mean.clone(), cov.clone(), *alpha)?)
        }
        SetDoc::Generic { constraints } => {
            UncertaintySet::Generic(GenericSet::new(size, constraints.iter().map(SetConstraintDoc::to_constraint).collect()))
        }
    })
}

impl ModelDocument {
    /// Builds a validated model; errors carry the document path.
    pub fn to_model(&self) -> Result<Model, IoError> {
        if self.format_version != FORMAT_VERSION {
            return Err(IoError::Parse {
                path: "format_version".into(),
                message: format!("unsupported version `{}`, expected `{FORMAT_VERSION}`", self.format_version),
            });
        }
        let inf = |v: Option<f64>, d: f64| v.unwrap_or(d);
        let mut m = Model::new(self.sense);
        for (i, v) in self.variables.iter().enumerate() {
            m.add_var(&v.name, v.domain, inf(v.lower, f64::NEG_INFINITY), inf(v.upper, f64::INFINITY))
                .map_err(|e| validation(format!("variables[{i}]"), e))?;
        }
        for (i, g) in self.unc_groups.iter().enumerate() {
            if g.nominal.len() != g.size {
                return Err(validation(
                    format!("unc_groups[{i}].nominal"),
                    format!("{} values for a group of size {}", g.nominal.len(), g.size),
                ));
            }
            let set = build_set(&g.uncset, g.size).map_err(|e| validation(format!("unc_groups[{i}].uncset"), e))?;
            m.add_unc_params(&g.name, g.size, g.nominal.clone(), set).map_err(|e| {
                let field = match e {
                    ModelError::NominalOutsideSet { .. } => "nominal",
                    _ => "uncset",
                };
                validation(format!("unc_groups[{i}].{field}"), e)
            })?;
        }
        for (i, a) in self.adjustables.iter().enumerate() {
            let deps: Vec<UncParamId> = a.deps.iter().map(|&p| UncParamId(p)).collect();
            m.add_adjustable(&a.name, &deps, inf(a.lower, f64::NEG_INFINITY), inf(a.upper, f64::INFINITY)).map_err(|e| {
                let field = match e {
                    ModelError::InvalidBounds(_) => "",
                    _ => ".deps",
                };
                validation(format!("adjustables[{i}]{field}"), e)
            })?;
        }
        for (i, c) in self.constraints.iter().enumerate() {
            m.add_constraint(c.expr.to_expr(), c.sense, c.rhs).map_err(|e| validation(format!("constraints[{i}]"), e))?;
        }
        m.set_objective(self.objective.to_expr()).map_err(|e| validation("objective".into(), e))?;
        Ok(m)
    }
}

/// Parses and validates a model document.
pub fn parse_model(text: &str) -> Result<Model, IoError> {
    parse_json::<ModelDocument>(text)?.to_model()
}

/// Pretty JSON with a trailing newline; reals print in shortest
/// round-trip form, so output is byte-stable across parse cycles.
pub fn serialize_model(model: &Model) -> String {
    let mut s = serde_json::to_string_pretty(&ModelDocument::from_model(model)).expect("model documents always serialize");
    s.push('\n');
    s
}

/// Parses a candidate point for robust-feasibility checks.
pub fn parse_point(text: &str) -> Result<Point, IoError> {
    parse_json(text)
}
