//! Model rewrites: decision rules, epigraph lifting, nominal substitution,
//! and duality-based robust counterparts.

mod counterpart;
mod deterministic;
mod ldr;
mod nominal;
mod rows;

pub use counterpart::{reformulate_ellipsoidal, reformulate_polyhedral, robust_counterpart, Counterpart};
pub use deterministic::{ColumnOrigin, ConeTerm, ConicRow, DetColumn, DeterministicModel, LinExpr, LinearRow, RowOrigin};
pub use ldr::{apply_ldr, lift_objective, prepare, DecisionRule, LdrCoefficients, LdrMode, Prepared};
pub use nominal::nominal_substitute;
pub use rows::{Separation, UncertainRow};

pub(crate) use counterpart::expr_to_lin;
pub(crate) use ldr::apply_ldr_labeled;
pub(crate) use rows::{resolve_groups, uncertain_rows};

use crate::uncset::SetError;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("no reformulation applies to constraint `{constraint}`: {reason}")]
    NoApplicableReformulation { constraint: String, reason: String },
    #[error(transparent)]
    Set(#[from] SetError),
}
