//! Robust linear and mixed-integer optimization: models with uncertain
//! parameters, uncertainty sets, adjustable variables, and three solution
//! pipelines (duality reformulation, cutting planes, nominal substitution).

pub mod cases;
pub mod io;
mod linalg;
pub mod model;
pub mod solvers;
pub mod transform;
pub mod uncset;
