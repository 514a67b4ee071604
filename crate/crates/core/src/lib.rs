//! Constrained polynomial zonotopes (CPZ), their matrix analogue (CPMZ), exact
//! set arithmetic on them, data-driven model sets, and reachability analysis
//! for linear and polynomial discrete-time systems.

pub mod algebra;
pub mod cpmz;
pub mod cpz;
pub mod error;
pub mod id;
pub mod io;
pub mod json;
pub mod learning;
pub mod lift;
pub mod linalg;
pub mod oracle;
pub mod reach;
pub mod systems;

pub use cpmz::Cpmz;
pub use cpz::{ConstraintSystem, Cpz, FactorSpace};
pub use error::{Error, Result};
pub use id::{fresh_ids, FactorAssignment, FactorId};

/// Absolute tolerance on the constraint residual for feasibility decisions.
pub const FEASIBILITY_TOL: f64 = 1e-9;
