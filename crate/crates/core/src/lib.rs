//! Reflected gradient Langevin dynamics (RGLD) for non-convex optimization
//! over balls and spherical shells.
//!
//! * [`geometry`]: feasible domains with projection and reflection.
//! * [`objectives`]: benchmark objectives with analytic gradients and
//!   Lipschitz bounds.
//! * [`dynamics`]: RGLD, projected Langevin (PGLD) and projected gradient
//!   (PG) chains.
//! * [`measure`]: quadrature Gibbs oracle and total variation distance.
//! * [`harness`]: presets, multi-seed runs and CSV output.

pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod harness;
mod linalg;
pub mod measure;
pub mod objectives;

pub use error::{Error, Result};
