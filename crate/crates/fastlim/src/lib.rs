//! fastlim: a numerical laboratory for the fast-reaction limit of the
//! two-component system
//!
//! ```text
//! du/dt = Lap u - k u v,      dv/dt = -k u^m3 v^m4,
//! ```
//!
//! with no-flux conditions for u and segregated initial data. The crate
//! provides a Strang-splitting simulator with exact reaction kernels, a
//! heat-equation reference solver for the large-k limit, explicit
//! super/sub-solution (barrier) constructions with dense numerical
//! certification of their defining inequalities, and convergence-study
//! harnesses (k sweeps, comparison checks, interface tracking).

pub mod analysis;
pub mod barriers;
pub mod diffusion;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod grid;
pub mod numerics;
pub mod problem;
pub mod reaction;
pub mod simulator;

pub use error::{Error, Result};
pub use geometry::SupportGeometry;
pub use grid::{build_grid, Field, Grid};
pub use problem::{canonical_p1, eval_initial_data, InitialData, ProblemSpec, RegionExpr};
pub use simulator::{run, strang_step, Snapshot, Trajectory};
