//! Discrete p-moduli of curve and cut families on meshed metric measure spaces.
//!
//! The crate is organized bottom-up:
//!
//! - [`mesh`]: grid, masked and glued-cube cell complexes, graph distances and
//!   regularity diagnostics.
//! - [`families`]: usage vectors of curves and cuts, and the most-violated
//!   object oracles (node-weighted Dijkstra and max-flow/min-cut).
//! - [`solver`]: constraint generation for `mod_p`, the optimality certificate
//!   and the discrete capacity cross-check.
//! - [`duality`]: paired computations of `mod_p` and `mod_{p*}`, truncation and
//!   refinement sweeps, the glued-cube experiment and the brute-force oracle.
//! - [`analysis`]: Whitney covers, maximal functions, upper-gradient and coarea
//!   checks, the Whitney-ball density and the isoperimetric probe.
//! - [`geometry`]: resolution-independent geometry descriptions used by sweeps
//!   and by the command line front-end.

pub mod analysis;
pub mod duality;
mod error;
pub mod families;
pub mod geometry;
pub mod mesh;
pub mod rng;
mod serde_f64;
pub mod solver;

pub use error::{Error, Result};
pub use families::{Density, FamilyKind, FamilySpec, UsageVector};
pub use mesh::{MeshDomain, RegionTriple};
pub use solver::{ModulusProblem, SolveStatus, SolverReport};

/// Version of this crate.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
