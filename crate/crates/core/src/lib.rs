//! Distance-based formation shape control with a signed-area term.
//!
//! Each agent is a single integrator driven down the gradient of a potential
//! that penalizes both distance errors and the signed-area error of its
//! triangle, which rules out reflected (flipped) formations. The crate covers:
//!
//! * [`formation`] and [`layers`]: formation specifications, validation, and
//!   the layered leader/follower assignment for triangulated Laman graphs.
//! * [`potential`]: pair and triangle potentials with analytic gradients and
//!   Hessians, and the per-agent control law. [`finite_diff`] holds the
//!   central-difference checks.
//! * [`equilibria`]: the gain thresholds, closed-form equilibrium enumeration
//!   and classification for a follower with two pinned leaders, and a Newton
//!   root finder used as an independent check.
//! * [`simulator`]: RK4 / Dormand-Prince integration of the gradient flow,
//!   basin-of-attraction sampling and convergence audits.
//! * [`scenario`] and [`export`]: the TOML scenario format and CSV exports.

pub mod equilibria;
pub mod error;
pub mod export;
pub mod finite_diff;
pub mod formation;
pub mod geometry;
pub mod layers;
pub mod potential;
pub mod scenario;
pub mod simulator;

pub use equilibria::{
    case_table, enumerate_general_large_k, enumerate_isosceles, k_star, k_zero, refine_numeric,
    CanonicalTriangleParams, CaseReport, EquilibriumLabel, EquilibriumRecord, Stability,
};
pub use error::{Error, Result};
pub use formation::{
    target_membership, validate_spec, Clique, CollectiveState, Edge, FormationSpec, Membership,
    ValidationReport, Violation,
};
pub use geometry::{heron_area, signed_area, Position, Sym2};
pub use layers::{extract_layers, LayerAssignment};
pub use potential::{agent_control, PairTerm, PotentialTerm, TriangleTerm};
pub use scenario::ScenarioFile;
pub use simulator::{
    basin_sample, convergence_report, integrate_follower, integrate_hierarchy, BasinLabel,
    BasinMap, GridSpec, IntegratorConfig, Method, TerminalReason, Trajectory,
};
