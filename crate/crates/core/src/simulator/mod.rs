//! Gradient-flow simulation of followers and layered formations.

mod basin;
mod integrator;
mod report;

use std::fmt;

pub use basin::{basin_sample, BasinLabel, BasinMap, BasinNode, GridSpec};
pub use report::{convergence_report, AgentAudit, ConvergenceReport, LYAPUNOV_REL_TOL};

use crate::equilibria::CanonicalTriangleParams;
use crate::error::{Error, Result};
use crate::formation::{CollectiveState, FormationSpec};
use crate::geometry::Position;
use crate::layers::LayerAssignment;
use crate::potential::agent_control;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    FixedRk4 {
        step: f64,
    },
    /// Dormand-Prince 5(4) with a mixed absolute/relative error norm.
    AdaptiveRk45 {
        abs_tol: f64,
        rel_tol: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub t_max: f64,
    /// Stop once the stacked velocity norm drops below this.
    pub gradient_stop: f64,
    /// Record every `sample_stride`-th step (the initial and final states are
    /// always recorded).
    pub sample_stride: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::FixedRk4 { step: 1e-3 },
            t_max: 100.0,
            gradient_stop: 1e-10,
            sample_stride: 1,
        }
    }
}

impl IntegratorConfig {
    pub fn adaptive_default() -> Self {
        IntegratorConfig {
            method: Method::AdaptiveRk45 {
                abs_tol: 1e-9,
                rel_tol: 1e-9,
            },
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        match self.method {
            Method::FixedRk4 { step } => positive("step", step)?,
            Method::AdaptiveRk45 { abs_tol, rel_tol } => {
                positive("abs_tol", abs_tol)?;
                positive("rel_tol", rel_tol)?;
            }
        }
        positive("t_max", self.t_max)?;
        positive("gradient_stop", self.gradient_stop)?;
        if self.sample_stride == 0 {
            return Err(Error::InvalidConfig(
                "sample_stride must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TerminalReason {
    GradientStop,
    TimeLimit,
    NonFinite,
}

impl fmt::Display for TerminalReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TerminalReason::GradientStop => "GradientStop",
            TerminalReason::TimeLimit => "TimeLimit",
            TerminalReason::NonFinite => "NonFinite",
        })
    }
}

/// Sampled states of an integration run. `times` starts at 0 and is strictly
/// increasing; a non-finite step is never recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CollectiveState>,
    pub terminal_reason: TerminalReason,
}

impl Trajectory {
    pub fn final_state(&self) -> &CollectiveState {
        self.states
            .last()
            .expect("trajectory holds at least the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }
}

/// Single follower (agent 3) under `ṗ = −∂V/∂p` with the leaders pinned at
/// `[−c, 0]` and `[c, 0]`. States hold all three agents.
pub fn integrate_follower(
    params: &CanonicalTriangleParams,
    p0: Position,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    integrate_follower_impl(params, p0, cfg, true)
}

pub(crate) fn integrate_follower_impl(
    params: &CanonicalTriangleParams,
    p0: Position,
    cfg: &IntegratorConfig,
    record: bool,
) -> Result<Trajectory> {
    cfg.validate()?;
    if !p0.is_finite() {
        return Err(Error::NonFiniteInput(3));
    }
    let term = params.term();
    let (pi, pj) = (params.leader_i(), params.leader_j());
    let field = |s: &CollectiveState, out: &mut [Position]| {
        out[0] = Position::ORIGIN;
        out[1] = Position::ORIGIN;
        out[2] = -term.gradient(pi, pj, s.get(3));
    };
    Ok(integrator::run(
        field,
        params.state_with_follower(p0),
        cfg,
        record,
    ))
}

/// All agents integrated simultaneously, each with velocity
/// [`agent_control`].
pub fn integrate_hierarchy(
    spec: &FormationSpec,
    assignment: &LayerAssignment,
    state0: &CollectiveState,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    state0.check_against(spec)?;
    if assignment.agent_count() != spec.agent_count {
        return Err(Error::StateLength {
            expected: spec.agent_count,
            found: assignment.agent_count(),
        });
    }
    let field = |s: &CollectiveState, out: &mut [Position]| {
        for (idx, v) in out.iter_mut().enumerate() {
            *v = agent_control(idx + 1, s, assignment);
        }
    };
    Ok(integrator::run(field, state0.clone(), cfg, true))
}
