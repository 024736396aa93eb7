use std::fmt;

use super::Trajectory;
use crate::error::Result;
use crate::export::fmt_sig;
use crate::formation::{target_membership, FormationSpec, Membership};
use crate::layers::LayerAssignment;
use crate::potential::agent_potential;

/// Allowed per-sample increase of a potential, relative to its initial value.
pub const LYAPUNOV_REL_TOL: f64 = 1e-9;

/// Largest per-sample increase of one agent's potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentAudit {
    pub agent: usize,
    pub initial: f64,
    pub worst_increase: f64,
    /// `worst_increase / initial` (infinite if the initial value is 0 and the
    /// potential ever grows).
    pub relative: f64,
}

impl AgentAudit {
    pub fn monotone(&self) -> bool {
        self.relative <= LYAPUNOV_REL_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub membership: Membership,
    pub tolerance: f64,
    /// Cliques whose signed-area residual exceeds the tolerance.
    pub failing_cliques: Vec<[usize; 3]>,
    /// `Σ_i V_i` at every sample.
    pub total_potential: Vec<f64>,
    pub total_audit: AgentAudit,
    pub agent_audits: Vec<AgentAudit>,
}

impl ConvergenceReport {
    pub fn converged(&self) -> bool {
        self.membership.member
    }

    pub fn lyapunov_ok(&self) -> bool {
        self.total_audit.monotone() && self.agent_audits.iter().all(AgentAudit::monotone)
    }
}

fn audit(agent: usize, series: impl Iterator<Item = f64>) -> AgentAudit {
    let values: Vec<f64> = series.collect();
    let initial = values.first().copied().unwrap_or(0.0);
    let worst_increase = values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0_f64, f64::max);
    let relative = if worst_increase <= 0.0 {
        0.0
    } else if initial > 0.0 {
        worst_increase / initial
    } else {
        f64::INFINITY
    };
    AgentAudit {
        agent,
        initial,
        worst_increase,
        relative,
    }
}

/// Residuals of the terminal state and a descent audit of every agent's
/// potential along the samples. Agent 0 in `total_audit` denotes the sum.
pub fn convergence_report(
    traj: &Trajectory,
    spec: &FormationSpec,
    assignment: &LayerAssignment,
    tol: f64,
) -> Result<ConvergenceReport> {
    let membership = target_membership(traj.final_state(), spec, tol)?;
    let failing_cliques = membership
        .failing_cliques(spec, tol)
        .map(|c| c.agents)
        .collect();
    let per_agent: Vec<Vec<f64>> = traj
        .states
        .iter()
        .map(|s| {
            (1..=spec.agent_count)
                .map(|a| agent_potential(a, s, assignment))
                .collect()
        })
        .collect();
    let total_potential: Vec<f64> = per_agent.iter().map(|v| v.iter().sum()).collect();
    let agent_audits = (1..=spec.agent_count)
        .map(|a| audit(a, per_agent.iter().map(|v| v[a - 1])))
        .collect();
    let total_audit = audit(0, total_potential.iter().copied());
    Ok(ConvergenceReport {
        membership,
        tolerance: tol,
        failing_cliques,
        total_potential,
        total_audit,
        agent_audits,
    })
}

impl fmt::Display for ConvergenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.membership;
        writeln!(
            f,
            "max distance residual: {}",
            fmt_sig(m.edge_residuals.iter().copied().fold(0.0, f64::max))
        )?;
        writeln!(
            f,
            "max signed-area residual: {}",
            fmt_sig(m.clique_residuals.iter().copied().fold(0.0, f64::max))
        )?;
        writeln!(
            f,
            "target set (tol {}): {}",
            fmt_sig(self.tolerance),
            if m.member { "reached" } else { "not reached" }
        )?;
        for c in &self.failing_cliques {
            writeln!(f, "  wrong signed area on clique {c:?}")?;
        }
        let first = self.total_potential.first().copied().unwrap_or(0.0);
        let last = self.total_potential.last().copied().unwrap_or(0.0);
        writeln!(
            f,
            "total potential: {} -> {}",
            fmt_sig(first),
            fmt_sig(last)
        )?;
        writeln!(
            f,
            "potential descent: {} (worst relative increase {})",
            if self.lyapunov_ok() {
                "monotone"
            } else {
                "violated"
            },
            fmt_sig(
                self.agent_audits
                    .iter()
                    .map(|a| a.relative)
                    .fold(self.total_audit.relative, f64::max)
            )
        )?;
        Ok(())
    }
}
