use rayon::prelude::*;

use super::{integrate_follower_impl, IntegratorConfig, TerminalReason};
use crate::equilibria::{grid_seeds, CanonicalTriangleParams, EquilibriumLabel, EquilibriumRecord};
use crate::error::{Error, Result};
use crate::geometry::Position;

/// Terminal states within `1e-3 · L` of an equilibrium are matched to it.
pub const MATCH_REL_RADIUS: f64 = 1e-3;

/// `resolution × resolution` nodes spanning the rectangle, corners included.
/// A resolution of 1 gives the single centre node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub resolution: usize,
}

impl GridSpec {
    pub fn square(lo: f64, hi: f64, resolution: usize) -> Self {
        GridSpec {
            x_range: (lo, hi),
            y_range: (lo, hi),
            resolution,
        }
    }

    pub fn nodes(&self) -> Vec<Position> {
        grid_seeds(self.x_range, self.y_range, self.resolution)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasinLabel {
    /// Index into [`BasinMap::equilibria`].
    Equilibrium(usize),
    /// Stopped on the gradient threshold away from every listed equilibrium.
    Unmatched,
    NonConvergent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasinNode {
    pub start: Position,
    pub terminal: Position,
    pub reason: TerminalReason,
    pub label: BasinLabel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasinMap {
    pub grid: GridSpec,
    pub equilibria: Vec<EquilibriumRecord>,
    /// Row-major from the lower-left corner, matching [`GridSpec::nodes`].
    pub nodes: Vec<BasinNode>,
}

impl BasinMap {
    pub fn count(&self, label: BasinLabel) -> usize {
        self.nodes.iter().filter(|n| n.label == label).count()
    }

    /// Non-zero counts per label, in label order.
    pub fn counts(&self) -> Vec<(BasinLabel, usize)> {
        let mut labels: Vec<BasinLabel> = self.nodes.iter().map(|n| n.label).collect();
        labels.sort();
        labels.dedup();
        labels.into_iter().map(|l| (l, self.count(l))).collect()
    }

    /// `Pa`..`Pe` for analytic records, `E<i>` for numeric ones.
    pub fn label_name(&self, label: BasinLabel) -> String {
        match label {
            BasinLabel::Equilibrium(i) => match self.equilibria[i].label {
                EquilibriumLabel::Numeric => format!("E{i}"),
                l => l.to_string(),
            },
            BasinLabel::Unmatched => "Unmatched".into(),
            BasinLabel::NonConvergent => "NonConvergent".into(),
        }
    }
}

/// Integrates the follower from every grid node and labels each node with the
/// equilibrium its terminal state reached.
///
/// Nodes run in parallel; output order is grid order.
pub fn basin_sample(
    params: &CanonicalTriangleParams,
    grid: &GridSpec,
    cfg: &IntegratorConfig,
    equilibria: &[EquilibriumRecord],
) -> Result<BasinMap> {
    if equilibria.is_empty() {
        return Err(Error::InvalidParams(
            "basin sampling needs at least one equilibrium".into(),
        ));
    }
    if grid.resolution == 0 {
        return Err(Error::InvalidParams(
            "grid resolution must be at least 1".into(),
        ));
    }
    cfg.validate()?;
    let radius = MATCH_REL_RADIUS * params.length_scale();
    let nodes = grid
        .nodes()
        .into_par_iter()
        .map(|start| {
            let traj = integrate_follower_impl(params, start, cfg, false)?;
            let terminal = traj.final_state().get(3);
            let label = match traj.terminal_reason {
                TerminalReason::GradientStop => equilibria
                    .iter()
                    .enumerate()
                    .map(|(i, r)| (i, r.position.distance(terminal)))
                    .filter(|&(_, d)| d <= radius)
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .map_or(BasinLabel::Unmatched, |(i, _)| BasinLabel::Equilibrium(i)),
                _ => BasinLabel::NonConvergent,
            };
            Ok(BasinNode {
                start,
                terminal,
                reason: traj.terminal_reason,
                label,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BasinMap {
        grid: *grid,
        equilibria: equilibria.to_vec(),
        nodes,
    })
}
