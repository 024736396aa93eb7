//! Pair and triangle potentials with their analytic derivatives.
//!
//! Gradients and Hessians are always taken with respect to the *follower*
//! (the agent that owns the term) and are returned with a positive sign,
//! i.e. `+∂V/∂p`. The control law applies the negation.

use crate::error::{Error, Result};
use crate::formation::{CollectiveState, HERON_REL_TOL};
use crate::geometry::{heron_area, signed_area, strict_triangle, Position, Sym2};
use crate::layers::LayerAssignment;

/// `¼ (‖p_i − p_j‖² − d²)²`.
pub fn pair_potential(p_i: Position, p_j: Position, d_star: f64) -> f64 {
    let e = (p_j - p_i).norm_sq() - d_star * d_star;
    0.25 * e * e
}

/// Gradient of [`pair_potential`] with respect to `p_j`.
pub fn pair_gradient(p_i: Position, p_j: Position, d_star: f64) -> Position {
    let u = p_j - p_i;
    (u.norm_sq() - d_star * d_star) * u
}

/// Hessian of [`pair_potential`] with respect to `p_j`:
/// `(‖u‖² − d²) I + 2 u uᵀ` with `u = p_j − p_i`.
pub fn pair_hessian(p_i: Position, p_j: Position, d_star: f64) -> Sym2 {
    let u = p_j - p_i;
    Sym2::identity_scaled(u.norm_sq() - d_star * d_star) + 2.0 * Sym2::outer(u)
}

/// Distance term owned by `follower`, with `leader` treated as fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairTerm {
    pub leader: usize,
    pub follower: usize,
    pub distance: f64,
}

/// Parameters of the triangle potential
///
/// ```text
/// V = ¼[(‖p_i−p_j‖² − d_ij²)² + (‖p_j−p_k‖² − d_jk²)² + (‖p_k−p_i‖² − d_ki²)²]
///   + ½ K (Z_ijk − Z*)²
/// ```
///
/// where `k` is the follower and `i`, `j` its leaders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleTerm {
    pub leader_i: usize,
    pub leader_j: usize,
    pub follower: usize,
    pub d_ij: f64,
    pub d_jk: f64,
    pub d_ki: f64,
    pub signed_area: f64,
    pub gain: f64,
}

impl TriangleTerm {
    /// Checks the triangle inequality, Heron consistency of `|Z*|`, and `K > 0`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        agents: [usize; 3],
        d_ij: f64,
        d_jk: f64,
        d_ki: f64,
        signed_area: f64,
        gain: f64,
    ) -> Result<Self> {
        if !(gain > 0.0 && gain.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "gain must be positive, got {gain}"
            )));
        }
        if !strict_triangle(d_ij, d_jk, d_ki) {
            return Err(Error::InvalidParams(format!(
                "distances ({d_ij}, {d_jk}, {d_ki}) violate the strict triangle inequality"
            )));
        }
        let heron = heron_area(d_ij, d_jk, d_ki).expect("strict triangle");
        if signed_area == 0.0 || (signed_area.abs() - heron).abs() > HERON_REL_TOL * heron {
            return Err(Error::InvalidParams(format!(
                "signed area {signed_area} inconsistent with Heron area {heron}"
            )));
        }
        let [leader_i, leader_j, follower] = agents;
        Ok(TriangleTerm {
            leader_i,
            leader_j,
            follower,
            d_ij,
            d_jk,
            d_ki,
            signed_area,
            gain,
        })
    }

    pub fn agents(&self) -> [usize; 3] {
        [self.leader_i, self.leader_j, self.follower]
    }

    /// Potential value at the given leader and follower positions.
    pub fn value(&self, p_i: Position, p_j: Position, p_k: Position) -> f64 {
        let dist = pair_potential(p_i, p_j, self.d_ij)
            + pair_potential(p_j, p_k, self.d_jk)
            + pair_potential(p_k, p_i, self.d_ki);
        let dz = signed_area(p_i, p_j, p_k) - self.signed_area;
        dist + 0.5 * self.gain * dz * dz
    }

    /// `+∂V/∂p_k`.
    pub fn gradient(&self, p_i: Position, p_j: Position, p_k: Position) -> Position {
        let dz = signed_area(p_i, p_j, p_k) - self.signed_area;
        pair_gradient(p_j, p_k, self.d_jk)
            + pair_gradient(p_i, p_k, self.d_ki)
            + (self.gain * dz) * area_gradient(p_i, p_j)
    }

    /// `∂²V/∂p_k²`. The signed area is affine in `p_k`, so its term
    /// contributes only `K g gᵀ` with `g = ∂Z/∂p_k`.
    pub fn hessian(&self, p_i: Position, p_j: Position, p_k: Position) -> Sym2 {
        pair_hessian(p_j, p_k, self.d_jk)
            + pair_hessian(p_i, p_k, self.d_ki)
            + self.gain * Sym2::outer(area_gradient(p_i, p_j))
    }
}

/// `∂Z_ijk/∂p_k = ½ [[0, 1], [−1, 0]] (p_i − p_j)`.
fn area_gradient(p_i: Position, p_j: Position) -> Position {
    0.5 * (p_i - p_j).rot_cw()
}

pub fn triangle_potential(p_i: Position, p_j: Position, p_k: Position, term: &TriangleTerm) -> f64 {
    term.value(p_i, p_j, p_k)
}

pub fn grad_triangle_wrt_follower(
    p_i: Position,
    p_j: Position,
    p_k: Position,
    term: &TriangleTerm,
) -> Position {
    term.gradient(p_i, p_j, p_k)
}

pub fn hessian_wrt_follower(
    p_i: Position,
    p_j: Position,
    p_k: Position,
    term: &TriangleTerm,
) -> Sym2 {
    term.hessian(p_i, p_j, p_k)
}

/// A potential term owned by one agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialTerm {
    Pair(PairTerm),
    Triangle(TriangleTerm),
}

impl PotentialTerm {
    pub fn owner(&self) -> usize {
        match self {
            PotentialTerm::Pair(t) => t.follower,
            PotentialTerm::Triangle(t) => t.follower,
        }
    }

    /// Agents other than the owner that the term reads.
    pub fn leaders(&self) -> Vec<usize> {
        match self {
            PotentialTerm::Pair(t) => vec![t.leader],
            PotentialTerm::Triangle(t) => vec![t.leader_i, t.leader_j],
        }
    }

    pub fn value(&self, state: &CollectiveState) -> f64 {
        match self {
            PotentialTerm::Pair(t) => {
                pair_potential(state.get(t.leader), state.get(t.follower), t.distance)
            }
            PotentialTerm::Triangle(t) => t.value(
                state.get(t.leader_i),
                state.get(t.leader_j),
                state.get(t.follower),
            ),
        }
    }

    /// `+∂V/∂p_owner`.
    pub fn gradient(&self, state: &CollectiveState) -> Position {
        match self {
            PotentialTerm::Pair(t) => {
                pair_gradient(state.get(t.leader), state.get(t.follower), t.distance)
            }
            PotentialTerm::Triangle(t) => t.gradient(
                state.get(t.leader_i),
                state.get(t.leader_j),
                state.get(t.follower),
            ),
        }
    }

    pub fn hessian(&self, state: &CollectiveState) -> Sym2 {
        match self {
            PotentialTerm::Pair(t) => {
                pair_hessian(state.get(t.leader), state.get(t.follower), t.distance)
            }
            PotentialTerm::Triangle(t) => t.hessian(
                state.get(t.leader_i),
                state.get(t.leader_j),
                state.get(t.follower),
            ),
        }
    }
}

/// The control input `u = −∂V_agent/∂p_agent`; zero for the root agent.
pub fn agent_control(
    agent: usize,
    state: &CollectiveState,
    assignment: &LayerAssignment,
) -> Position {
    let grad = assignment
        .terms_of(agent)
        .iter()
        .fold(Position::ORIGIN, |acc, term| acc + term.gradient(state));
    -grad
}

/// `V_agent`, the sum of the terms owned by `agent`.
pub fn agent_potential(agent: usize, state: &CollectiveState, assignment: &LayerAssignment) -> f64 {
    assignment
        .terms_of(agent)
        .iter()
        .fold(0.0, |acc, t| acc + t.value(state))
}
