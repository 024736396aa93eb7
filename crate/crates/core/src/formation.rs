//! Formation specifications: desired inter-agent distances on edges and
//! desired signed areas on triangular cliques.
//!
//! Agents are numbered `1..=agent_count` throughout the crate.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{heron_area, signed_area, strict_triangle, Position};

/// Relative tolerance between `|Z*|` and the Heron area of a clique.
pub const HERON_REL_TOL: f64 = 1e-9;

/// Undirected edge with its desired length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub distance: f64,
}

impl Edge {
    pub fn new(i: usize, j: usize, distance: f64) -> Self {
        Edge { i, j, distance }
    }

    pub fn key(&self) -> (usize, usize) {
        edge_key(self.i, self.j)
    }
}

/// Ordered triple carrying a desired signed area and its area gain `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clique {
    pub agents: [usize; 3],
    pub signed_area: f64,
    pub gain: f64,
}

impl Clique {
    pub fn new(agents: [usize; 3], signed_area: f64, gain: f64) -> Self {
        Clique {
            agents,
            signed_area,
            gain,
        }
    }

    /// The three undirected edges, in the order (i,j), (j,k), (k,i).
    pub fn edges(&self) -> [(usize, usize); 3] {
        let [i, j, k] = self.agents;
        [edge_key(i, j), edge_key(j, k), edge_key(k, i)]
    }

    pub fn contains(&self, agent: usize) -> bool {
        self.agents.contains(&agent)
    }

    /// Cyclic rotation of the triple that puts `agent` last. The signed area
    /// is invariant under cyclic rotation, so `signed_area` still applies.
    pub fn rotated_to_end(&self, agent: usize) -> Option<[usize; 3]> {
        let [i, j, k] = self.agents;
        match self.agents.iter().position(|&a| a == agent)? {
            0 => Some([j, k, i]),
            1 => Some([k, i, j]),
            _ => Some([i, j, k]),
        }
    }
}

pub(crate) fn edge_key(i: usize, j: usize) -> (usize, usize) {
    if i <= j {
        (i, j)
    } else {
        (j, i)
    }
}

/// Agents, desired edge lengths and desired clique signed areas.
#[derive(Debug, Clone, PartialEq)]
pub struct FormationSpec {
    pub agent_count: usize,
    pub edges: Vec<Edge>,
    pub cliques: Vec<Clique>,
}

impl FormationSpec {
    pub fn new(agent_count: usize, edges: Vec<Edge>, cliques: Vec<Clique>) -> Self {
        FormationSpec {
            agent_count,
            edges,
            cliques,
        }
    }

    /// Desired distance between `i` and `j`, if they share an edge.
    pub fn distance(&self, i: usize, j: usize) -> Option<f64> {
        let key = edge_key(i, j);
        self.edges
            .iter()
            .find(|e| e.key() == key)
            .map(|e| e.distance)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.distance(i, j).is_some()
    }

    pub fn agents(&self) -> impl Iterator<Item = usize> {
        1..=self.agent_count
    }
}

/// Stacked positions of all agents, indexed `1..=n`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CollectiveState(pub Vec<Position>);

impl CollectiveState {
    pub fn new(positions: Vec<Position>) -> Self {
        CollectiveState(positions)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Position of a 1-based agent.
    pub fn get(&self, agent: usize) -> Position {
        self.0[agent - 1]
    }

    pub fn set(&mut self, agent: usize, p: Position) {
        self.0[agent - 1] = p;
    }

    pub fn positions(&self) -> &[Position] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(Position::is_finite)
    }

    /// Checks length against a formation and that every coordinate is finite.
    pub fn check_against(&self, spec: &FormationSpec) -> Result<()> {
        if self.len() != spec.agent_count {
            return Err(Error::StateLength {
                expected: spec.agent_count,
                found: self.len(),
            });
        }
        match self.0.iter().position(|p| !p.is_finite()) {
            Some(idx) => Err(Error::NonFiniteInput(idx + 1)),
            None => Ok(()),
        }
    }

    /// Applies `p -> R(angle) p + shift` to every agent.
    pub fn rigid_motion(&self, angle: f64, shift: Position) -> CollectiveState {
        CollectiveState(self.0.iter().map(|p| p.rotated(angle) + shift).collect())
    }
}

/// One problem found by [`validate_spec`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    TooFewAgents(usize),
    AgentOutOfRange {
        agent: usize,
    },
    SelfLoop {
        agent: usize,
    },
    DuplicateEdge {
        i: usize,
        j: usize,
    },
    NonPositiveDistance {
        i: usize,
        j: usize,
        distance: f64,
    },
    RepeatedCliqueAgent {
        clique: [usize; 3],
    },
    CliqueEdgeMissing {
        clique: [usize; 3],
        edge: (usize, usize),
    },
    TriangleInequality {
        clique: [usize; 3],
    },
    DegenerateClique {
        clique: [usize; 3],
    },
    HeronMismatch {
        clique: [usize; 3],
        heron: f64,
        signed_area: f64,
    },
    NonPositiveGain {
        clique: [usize; 3],
        gain: f64,
    },
    LamanCount {
        edges: usize,
        expected: usize,
    },
    NotTriangulated {
        detail: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            TooFewAgents(n) => write!(f, "too few agents: {n} (need at least 2)"),
            AgentOutOfRange { agent } => write!(f, "agent {agent} out of range"),
            SelfLoop { agent } => write!(f, "self-loop on agent {agent}"),
            DuplicateEdge { i, j } => write!(f, "duplicate edge ({i}, {j})"),
            NonPositiveDistance { i, j, distance } => {
                write!(f, "edge ({i}, {j}) has non-positive distance {distance}")
            }
            RepeatedCliqueAgent { clique } => write!(f, "clique {clique:?} repeats an agent"),
            CliqueEdgeMissing { clique, edge } => {
                write!(
                    f,
                    "clique edge missing: clique {clique:?} needs edge ({}, {})",
                    edge.0, edge.1
                )
            }
            TriangleInequality { clique } => {
                write!(
                    f,
                    "clique {clique:?} distances violate the strict triangle inequality"
                )
            }
            DegenerateClique { clique } => {
                write!(f, "clique {clique:?} has zero desired signed area")
            }
            HeronMismatch {
                clique,
                heron,
                signed_area,
            } => write!(
                f,
                "Heron mismatch on clique {clique:?}: |Z*| = {} but the distances give area {}",
                signed_area.abs(),
                heron
            ),
            NonPositiveGain { clique, gain } => {
                write!(f, "clique {clique:?} has non-positive gain {gain}")
            }
            LamanCount { edges, expected } => {
                write!(
                    f,
                    "Laman count failed: {edges} edges, expected 2n - 3 = {expected}"
                )
            }
            NotTriangulated { detail } => write!(f, "not triangulated: {detail}"),
        }
    }
}

/// All violations found in a formation. Empty means valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return writeln!(f, "valid");
        }
        writeln!(f, "invalid: {} violation(s)", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

/// Checks the structural and metric assumptions of a triangulated Laman
/// formation. Never fails; every problem is reported.
pub fn validate_spec(spec: &FormationSpec) -> ValidationReport {
    let mut out = Vec::new();
    let n = spec.agent_count;
    if n < 2 {
        out.push(Violation::TooFewAgents(n));
    }
    let in_range = |a: usize| (1..=n).contains(&a);

    let mut distances: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for e in &spec.edges {
        for a in [e.i, e.j] {
            if !in_range(a) {
                out.push(Violation::AgentOutOfRange { agent: a });
            }
        }
        if e.i == e.j {
            out.push(Violation::SelfLoop { agent: e.i });
            continue;
        }
        if !(e.distance > 0.0) || !e.distance.is_finite() {
            out.push(Violation::NonPositiveDistance {
                i: e.i,
                j: e.j,
                distance: e.distance,
            });
        }
        if distances.insert(e.key(), e.distance).is_some() {
            out.push(Violation::DuplicateEdge {
                i: e.key().0,
                j: e.key().1,
            });
        }
    }

    for c in &spec.cliques {
        let [i, j, k] = c.agents;
        for a in c.agents {
            if !in_range(a) {
                out.push(Violation::AgentOutOfRange { agent: a });
            }
        }
        if i == j || j == k || k == i {
            out.push(Violation::RepeatedCliqueAgent { clique: c.agents });
            continue;
        }
        if !(c.gain > 0.0) || !c.gain.is_finite() {
            out.push(Violation::NonPositiveGain {
                clique: c.agents,
                gain: c.gain,
            });
        }
        if c.signed_area == 0.0 || !c.signed_area.is_finite() {
            out.push(Violation::DegenerateClique { clique: c.agents });
        }
        let mut sides = Vec::with_capacity(3);
        for edge in c.edges() {
            match distances.get(&edge) {
                Some(&d) => sides.push(d),
                None => out.push(Violation::CliqueEdgeMissing {
                    clique: c.agents,
                    edge,
                }),
            }
        }
        if let [d1, d2, d3] = sides[..] {
            if !strict_triangle(d1, d2, d3) {
                out.push(Violation::TriangleInequality { clique: c.agents });
            } else if let Some(heron) = heron_area(d1, d2, d3) {
                if (c.signed_area.abs() - heron).abs() > HERON_REL_TOL * heron {
                    out.push(Violation::HeronMismatch {
                        clique: c.agents,
                        heron,
                        signed_area: c.signed_area,
                    });
                }
            }
        }
    }

    if n >= 2 {
        let expected = 2 * n - 3;
        if distances.len() != expected {
            out.push(Violation::LamanCount {
                edges: distances.len(),
                expected,
            });
        }
        if n > 2 {
            if let Some(detail) = triangulation_gap(spec, &distances) {
                out.push(Violation::NotTriangulated { detail });
            }
        }
    }

    ValidationReport { violations: out }
}

/// Cliques must cover every edge and every agent, and be connected to one
/// another through shared edges.
fn triangulation_gap(
    spec: &FormationSpec,
    edges: &BTreeMap<(usize, usize), f64>,
) -> Option<String> {
    let cliques: Vec<_> = spec
        .cliques
        .iter()
        .filter(|c| c.edges().iter().all(|e| edges.contains_key(e)))
        .collect();
    if cliques.is_empty() {
        return Some("no complete cliques".into());
    }
    if let Some(e) = edges
        .keys()
        .find(|e| !cliques.iter().any(|c| c.edges().contains(e)))
    {
        return Some(format!("edge ({}, {}) belongs to no clique", e.0, e.1));
    }
    if let Some(a) = spec
        .agents()
        .find(|&a| !cliques.iter().any(|c| c.contains(a)))
    {
        return Some(format!("agent {a} belongs to no clique"));
    }

    let mut parent: Vec<usize> = (0..cliques.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for a in 0..cliques.len() {
        for b in (a + 1)..cliques.len() {
            let shared = cliques[a]
                .edges()
                .iter()
                .any(|e| cliques[b].edges().contains(e));
            if shared {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
    }
    let root = find(&mut parent, 0);
    if (1..cliques.len()).any(|c| find(&mut parent, c) != root) {
        return Some("cliques are not connected through shared edges".into());
    }
    None
}

/// Per-constraint residuals of a state against the target set.
#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    pub member: bool,
    /// `|‖p_i − p_j‖ − d*|`, one per edge in spec order.
    pub edge_residuals: Vec<f64>,
    /// `|Z − Z*|`, one per clique in spec order.
    pub clique_residuals: Vec<f64>,
    pub max_residual: f64,
}

impl Membership {
    /// Cliques whose signed-area residual exceeds `tol`.
    pub fn failing_cliques<'a>(
        &'a self,
        spec: &'a FormationSpec,
        tol: f64,
    ) -> impl Iterator<Item = &'a Clique> {
        spec.cliques
            .iter()
            .zip(&self.clique_residuals)
            .filter(move |(_, &r)| r > tol)
            .map(|(c, _)| c)
    }
}

/// Whether `state` satisfies every distance and signed-area constraint to
/// within `tol`.
pub fn target_membership(
    state: &CollectiveState,
    spec: &FormationSpec,
    tol: f64,
) -> Result<Membership> {
    if state.len() != spec.agent_count {
        return Err(Error::StateLength {
            expected: spec.agent_count,
            found: state.len(),
        });
    }
    let edge_residuals: Vec<f64> = spec
        .edges
        .iter()
        .map(|e| (state.get(e.i).distance(state.get(e.j)) - e.distance).abs())
        .collect();
    let clique_residuals: Vec<f64> = spec
        .cliques
        .iter()
        .map(|c| {
            let [i, j, k] = c.agents;
            (signed_area(state.get(i), state.get(j), state.get(k)) - c.signed_area).abs()
        })
        .collect();
    let max_residual = edge_residuals
        .iter()
        .chain(&clique_residuals)
        .fold(0.0_f64, |m, &r| m.max(r));
    let member = edge_residuals
        .iter()
        .chain(&clique_residuals)
        .all(|&r| r <= tol);
    Ok(Membership {
        member,
        edge_residuals,
        clique_residuals,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle_spec(area: f64) -> FormationSpec {
        let leg = 3.0 * 2f64.sqrt();
        FormationSpec::new(
            3,
            vec![
                Edge::new(1, 2, 6.0),
                Edge::new(2, 3, leg),
                Edge::new(1, 3, leg),
            ],
            vec![Clique::new([1, 2, 3], area, 4.0)],
        )
    }

    #[test]
    fn single_triangle_is_valid() {
        assert!(validate_spec(&triangle_spec(9.0)).is_valid());
        assert!(validate_spec(&triangle_spec(-9.0)).is_valid());
    }

    #[test]
    fn heron_mismatch_reported() {
        let report = validate_spec(&triangle_spec(10.0));
        assert_eq!(report.violations.len(), 1);
        assert!(
            matches!(report.violations[0], Violation::HeronMismatch { heron, .. } if (heron - 9.0).abs() < 1e-12)
        );
    }

    #[test]
    fn missing_clique_edge_reported() {
        let mut spec = triangle_spec(9.0);
        spec.edges.retain(|e| e.key() != (2, 3));
        let report = validate_spec(&spec);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::CliqueEdgeMissing { edge: (2, 3), .. })));
        assert!(report.violations.iter().any(|v| matches!(
            v,
            Violation::LamanCount {
                edges: 2,
                expected: 3
            }
        )));
    }

    #[test]
    fn degenerate_and_inequality_reported() {
        let spec = FormationSpec::new(
            3,
            vec![
                Edge::new(1, 2, 1.0),
                Edge::new(2, 3, 1.0),
                Edge::new(1, 3, 2.0),
            ],
            vec![Clique::new([1, 2, 3], 0.0, 1.0)],
        );
        let report = validate_spec(&spec);
        assert!(report
            .violations
            .contains(&Violation::DegenerateClique { clique: [1, 2, 3] }));
        assert!(report
            .violations
            .contains(&Violation::TriangleInequality { clique: [1, 2, 3] }));
    }

    #[test]
    fn disconnected_triangles_reported() {
        // Two triangles glued at a single vertex: 5 agents, 6 edges but 2n-3 = 7.
        // Add a stray edge to fix the count; the stray edge belongs to no clique.
        let spec = FormationSpec::new(
            5,
            vec![
                Edge::new(1, 2, 1.0),
                Edge::new(2, 3, 1.0),
                Edge::new(1, 3, 1.0),
                Edge::new(3, 4, 1.0),
                Edge::new(4, 5, 1.0),
                Edge::new(3, 5, 1.0),
                Edge::new(1, 5, 1.5),
            ],
            vec![
                Clique::new([1, 2, 3], 3f64.sqrt() / 4.0, 1.0),
                Clique::new([3, 4, 5], 3f64.sqrt() / 4.0, 1.0),
            ],
        );
        let report = validate_spec(&spec);
        assert_eq!(report.violations.len(), 1, "{report}");
        assert!(matches!(
            report.violations[0],
            Violation::NotTriangulated { .. }
        ));
    }

    #[test]
    fn two_agents_valid() {
        let spec = FormationSpec::new(2, vec![Edge::new(1, 2, 1.0)], vec![]);
        assert!(validate_spec(&spec).is_valid());
    }

    #[test]
    fn membership_detects_reflection() {
        let spec = triangle_spec(9.0);
        let good = CollectiveState::new(vec![
            Position::new(-3.0, 0.0),
            Position::new(3.0, 0.0),
            Position::new(0.0, 3.0),
        ]);
        assert!(target_membership(&good, &spec, 1e-9).unwrap().member);
        let mut flipped = good.clone();
        flipped.set(3, Position::new(0.0, -3.0));
        let m = target_membership(&flipped, &spec, 1e-3).unwrap();
        assert!(!m.member);
        assert!(m.edge_residuals.iter().all(|&r| r < 1e-12));
        assert_eq!(m.clique_residuals, vec![18.0]);
        assert!(target_membership(&CollectiveState::default(), &spec, 1.0).is_err());
    }
}
