//! Hierarchical (layered) assignment of potential terms to agents.
//!
//! The first agent of the root edge is stationary, the second keeps its
//! distance to the first, and every further agent follows the two leaders of
//! one clique. A term owned by an agent in layer `L` only reads agents in
//! layers `< L`, so the closed loop is a cascade.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::formation::FormationSpec;
use crate::potential::{PairTerm, PotentialTerm, TriangleTerm};

#[derive(Debug, Clone, PartialEq)]
pub struct LayerAssignment {
    /// `layer_of[agent - 1]`, 1-based layers.
    layer_of: Vec<usize>,
    terms_of: Vec<Vec<PotentialTerm>>,
}

impl LayerAssignment {
    pub fn agent_count(&self) -> usize {
        self.layer_of.len()
    }

    pub fn layer(&self, agent: usize) -> usize {
        self.layer_of[agent - 1]
    }

    pub fn terms_of(&self, agent: usize) -> &[PotentialTerm] {
        &self.terms_of[agent - 1]
    }

    pub fn layer_count(&self) -> usize {
        self.layer_of.iter().copied().max().unwrap_or(0)
    }

    /// Agents in `layer`, ascending.
    pub fn agents_in_layer(&self, layer: usize) -> Vec<usize> {
        (1..=self.agent_count())
            .filter(|&a| self.layer(a) == layer)
            .collect()
    }

    /// Layer index to its agents, for every non-empty layer.
    pub fn layers(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for a in 1..=self.agent_count() {
            out.entry(self.layer(a)).or_default().push(a);
        }
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = &PotentialTerm> {
        self.terms_of.iter().flatten()
    }

    /// Checks the structural invariants; returns a description of the first
    /// one violated.
    pub fn check(&self) -> std::result::Result<(), String> {
        let l1 = self.agents_in_layer(1);
        let l2 = self.agents_in_layer(2);
        if l1.len() != 1 || !self.terms_of(l1[0]).is_empty() {
            return Err(format!(
                "layer 1 must hold exactly one agent with no terms, got {l1:?}"
            ));
        }
        match (l2.as_slice(), l2.first().map(|&a| self.terms_of(a))) {
            ([_], Some([PotentialTerm::Pair(p)])) if p.leader == l1[0] => {}
            _ => {
                return Err(format!(
                    "layer 2 must hold one agent with a pair term on {}",
                    l1[0]
                ))
            }
        }
        for agent in 1..=self.agent_count() {
            let layer = self.layer(agent);
            if layer == 0 {
                return Err(format!("agent {agent} unassigned"));
            }
            if layer > 1 && self.terms_of(agent).is_empty() {
                return Err(format!("agent {agent} in layer {layer} owns no term"));
            }
            for term in self.terms_of(agent) {
                if term.owner() != agent {
                    return Err(format!("term {term:?} listed under agent {agent}"));
                }
                if let Some(&l) = term.leaders().iter().find(|&&l| self.layer(l) >= layer) {
                    return Err(format!(
                        "agent {agent} (layer {layer}) reads agent {l} (layer {})",
                        self.layer(l)
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Grows the layer assignment outward from `root_edge`.
///
/// At each step the unassigned agent that can join at the shallowest layer
/// is placed, where joining through a clique whose other two agents are
/// already assigned gives layer `max(layer(i), layer(j)) + 1`. Ties go to the
/// smallest agent index, then to the clique listed first. The owning agent is
/// rotated to the end of the clique triple, which preserves its signed area.
pub fn extract_layers(spec: &FormationSpec, root_edge: (usize, usize)) -> Result<LayerAssignment> {
    let n = spec.agent_count;
    let (r0, r1) = root_edge;
    let root_distance = spec
        .distance(r0, r1)
        .filter(|_| r0 != r1 && (1..=n).contains(&r0) && (1..=n).contains(&r1))
        .ok_or(Error::RootEdgeMissing(r0, r1))?;

    let mut layer_of = vec![0usize; n];
    let mut terms_of = vec![Vec::new(); n];
    layer_of[r0 - 1] = 1;
    layer_of[r1 - 1] = 2;
    terms_of[r1 - 1].push(PotentialTerm::Pair(PairTerm {
        leader: r0,
        follower: r1,
        distance: root_distance,
    }));

    loop {
        let mut best: Option<(usize, usize, usize, [usize; 3])> = None;
        for (ci, clique) in spec.cliques.iter().enumerate() {
            let unassigned: Vec<usize> = clique
                .agents
                .iter()
                .copied()
                .filter(|&a| layer_of[a - 1] == 0)
                .collect();
            let [k] = unassigned[..] else { continue };
            let [i, j, _] = clique.rotated_to_end(k).expect("k is in the clique");
            let layer = layer_of[i - 1].max(layer_of[j - 1]) + 1;
            let key = (layer, k, ci, [i, j, k]);
            if best.is_none_or(|b| (key.0, key.1, key.2) < (b.0, b.1, b.2)) {
                best = Some(key);
            }
        }
        let Some((layer, k, ci, [i, j, _])) = best else {
            break;
        };
        let clique = &spec.cliques[ci];
        let dist = |a: usize, b: usize| {
            spec.distance(a, b).ok_or_else(|| {
                Error::InvalidParams(format!("clique {:?} lacks edge ({a}, {b})", clique.agents))
            })
        };
        let term = TriangleTerm::new(
            [i, j, k],
            dist(i, j)?,
            dist(j, k)?,
            dist(k, i)?,
            clique.signed_area,
            clique.gain,
        )?;
        layer_of[k - 1] = layer;
        terms_of[k - 1].push(PotentialTerm::Triangle(term));
    }

    let unassigned: Vec<usize> = (1..=n).filter(|&a| layer_of[a - 1] == 0).collect();
    if !unassigned.is_empty() {
        return Err(Error::NotTriangulatedFromRoot(unassigned));
    }
    Ok(LayerAssignment { layer_of, terms_of })
}
