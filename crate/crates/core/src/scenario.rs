//! TOML scenario files.
//!
//! ```toml
//! agents = 3                  # agent count n; agents are numbered 1..=n
//! root_edge = [1, 2]          # optional; defaults to the first edge listed
//! default_gain = 4.0          # optional; gain for cliques without their own
//! initial = [[-1.0, 0.0], [1.0, 0.0], [0.0, -1.0]]   # optional, one [x, y] per agent
//!
//! [[edges]]
//! agents = [1, 2]
//! distance = 2.0
//!
//! [[cliques]]
//! agents = [1, 2, 3]          # ordered; the sign of signed_area follows this order
//! signed_area = 6.0
//! gain = 4.0                  # optional
//!
//! [integrator]                # optional; every field optional
//! method = "rk4"              # "rk4" or "rk45"
//! step = 1e-3                 # rk4 only
//! abs_tol = 1e-9              # rk45 only
//! rel_tol = 1e-9              # rk45 only
//! t_max = 100.0
//! gradient_stop = 1e-10
//! sample_stride = 1
//! ```
//!
//! Unknown fields are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formation::{Clique, CollectiveState, Edge, FormationSpec};
use crate::geometry::Position;
use crate::simulator::{IntegratorConfig, Method};

/// Area gain used when neither the clique nor the scenario sets one.
pub const DEFAULT_GAIN: f64 = 4.0;

/// Scenario files shipped with the crate.
pub mod bundled {
    /// Eight agents on a 6 × 6 square, started from two vertical columns.
    pub const EIGHT_AGENTS: &str = include_str!("../scenarios/eight_agents.toml");
    /// Pinned leaders at `[±1, 0]`, follower target `[0, 6]`, `K = 4`, started
    /// on the negative y-axis.
    pub const CANONICAL_B6_C1_K4: &str = include_str!("../scenarios/canonical_b6_c1_k4.toml");
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub agents: [usize; 2],
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliqueEntry {
    pub agents: [usize; 3],
    pub signed_area: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Rk4,
    Rk45,
}

/// Partial integrator settings; unset fields fall through to the base
/// configuration they are applied to.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<MethodName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gradient_stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_stride: Option<usize>,
}

impl IntegratorOverrides {
    /// Applies the set fields on top of `base`, then validates.
    pub fn apply(&self, base: IntegratorConfig) -> Result<IntegratorConfig> {
        let (mut step, mut abs_tol, mut rel_tol) = (1e-3, 1e-9, 1e-9);
        let mut method = match base.method {
            Method::FixedRk4 { step: s } => {
                step = s;
                MethodName::Rk4
            }
            Method::AdaptiveRk45 {
                abs_tol: a,
                rel_tol: r,
            } => {
                abs_tol = a;
                rel_tol = r;
                MethodName::Rk45
            }
        };
        method = self.method.unwrap_or(method);
        let step = self.step.unwrap_or(step);
        let abs_tol = self.abs_tol.unwrap_or(abs_tol);
        let rel_tol = self.rel_tol.unwrap_or(rel_tol);
        let cfg = IntegratorConfig {
            method: match method {
                MethodName::Rk4 => Method::FixedRk4 { step },
                MethodName::Rk45 => Method::AdaptiveRk45 { abs_tol, rel_tol },
            },
            t_max: self.t_max.unwrap_or(base.t_max),
            gradient_stop: self.gradient_stop.unwrap_or(base.gradient_stop),
            sample_stride: self.sample_stride.unwrap_or(base.sample_stride),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub agents: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_edge: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_gain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<Position>>,
    #[serde(default)]
    pub edges: Vec<EdgeEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cliques: Vec<CliqueEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<IntegratorOverrides>,
}

impl ScenarioFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ScenarioFile = toml::from_str(text)?;
        file.check()?;
        Ok(file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_toml_string()?)?;
        Ok(())
    }

    /// Field-level checks that do not need the formation to be valid.
    fn check(&self) -> Result<()> {
        let gains = self
            .default_gain
            .iter()
            .chain(self.cliques.iter().filter_map(|c| c.gain.as_ref()));
        if let Some(g) = gains.copied().find(|g| !(*g > 0.0 && g.is_finite())) {
            return Err(Error::Scenario(format!("gains must be positive, got {g}")));
        }
        if let Some(init) = &self.initial {
            if init.len() != self.agents {
                return Err(Error::Scenario(format!(
                    "initial has {} positions for {} agents",
                    init.len(),
                    self.agents
                )));
            }
            if let Some(i) = init.iter().position(|p| !p.is_finite()) {
                return Err(Error::Scenario(format!(
                    "initial position of agent {} is not finite",
                    i + 1
                )));
            }
        }
        if let Some(ov) = &self.integrator {
            ov.apply(IntegratorConfig::default())?;
        }
        Ok(())
    }

    pub fn gain_of(&self, clique: &CliqueEntry) -> f64 {
        clique.gain.or(self.default_gain).unwrap_or(DEFAULT_GAIN)
    }

    pub fn formation_spec(&self) -> FormationSpec {
        FormationSpec::new(
            self.agents,
            self.edges
                .iter()
                .map(|e| Edge::new(e.agents[0], e.agents[1], e.distance))
                .collect(),
            self.cliques
                .iter()
                .map(|c| Clique::new(c.agents, c.signed_area, self.gain_of(c)))
                .collect(),
        )
    }

    pub fn initial_state(&self) -> Option<CollectiveState> {
        self.initial.clone().map(CollectiveState::new)
    }

    pub fn root_edge(&self) -> Option<(usize, usize)> {
        self.root_edge
            .map(|[i, j]| (i, j))
            .or_else(|| self.edges.first().map(|e| (e.agents[0], e.agents[1])))
    }

    /// File settings on top of [`IntegratorConfig::default`].
    pub fn integrator_config(&self) -> Result<IntegratorConfig> {
        self.integrator
            .clone()
            .unwrap_or_default()
            .apply(IntegratorConfig::default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formation::validate_spec;

    #[test]
    fn bundled_scenarios_parse_and_validate() {
        for text in [bundled::EIGHT_AGENTS, bundled::CANONICAL_B6_C1_K4] {
            let s = ScenarioFile::from_toml_str(text).unwrap();
            let report = validate_spec(&s.formation_spec());
            assert!(report.is_valid(), "{report}");
            assert!(s.initial_state().is_some());
            assert_eq!(s.root_edge(), Some((1, 2)));
        }
    }

    #[test]
    fn rejects_unknown_fields() {
        let err = ScenarioFile::from_toml_str("agents = 2\nbogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        let text = "agents = 2\n[[edges]]\nagents = [1, 2]\ndistance = 1.0\nweight = 3\n";
        assert!(ScenarioFile::from_toml_str(text).is_err());
    }

    #[test]
    fn rejects_bad_gain_and_initial() {
        assert!(ScenarioFile::from_toml_str("agents = 2\ndefault_gain = 0.0\n").is_err());
        assert!(ScenarioFile::from_toml_str("agents = 2\ninitial = [[0.0, 0.0]]\n").is_err());
        assert!(ScenarioFile::from_toml_str("agents = 1\n[integrator]\nstep = -1.0\n").is_err());
    }

    #[test]
    fn round_trip_is_identity() {
        for text in [bundled::EIGHT_AGENTS, bundled::CANONICAL_B6_C1_K4] {
            let s = ScenarioFile::from_toml_str(text).unwrap();
            let again = ScenarioFile::from_toml_str(&s.to_toml_string().unwrap()).unwrap();
            assert_eq!(s, again);
        }
    }

    #[test]
    fn overrides_layer_on_defaults() {
        let ov = IntegratorOverrides {
            method: Some(MethodName::Rk45),
            t_max: Some(5.0),
            ..Default::default()
        };
        let cfg = ov.apply(IntegratorConfig::default()).unwrap();
        assert_eq!(
            cfg.method,
            Method::AdaptiveRk45 {
                abs_tol: 1e-9,
                rel_tol: 1e-9
            }
        );
        assert_eq!(cfg.t_max, 5.0);
        assert_eq!(cfg.gradient_stop, 1e-10);
    }
}
