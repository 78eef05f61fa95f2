//! Pipeline configuration file.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SetParams {
    /// Fraction of each surviving arc removed per generation.
    pub ratio: f64,
    pub depth: u32,
    /// Base arc start angle; with `base_length = 1` the base is the whole circle.
    pub base_start: f64,
    /// Base arc length as a fraction of the circle.
    pub base_length: f64,
}

impl Default for SetParams {
    fn default() -> Self {
        SetParams {
            ratio: 1.0 / 3.0,
            depth: 8,
            base_start: 0.0,
            base_length: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightParams {
    pub p: f64,
    pub grid_size: usize,
}

impl Default for WeightParams {
    fn default() -> Self {
        WeightParams { p: 2.0, grid_size: 1 << 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NodeParams {
    /// Endpoints of removed arcs up to this generation.
    pub generation: u32,
    pub cap: Option<usize>,
    /// Explicit node angles; replaces the sampled family when present.
    pub angles: Option<Vec<f64>>,
}

impl Default for NodeParams {
    fn default() -> Self {
        NodeParams {
            generation: 4,
            cap: None,
            angles: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorParams {
    /// `α = e^{i·alpha_phase}`.
    pub alpha_phase: f64,
}

impl Default for OperatorParams {
    fn default() -> Self {
        OperatorParams { alpha_phase: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckParams {
    pub epsilons: Vec<f64>,
    /// Generations swept by the continuity and ε checks; by default 2 up to
    /// two past the node generation, capped at the set depth.
    pub continuity_generations: Option<Vec<u32>>,
    pub orbit_steps: u64,
    /// Random vectors and points per randomized check.
    pub samples: usize,
}

impl Default for CheckParams {
    fn default() -> Self {
        CheckParams {
            epsilons: vec![0.1],
            continuity_generations: None,
            orbit_steps: 1000,
            samples: 100,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub set: SetParams,
    pub weight: WeightParams,
    pub nodes: NodeParams,
    pub operator: OperatorParams,
    pub checks: CheckParams,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self, String> {
        let config: PipelineConfig = serde_json::from_str(text).map_err(|e| format!("config: {e}"))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn continuity_generations(&self) -> Vec<u32> {
        match &self.checks.continuity_generations {
            Some(g) => g.clone(),
            None => {
                let last = (self.nodes.generation + 2).min(self.set.depth);
                (2.min(last)..=last).collect()
            }
        }
    }

    /// Range checks that do not need any computation. Conditions the library
    /// reports itself (grid resolution, certificate exponent) are left to the
    /// stages.
    pub fn validate(&self) -> Result<(), String> {
        let s = &self.set;
        if !(s.ratio > 0.0 && s.ratio < 1.0) {
            return Err(format!("set.ratio = {} must lie in (0, 1)", s.ratio));
        }
        if s.depth > 30 {
            return Err(format!("set.depth = {} exceeds 30", s.depth));
        }
        if !(s.base_length > 0.0 && s.base_length <= 1.0) {
            return Err(format!("set.base_length = {} must lie in (0, 1]", s.base_length));
        }
        if !s.base_start.is_finite() {
            return Err("set.base_start must be finite".into());
        }
        let w = &self.weight;
        if !w.grid_size.is_power_of_two() || !(256..=1 << 22).contains(&w.grid_size) {
            return Err(format!("weight.grid_size = {} must be a power of two in [256, 2^22]", w.grid_size));
        }
        if !(w.p >= 1.0 && w.p.is_finite()) {
            return Err(format!("weight.p = {} must be at least 1", w.p));
        }
        let n = &self.nodes;
        if n.angles.is_none() && (n.generation == 0 || n.generation > s.depth) {
            return Err(format!("nodes.generation = {} must lie in [1, depth = {}]", n.generation, s.depth));
        }
        if n.cap.is_some_and(|c| c < 2) {
            return Err("nodes.cap must be at least 2".into());
        }
        if let Some(angles) = &n.angles {
            if angles.len() < 2 || angles.iter().any(|a| !a.is_finite()) {
                return Err("nodes.angles needs at least two finite angles".into());
            }
        }
        if !self.operator.alpha_phase.is_finite() {
            return Err("operator.alpha_phase must be finite".into());
        }
        let c = &self.checks;
        if c.epsilons.iter().any(|e| !(*e >= 0.0)) {
            return Err("checks.epsilons must be nonnegative".into());
        }
        if c.orbit_steps > 1_000_000 {
            return Err(format!("checks.orbit_steps = {} exceeds 10^6", c.orbit_steps));
        }
        if c.samples == 0 {
            return Err("checks.samples must be positive".into());
        }
        if let Some(g) = &c.continuity_generations {
            if g.iter().any(|&g| g == 0 || g > s.depth) {
                return Err(format!("checks.continuity_generations must lie in [1, depth = {}]", s.depth));
            }
        }
        Ok(())
    }
}
