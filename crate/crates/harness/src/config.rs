//! Experiment configuration: a flat TOML file plus command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// How much separation the generated instances must have.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GapTarget {
    None,
    /// Binary vertices and an integral objective with a unique optimum.
    Integral,
    /// Every round must certify a gap of at least this much.
    Margin(f64),
}

impl FromStr for GapTarget {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(GapTarget::None),
            "integral" => Ok(GapTarget::Integral),
            _ => {
                let value = s
                    .strip_prefix("margin:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .filter(|v| *v > 0.0 && v.is_finite())
                    .ok_or_else(|| HarnessError::Config(format!("bad gap target `{s}` (none | integral | margin:<δ>)")))?;
                Ok(GapTarget::Margin(value))
            }
        }
    }
}

impl TryFrom<String> for GapTarget {
    type Error = HarnessError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GapTarget> for String {
    fn from(g: GapTarget) -> String {
        g.to_string()
    }
}

impl fmt::Display for GapTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GapTarget::None => write!(f, "none"),
            GapTarget::Integral => write!(f, "integral"),
            GapTarget::Margin(d) => write!(f, "margin:{d}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(default = "defaults::dimension")]
    pub dimension: usize,
    #[serde(default = "defaults::rounds")]
    pub rounds: usize,
    #[serde(default = "defaults::regularizer")]
    pub regularizer: String,
    #[serde(default = "defaults::ball_radius")]
    pub ball_radius: f64,
    #[serde(default = "defaults::schedule")]
    pub schedule: String,
    #[serde(default = "defaults::family")]
    pub family: String,
    /// Points per set for `random-vertices`.
    #[serde(default = "defaults::vertices")]
    pub vertices: usize,
    /// Round `random-vertices` points to `{0,1}` even without an integral gap.
    #[serde(default)]
    pub binary_vertices: bool,
    #[serde(default = "defaults::knapsack_max_weight")]
    pub knapsack_max_weight: u64,
    /// Capacity as a fraction of the total weight.
    #[serde(default = "defaults::knapsack_fill")]
    pub knapsack_fill: f64,
    /// Probability each arc of the ground DAG survives in a round.
    #[serde(default = "defaults::dag_keep")]
    pub dag_keep: f64,
    /// Probability the agent replaces its optimal choice with a uniform feasible point.
    #[serde(default)]
    pub agent_noise: f64,
    #[serde(default = "defaults::gap")]
    pub gap: GapTarget,
    /// Integral objective coefficients are drawn from `1..=integral_max`.
    #[serde(default = "defaults::integral_max")]
    pub integral_max: u32,
    /// Override for the diameter bound `K`; defaults to the family's bound.
    #[serde(default)]
    pub diameter: Option<f64>,
    #[serde(default = "defaults::holdout")]
    pub holdout: usize,
    /// Shortest horizon at which the plateau is checked.
    #[serde(default = "defaults::burn_in")]
    pub burn_in: usize,
    #[serde(default = "defaults::enumeration_cap")]
    pub enumeration_cap: usize,
    #[serde(default = "defaults::retry_cap")]
    pub retry_cap: usize,
    /// Also write `stream.txt`; large for high-dimensional vertex lists.
    #[serde(default)]
    pub save_stream: bool,
    #[serde(default = "defaults::out")]
    pub out: PathBuf,
}

mod defaults {
    use super::GapTarget;
    use std::path::PathBuf;

    pub fn dimension() -> usize {
        5
    }
    pub fn rounds() -> usize {
        1000
    }
    pub fn regularizer() -> String {
        "simplex-entropy".into()
    }
    pub fn ball_radius() -> f64 {
        0.5
    }
    pub fn schedule() -> String {
        "adaptive".into()
    }
    pub fn family() -> String {
        "random-vertices".into()
    }
    pub fn vertices() -> usize {
        32
    }
    pub fn knapsack_max_weight() -> u64 {
        10
    }
    pub fn knapsack_fill() -> f64 {
        0.5
    }
    pub fn dag_keep() -> f64 {
        0.6
    }
    pub fn gap() -> GapTarget {
        GapTarget::None
    }
    pub fn integral_max() -> u32 {
        4
    }
    pub fn holdout() -> usize {
        1000
    }
    pub fn burn_in() -> usize {
        1000
    }
    pub fn enumeration_cap() -> usize {
        1 << 20
    }
    pub fn retry_cap() -> usize {
        100_000
    }
    pub fn out() -> PathBuf {
        PathBuf::from("out")
    }
}

impl ExperimentConfig {
    /// A config with every field at its default.
    pub fn with_seed(seed: u64) -> Self {
        toml::from_str(&format!("seed = {seed}")).expect("defaults parse")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.dimension == 0 {
            return fail("dimension must be positive");
        }
        if self.rounds == 0 {
            return fail("rounds must be positive");
        }
        if !(0.0..=1.0).contains(&self.agent_noise) {
            return fail("agent_noise must lie in [0, 1]");
        }
        if !(self.ball_radius > 0.0 && self.ball_radius.is_finite()) {
            return fail("ball_radius must be positive");
        }
        if self.vertices == 0 {
            return fail("vertices must be positive");
        }
        if !(0.0..=1.0).contains(&self.knapsack_fill) {
            return fail("knapsack_fill must lie in [0, 1]");
        }
        if !(self.dag_keep > 0.0 && self.dag_keep <= 1.0) {
            return fail("dag_keep must lie in (0, 1]");
        }
        if self.knapsack_max_weight == 0 {
            return fail("knapsack_max_weight must be positive");
        }
        if self.integral_max == 0 {
            return fail("integral_max must be positive");
        }
        if self.holdout == 0 {
            return fail("holdout must be positive");
        }
        if self.enumeration_cap == 0 || self.retry_cap == 0 {
            return fail("caps must be positive");
        }
        if let Some(k) = self.diameter {
            if !(k > 0.0 && k.is_finite()) {
                return fail("diameter must be positive");
            }
        }
        if self.gap == GapTarget::Integral && self.regularizer != "simplex-entropy" {
            return fail("the integral gap target needs the simplex-entropy regularizer");
        }
        Ok(())
    }
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub rounds: Option<usize>,
    pub seed: Option<u64>,
    pub dimension: Option<usize>,
    pub family: Option<String>,
    pub schedule: Option<String>,
    pub regularizer: Option<String>,
    pub gap: Option<GapTarget>,
    pub agent_noise: Option<f64>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(v) = self.rounds {
            cfg.rounds = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.dimension {
            cfg.dimension = v;
        }
        if let Some(v) = &self.family {
            cfg.family = v.clone();
        }
        if let Some(v) = &self.schedule {
            cfg.schedule = v.clone();
        }
        if let Some(v) = &self.regularizer {
            cfg.regularizer = v.clone();
        }
        if let Some(v) = self.gap {
            cfg.gap = v;
        }
        if let Some(v) = self.agent_noise {
            cfg.agent_noise = v;
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        cfg.validate()
    }
}
