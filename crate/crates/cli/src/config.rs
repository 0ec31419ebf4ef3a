use std::path::Path;

use eqlab_core::channel::LinkSimulation;
use eqlab_core::complexity::{QuantSpec, TopologySpec};
use eqlab_core::data::{BitSource, DacConfig, Polarization, QamConstellation, SplitFractions};
use eqlab_core::nn::{LossKind, ModelArch, TrainConfig};
use eqlab_core::pitfalls::{LearnabilityConfig, OverfitRule, DEFAULT_GAP_THRESHOLD_DB};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Fiber link or calibrated back-to-back AWGN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Channel {
    Link(LinkSimulation),
    B2b { target_q_db: f64 },
}

/// The four randomness sources. These take precedence over the seeds
/// inside `source` and `train`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    pub data: u64,
    pub noise: u64,
    pub init: u64,
    pub shuffle: u64,
}

impl Seeds {
    pub fn set(&mut self, key: &str, value: u64) -> Result<(), CliError> {
        match key {
            "data" => self.data = value,
            "noise" => self.noise = value,
            "init" => self.init = value,
            "shuffle" => self.shuffle = value,
            other => {
                return Err(CliError::Config(format!(
                    "unknown seed '{other}', expected data, noise, init or shuffle"
                )))
            }
        }
        Ok(())
    }
}

fn default_kappa() -> f64 {
    1.076
}

fn default_gap() -> f64 {
    DEFAULT_GAP_THRESHOLD_DB
}

fn default_splits() -> SplitFractions {
    SplitFractions {
        train: 0.6,
        val: 0.2,
        test: 0.2,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    /// Longest lag searched for repetition; half the trace when absent.
    #[serde(default)]
    pub max_lag: Option<usize>,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_gap")]
    pub gap_threshold_db: f64,
    #[serde(default)]
    pub overfit: OverfitRule,
    /// Runs the B2B learnability experiment when present. Slow.
    #[serde(default)]
    pub learnability: Option<LearnabilityConfig>,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            max_lag: None,
            kappa: default_kappa(),
            gap_threshold_db: default_gap(),
            overfit: OverfitRule::default(),
            learnability: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ComplexityConfig {
    /// Defaults to the topology of `model`.
    #[serde(default)]
    pub topology: Option<TopologySpec>,
    #[serde(default)]
    pub quant: Vec<QuantSpec>,
    /// Measures latency over this many sequential inferences.
    #[serde(default)]
    pub latency_symbols: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub channel: Channel,
    pub source: BitSource,
    pub constellation: QamConstellation,
    pub n_symbols: usize,
    #[serde(default)]
    pub dac: Option<DacConfig>,
    /// Neighbours on each side of the centre symbol, N.
    pub memory: usize,
    #[serde(default)]
    pub polarization: Polarization,
    #[serde(default = "default_splits")]
    pub splits: SplitFractions,
    pub model: ModelArch,
    pub train: TrainConfig,
    pub seeds: Seeds,
    #[serde(default)]
    pub audit: AuditConfig,
    #[serde(default)]
    pub complexity: ComplexityConfig,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    /// Copies the seed block into the places that consume seeds.
    pub fn apply_seeds(&mut self) {
        self.source = self.source.with_seed(self.seeds.data);
        self.train.seed = self.seeds.shuffle;
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        match &self.channel {
            Channel::Link(sim) => sim.validate()?,
            Channel::B2b { target_q_db } => {
                if !target_q_db.is_finite() {
                    return bad("B2B target Q must be finite".into());
                }
            }
        }
        self.model.validate()?;
        self.train.validate()?;
        if self.model.memory() != self.memory {
            return bad(format!(
                "model memory {} differs from window memory {}",
                self.model.memory(),
                self.memory
            ));
        }
        let want = match self.train.loss {
            LossKind::Mse => 2,
            LossKind::CategoricalCel => self.constellation.order(),
        };
        if self.model.outputs() != want {
            return bad(format!(
                "{:?} needs {want} model outputs, got {}",
                self.train.loss,
                self.model.outputs()
            ));
        }
        if self.n_symbols < 2 * self.memory + 1 {
            return bad(format!("n_symbols must be at least {}", 2 * self.memory + 1));
        }
        if let Some(dac) = &self.dac {
            dac.effective_symbols()?;
        }
        if let Some(t) = &self.complexity.topology {
            t.validate()?;
        }
        for q in &self.complexity.quant {
            q.validate()?;
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON of the effective configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Parses `key=value` seed overrides.
pub fn parse_override(s: &str) -> Result<(String, u64), CliError> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("seed override '{s}' is not KEY=VALUE")))?;
    let v = v
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("seed override '{s}': value is not an unsigned integer")))?;
    Ok((k.trim().to_string(), v))
}
