use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::nn::{BiLstmArch, MlpArch, ModelArch, FEATURES_PER_SYMBOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    Mlp2,
    Mlp3,
    Mlp4,
    Bilstm,
}

fn default_n_i() -> usize {
    FEATURES_PER_SYMBOL
}

fn default_n_o() -> usize {
    2
}

/// Equalizer topology for cost accounting. For MLPs `hidden` lists the
/// layer sizes n_1.. ; for the biLSTM it holds the single entry n_h.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySpec {
    pub kind: TopologyKind,
    /// Window length 2N+1.
    pub n_s: usize,
    #[serde(default = "default_n_i")]
    pub n_i: usize,
    #[serde(default = "default_n_o")]
    pub n_o: usize,
    pub hidden: Vec<usize>,
}

impl TopologySpec {
    /// MLP over a window of N neighbours on each side; the kind follows
    /// the number of hidden layers.
    pub fn mlp(memory: usize, hidden: &[usize]) -> Result<Self> {
        let kind = match hidden.len() {
            2 => TopologyKind::Mlp2,
            3 => TopologyKind::Mlp3,
            4 => TopologyKind::Mlp4,
            n => return config(format!("no RMpS formula for an MLP with {n} hidden layers")),
        };
        let s = Self {
            kind,
            n_s: 2 * memory + 1,
            n_i: FEATURES_PER_SYMBOL,
            n_o: 2,
            hidden: hidden.to_vec(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn bilstm(memory: usize, n_h: usize) -> Result<Self> {
        let s = Self {
            kind: TopologyKind::Bilstm,
            n_s: 2 * memory + 1,
            n_i: FEATURES_PER_SYMBOL,
            n_o: 2,
            hidden: vec![n_h],
        };
        s.validate()?;
        Ok(s)
    }

    pub fn from_arch(arch: &ModelArch) -> Result<Self> {
        let mut s = match arch {
            ModelArch::Mlp(a) => Self::mlp(a.memory, &a.hidden)?,
            ModelArch::Bilstm(a) => Self::bilstm(a.memory, a.hidden_units)?,
        };
        s.n_o = arch.outputs();
        s.validate()?;
        Ok(s)
    }

    /// The model architecture with this topology, when it uses the
    /// standard 4 features per symbol.
    pub fn to_arch(&self) -> Result<ModelArch> {
        self.validate()?;
        if self.n_i != FEATURES_PER_SYMBOL {
            return config(format!("models take {FEATURES_PER_SYMBOL} features per symbol, got n_i = {}", self.n_i));
        }
        let memory = (self.n_s - 1) / 2;
        Ok(match self.kind {
            TopologyKind::Bilstm => ModelArch::Bilstm(BiLstmArch {
                memory,
                hidden_units: self.hidden[0],
                outputs: self.n_o,
            }),
            _ => ModelArch::Mlp(MlpArch {
                memory,
                hidden: self.hidden.clone(),
                outputs: self.n_o,
            }),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_s % 2 == 0 {
            return config(format!("n_s = 2N+1 must be odd, got {}", self.n_s));
        }
        if self.n_i == 0 || self.n_o == 0 || self.hidden.iter().any(|&h| h == 0) {
            return config("all sizes must be >= 1");
        }
        let want = match self.kind {
            TopologyKind::Mlp2 => 2,
            TopologyKind::Mlp3 => 3,
            TopologyKind::Mlp4 => 4,
            TopologyKind::Bilstm => 1,
        };
        if self.hidden.len() != want {
            return config(format!(
                "{:?} needs {want} hidden size(s), got {}",
                self.kind,
                self.hidden.len()
            ));
        }
        Ok(())
    }

    /// (inputs, neurons) of each dense layer, MLPs only.
    pub fn dense_layers(&self) -> Result<Vec<(usize, usize)>> {
        self.validate()?;
        if self.kind == TopologyKind::Bilstm {
            return config("the biLSTM is not a stack of dense layers");
        }
        let mut w = vec![self.n_s * self.n_i];
        w.extend(&self.hidden);
        w.push(self.n_o);
        Ok(w.windows(2).map(|p| (p[0], p[1])).collect())
    }
}

/// Real multiplications per recovered symbol.
pub fn rmps(spec: &TopologySpec) -> Result<u64> {
    spec.validate()?;
    let (n_s, n_i, n_o) = (spec.n_s as u64, spec.n_i as u64, spec.n_o as u64);
    Ok(match spec.kind {
        TopologyKind::Bilstm => {
            let n_h = spec.hidden[0] as u64;
            2 * n_s * n_h * (4 * n_i + 4 * n_h + 3 + n_o)
        }
        _ => spec.dense_layers()?.iter().map(|&(m, n)| (m * n) as u64).sum(),
    })
}

/// Trainable parameters, biases included, matching the layouts in `nn`.
pub fn parameter_count(spec: &TopologySpec) -> Result<u64> {
    spec.validate()?;
    Ok(match spec.kind {
        TopologyKind::Bilstm => {
            let (n_s, n_i, n_o, n_h) = (spec.n_s as u64, spec.n_i as u64, spec.n_o as u64, spec.hidden[0] as u64);
            2 * 4 * n_h * (n_i + n_h + 1) + 2 * n_s * n_h * n_o + n_o
        }
        _ => spec.dense_layers()?.iter().map(|&(m, n)| ((m + 1) * n) as u64).sum(),
    })
}
