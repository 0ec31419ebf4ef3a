use serde::{Deserialize, Serialize};

use crate::error::{config, Result};

/// Features per symbol: Re/Im of both polarizations.
pub const FEATURES_PER_SYMBOL: usize = 4;

/// Dense tanh network over the flattened (2N+1, 4) window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpArch {
    /// Symbols on each side of the centre, N.
    pub memory: usize,
    pub hidden: Vec<usize>,
    /// 2 for regression, M for classification.
    pub outputs: usize,
}

impl MlpArch {
    pub fn input_width(&self) -> usize {
        FEATURES_PER_SYMBOL * (2 * self.memory + 1)
    }

    /// Layer widths from input to output.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.input_width()];
        w.extend(&self.hidden);
        w.push(self.outputs);
        w
    }
}

/// Bidirectional LSTM over the window with a linear head on all hidden states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiLstmArch {
    pub memory: usize,
    pub hidden_units: usize,
    pub outputs: usize,
}

impl BiLstmArch {
    pub fn seq_len(&self) -> usize {
        2 * self.memory + 1
    }

    pub fn input_width(&self) -> usize {
        FEATURES_PER_SYMBOL * self.seq_len()
    }

    /// Width of the head input, 2 n_s n_h.
    pub fn head_inputs(&self) -> usize {
        2 * self.seq_len() * self.hidden_units
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelArch {
    Mlp(MlpArch),
    Bilstm(BiLstmArch),
}

impl ModelArch {
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelArch::Mlp(a) => {
                if a.hidden.is_empty() || a.hidden.iter().any(|&h| h == 0) {
                    return config("MLP needs at least one hidden layer, all sizes >= 1");
                }
                if a.outputs == 0 {
                    return config("outputs must be >= 1");
                }
            }
            ModelArch::Bilstm(a) => {
                if a.hidden_units == 0 || a.outputs == 0 {
                    return config("hidden units and outputs must be >= 1");
                }
            }
        }
        Ok(())
    }

    pub fn input_width(&self) -> usize {
        match self {
            ModelArch::Mlp(a) => a.input_width(),
            ModelArch::Bilstm(a) => a.input_width(),
        }
    }

    pub fn outputs(&self) -> usize {
        match self {
            ModelArch::Mlp(a) => a.outputs,
            ModelArch::Bilstm(a) => a.outputs,
        }
    }

    pub fn memory(&self) -> usize {
        match self {
            ModelArch::Mlp(a) => a.memory,
            ModelArch::Bilstm(a) => a.memory,
        }
    }
}
