//! Inference cost accounting: real multiplications per recovered symbol
//! (RMpS), bit operations (BoPs) under quantization and pruning, and a
//! sequential latency benchmark.

mod bops;
mod latency;
mod rmps;

pub use bops::{bops_dense, bops_layers, bops_mlp3, quantization_floor_warning, ceil_log2, LayerBops, QuantSpec};
pub use latency::{latency_bench, LatencyReport, MachineDescriptor};
pub use rmps::{parameter_count, rmps, TopologyKind, TopologySpec};

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub topology: TopologySpec,
    pub rmps: u64,
    /// Trainable parameters including biases.
    pub params: u64,
    /// Per dense layer, MLPs only.
    pub bops: Option<Vec<LayerBops>>,
    pub bops_total: Option<u64>,
    pub latency: Option<LatencyReport>,
    pub warnings: Vec<String>,
}

impl ComplexityReport {
    /// Closed-form part of the report. `quant` adds the BoPs breakdown for
    /// MLPs: one entry applies to every layer, otherwise one per layer.
    /// `constellation_order` enables the input-resolution warning.
    pub fn new(topology: &TopologySpec, quant: &[QuantSpec], constellation_order: Option<usize>) -> Result<Self> {
        let rmps = rmps(topology)?;
        let params = parameter_count(topology)?;
        let mut warnings = Vec::new();
        let (bops, bops_total) = if quant.is_empty() || topology.kind == TopologyKind::Bilstm {
            if !quant.is_empty() {
                warnings.push("BoPs are only defined here for dense layers; skipped for biLSTM".to_string());
            }
            (None, None)
        } else {
            let layers = bops_layers(topology, quant)?;
            let total = layers.iter().map(|l| l.bops).sum();
            (Some(layers), Some(total))
        };
        if let Some(m) = constellation_order {
            for q in quant {
                if let Some(w) = quantization_floor_warning(q.b_i, m) {
                    if !warnings.contains(&w) {
                        warnings.push(w);
                    }
                }
            }
        }
        Ok(Self {
            topology: topology.clone(),
            rmps,
            params,
            bops,
            bops_total,
            latency: None,
            warnings,
        })
    }
}
