use serde::{Deserialize, Serialize};

use super::rmps::{rmps, TopologyKind, TopologySpec};
use crate::error::{config, Result};

/// Bit widths and unstructured sparsity of one layer (or of all layers).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantSpec {
    pub b_w: u32,
    pub b_i: u32,
    /// Fraction of connections pruned, in [0, 1).
    #[serde(default)]
    pub sparsity: f64,
}

impl QuantSpec {
    pub fn new(b_w: u32, b_i: u32, sparsity: f64) -> Result<Self> {
        let q = Self { b_w, b_i, sparsity };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.b_w == 0 || self.b_i == 0 {
            return config("bit widths must be >= 1");
        }
        if !(0.0..1.0).contains(&self.sparsity) {
            return config(format!("sparsity must be in [0, 1), got {}", self.sparsity));
        }
        Ok(())
    }

    /// b_w b_i (1 - sparsity), the per-connection multiplier cost.
    fn mult_bits(&self) -> f64 {
        self.b_w as f64 * self.b_i as f64 * (1.0 - self.sparsity)
    }
}

/// ceil(log2 m), with ceil(log2 1) = 0.
pub fn ceil_log2(m: usize) -> u64 {
    assert!(m >= 1, "log2 of zero");
    (usize::BITS - (m - 1).leading_zeros()) as u64
}

/// BoPs of a dense layer with n neurons and m inputs, rounded to the
/// nearest integer.
pub fn bops_dense(n: usize, m: usize, quant: &QuantSpec) -> Result<u64> {
    quant.validate()?;
    if n == 0 || m == 0 {
        return config("layer sizes must be >= 1");
    }
    let nm = (n * m) as f64;
    let add = (quant.b_w + quant.b_i) as f64 + ceil_log2(m) as f64;
    Ok((nm * (quant.mult_bits() + add)).round() as u64)
}

/// BoPs of a 3-hidden-layer MLP with one quantization and sparsity for
/// every layer, written through its RMpS plus the accumulator cost.
pub fn bops_mlp3(spec: &TopologySpec, quant: &QuantSpec) -> Result<u64> {
    quant.validate()?;
    if spec.kind != TopologyKind::Mlp3 {
        return config(format!("bops_mlp3 needs an mlp3 topology, got {:?}", spec.kind));
    }
    let c = rmps(spec)? as f64;
    let acc: u64 = spec
        .dense_layers()?
        .iter()
        .map(|&(m, n)| (m * n) as u64 * ceil_log2(m))
        .sum();
    let per = quant.mult_bits() + (quant.b_w + quant.b_i) as f64;
    Ok((c * per).round() as u64 + acc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerBops {
    pub inputs: usize,
    pub neurons: usize,
    pub quant: QuantSpec,
    pub bops: u64,
}

/// Per-layer BoPs of any MLP. `quant` holds either one entry for all
/// layers or one per dense layer, which covers non-uniform pruning and
/// mixed precision.
pub fn bops_layers(spec: &TopologySpec, quant: &[QuantSpec]) -> Result<Vec<LayerBops>> {
    let layers = spec.dense_layers()?;
    if quant.len() != 1 && quant.len() != layers.len() {
        return config(format!(
            "expected 1 or {} quantization entries, got {}",
            layers.len(),
            quant.len()
        ));
    }
    layers
        .iter()
        .enumerate()
        .map(|(i, &(m, n))| {
            let q = quant[if quant.len() == 1 { 0 } else { i }];
            Ok(LayerBops {
                inputs: m,
                neurons: n,
                quant: q,
                bops: bops_dense(n, m, &q)?,
            })
        })
        .collect()
}

/// Inputs quantized to no more than log2(sqrt(M)) bits per axis cannot
/// resolve the constellation, let alone the noise around it.
pub fn quantization_floor_warning(b_i: u32, constellation_order: usize) -> Option<String> {
    let floor = (constellation_order as f64).sqrt().log2();
    (b_i as f64 <= floor).then(|| {
        format!("input resolution {b_i} bits is at or below log2(sqrt(M)) = {floor:.1} bits for M = {constellation_order}")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(b_w: u32, b_i: u32, s: f64) -> QuantSpec {
        QuantSpec::new(b_w, b_i, s).unwrap()
    }

    #[test]
    fn dense_examples() {
        assert_eq!(bops_dense(1, 1, &q(1, 1, 0.0)).unwrap(), 3);
        assert_eq!(bops_dense(2, 4, &q(8, 8, 0.0)).unwrap(), 656);
        assert_eq!(bops_dense(2, 4, &q(8, 8, 0.5)).unwrap(), 400);
    }

    #[test]
    fn full_sparsity_rejected() {
        assert!(QuantSpec::new(8, 8, 1.0).is_err());
        let bad = QuantSpec { b_w: 8, b_i: 8, sparsity: 1.0 };
        assert!(bops_dense(2, 2, &bad).is_err());
        assert!(QuantSpec::new(0, 8, 0.0).is_err());
    }

    #[test]
    fn log2_convention() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(284), 9);
        assert_eq!(ceil_log2(1024), 10);
    }

    #[test]
    fn all_ones_mlp3() {
        let spec = TopologySpec {
            kind: TopologyKind::Mlp3,
            n_s: 1,
            n_i: 1,
            n_o: 1,
            hidden: vec![1, 1, 1],
        };
        assert_eq!(rmps(&spec).unwrap(), 4);
        // 4 layers of 1 x 1: 4 * (1 + 1 + 1) + 0
        assert_eq!(bops_mlp3(&spec, &q(1, 1, 0.0)).unwrap(), 12);
    }

    #[test]
    fn mlp3_only() {
        let spec = TopologySpec::mlp(2, &[4, 4]).unwrap();
        assert!(bops_mlp3(&spec, &q(8, 8, 0.0)).is_err());
    }

    #[test]
    fn layer_count_checked() {
        let spec = TopologySpec::mlp(2, &[4, 4]).unwrap();
        assert!(bops_layers(&spec, &[q(8, 8, 0.0); 2]).is_err());
        assert_eq!(bops_layers(&spec, &[q(8, 8, 0.0); 3]).unwrap().len(), 3);
    }

    #[test]
    fn floor_warning() {
        assert!(quantization_floor_warning(3, 64).is_some());
        assert!(quantization_floor_warning(4, 64).is_none());
        assert!(quantization_floor_warning(2, 16).is_some());
    }
}
