use serde::{Deserialize, Serialize};

use super::params::{ParamKind, ParamSet};

/// L2 norm of the output layer's weight gradient.
pub fn grad_norm_last_layer(grads: &ParamSet) -> f64 {
    grads
        .last_weight()
        .map(|e| grads.data[e.range()].iter().map(|g| g * g).sum::<f64>().sqrt())
        .unwrap_or(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// bins + 1 edges, symmetric about zero.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    fn of(values: &[f64], bins: usize) -> Self {
        let bins = bins.max(1);
        let top = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let top = if top > 0.0 { top } else { 1.0 };
        let width = 2.0 * top / bins as f64;
        let edges = (0..=bins).map(|k| -top + k as f64 * width).collect();
        let mut counts = vec![0u64; bins];
        for v in values {
            let k = (((v + top) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        Self { edges, counts }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStats {
    pub name: String,
    pub count: usize,
    pub max_abs: f64,
    pub mean_abs: f64,
    pub histogram: Histogram,
    /// Weights with |w| above each threshold.
    pub outliers: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightStats {
    pub thresholds: Vec<f64>,
    pub layers: Vec<LayerStats>,
    /// `[threshold][output neuron]` outlier counts over the output layer's
    /// incoming weights.
    pub head_outliers_per_output: Vec<Vec<u64>>,
}

/// Per-layer histograms and outlier counts of the weight matrices.
pub fn weight_stats(params: &ParamSet, thresholds: &[f64], bins: usize) -> WeightStats {
    let count_above = |vals: &[f64], th: f64| vals.iter().filter(|v| v.abs() > th).count() as u64;
    let layers = params
        .entries
        .iter()
        .filter(|e| e.kind == ParamKind::Weight)
        .map(|e| {
            let vals = &params.data[e.range()];
            LayerStats {
                name: e.name.clone(),
                count: vals.len(),
                max_abs: vals.iter().fold(0.0f64, |m, v| m.max(v.abs())),
                mean_abs: vals.iter().map(|v| v.abs()).sum::<f64>() / vals.len().max(1) as f64,
                histogram: Histogram::of(vals, bins),
                outliers: thresholds.iter().map(|&t| count_above(vals, t)).collect(),
            }
        })
        .collect();
    let head_outliers_per_output = match params.last_weight() {
        Some(e) => {
            let cols = e.shape[1];
            let vals = &params.data[e.range()];
            thresholds
                .iter()
                .map(|&t| vals.chunks(cols).map(|row| count_above(row, t)).collect())
                .collect()
        }
        None => Vec::new(),
    };
    WeightStats {
        thresholds: thresholds.to_vec(),
        layers,
        head_outliers_per_output,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_layers() -> ParamSet {
        ParamSet::with_layout(&[
            ("a.weight", &[3, 4], ParamKind::Weight),
            ("a.bias", &[3], ParamKind::Bias),
            ("out.weight", &[2, 3], ParamKind::Weight),
            ("out.bias", &[2], ParamKind::Bias),
        ])
    }

    #[test]
    fn grad_norm_cases() {
        let mut g = ParamSet::with_layout(&[("out.weight", &[1, 2], ParamKind::Weight)]);
        assert_eq!(grad_norm_last_layer(&g), 0.0);
        g.data.copy_from_slice(&[3.0, 4.0]);
        assert_eq!(grad_norm_last_layer(&g), 5.0);
    }

    #[test]
    fn no_outliers_below_threshold() {
        let mut p = two_layers();
        p.data.iter_mut().enumerate().for_each(|(i, v)| *v = 0.5 * ((i as f64).sin()));
        let s = weight_stats(&p, &[1.0], 10);
        assert!(s.layers.iter().all(|l| l.outliers == vec![0]));
        assert_eq!(s.layers[0].histogram.counts.iter().sum::<u64>(), 12);
    }

    #[test]
    fn counts_planted_outliers() {
        let mut p = two_layers();
        let head = p.index("out.weight").unwrap();
        // three in neuron 0, one in neuron 1, one bias that must be ignored
        p.slice_mut(head).copy_from_slice(&[1.5, -1.5, 1.5, 0.1, 1.5, 0.0]);
        let bias = p.index("out.bias").unwrap();
        p.slice_mut(bias)[0] = 9.0;
        let s = weight_stats(&p, &[1.0, 2.0], 8);
        assert_eq!(s.layers[1].outliers, vec![4, 0]);
        assert_eq!(s.head_outliers_per_output, vec![vec![3, 1], vec![0, 0]]);
    }
}
