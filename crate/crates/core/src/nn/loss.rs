use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::params::{ParamKind, ParamSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// Mean squared Euclidean error on (Re, Im) targets.
    #[default]
    Mse,
    /// Softmax + categorical cross-entropy on one-hot class labels.
    CategoricalCel,
}

/// Supervision for one batch.
#[derive(Debug, Clone, Copy)]
pub enum Targets<'a> {
    Points(ArrayView2<'a, f64>),
    Classes(&'a [usize]),
}

/// Mean over records of |pred - target|^2.
pub fn loss_mse(pred: ArrayView2<f64>, target: ArrayView2<f64>) -> f64 {
    let b = pred.nrows().max(1) as f64;
    pred.iter().zip(target.iter()).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / b
}

pub fn mse_grad(pred: ArrayView2<f64>, target: ArrayView2<f64>) -> Array2<f64> {
    let b = pred.nrows().max(1) as f64;
    (&pred - &target) * (2.0 / b)
}

/// Row-wise softmax, max-shifted.
pub fn softmax(logits: ArrayView2<f64>) -> Array2<f64> {
    let mut out = logits.to_owned();
    for mut row in out.rows_mut() {
        let top = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - top).exp());
        let s = row.sum();
        row.mapv_inplace(|v| v / s);
    }
    out
}

/// Mean negative log-probability of the true class, in nats.
pub fn loss_cel(logits: ArrayView2<f64>, classes: &[usize]) -> f64 {
    let b = logits.nrows().max(1) as f64;
    let mut acc = 0.0;
    for (row, &c) in logits.rows().into_iter().zip(classes) {
        let top = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = top + row.iter().map(|v| (v - top).exp()).sum::<f64>().ln();
        acc += lse - row[c];
    }
    acc / b
}

pub fn cel_grad(logits: ArrayView2<f64>, classes: &[usize]) -> Array2<f64> {
    let b = logits.nrows().max(1) as f64;
    let mut g = softmax(logits);
    for (mut row, &c) in g.rows_mut().into_iter().zip(classes) {
        row[c] -= 1.0;
    }
    g / b
}

/// Sum of squared weights; biases are not penalised.
pub fn weight_sq_sum(params: &ParamSet) -> f64 {
    params
        .entries
        .iter()
        .filter(|e| e.kind == ParamKind::Weight)
        .flat_map(|e| params.data[e.range()].iter())
        .map(|w| w * w)
        .sum()
}

pub fn loss_l2(base: f64, params: &ParamSet, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return base;
    }
    base + lambda * weight_sq_sum(params)
}

/// Adds 2 lambda w to the weight gradients.
pub fn add_l2_grad(params: &ParamSet, lambda: f64, grads: &mut ParamSet) {
    if lambda == 0.0 {
        return;
    }
    for e in params.entries.iter().filter(|e| e.kind == ParamKind::Weight) {
        for (g, w) in grads.data[e.range()].iter_mut().zip(&params.data[e.range()]) {
            *g += 2.0 * lambda * w;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn mse_zero_at_target() {
        let a = array![[1.0, -2.0], [0.5, 0.5]];
        assert_eq!(loss_mse(a.view(), a.view()), 0.0);
        assert!(mse_grad(a.view(), a.view()).iter().all(|g| *g == 0.0));
        let b = array![[0.0, -2.0], [0.5, 1.5]];
        assert_eq!(loss_mse(a.view(), b.view()), 1.0);
    }

    #[test]
    fn uniform_logits_give_ln_m() {
        let l = Array2::<f64>::from_elem((3, 16), 0.3);
        assert!((loss_cel(l.view(), &[0, 5, 15]) - 16f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let l = array![[1000.0, -3.0, 2.0], [0.0, 0.0, 1e-3]];
        for row in softmax(l.view()).rows() {
            assert!((row.sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn l2_excludes_biases() {
        let mut p = ParamSet::with_layout(&[
            ("w", &[1, 2], ParamKind::Weight),
            ("b", &[1], ParamKind::Bias),
        ]);
        p.data.copy_from_slice(&[1.0, 2.0, 100.0]);
        assert_eq!(loss_l2(3.0, &p, 0.0), 3.0);
        assert_eq!(loss_l2(3.0, &p, 0.5), 3.0 + 2.5);
        let mut g = p.zeros_like();
        add_l2_grad(&p, 0.5, &mut g);
        assert_eq!(g.data, vec![1.0, 2.0, 0.0]);
    }
}
