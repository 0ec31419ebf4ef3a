use ndarray::{Array2, ArrayView2, Axis};
use rand::Rng;

use super::arch::MlpArch;
use super::params::{ParamKind, ParamSet};

fn names(arch: &MlpArch) -> Vec<String> {
    let mut v: Vec<String> = (0..arch.hidden.len()).map(|l| format!("dense{}", l + 1)).collect();
    v.push("out".into());
    v
}

pub fn layout(arch: &MlpArch) -> ParamSet {
    let widths = arch.widths();
    let names = names(arch);
    let mut shapes = Vec::new();
    for (l, name) in names.iter().enumerate() {
        shapes.push((format!("{name}.weight"), vec![widths[l + 1], widths[l]], ParamKind::Weight));
        shapes.push((format!("{name}.bias"), vec![widths[l + 1]], ParamKind::Bias));
    }
    let refs: Vec<(&str, &[usize], ParamKind)> =
        shapes.iter().map(|(n, s, k)| (n.as_str(), s.as_slice(), *k)).collect();
    ParamSet::with_layout(&refs)
}

/// Uniform fan-in initialisation for weights and biases.
pub fn init<R: Rng + ?Sized>(arch: &MlpArch, params: &mut ParamSet, rng: &mut R) {
    let widths = arch.widths();
    for l in 0..widths.len() - 1 {
        let bound = 1.0 / (widths[l] as f64).sqrt();
        params.fill_uniform(2 * l, bound, rng);
        params.fill_uniform(2 * l + 1, bound, rng);
    }
}

/// Layer activations kept for the backward pass; `acts[0]` is the input.
pub struct MlpCache {
    acts: Vec<Array2<f64>>,
}

fn affine(h: &ArrayView2<f64>, params: &ParamSet, layer: usize) -> Array2<f64> {
    let w = params.matrix(2 * layer);
    if h.nrows() == 1 {
        // single record: a matrix-vector product over contiguous weight rows
        let mut z = w.dot(&h.row(0));
        z += &params.vector(2 * layer + 1);
        return z.insert_axis(ndarray::Axis(0));
    }
    let mut z = h.dot(&w.t());
    z += &params.vector(2 * layer + 1);
    z
}

pub fn forward(arch: &MlpArch, params: &ParamSet, x: ArrayView2<f64>) -> (Array2<f64>, MlpCache) {
    let layers = arch.hidden.len();
    let mut acts = Vec::with_capacity(layers + 1);
    acts.push(x.to_owned());
    for l in 0..layers {
        let mut z = affine(&acts[l].view(), params, l);
        z.mapv_inplace(f64::tanh);
        acts.push(z);
    }
    let y = affine(&acts[layers].view(), params, layers);
    (y, MlpCache { acts })
}

/// Forward pass without keeping activations.
pub fn predict(arch: &MlpArch, params: &ParamSet, x: ArrayView2<f64>) -> Array2<f64> {
    let layers = arch.hidden.len();
    let mut h = affine(&x, params, 0);
    if layers == 0 {
        return h;
    }
    h.mapv_inplace(f64::tanh);
    for l in 1..layers {
        h = affine(&h.view(), params, l);
        h.mapv_inplace(f64::tanh);
    }
    affine(&h.view(), params, layers)
}

/// Accumulates dLoss/dparams into `grads` given dLoss/doutput.
pub fn backward(
    arch: &MlpArch,
    params: &ParamSet,
    cache: &MlpCache,
    dy: ArrayView2<f64>,
    grads: &mut ParamSet,
) {
    let layers = arch.hidden.len();
    let mut delta = dy.to_owned();
    for l in (0..=layers).rev() {
        let input = &cache.acts[l];
        grads.matrix_mut(2 * l).scaled_add(1.0, &delta.t().dot(input));
        grads.vector_mut(2 * l + 1).scaled_add(1.0, &delta.sum_axis(Axis(0)));
        if l == 0 {
            break;
        }
        let mut dh = delta.dot(&params.matrix(2 * l));
        dh.zip_mut_with(input, |d, a| *d *= 1.0 - a * a);
        delta = dh;
    }
}
