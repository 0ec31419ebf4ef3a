use ndarray::{s, Array2, Array3, ArrayView2, Axis};
use rand::Rng;

use super::arch::{BiLstmArch, FEATURES_PER_SYMBOL};
use super::params::{ParamKind, ParamSet};

// entry indices in the layout below
const W_IH: usize = 0;
const W_HH: usize = 1;
const BIAS: usize = 2;
const PER_DIR: usize = 3;
const HEAD_W: usize = 6;
const HEAD_B: usize = 7;

const DIRS: [&str; 2] = ["fwd", "bwd"];

pub fn layout(arch: &BiLstmArch) -> ParamSet {
    let nh = arch.hidden_units;
    let ni = FEATURES_PER_SYMBOL;
    let mut shapes = Vec::new();
    for d in DIRS {
        shapes.push((format!("{d}.w_ih"), vec![4 * nh, ni], ParamKind::Weight));
        shapes.push((format!("{d}.w_hh"), vec![4 * nh, nh], ParamKind::Weight));
        shapes.push((format!("{d}.bias"), vec![4 * nh], ParamKind::Bias));
    }
    shapes.push(("head.weight".into(), vec![arch.outputs, arch.head_inputs()], ParamKind::Weight));
    shapes.push(("head.bias".into(), vec![arch.outputs], ParamKind::Bias));
    let refs: Vec<(&str, &[usize], ParamKind)> =
        shapes.iter().map(|(n, s, k)| (n.as_str(), s.as_slice(), *k)).collect();
    ParamSet::with_layout(&refs)
}

/// U(-1/sqrt(n_h), 1/sqrt(n_h)) for the cells, forget-gate bias +1,
/// fan-in uniform for the head.
pub fn init<R: Rng + ?Sized>(arch: &BiLstmArch, params: &mut ParamSet, rng: &mut R) {
    let nh = arch.hidden_units;
    let bound = 1.0 / (nh as f64).sqrt();
    for d in 0..2 {
        for k in [W_IH, W_HH, BIAS] {
            params.fill_uniform(d * PER_DIR + k, bound, rng);
        }
        let b = params.slice_mut(d * PER_DIR + BIAS);
        for v in &mut b[nh..2 * nh] {
            *v += 1.0;
        }
    }
    let head_bound = 1.0 / (arch.head_inputs() as f64).sqrt();
    params.fill_uniform(HEAD_W, head_bound, rng);
    params.fill_uniform(HEAD_B, head_bound, rng);
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// Position in the window visited at step `s` of direction `d`.
fn position(d: usize, s: usize, n_s: usize) -> usize {
    if d == 0 {
        s
    } else {
        n_s - 1 - s
    }
}

struct DirCache {
    /// Activated gates (i, f, g, o) per step, each (B, 4 n_h).
    gates: Vec<Array2<f64>>,
    /// Cell state after each step.
    cells: Vec<Array2<f64>>,
    /// tanh of the cell state after each step.
    tanh_cells: Vec<Array2<f64>>,
}

pub struct BiLstmCache {
    x: Array2<f64>,
    head_in: Array2<f64>,
    dirs: Vec<DirCache>,
}

fn run(arch: &BiLstmArch, params: &ParamSet, x: ArrayView2<f64>, keep: bool) -> (Array2<f64>, Option<BiLstmCache>) {
    let b = x.nrows();
    let n_s = arch.seq_len();
    let nh = arch.hidden_units;
    let x = x.as_standard_layout().into_owned();
    let xs = x.view().into_shape_with_order((b * n_s, FEATURES_PER_SYMBOL)).expect("window layout");
    let mut head_in = Array2::<f64>::zeros((b, arch.head_inputs()));
    let mut dirs = Vec::with_capacity(2);
    for d in 0..2 {
        let base = d * PER_DIR;
        let xw = xs.dot(&params.matrix(base + W_IH).t());
        let xw = xw.into_shape_with_order((b, n_s, 4 * nh)).expect("gate layout");
        let w_hh = params.matrix(base + W_HH);
        let bias = params.vector(base + BIAS);
        let mut h = Array2::<f64>::zeros((b, nh));
        let mut c = Array2::<f64>::zeros((b, nh));
        let mut cache = DirCache {
            gates: Vec::with_capacity(if keep { n_s } else { 0 }),
            cells: Vec::new(),
            tanh_cells: Vec::new(),
        };
        for step in 0..n_s {
            let t = position(d, step, n_s);
            let mut a = h.dot(&w_hh.t());
            a += &xw.slice(s![.., t, ..]);
            a += &bias;
            let mut c_new = Array2::<f64>::zeros((b, nh));
            let mut tc = Array2::<f64>::zeros((b, nh));
            for r in 0..b {
                let mut row = a.row_mut(r);
                let row = row.as_slice_mut().expect("contiguous");
                for j in 0..nh {
                    let i = sigmoid(row[j]);
                    let f = sigmoid(row[nh + j]);
                    let g = row[2 * nh + j].tanh();
                    let o = sigmoid(row[3 * nh + j]);
                    row[j] = i;
                    row[nh + j] = f;
                    row[2 * nh + j] = g;
                    row[3 * nh + j] = o;
                    let cv = f * c[[r, j]] + i * g;
                    let tv = cv.tanh();
                    c_new[[r, j]] = cv;
                    tc[[r, j]] = tv;
                    h[[r, j]] = o * tv;
                }
            }
            let col = d * n_s * nh + t * nh;
            head_in.slice_mut(s![.., col..col + nh]).assign(&h);
            c = c_new;
            if keep {
                cache.gates.push(a);
                cache.cells.push(c.clone());
                cache.tanh_cells.push(tc);
            }
        }
        dirs.push(cache);
    }
    let mut y = head_in.dot(&params.matrix(HEAD_W).t());
    y += &params.vector(HEAD_B);
    let cache = keep.then(|| BiLstmCache { x, head_in, dirs });
    (y, cache)
}

pub fn forward(arch: &BiLstmArch, params: &ParamSet, x: ArrayView2<f64>) -> (Array2<f64>, BiLstmCache) {
    let (y, cache) = run(arch, params, x, true);
    (y, cache.expect("cache kept"))
}

pub fn predict(arch: &BiLstmArch, params: &ParamSet, x: ArrayView2<f64>) -> Array2<f64> {
    run(arch, params, x, false).0
}

/// The head input: hidden states, direction-major then time.
pub fn hidden_states(arch: &BiLstmArch, params: &ParamSet, x: ArrayView2<f64>) -> Array2<f64> {
    forward(arch, params, x).1.head_in
}

pub fn backward(
    arch: &BiLstmArch,
    params: &ParamSet,
    cache: &BiLstmCache,
    dy: ArrayView2<f64>,
    grads: &mut ParamSet,
) {
    let b = dy.nrows();
    let n_s = arch.seq_len();
    let nh = arch.hidden_units;
    grads.matrix_mut(HEAD_W).scaled_add(1.0, &dy.t().dot(&cache.head_in));
    grads.vector_mut(HEAD_B).scaled_add(1.0, &dy.sum_axis(Axis(0)));
    let d_head = dy.dot(&params.matrix(HEAD_W));
    let xs = cache
        .x
        .view()
        .into_shape_with_order((b * n_s, FEATURES_PER_SYMBOL))
        .expect("window layout");

    for d in 0..2 {
        let base = d * PER_DIR;
        let dc_cache = &cache.dirs[d];
        let w_hh = params.matrix(base + W_HH);
        let mut d_pre = Array3::<f64>::zeros((b, n_s, 4 * nh));
        let mut dw_hh = Array2::<f64>::zeros((4 * nh, nh));
        let mut dh_next = Array2::<f64>::zeros((b, nh));
        let mut dc_next = Array2::<f64>::zeros((b, nh));
        for step in (0..n_s).rev() {
            let t = position(d, step, n_s);
            let col = d * n_s * nh + t * nh;
            let mut dh = d_head.slice(s![.., col..col + nh]).to_owned();
            dh += &dh_next;
            let gates = &dc_cache.gates[step];
            let tc = &dc_cache.tanh_cells[step];
            let mut da = Array2::<f64>::zeros((b, 4 * nh));
            for r in 0..b {
                for j in 0..nh {
                    let i = gates[[r, j]];
                    let f = gates[[r, nh + j]];
                    let g = gates[[r, 2 * nh + j]];
                    let o = gates[[r, 3 * nh + j]];
                    let c_prev = if step == 0 { 0.0 } else { dc_cache.cells[step - 1][[r, j]] };
                    let t_c = tc[[r, j]];
                    let dhv = dh[[r, j]];
                    let d_o = dhv * t_c;
                    let dc = dhv * o * (1.0 - t_c * t_c) + dc_next[[r, j]];
                    da[[r, j]] = dc * g * i * (1.0 - i);
                    da[[r, nh + j]] = dc * c_prev * f * (1.0 - f);
                    da[[r, 2 * nh + j]] = dc * i * (1.0 - g * g);
                    da[[r, 3 * nh + j]] = d_o * o * (1.0 - o);
                    dc_next[[r, j]] = dc * f;
                }
            }
            if step > 0 {
                let h_prev = cache.head_in.slice(s![
                    ..,
                    d * n_s * nh + position(d, step - 1, n_s) * nh
                        ..d * n_s * nh + position(d, step - 1, n_s) * nh + nh
                ]);
                dw_hh += &da.t().dot(&h_prev);
            }
            dh_next = da.dot(&w_hh);
            d_pre.slice_mut(s![.., t, ..]).assign(&da);
        }
        let d_flat = d_pre.into_shape_with_order((b * n_s, 4 * nh)).expect("gate layout");
        grads.matrix_mut(base + W_IH).scaled_add(1.0, &d_flat.t().dot(&xs));
        grads.matrix_mut(base + W_HH).scaled_add(1.0, &dw_hh);
        grads.vector_mut(base + BIAS).scaled_add(1.0, &d_flat.sum_axis(Axis(0)));
    }
}

/// Standard LSTM parameter count: both directions plus the flattened head.
pub fn parameter_count(arch: &BiLstmArch) -> usize {
    let nh = arch.hidden_units;
    2 * 4 * (nh * (FEATURES_PER_SYMBOL + nh) + nh) + arch.head_inputs() * arch.outputs + arch.outputs
}
