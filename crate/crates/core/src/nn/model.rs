use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::arch::ModelArch;
use super::loss::{add_l2_grad, cel_grad, loss_cel, loss_l2, loss_mse, mse_grad, LossKind, Targets};
use super::params::ParamSet;
use super::{bilstm, mlp};
use crate::data::{QamConstellation, Records};
use crate::error::{Error, Result};

/// Rows evaluated per forward call when predicting whole datasets.
const EVAL_CHUNK: usize = 4096;

/// An equalizer: architecture plus parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub arch: ModelArch,
    pub params: ParamSet,
}

/// Loss value and parameter gradients for one batch.
pub struct LossGrad {
    /// Data loss plus the L2 term.
    pub loss: f64,
    /// Data loss alone.
    pub base: f64,
    pub grads: ParamSet,
}

impl Model {
    pub fn layout(arch: &ModelArch) -> ParamSet {
        match arch {
            ModelArch::Mlp(a) => mlp::layout(a),
            ModelArch::Bilstm(a) => bilstm::layout(a),
        }
    }

    /// All-zero parameters.
    pub fn zeros(arch: ModelArch) -> Result<Self> {
        arch.validate()?;
        let params = Self::layout(&arch);
        Ok(Self { arch, params })
    }

    /// Randomly initialised from `seed`.
    pub fn new(arch: ModelArch, seed: u64) -> Result<Self> {
        let mut m = Self::zeros(arch)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match &m.arch {
            ModelArch::Mlp(a) => mlp::init(a, &mut m.params, &mut rng),
            ModelArch::Bilstm(a) => bilstm::init(a, &mut m.params, &mut rng),
        }
        Ok(m)
    }

    pub fn parameter_count(&self) -> usize {
        self.params.len()
    }

    fn check_input(&self, x: &ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.arch.input_width() {
            return Err(Error::Shape {
                expected: format!("(B, {})", self.arch.input_width()),
                got: format!("{:?}", x.dim()),
            });
        }
        Ok(())
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(&x)?;
        Ok(match &self.arch {
            ModelArch::Mlp(a) => mlp::predict(a, &self.params, x),
            ModelArch::Bilstm(a) => bilstm::predict(a, &self.params, x),
        })
    }

    /// Forward and backward pass on one batch.
    pub fn loss_and_grad(
        &self,
        x: ArrayView2<f64>,
        targets: Targets<'_>,
        loss: LossKind,
        l2_lambda: f64,
    ) -> Result<LossGrad> {
        self.check_input(&x)?;
        let outputs = self.arch.outputs();
        match (loss, &targets) {
            (LossKind::Mse, Targets::Points(t)) if t.ncols() == outputs && t.nrows() == x.nrows() => {}
            (LossKind::CategoricalCel, Targets::Classes(c))
                if c.len() == x.nrows() && c.iter().all(|&k| k < outputs) => {}
            _ => {
                return Err(Error::Shape {
                    expected: format!("{loss:?} targets for {} outputs", outputs),
                    got: "incompatible targets".into(),
                })
            }
        }
        let mut grads = self.params.zeros_like();
        let grad_out = |y: &Array2<f64>| -> (f64, Array2<f64>) {
            match targets {
                Targets::Points(t) => (loss_mse(y.view(), t), mse_grad(y.view(), t)),
                Targets::Classes(c) => (loss_cel(y.view(), c), cel_grad(y.view(), c)),
            }
        };
        let base = match &self.arch {
            ModelArch::Mlp(a) => {
                let (y, cache) = mlp::forward(a, &self.params, x);
                let (l, dy) = grad_out(&y);
                mlp::backward(a, &self.params, &cache, dy.view(), &mut grads);
                l
            }
            ModelArch::Bilstm(a) => {
                let (y, cache) = bilstm::forward(a, &self.params, x);
                let (l, dy) = grad_out(&y);
                bilstm::backward(a, &self.params, &cache, dy.view(), &mut grads);
                l
            }
        };
        add_l2_grad(&self.params, l2_lambda, &mut grads);
        Ok(LossGrad {
            loss: loss_l2(base, &self.params, l2_lambda),
            base,
            grads,
        })
    }

    /// Raw outputs for every record, computed in chunks.
    pub fn predict_records<R: Records + ?Sized>(&self, records: &R) -> Result<Array2<f64>> {
        let n = records.len();
        let mut out = Array2::<f64>::zeros((n, self.arch.outputs()));
        let idx: Vec<usize> = (0..n).collect();
        for chunk in idx.chunks(EVAL_CHUNK) {
            let x = gather_inputs(records, chunk);
            let y = self.predict(x.view())?;
            out.slice_mut(ndarray::s![chunk[0]..chunk[0] + chunk.len(), ..]).assign(&y);
        }
        Ok(out)
    }

    /// Equalized symbols: the output pair for regression models, the
    /// arg-max constellation point for classifiers.
    pub fn equalize<R: Records + ?Sized>(
        &self,
        records: &R,
        constellation: &QamConstellation,
    ) -> Result<Vec<Complex64>> {
        let y = self.predict_records(records)?;
        Ok(outputs_to_symbols(&y, constellation))
    }
}

pub fn outputs_to_symbols(y: &Array2<f64>, constellation: &QamConstellation) -> Vec<Complex64> {
    if y.ncols() == 2 {
        y.rows().into_iter().map(|r| Complex64::new(r[0], r[1])).collect()
    } else {
        y.rows()
            .into_iter()
            .map(|r| {
                let best = r
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
                constellation.point(best.0)
            })
            .collect()
    }
}

/// Stack the windows of the given records into a (B, width) matrix.
pub fn gather_inputs<R: Records + ?Sized>(records: &R, idx: &[usize]) -> Array2<f64> {
    let w = records.input_width();
    let mut x = Array2::<f64>::zeros((idx.len(), w));
    for (row, &i) in x.rows_mut().into_iter().zip(idx) {
        let mut row = row;
        row.as_slice_mut().expect("contiguous").copy_from_slice(records.window(i));
    }
    x
}

pub fn gather_points<R: Records + ?Sized>(records: &R, idx: &[usize]) -> Array2<f64> {
    let mut t = Array2::<f64>::zeros((idx.len(), 2));
    for (k, &i) in idx.iter().enumerate() {
        let p = records.target(i);
        t[[k, 0]] = p[0];
        t[[k, 1]] = p[1];
    }
    t
}

pub fn gather_classes<R: Records + ?Sized>(records: &R, idx: &[usize]) -> Vec<usize> {
    idx.iter().map(|&i| records.class(i)).collect()
}

/// Ground-truth symbols of all records.
pub fn target_symbols<R: Records + ?Sized>(records: &R) -> Vec<Complex64> {
    (0..records.len())
        .map(|i| {
            let t = records.target(i);
            Complex64::new(t[0], t[1])
        })
        .collect()
}
