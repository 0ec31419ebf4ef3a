use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::loss::{loss_cel, loss_mse, LossKind, Targets};
use super::model::{gather_classes, gather_inputs, gather_points, outputs_to_symbols, target_symbols, Model};
use super::stats::{grad_norm_last_layer, weight_stats, WeightStats};
use crate::data::{EpochPlan, QamConstellation, Records};
use crate::error::{config, Error, Result};
use crate::metrics::{ber_count, evm_rms, mi_lower_bound, q_from_ber_saturating, serde_float, MiOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EarlyStopMetric {
    #[default]
    ValQ,
    ValLoss,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub loss: LossKind,
    #[serde(default)]
    pub l2_lambda: f64,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub max_epochs: usize,
    #[serde(default)]
    pub early_stop_metric: EarlyStopMetric,
    pub patience: usize,
    /// Seeds the per-epoch shuffle.
    pub seed: u64,
    /// Visit only this many randomly drawn training records per epoch.
    #[serde(default)]
    pub epoch_sample: Option<usize>,
    /// Also report Q on the first this-many training records each epoch.
    #[serde(default)]
    pub train_eval_records: Option<usize>,
    /// Keep a weight-statistics snapshot every this-many epochs.
    #[serde(default)]
    pub stats_every: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            loss: LossKind::Mse,
            l2_lambda: 0.0,
            batch_size: 2048,
            learning_rate: 1e-3,
            max_epochs: 1000,
            early_stop_metric: EarlyStopMetric::ValQ,
            patience: 100,
            seed: 0,
            epoch_sample: None,
            train_eval_records: None,
            stats_every: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return config("batch_size must be >= 1");
        }
        // zero freezes the parameters, which is occasionally useful
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return config("learning_rate must be finite and >= 0");
        }
        if !(self.l2_lambda >= 0.0) {
            return config("l2_lambda must be >= 0");
        }
        if self.max_epochs == 0 {
            return config("max_epochs must be >= 1");
        }
        Ok(())
    }
}

/// Quality of a model on a record set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub loss: f64,
    pub ber: f64,
    #[serde(with = "serde_float")]
    pub q_db: f64,
    pub evm: f64,
    #[serde(with = "serde_float")]
    pub mi: f64,
}

pub fn evaluate<R: Records + ?Sized>(
    model: &Model,
    records: &R,
    constellation: &QamConstellation,
    loss: LossKind,
) -> Result<Evaluation> {
    if records.is_empty() {
        return Err(Error::Empty("evaluation records"));
    }
    let y = model.predict_records(records)?;
    evaluate_outputs(&y, records, constellation, loss)
}

fn evaluate_outputs<R: Records + ?Sized>(
    y: &Array2<f64>,
    records: &R,
    constellation: &QamConstellation,
    loss: LossKind,
) -> Result<Evaluation> {
    let all: Vec<usize> = (0..records.len()).collect();
    let loss_value = match loss {
        LossKind::Mse => loss_mse(y.view(), gather_points(records, &all).view()),
        LossKind::CategoricalCel => {
            if y.ncols() != constellation.order() {
                return config("classifier outputs differ from the constellation order");
            }
            loss_cel(y.view(), &gather_classes(records, &all))
        }
    };
    let rx = outputs_to_symbols(y, constellation);
    let tx = target_symbols(records);
    let ber = ber_count(&rx, &tx, constellation)?.ber;
    let mi_opts = MiOptions {
        min_per_point: 2,
        ..MiOptions::default()
    };
    Ok(Evaluation {
        loss: loss_value,
        ber,
        q_db: q_from_ber_saturating(ber),
        evm: evm_rms(&rx, &tx)?,
        mi: mi_lower_bound(&rx, &tx, constellation, &mi_opts).unwrap_or(f64::NAN),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    #[serde(with = "serde_float")]
    pub val_q_db: f64,
    #[serde(with = "serde_float")]
    pub val_mi: f64,
    pub val_evm: f64,
    pub val_ber: f64,
    /// Mean over the epoch's mini-batches.
    pub grad_norm: f64,
    #[serde(default, with = "serde_float::option")]
    pub train_q_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TrainTrace {
    pub records: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub stopped_early: bool,
    pub snapshots: Vec<(usize, WeightStats)>,
}

fn csv_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl TrainTrace {
    pub const CSV_HEADER: &'static str =
        "epoch,train_loss,val_q_db,val_mi,val_evm,grad_norm,val_loss,val_ber,train_q_db";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let cols = [
                r.epoch.to_string(),
                csv_float(r.train_loss),
                csv_float(r.val_q_db),
                csv_float(r.val_mi),
                csv_float(r.val_evm),
                csv_float(r.grad_norm),
                csv_float(r.val_loss),
                csv_float(r.val_ber),
                r.train_q_db.map(csv_float).unwrap_or_default(),
            ];
            out.push_str(&cols.join(","));
            out.push('\n');
        }
        out
    }

    pub fn best(&self) -> Option<&EpochRecord> {
        self.records.iter().find(|r| r.epoch == self.best_epoch)
    }
}

pub struct TrainOutcome {
    /// Parameters from the best epoch under the early-stop metric.
    pub best: Model,
    /// Parameters after the last epoch.
    pub last: Model,
    pub trace: TrainTrace,
}

fn improves(metric: EarlyStopMetric, rec: &EpochRecord, best: Option<&EpochRecord>) -> bool {
    let Some(b) = best else { return true };
    match metric {
        EarlyStopMetric::ValQ => rec.val_q_db > b.val_q_db,
        EarlyStopMetric::ValLoss => rec.val_loss < b.val_loss,
    }
}

/// Mini-batch Adam training with per-epoch validation and early stopping.
pub fn train<T: Records + ?Sized, V: Records + ?Sized>(
    model: &Model,
    train_set: &T,
    val_set: &V,
    constellation: &QamConstellation,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(Error::Empty("training records"));
    }
    if val_set.is_empty() {
        return Err(Error::Empty("validation records"));
    }
    if train_set.input_width() != model.arch.input_width() {
        return Err(Error::Shape {
            expected: format!("input width {}", model.arch.input_width()),
            got: train_set.input_width().to_string(),
        });
    }
    if cfg.loss == LossKind::CategoricalCel && model.arch.outputs() != constellation.order() {
        return config(format!(
            "classifier needs {} outputs, has {}",
            constellation.order(),
            model.arch.outputs()
        ));
    }
    if cfg.loss == LossKind::Mse && model.arch.outputs() != 2 {
        return config("regression models need 2 outputs");
    }
    let plan = match cfg.epoch_sample {
        Some(count) => EpochPlan::Subsample { count, seed: cfg.seed },
        None => EpochPlan::Shuffle { seed: cfg.seed },
    };
    let mut current = model.clone();
    let mut adam = Adam::new(current.params.len(), cfg.learning_rate);
    let mut trace = TrainTrace::default();
    let mut best = current.clone();
    let mut since_best = 0usize;
    let train_probe: Option<Vec<usize>> = cfg
        .train_eval_records
        .map(|k| (0..k.min(train_set.len())).collect());

    for epoch in 0..cfg.max_epochs {
        let order = plan.indices(epoch, train_set.len());
        let (mut loss_sum, mut norm_sum, mut batches) = (0.0, 0.0, 0usize);
        for chunk in order.chunks(cfg.batch_size) {
            let x = gather_inputs(train_set, chunk);
            let points;
            let classes;
            let targets = match cfg.loss {
                LossKind::Mse => {
                    points = gather_points(train_set, chunk);
                    Targets::Points(points.view())
                }
                LossKind::CategoricalCel => {
                    classes = gather_classes(train_set, chunk);
                    Targets::Classes(&classes)
                }
            };
            let lg = current.loss_and_grad(x.view(), targets, cfg.loss, cfg.l2_lambda)?;
            if !lg.loss.is_finite() {
                return Err(Error::Diverged { epoch, loss: lg.loss });
            }
            loss_sum += lg.loss * chunk.len() as f64;
            norm_sum += grad_norm_last_layer(&lg.grads);
            batches += 1;
            adam.step(&mut current.params.data, &lg.grads.data);
        }
        let val = evaluate(&current, val_set, constellation, cfg.loss)?;
        let train_q_db = match &train_probe {
            Some(idx) => {
                let x = gather_inputs(train_set, idx);
                let y = current.predict(x.view())?;
                let rx = outputs_to_symbols(&y, constellation);
                let tx: Vec<_> = idx
                    .iter()
                    .map(|&i| {
                        let t = train_set.target(i);
                        num_complex::Complex64::new(t[0], t[1])
                    })
                    .collect();
                Some(q_from_ber_saturating(ber_count(&rx, &tx, constellation)?.ber))
            }
            None => None,
        };
        let rec = EpochRecord {
            epoch,
            train_loss: loss_sum / order.len() as f64,
            val_loss: val.loss,
            val_q_db: val.q_db,
            val_mi: val.mi,
            val_evm: val.evm,
            val_ber: val.ber,
            grad_norm: norm_sum / batches as f64,
            train_q_db,
        };
        if let Some(k) = cfg.stats_every {
            if k > 0 && epoch % k == 0 {
                trace.snapshots.push((epoch, weight_stats(&current.params, &[1.0], 32)));
            }
        }
        if improves(cfg.early_stop_metric, &rec, trace.best()) {
            trace.best_epoch = epoch;
            best = current.clone();
            since_best = 0;
        } else {
            since_best += 1;
        }
        trace.records.push(rec);
        if since_best >= cfg.patience.max(1) && epoch + 1 < cfg.max_epochs {
            trace.stopped_early = true;
            break;
        }
    }
    Ok(TrainOutcome {
        best,
        last: current,
        trace,
    })
}
