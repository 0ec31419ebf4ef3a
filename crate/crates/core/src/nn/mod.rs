//! Trainable equalizers: tanh MLP and bidirectional LSTM with a linear head,
//! analytic backpropagation, Adam and an early-stopping training loop.

pub mod adam;
pub mod arch;
pub mod bilstm;
pub mod checkpoint;
pub mod loss;
pub mod mlp;
pub mod model;
pub mod params;
pub mod stats;
pub mod train;

pub use adam::Adam;
pub use arch::{BiLstmArch, MlpArch, ModelArch, FEATURES_PER_SYMBOL};
pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointDescriptor};
pub use loss::{loss_cel, loss_l2, loss_mse, softmax, LossKind, Targets};
pub use model::{LossGrad, Model};
pub use params::{ParamEntry, ParamKind, ParamSet};
pub use stats::{grad_norm_last_layer, weight_stats, WeightStats};
pub use train::{evaluate, train, EarlyStopMetric, EpochRecord, Evaluation, TrainConfig, TrainOutcome, TrainTrace};
