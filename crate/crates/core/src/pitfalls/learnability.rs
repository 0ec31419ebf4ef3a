use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::awgn_b2b;
use crate::data::records::MaskedCentre;
use crate::data::{
    generate_symbols, BitSource, Polarization, QamConstellation, Records, Split, SplitFractions, SplitView,
    WindowedDataset,
};
use crate::error::{config, Result};
use crate::metrics::{ber_count, q_from_ber_saturating};
use crate::nn::model::target_symbols;
use crate::nn::{evaluate, train, LossKind, Model, ModelArch, TrainConfig, TrainTrace};

pub const DEFAULT_GAIN_THRESHOLD_DB: f64 = 0.3;

fn default_gain_threshold() -> f64 {
    DEFAULT_GAIN_THRESHOLD_DB
}

/// A back-to-back learnability experiment: AWGN at a fixed Q-factor, so the
/// only thing an equalizer can exploit is structure in the bit source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnabilityConfig {
    pub source: BitSource,
    pub constellation: QamConstellation,
    pub train_symbols: usize,
    pub val_symbols: usize,
    pub test_symbols: usize,
    pub memory: usize,
    pub target_q_db: f64,
    pub model: ModelArch,
    pub train: TrainConfig,
    pub noise_seed: u64,
    pub init_seed: u64,
    #[serde(default = "default_gain_threshold")]
    pub gain_threshold_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnabilityResult {
    /// Equalized test Q minus the un-equalized test Q.
    pub gain_db: f64,
    /// Equalized test Q minus the calibration target.
    pub gain_vs_target_db: f64,
    pub test_q_db: f64,
    pub baseline_q_db: f64,
    pub calibrated_q_db: f64,
    pub learned: bool,
    pub trace: TrainTrace,
}

/// Contiguous train/val/test record ranges of exactly the requested sizes.
pub(crate) fn exact_splits(train: usize, val: usize, test: usize) -> SplitFractions {
    let total = (train + val + test) as f64;
    SplitFractions {
        train: train as f64 / total,
        val: val as f64 / total,
        test: test as f64 / total,
    }
}

/// Counted Q of the raw centre symbol of each record, no equalization.
pub fn centre_symbol_q<R: Records + ?Sized>(records: &R, constellation: &QamConstellation) -> Result<f64> {
    let centre = records.input_width() / 8;
    let rx: Vec<Complex64> = (0..records.len())
        .map(|i| {
            let w = records.window(i);
            Complex64::new(w[4 * centre], w[4 * centre + 1])
        })
        .collect();
    let tx = target_symbols(records);
    Ok(q_from_ber_saturating(ber_count(&rx, &tx, constellation)?.ber))
}

/// Trains the equalizer on B2B data from the configured source and reports
/// how much it beats plain hard decisions on the held-out test range. On
/// AWGN no equalizer can beat the minimum-distance decision, so any gain
/// means the network predicted symbols from the generator's structure.
pub fn prbs_learnability_test(cfg: &LearnabilityConfig) -> Result<LearnabilityResult> {
    if cfg.train_symbols == 0 || cfg.val_symbols == 0 || cfg.test_symbols == 0 {
        return config("train, val and test sizes must all be >= 1");
    }
    if cfg.model.memory() != cfg.memory {
        return config("model memory differs from the window memory");
    }
    let n = cfg.train_symbols + cfg.val_symbols + cfg.test_symbols + 2 * cfg.memory;
    let tx = generate_symbols(&cfg.source, &cfg.constellation, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.noise_seed);
    let b2b = awgn_b2b(&tx, cfg.target_q_db, &cfg.constellation, &mut rng)?;
    let ds = WindowedDataset::new(
        &tx,
        &b2b.symbols,
        cfg.memory,
        Polarization::X,
        &cfg.constellation,
        exact_splits(cfg.train_symbols, cfg.val_symbols, cfg.test_symbols),
        cfg.train.seed,
    )?;
    let train_set = SplitView::new(&ds, Split::Train);
    let val_set = SplitView::new(&ds, Split::Val);
    let test_set = SplitView::new(&ds, Split::Test);
    let model = Model::new(cfg.model.clone(), cfg.init_seed)?;
    let out = train(&model, &train_set, &val_set, &cfg.constellation, &cfg.train)?;
    let test_q_db = evaluate(&out.best, &test_set, &cfg.constellation, cfg.train.loss)?.q_db;
    let baseline_q_db = centre_symbol_q(&test_set, &cfg.constellation)?;
    let gain_db = test_q_db - baseline_q_db;
    Ok(LearnabilityResult {
        gain_db,
        gain_vs_target_db: test_q_db - cfg.target_q_db,
        test_q_db,
        baseline_q_db,
        calibrated_q_db: b2b.calibrated_q_db,
        learned: gain_db > cfg.gain_threshold_db,
        trace: out.trace,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    /// Symbol error rate predicting the centre from its neighbours alone.
    pub ser: f64,
    /// Random-guess SER, 1 - 1/M.
    pub baseline_ser: f64,
    pub trace: TrainTrace,
}

impl ProbeResult {
    /// ser / baseline: near 1 for independent symbols, well below for
    /// predictable ones.
    pub fn ratio(&self) -> f64 {
        self.ser / self.baseline_ser
    }
}

/// Trains a classifier with the centre symbol masked out and measures how
/// well the neighbours alone predict it.
pub fn neighbor_only_probe<T: Records + ?Sized, V: Records + ?Sized>(
    train_set: &T,
    test_set: &V,
    constellation: &QamConstellation,
    model: &ModelArch,
    train_cfg: &TrainConfig,
    init_seed: u64,
) -> Result<ProbeResult> {
    if model.outputs() != constellation.order() {
        return config("the probe needs one output per constellation point");
    }
    let cfg = TrainConfig {
        loss: LossKind::CategoricalCel,
        ..train_cfg.clone()
    };
    let masked_train = MaskedCentre::new(train_set);
    let masked_test = MaskedCentre::new(test_set);
    let m = Model::new(model.clone(), init_seed)?;
    let out = train(&m, &masked_train, &masked_test, constellation, &cfg)?;
    let rx = out.best.equalize(&masked_test, constellation)?;
    let tx = target_symbols(&masked_test);
    let ser = ber_count(&rx, &tx, constellation)?.ser;
    Ok(ProbeResult {
        ser,
        baseline_ser: 1.0 - 1.0 / constellation.order() as f64,
        trace: out.trace,
    })
}
