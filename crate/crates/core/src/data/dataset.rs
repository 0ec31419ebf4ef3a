//! Sliding-window datasets in the (B, 2N+1, 4) equalizer input layout.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::qam::QamConstellation;
use crate::error::{config, Error, Result};
use crate::signal::DualPol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Polarization {
    #[default]
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

/// Fractions of the window range assigned, in order, to train/val/test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 1.0,
            val: 0.0,
            test: 0.0,
        }
    }
}

/// Contiguous window-index ranges per split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitRanges {
    pub train: std::ops::Range<usize>,
    pub val: std::ops::Range<usize>,
    pub test: std::ops::Range<usize>,
}

impl SplitRanges {
    pub fn get(&self, split: Split) -> std::ops::Range<usize> {
        match split {
            Split::Train => self.train.clone(),
            Split::Val => self.val.clone(),
            Split::Test => self.test.clone(),
        }
    }
}

/// Windowed view over one aligned TX/RX trace.
///
/// Windows are not materialised: record `i` is the slice of the RX feature
/// matrix covering symbols `i ..= i + 2N`, and its target is TX symbol `i + N`.
/// Edge symbols without a full neighbourhood are dropped, so a trace of L
/// symbols yields L - 2N records.
#[derive(Debug, Clone)]
pub struct WindowedDataset {
    memory: usize,
    features: Vec<f64>,
    targets: Vec<[f64; 2]>,
    classes: Vec<usize>,
    splits: SplitRanges,
    shuffle_seed: u64,
}

impl WindowedDataset {
    pub fn new(
        tx: &DualPol,
        rx: &DualPol,
        memory: usize,
        pol: Polarization,
        constellation: &QamConstellation,
        splits: SplitFractions,
        shuffle_seed: u64,
    ) -> Result<Self> {
        if tx.len() != rx.len() {
            return Err(Error::Shape {
                expected: format!("rx length {}", tx.len()),
                got: rx.len().to_string(),
            });
        }
        let window = 2 * memory + 1;
        if rx.len() < window {
            return config(format!(
                "sequence of {} symbols shorter than window {window}",
                rx.len()
            ));
        }
        let total = splits.train + splits.val + splits.test;
        if [splits.train, splits.val, splits.test].iter().any(|f| *f < 0.0) || total > 1.0 + 1e-12 {
            return config("split fractions must be non-negative and sum to at most 1");
        }
        let records = rx.len() - 2 * memory;
        let n_train = (splits.train * records as f64).round() as usize;
        let n_val = ((splits.val * records as f64).round() as usize).min(records - n_train);
        let n_test =
            ((splits.test * records as f64).round() as usize).min(records - n_train - n_val);
        let ranges = SplitRanges {
            train: 0..n_train,
            val: n_train..n_train + n_val,
            test: n_train + n_val..n_train + n_val + n_test,
        };
        let tx_pol = match pol {
            Polarization::X => &tx.x,
            Polarization::Y => &tx.y,
        };
        let centre = &tx_pol[memory..memory + records];
        Ok(Self {
            memory,
            features: rx.to_features(),
            targets: centre.iter().map(|s| [s.re, s.im]).collect(),
            classes: constellation.decide_all(centre),
            splits: ranges,
            shuffle_seed,
        })
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn window_len(&self) -> usize {
        2 * self.memory + 1
    }

    /// Flattened input width, 4 (2N + 1).
    pub fn input_width(&self) -> usize {
        4 * self.window_len()
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn splits(&self) -> &SplitRanges {
        &self.splits
    }

    pub fn window(&self, i: usize) -> &[f64] {
        let w = self.input_width();
        &self.features[4 * i..4 * i + w]
    }

    pub fn target(&self, i: usize) -> [f64; 2] {
        self.targets[i]
    }

    pub fn class(&self, i: usize) -> usize {
        self.classes[i]
    }

    pub fn indices(&self, split: Split) -> Vec<usize> {
        self.splits.get(split).collect()
    }

    /// Materialise the (B, 2N+1, 4) input tensor for a split, row-major.
    pub fn inputs(&self, split: Split) -> Vec<f64> {
        let mut out = Vec::new();
        for i in self.splits.get(split) {
            out.extend_from_slice(self.window(i));
        }
        out
    }

    /// Training indices for an epoch, reshuffled per epoch.
    pub fn epoch_order(&self, epoch: usize) -> Vec<usize> {
        let mut idx = self.indices(Split::Train);
        let mut rng = ChaCha8Rng::seed_from_u64(self.shuffle_seed ^ (epoch as u64).wrapping_mul(0x9E37_79B9));
        idx.shuffle(&mut rng);
        idx
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::bits::mt_bits;
    use crate::data::qam::map_symbols;

    fn trace(n: usize) -> (DualPol, QamConstellation) {
        let c = QamConstellation::new(16).unwrap();
        let tx = map_symbols(&mt_bits(11, n * 8), &c).unwrap();
        (tx, c)
    }

    #[test]
    fn zero_memory_window_is_the_symbol() {
        let (tx, c) = trace(64);
        let ds = WindowedDataset::new(&tx, &tx, 0, Polarization::X, &c, SplitFractions::default(), 0)
            .unwrap();
        assert_eq!(ds.window_len(), 1);
        assert_eq!(ds.len(), 64);
        let w = ds.window(5);
        assert_eq!(w, &[tx.x[5].re, tx.x[5].im, tx.y[5].re, tx.y[5].im]);
    }

    #[test]
    fn memory_25_gives_51_taps_and_drops_edges() {
        let (tx, c) = trace(200);
        let ds = WindowedDataset::new(&tx, &tx, 25, Polarization::X, &c, SplitFractions::default(), 0)
            .unwrap();
        assert_eq!(ds.window_len(), 51);
        assert_eq!(ds.len(), 200 - 50);
        // record 0 is centred on symbol 25
        assert_eq!(ds.target(0), [tx.x[25].re, tx.x[25].im]);
        assert_eq!(&ds.window(0)[100..102], &[tx.x[25].re, tx.x[25].im]);
    }

    #[test]
    fn noiseless_centre_decision_matches_class() {
        let (tx, c) = trace(300);
        let ds = WindowedDataset::new(&tx, &tx, 3, Polarization::Y, &c, SplitFractions::default(), 0)
            .unwrap();
        for i in 0..ds.len() {
            let w = ds.window(i);
            let centre = num_complex::Complex64::new(w[4 * 3 + 2], w[4 * 3 + 3]);
            assert_eq!(c.decide(centre), ds.class(i));
        }
    }

    #[test]
    fn splits_are_disjoint_and_cover() {
        let (tx, c) = trace(1000);
        let f = SplitFractions {
            train: 0.6,
            val: 0.2,
            test: 0.2,
        };
        let ds = WindowedDataset::new(&tx, &tx, 2, Polarization::X, &c, f, 1).unwrap();
        let s = ds.splits();
        assert_eq!(s.train.end, s.val.start);
        assert_eq!(s.val.end, s.test.start);
        assert_eq!(s.test.end, ds.len());
        let mut o = ds.epoch_order(0);
        assert_ne!(o, ds.epoch_order(1));
        o.sort();
        assert_eq!(o, ds.indices(Split::Train));
    }

    #[test]
    fn short_sequence_rejected() {
        let (tx, c) = trace(4);
        assert!(WindowedDataset::new(&tx, &tx, 2, Polarization::X, &c, SplitFractions::default(), 0)
            .is_err());
    }
}
