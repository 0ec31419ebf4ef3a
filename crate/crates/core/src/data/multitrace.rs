//! Multi-trace training pools with per-epoch random subsampling.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::dataset::WindowedDataset;
use crate::data::records::{Pool, Records};
use crate::error::{config, Result};

/// Which records an epoch visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpochPlan {
    /// Every training record, in a fresh random order each epoch.
    Shuffle { seed: u64 },
    /// `count` records drawn uniformly without replacement each epoch.
    Subsample { count: usize, seed: u64 },
}

impl EpochPlan {
    pub fn indices(&self, epoch: usize, len: usize) -> Vec<usize> {
        let (count, seed) = match *self {
            EpochPlan::Shuffle { seed } => (len, seed),
            EpochPlan::Subsample { count, seed } => (count.min(len), seed),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(epoch_seed(seed, epoch));
        index::sample(&mut rng, len, count).into_vec()
    }
}

fn epoch_seed(seed: u64, epoch: usize) -> u64 {
    seed.wrapping_mul(0x2545_F491_4F6C_DD1D) ^ (epoch as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Training pool from the first `train_count` traces and a held-out test pool
/// from the remainder.
pub struct MultiTraceMix<'a> {
    pub train: Pool<'a>,
    pub test: Pool<'a>,
    pub plan: EpochPlan,
}

pub fn multi_trace_mix(
    traces: &[WindowedDataset],
    train_count: usize,
    epoch_sample: usize,
    seed: u64,
) -> Result<MultiTraceMix<'_>> {
    if train_count >= traces.len() {
        return config(format!(
            "train_count {train_count} leaves no test trace out of {}",
            traces.len()
        ));
    }
    if train_count == 0 {
        return config("train_count must be at least 1");
    }
    let width = traces[0].input_width();
    if traces.iter().any(|t| t.input_width() != width) {
        return config("traces have different window sizes");
    }
    Ok(MultiTraceMix {
        train: Pool::of_traces(traces, 0..train_count),
        test: Pool::of_traces(traces, train_count..traces.len()),
        plan: EpochPlan::Subsample {
            count: epoch_sample,
            seed,
        },
    })
}

impl MultiTraceMix<'_> {
    pub fn epoch(&self, epoch: usize) -> Vec<usize> {
        self.plan.indices(epoch, self.train.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::bits::mt_bits;
    use crate::data::dataset::{Polarization, SplitFractions};
    use crate::data::qam::{map_symbols, QamConstellation};
    use std::collections::HashSet;

    fn traces(n: usize, len: usize) -> Vec<WindowedDataset> {
        let c = QamConstellation::new(16).unwrap();
        (0..n)
            .map(|s| {
                let tx = map_symbols(&mt_bits(100 + s as u64, len * 8), &c).unwrap();
                WindowedDataset::new(&tx, &tx, 2, Polarization::X, &c, SplitFractions::default(), 0)
                    .unwrap()
            })
            .collect()
    }

    #[test]
    fn test_pool_is_held_out() {
        let t = traces(2, 100);
        let mix = multi_trace_mix(&t, 1, 50, 3).unwrap();
        assert_eq!(mix.train.len(), 96);
        assert!(mix.test.refs().iter().all(|(tr, _)| *tr == 1));
        assert!(mix.train.refs().iter().all(|(tr, _)| *tr == 0));
    }

    #[test]
    fn epochs_resample() {
        let t = traces(3, 400);
        let mix = multi_trace_mix(&t, 2, 100, 9).unwrap();
        let a: HashSet<_> = mix.epoch(0).into_iter().collect();
        let b: HashSet<_> = mix.epoch(1).into_iter().collect();
        assert_eq!(a.len(), 100);
        assert!(a.symmetric_difference(&b).count() > 0);
        assert_eq!(mix.epoch(4), mix.epoch(4));
    }

    #[test]
    fn needs_a_test_trace() {
        let t = traces(2, 50);
        assert!(multi_trace_mix(&t, 2, 10, 0).is_err());
    }
}
