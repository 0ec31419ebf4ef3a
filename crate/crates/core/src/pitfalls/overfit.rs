use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverfitRule {
    /// Epochs after the test-Q peak that must all stay below it.
    pub patience: usize,
    /// Minimum drop of test Q and rise of train Q, in dB.
    pub tolerance_db: f64,
}

impl Default for OverfitRule {
    fn default() -> Self {
        Self {
            patience: 5,
            tolerance_db: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverfitVerdict {
    /// train - test per epoch.
    pub gap_db: Vec<f64>,
    pub peak_test_epoch: usize,
    pub overfit: bool,
}

/// Per-epoch train/test Q gap; overfitting means the test Q has been
/// falling for at least `patience` epochs since its peak while the train
/// Q kept rising over the same stretch.
pub fn overfit_gap(train_q: &[f64], test_q: &[f64], rule: &OverfitRule) -> Result<OverfitVerdict> {
    if train_q.len() != test_q.len() {
        return Err(Error::Shape {
            expected: format!("{} epochs", train_q.len()),
            got: test_q.len().to_string(),
        });
    }
    if test_q.is_empty() {
        return Err(Error::Empty("epoch series"));
    }
    let gap_db = train_q.iter().zip(test_q).map(|(a, b)| a - b).collect();
    let peak = test_q
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &q)| if q > acc.1 { (i, q) } else { acc });
    let last = test_q.len() - 1;
    let overfit = last >= peak.0 + rule.patience.max(1)
        && test_q[peak.0 + 1..].iter().all(|&q| q < peak.1)
        && test_q[last] < peak.1 - rule.tolerance_db
        && train_q[last] > train_q[peak.0] + rule.tolerance_db;
    Ok(OverfitVerdict {
        gap_db,
        peak_test_epoch: peak.0,
        overfit,
    })
}
