//! Diagnostics for the ways a neural equalizer can look better than it is:
//! learnable bit sources, repeated DAC frames, non-Gaussian error clusters
//! and train/test divergence.

mod jail;
mod learnability;
mod overfit;
mod period;

pub use jail::{jail_gap, jail_window_detect, JailWindow, DEFAULT_GAP_THRESHOLD_DB};
pub use learnability::{
    centre_symbol_q, neighbor_only_probe, prbs_learnability_test, LearnabilityConfig, LearnabilityResult,
    ProbeResult, DEFAULT_GAIN_THRESHOLD_DB,
};
pub use overfit::{overfit_gap, OverfitRule, OverfitVerdict};
pub use period::{autocorr_period, autocorr_period_streams, autocorrelation, PeriodDetection, PEAK_THRESHOLD};

use serde::{Deserialize, Serialize};

use crate::metrics::serde_float;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JailSummary {
    pub flag: bool,
    #[serde(with = "serde_float")]
    pub q_gap_db: f64,
}

impl From<&JailWindow> for JailSummary {
    fn from(j: &JailWindow) -> Self {
        Self {
            flag: j.flagged,
            q_gap_db: j.q_gap_db,
        }
    }
}

/// Combined output of the detectors that were run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct AuditReport {
    pub detected_period_symbols: Option<usize>,
    pub prbs_gain_db: Option<f64>,
    pub jail_window: Option<JailSummary>,
    /// Final-epoch train - test Q gap.
    pub overfit_gap_db: Option<f64>,
    pub overfit: Option<bool>,
    pub notes: Vec<String>,
}
