use serde::{Deserialize, Serialize};

use crate::data::bits::BitSource;
use crate::data::dataset::{Polarization, SplitRanges};
use crate::data::qam::QamConstellation;

/// JSON description of how a windowed dataset was assembled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub trace_files: Vec<String>,
    pub memory: usize,
    pub polarization: Polarization,
    pub splits: SplitRanges,
    pub source: BitSource,
    pub shuffle_seed: u64,
    pub constellation: QamConstellation,
}

impl DatasetManifest {
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}
