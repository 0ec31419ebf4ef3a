//! Bit and symbol generation, DAC playout emulation and dataset windowing.

pub mod bits;
pub mod dataset;
pub mod manifest;
pub mod multitrace;
pub mod periodicity;
pub mod qam;
pub mod records;

pub use bits::{mt_bits, prbs_bits, BitSource, BitSourceKind};
pub use dataset::{Polarization, Split, SplitFractions, WindowedDataset};
pub use multitrace::{multi_trace_mix, EpochPlan, MultiTraceMix};
pub use periodicity::{dac_frame_repeat, symbol_periodicity, DacConfig};
pub use qam::{demap_symbols, map_symbols, QamConstellation};
pub use records::{Pool, Records, SplitView};

use crate::error::Result;
use crate::signal::DualPol;

/// Generate `n_symbols` dual-polarization symbols from a bit source.
pub fn generate_symbols(
    src: &BitSource,
    constellation: &QamConstellation,
    n_symbols: usize,
) -> Result<DualPol> {
    let bits = src.bits(n_symbols * 2 * constellation.bits_per_symbol())?;
    map_symbols(&bits, constellation)
}
