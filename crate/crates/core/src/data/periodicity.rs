//! Sequence periodicity introduced by PRBS generators and cyclic DAC playout.

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::signal::DualPol;

/// Conservative symbol periodicity of an order-`order` PRBS: the number of
/// whole symbols spanned by one bit period, floor((2^order - 1) / bps).
///
/// When the bit period and symbol boundaries realign the true symbol period
/// is `bits_per_symbol` times longer; the shorter bound is what matters for
/// a window-based equalizer because it can lock onto the bit pattern.
pub fn symbol_periodicity(order: u32, bits_per_symbol: u32) -> u64 {
    assert!(order >= 1 && order < 64, "order must be in 1..64");
    assert!(bits_per_symbol >= 1, "bits_per_symbol must be positive");
    ((1u64 << order) - 1) / bits_per_symbol as u64
}

/// DAC memory layout used to emulate frame-repeated playout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DacConfig {
    /// Memory depth per channel in samples.
    pub memory_samples: u64,
    /// Number of identical frames the receiver DSP expects.
    pub frames: u64,
    pub dac_rate_hz: f64,
    pub symbol_rate_hz: f64,
}

impl DacConfig {
    /// Unique symbols per frame: floor(memory / frames / (dac_rate / symbol_rate)).
    pub fn effective_symbols(&self) -> Result<usize> {
        if self.frames == 0 || self.dac_rate_hz <= 0.0 || self.symbol_rate_hz <= 0.0 {
            return config("DAC frames and rates must be positive");
        }
        let sps_eff = self.dac_rate_hz / self.symbol_rate_hz;
        let p = (self.memory_samples as f64 / self.frames as f64 / sps_eff).floor();
        if p < 1.0 {
            return config(format!("DAC frame holds {p} symbols"));
        }
        Ok(p as usize)
    }
}

/// Keep the first P unique symbols and tile them over the original length.
pub fn dac_frame_repeat(symbols: &DualPol, dac: &DacConfig) -> Result<DualPol> {
    let p = dac.effective_symbols()?.min(symbols.len());
    if p == 0 {
        return Ok(symbols.clone());
    }
    let tile = |s: &[num_complex::Complex64]| (0..s.len()).map(|i| s[i % p]).collect();
    Ok(DualPol {
        x: tile(&symbols.x),
        y: tile(&symbols.y),
    })
}
