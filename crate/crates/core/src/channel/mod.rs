//! Dual-polarization coherent link: RRC shaping, split-step Manakov
//! propagation, EDFA noise, CD compensation and the receiver front end.

pub mod b2b;
pub mod edfa;
pub mod frontend;
pub mod link;
pub mod shaping;
pub mod ssfm;
pub mod trace;

pub use b2b::{awgn_b2b, B2bOutcome};
pub use edfa::edfa;
pub use frontend::rx_frontend;
pub use link::{simulate_link, LinkSimulation};
pub use trace::{read_trace, write_trace, TraceKind, TraceMeta};
pub use shaping::{pulse_shape, rrc_taps};
pub use ssfm::{cdc, dispersion, ssfm_span};

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::signal::DualPol;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const PLANCK: f64 = 6.626_070_15e-34;

/// The Manakov nonlinear coefficient relative to the scalar NLSE.
pub const MANAKOV_FACTOR: f64 = 8.0 / 9.0;

fn default_manakov() -> f64 {
    MANAKOV_FACTOR
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberParams {
    pub attenuation_db_per_km: f64,
    pub dispersion_ps_nm_km: f64,
    pub gamma_per_w_km: f64,
    pub center_wavelength_nm: f64,
    /// Multiplier applied to gamma in the nonlinear step.
    #[serde(default = "default_manakov")]
    pub nonlinear_factor: f64,
}

impl Default for FiberParams {
    /// Standard single-mode fiber at 1550 nm.
    fn default() -> Self {
        Self {
            attenuation_db_per_km: 0.21,
            dispersion_ps_nm_km: 16.8,
            gamma_per_w_km: 1.2,
            center_wavelength_nm: 1550.0,
            nonlinear_factor: MANAKOV_FACTOR,
        }
    }
}

impl FiberParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.attenuation_db_per_km >= 0.0) {
            return config("attenuation must be >= 0");
        }
        if !(self.gamma_per_w_km >= 0.0) {
            return config("gamma must be >= 0");
        }
        if !(self.center_wavelength_nm > 0.0) {
            return config("wavelength must be > 0");
        }
        if !self.dispersion_ps_nm_km.is_finite() || !self.nonlinear_factor.is_finite() {
            return config("dispersion and nonlinear factor must be finite");
        }
        Ok(())
    }

    /// Power attenuation in 1/km.
    pub fn alpha_per_km(&self) -> f64 {
        self.attenuation_db_per_km * std::f64::consts::LN_10 / 10.0
    }

    /// Group-velocity dispersion beta2 in s^2/km.
    pub fn beta2_s2_per_km(&self) -> f64 {
        let lambda = self.center_wavelength_nm * 1e-9;
        let d_s_per_m2 = self.dispersion_ps_nm_km * 1e-6;
        -d_s_per_m2 * lambda * lambda / (2.0 * std::f64::consts::PI * SPEED_OF_LIGHT) * 1e3
    }

    pub fn carrier_hz(&self) -> f64 {
        SPEED_OF_LIGHT / (self.center_wavelength_nm * 1e-9)
    }

    pub fn span_loss_db(&self, span_km: f64) -> f64 {
        self.attenuation_db_per_km * span_km
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    pub span_length_km: f64,
    pub num_spans: usize,
    pub step_km: f64,
    pub edfa_noise_figure_db: f64,
    pub launch_power_dbm: f64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            span_length_km: 50.0,
            num_spans: 5,
            step_km: 1.0,
            edfa_noise_figure_db: 4.5,
            launch_power_dbm: 0.0,
        }
    }
}

impl LinkConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.span_length_km > 0.0) {
            return config("span length must be > 0");
        }
        steps_per_span(self.span_length_km, self.step_km)?;
        // -inf dB noise figure is allowed and means a noiseless amplifier
        if self.edfa_noise_figure_db.is_nan() || self.edfa_noise_figure_db == f64::INFINITY {
            return config("noise figure must be < +inf");
        }
        if !self.launch_power_dbm.is_finite() {
            return config("launch power must be finite");
        }
        Ok(())
    }

    pub fn total_km(&self) -> f64 {
        self.span_length_km * self.num_spans as f64
    }
}

/// Number of split steps covering `span_km`, requiring an integer ratio.
pub fn steps_per_span(span_km: f64, step_km: f64) -> Result<usize> {
    if !(step_km > 0.0) || step_km > span_km + 1e-12 {
        return config(format!("step {step_km} km must lie in (0, {span_km}]"));
    }
    let n = (span_km / step_km).round();
    if (n * step_km - span_km).abs() > 1e-9 * span_km.max(1.0) {
        return config(format!("step {step_km} km does not divide span {span_km} km"));
    }
    Ok(n as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapingConfig {
    pub rolloff: f64,
    pub samples_per_symbol: usize,
    pub symbol_rate_gbd: f64,
    pub filter_span_symbols: usize,
}

impl Default for ShapingConfig {
    fn default() -> Self {
        Self {
            rolloff: 0.1,
            samples_per_symbol: 8,
            symbol_rate_gbd: 34.4,
            filter_span_symbols: 32,
        }
    }
}

impl ShapingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rolloff) {
            return config(format!("roll-off {} outside [0, 1]", self.rolloff));
        }
        if self.samples_per_symbol < 2 {
            return config("samples_per_symbol must be >= 2");
        }
        if self.filter_span_symbols < 8 {
            return config("filter_span_symbols must be >= 8");
        }
        if !(self.symbol_rate_gbd > 0.0) {
            return config("symbol rate must be > 0");
        }
        Ok(())
    }

    pub fn symbol_rate_hz(&self) -> f64 {
        self.symbol_rate_gbd * 1e9
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.symbol_rate_hz() * self.samples_per_symbol as f64
    }
}

/// Sampled dual-polarization field envelope in sqrt(W).
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalField {
    pub samples: DualPol,
    pub sample_rate_hz: f64,
    pub symbol_rate_hz: f64,
}

impl OpticalField {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean_power_w(&self) -> f64 {
        self.samples.mean_total_power()
    }
}

/// Angular frequency grid (rad/s) in FFT bin order.
pub fn angular_frequencies(n: usize, sample_rate_hz: f64) -> Vec<f64> {
    let df = sample_rate_hz / n as f64;
    (0..n)
        .map(|k| {
            let k = if k < n.div_ceil(2) { k as f64 } else { k as f64 - n as f64 };
            2.0 * std::f64::consts::PI * k * df
        })
        .collect()
}
