use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{OpticalField, PLANCK};
use crate::signal::db_to_lin;

/// Per-polarization ASE power spectral density (W/Hz): (G - 1) F h nu / 2.
pub fn ase_psd(gain_db: f64, noise_figure_db: f64, carrier_hz: f64) -> f64 {
    let g = db_to_lin(gain_db);
    let f = db_to_lin(noise_figure_db);
    (g - 1.0) * f * PLANCK * carrier_hz / 2.0
}

/// Amplify by `gain_db` and add circular Gaussian ASE over the whole
/// simulation bandwidth, independently per polarization.
pub fn edfa<R: Rng + ?Sized>(
    field: &OpticalField,
    gain_db: f64,
    noise_figure_db: f64,
    carrier_hz: f64,
    rng: &mut R,
) -> OpticalField {
    let mut out = field.clone();
    let amp = db_to_lin(gain_db).sqrt();
    let variance = ase_psd(gain_db, noise_figure_db, carrier_hz) * field.sample_rate_hz;
    let sigma = (variance / 2.0).sqrt();
    for pol in out.samples.pols_mut() {
        for v in pol.iter_mut() {
            *v *= amp;
            if sigma > 0.0 {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                *v += Complex64::new(re, im) * sigma;
            }
        }
    }
    out
}
