use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{OpticalField, ShapingConfig};
use crate::error::{Error, Result};
use crate::signal::{dbm_to_watt, DualPol};

fn sqrt_raised_cosine(f_per_symbol: f64, rolloff: f64) -> f64 {
    let f = f_per_symbol.abs();
    let lo = (1.0 - rolloff) / 2.0;
    let hi = (1.0 + rolloff) / 2.0;
    if f <= lo {
        1.0
    } else if f > hi {
        0.0
    } else {
        (0.5 * (1.0 + (std::f64::consts::PI / rolloff * (f - lo)).cos())).sqrt()
    }
}

/// Root-raised-cosine taps, odd length `span * sps + 1`, unit energy.
///
/// Designed by frequency sampling of the square-root raised-cosine response
/// on the filter's own DFT grid. For roll-off 0.1 this keeps the symbol-spaced
/// residual ISI of two cascaded filters below 1e-3 at a 32-symbol span, where
/// plain truncation of the closed-form impulse response leaves about 4e-3.
pub fn rrc_taps(cfg: &ShapingConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let sps = cfg.samples_per_symbol;
    let half = cfg.filter_span_symbols * sps / 2;
    let len = 2 * half + 1;
    let response: Vec<f64> = (0..=half)
        .map(|k| sqrt_raised_cosine(k as f64 * sps as f64 / len as f64, cfg.rolloff))
        .collect();
    let mut taps: Vec<f64> = (0..len)
        .map(|n| {
            let t = n as f64 - half as f64;
            let mut acc = response[0];
            for (k, h) in response.iter().enumerate().skip(1) {
                acc += 2.0 * h * (2.0 * std::f64::consts::PI * k as f64 * t / len as f64).cos();
            }
            acc / len as f64
        })
        .collect();
    // exact symmetry
    for k in 0..half {
        let avg = 0.5 * (taps[k] + taps[len - 1 - k]);
        taps[k] = avg;
        taps[len - 1 - k] = avg;
    }
    let energy: f64 = taps.iter().map(|t| t * t).sum();
    let norm = energy.sqrt().recip();
    taps.iter_mut().for_each(|t| *t *= norm);
    Ok(taps)
}

/// Circular convolution of `signal` with centred real `taps`, via FFT.
pub fn circular_filter(signal: &[Complex64], taps: &[f64]) -> Vec<Complex64> {
    let n = signal.len();
    if n == 0 {
        return Vec::new();
    }
    let half = taps.len() / 2;
    let mut kernel = vec![Complex64::new(0.0, 0.0); n];
    for (j, &t) in taps.iter().enumerate() {
        let idx = (j as isize - half as isize).rem_euclid(n as isize) as usize;
        kernel[idx] += t;
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf = signal.to_vec();
    fwd.process(&mut buf);
    fwd.process(&mut kernel);
    for (b, k) in buf.iter_mut().zip(&kernel) {
        *b *= k;
    }
    inv.process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|b| *b *= scale);
    buf
}

/// Upsample, RRC-filter (circularly over the frame) and scale both
/// polarizations to a total average launch power of `power_dbm`.
pub fn pulse_shape(symbols: &DualPol, cfg: &ShapingConfig, power_dbm: f64) -> Result<OpticalField> {
    if symbols.is_empty() {
        return Err(Error::Empty("symbol sequence"));
    }
    let taps = rrc_taps(cfg)?;
    let sps = cfg.samples_per_symbol;
    let upsample = |s: &[Complex64]| {
        let mut up = vec![Complex64::new(0.0, 0.0); s.len() * sps];
        for (k, v) in s.iter().enumerate() {
            up[k * sps] = *v;
        }
        circular_filter(&up, &taps)
    };
    let mut samples = DualPol {
        x: upsample(&symbols.x),
        y: upsample(&symbols.y),
    };
    let p = samples.mean_total_power();
    if p > 0.0 {
        samples.scale((dbm_to_watt(power_dbm) / p).sqrt());
    }
    Ok(OpticalField {
        samples,
        sample_rate_hz: cfg.sample_rate_hz(),
        symbol_rate_hz: cfg.symbol_rate_hz(),
    })
}
