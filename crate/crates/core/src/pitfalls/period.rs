use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{config, Result};

/// Peaks at or below this normalised magnitude are treated as noise.
pub const PEAK_THRESHOLD: f64 = 0.5;
/// Lags within this distance of the strongest peak count as equally strong,
/// so the fundamental wins over its multiples.
const PEAK_SLACK: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodDetection {
    pub period: Option<usize>,
    /// Largest normalised correlation over lags 1..=max_lag.
    pub peak: f64,
    /// Set for constant or all-zero input, where every lag correlates.
    pub degenerate: bool,
}

/// Normalised autocorrelation magnitude for lags 0..=max_lag, summed over
/// the given streams. Lag k compares the overlapping segments x[k..] and
/// x[..L-k] and divides by the geometric mean of their energies, so an
/// exactly periodic sequence scores 1 at its period regardless of L.
pub fn autocorrelation(streams: &[&[Complex64]], max_lag: usize) -> Result<Vec<f64>> {
    let len = streams.first().map_or(0, |s| s.len());
    if streams.iter().any(|s| s.len() != len) {
        return config("streams differ in length");
    }
    if len < 2 * max_lag || len == 0 {
        return config(format!("need at least {} symbols, got {len}", 2 * max_lag.max(1)));
    }
    let n_fft = (2 * len).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n_fft);
    let inv = planner.plan_fft_inverse(n_fft);
    let mut cross = vec![Complex64::new(0.0, 0.0); max_lag + 1];
    // prefix[i] = total energy of samples 0..i over all streams
    let mut prefix = vec![0.0; len + 1];
    for s in streams {
        let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
        buf[..len].copy_from_slice(s);
        fwd.process(&mut buf);
        for v in buf.iter_mut() {
            *v = Complex64::new(v.norm_sqr(), 0.0);
        }
        inv.process(&mut buf);
        for (k, c) in cross.iter_mut().enumerate() {
            *c += buf[k] / n_fft as f64;
        }
        for (i, v) in s.iter().enumerate() {
            prefix[i + 1] += v.norm_sqr();
        }
    }
    for i in 0..len {
        prefix[i + 1] += prefix[i];
    }
    Ok((0..=max_lag)
        .map(|k| {
            let head = prefix[len - k];
            let tail = prefix[len] - prefix[k];
            let denom = (head * tail).sqrt();
            if denom > 0.0 {
                cross[k].norm() / denom
            } else {
                0.0
            }
        })
        .collect())
}

/// Dominant repetition period of the streams, if any lag correlates above
/// [`PEAK_THRESHOLD`].
pub fn autocorr_period_streams(streams: &[&[Complex64]], max_lag: usize) -> Result<PeriodDetection> {
    let energy: f64 = streams.iter().flat_map(|s| s.iter()).map(|v| v.norm_sqr()).sum();
    if energy == 0.0 {
        return Ok(PeriodDetection { period: Some(1), peak: 1.0, degenerate: true });
    }
    let r = autocorrelation(streams, max_lag)?;
    let peak = r[1..].iter().cloned().fold(0.0, f64::max);
    if peak <= PEAK_THRESHOLD {
        return Ok(PeriodDetection { period: None, peak, degenerate: false });
    }
    let period = (1..=max_lag)
        .find(|&k| r[k] >= peak - PEAK_SLACK && r[k] > PEAK_THRESHOLD)
        .expect("peak lag exists");
    Ok(PeriodDetection {
        period: Some(period),
        peak,
        degenerate: period == 1 && peak > 1.0 - 1e-9,
    })
}

pub fn autocorr_period(symbols: &[Complex64], max_lag: usize) -> Result<PeriodDetection> {
    autocorr_period_streams(&[symbols], max_lag)
}
