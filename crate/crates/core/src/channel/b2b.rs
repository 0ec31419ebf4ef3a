//! Back-to-back AWGN channel calibrated to a hard-decision Q-factor.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::QamConstellation;
use crate::error::{Error, Result};
use crate::metrics::{ber_count, ber_from_q, q_from_ber};
use crate::signal::DualPol;

/// Dual-polarization symbols in the calibration block.
pub const CALIBRATION_SYMBOLS: usize = 1 << 16;
/// The smallest BER the calibration block resolves, in bit errors.
const MIN_ERRORS: f64 = 20.0;
const Q_TOLERANCE_DB: f64 = 0.05;

#[derive(Debug, Clone)]
pub struct B2bOutcome {
    pub symbols: DualPol,
    /// Complex noise variance E|n|^2 per polarization.
    pub noise_variance: f64,
    /// Counted Q-factor on the calibration block.
    pub calibrated_q_db: f64,
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Add complex Gaussian noise whose variance is found by bisection on the
/// counted BER of a calibration block (fixed noise draws, so the counted
/// BER is monotone in the noise scale).
pub fn awgn_b2b<R: Rng + ?Sized>(
    symbols: &DualPol,
    target_q_db: f64,
    constellation: &QamConstellation,
    rng: &mut R,
) -> Result<B2bOutcome> {
    let n_bits = (2 * CALIBRATION_SYMBOLS * constellation.bits_per_symbol()) as f64;
    let cap_db = q_from_ber(MIN_ERRORS / n_bits)?;
    if !(target_q_db <= cap_db) {
        return Err(Error::UnreachableTarget {
            target_db: target_q_db,
            cap_db,
        });
    }
    let m = constellation.order();
    let tx: Vec<Complex64> = (0..2 * CALIBRATION_SYMBOLS)
        .map(|_| constellation.point(rng.random_range(0..m)))
        .collect();
    let noise: Vec<Complex64> = (0..tx.len()).map(|_| complex_normal(rng)).collect();
    let counted_q = |sigma: f64| -> Result<f64> {
        let rx: Vec<Complex64> = tx.iter().zip(&noise).map(|(t, n)| t + n * sigma).collect();
        let ber = ber_count(&rx, &tx, constellation)?.ber;
        if ber == 0.0 {
            Ok(f64::INFINITY)
        } else if ber >= 0.5 {
            Ok(f64::NEG_INFINITY)
        } else {
            q_from_ber(ber)
        }
    };

    // Start from the Gaussian-approximation sigma and bracket in log scale.
    let target_ber = ber_from_q(target_q_db);
    let guess = analytic_sigma(target_ber, constellation);
    let (mut lo, mut hi) = (guess.ln() - 1.0, guess.ln() + 1.0);
    while counted_q(lo.exp())? < target_q_db {
        lo -= 1.0;
    }
    while counted_q(hi.exp())? > target_q_db {
        hi += 1.0;
    }
    let mut best = (f64::INFINITY, guess);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let q = counted_q(mid.exp())?;
        if (q - target_q_db).abs() < best.0 {
            best = ((q - target_q_db).abs(), mid.exp());
        }
        if q > target_q_db {
            lo = mid;
        } else {
            hi = mid;
        }
        if best.0 < Q_TOLERANCE_DB / 5.0 {
            break;
        }
    }
    let sigma = best.1;
    let calibrated_q_db = counted_q(sigma)?;
    let mut out = symbols.clone();
    for pol in out.pols_mut() {
        for v in pol.iter_mut() {
            *v += complex_normal(rng) * sigma;
        }
    }
    Ok(B2bOutcome {
        symbols: out,
        noise_variance: sigma * sigma,
        calibrated_q_db,
    })
}

/// Nearest-neighbour Gray approximation of the sigma giving `ber`.
fn analytic_sigma(ber: f64, c: &QamConstellation) -> f64 {
    let pts = c.points();
    let d_min = pts
        .iter()
        .enumerate()
        .flat_map(|(i, a)| pts[i + 1..].iter().map(move |b| (a - b).norm()))
        .fold(f64::INFINITY, f64::min);
    // BER ~ 2/log2(M) * Q(d/2 / (sigma/sqrt2))
    let k = c.bits_per_symbol() as f64;
    let per_dim = (ber * k / 2.0).clamp(1e-300, 0.49);
    let q = std::f64::consts::SQRT_2 * crate::metrics::erfc_inv(2.0 * per_dim);
    (d_min / 2.0 / q * std::f64::consts::SQRT_2).max(1e-6)
}
