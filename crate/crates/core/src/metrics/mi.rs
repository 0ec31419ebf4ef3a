use num_complex::Complex64;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::QamConstellation;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MiOptions {
    /// Added to the diagonal of every fitted covariance.
    pub reg_epsilon: f64,
    /// Fewer RX samples than this for any point is an error.
    pub min_per_point: usize,
    /// Average over at most this many samples (uniformly drawn with `seed`).
    pub max_samples: Option<usize>,
    pub seed: u64,
}

impl Default for MiOptions {
    fn default() -> Self {
        Self {
            reg_epsilon: 1e-6,
            min_per_point: 50,
            max_samples: None,
            seed: 0,
        }
    }
}

/// Bivariate Gaussian in (Re, Im).
#[derive(Debug, Clone, Copy)]
struct Gauss2 {
    mean: [f64; 2],
    inv: [f64; 3],
    log_norm: f64,
}

impl Gauss2 {
    fn fit(pts: &[Complex64], eps: f64, idx: usize) -> Result<Self> {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.re).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.im).sum::<f64>() / n;
        let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
        for p in pts {
            let (dx, dy) = (p.re - mx, p.im - my);
            sxx += dx * dx;
            syy += dy * dy;
            sxy += dx * dy;
        }
        let denom = (n - 1.0).max(1.0);
        let (a, c, b) = (sxx / denom + eps, syy / denom + eps, sxy / denom);
        let det = a * c - b * b;
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::Singular(idx));
        }
        Ok(Self {
            mean: [mx, my],
            inv: [c / det, -b / det, a / det],
            log_norm: -(2.0 * std::f64::consts::PI).ln() - 0.5 * det.ln(),
        })
    }

    fn log_pdf(&self, y: Complex64) -> f64 {
        let (dx, dy) = (y.re - self.mean[0], y.im - self.mean[1]);
        let q = self.inv[0] * dx * dx + 2.0 * self.inv[1] * dx * dy + self.inv[2] * dy * dy;
        self.log_norm - 0.5 * q
    }
}

/// Gaussian lower bound on the mutual information in bits per symbol.
///
/// Each transmitted point gets a 2-D Gaussian fitted to its received cloud;
/// the bound is the sample average of log2(p(y|x) / sum_i p(i) p(y|x_i))
/// with uniform priors, clamped to [0, log2 M].
pub fn mi_lower_bound(
    rx: &[Complex64],
    tx: &[Complex64],
    c: &QamConstellation,
    opts: &MiOptions,
) -> Result<f64> {
    if rx.len() != tx.len() {
        return Err(Error::Shape {
            expected: format!("{} symbols", tx.len()),
            got: rx.len().to_string(),
        });
    }
    if rx.is_empty() {
        return Err(Error::Empty("symbol sequence"));
    }
    let m = c.order();
    let labels: Vec<usize> = tx.iter().map(|&x| c.decide(x)).collect();
    let mut clouds: Vec<Vec<Complex64>> = vec![Vec::new(); m];
    for (&l, &y) in labels.iter().zip(rx) {
        clouds[l].push(y);
    }
    let mut models = Vec::with_capacity(m);
    for (i, cloud) in clouds.iter().enumerate() {
        if cloud.is_empty() {
            return Err(Error::MissingPoint(i));
        }
        if cloud.len() < opts.min_per_point {
            return Err(Error::Config(format!(
                "point {i} has {} samples, need {}",
                cloud.len(),
                opts.min_per_point
            )));
        }
        models.push(Gauss2::fit(cloud, opts.reg_epsilon, i)?);
    }

    let picks: Vec<usize> = match opts.max_samples {
        Some(k) if k < rx.len() => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            sample(&mut rng, rx.len(), k).into_vec()
        }
        _ => (0..rx.len()).collect(),
    };
    let log_m = (m as f64).ln();
    let mut logs = vec![0.0; m];
    let mut acc = 0.0;
    for &n in &picks {
        let y = rx[n];
        for (l, g) in logs.iter_mut().zip(&models) {
            *l = g.log_pdf(y);
        }
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln();
        acc += logs[labels[n]] - (lse - log_m);
    }
    let bits = acc / picks.len() as f64 / std::f64::consts::LN_2;
    Ok(bits.clamp(0.0, m as f64).min((m as f64).log2()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn data(m: usize, n: usize, sigma2: f64, seed: u64) -> (Vec<Complex64>, Vec<Complex64>, QamConstellation) {
        let c = QamConstellation::new(m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tx: Vec<_> = (0..n).map(|_| c.point(rng.random_range(0..m))).collect();
        let s = (sigma2 / 2.0).sqrt();
        let rx = tx
            .iter()
            .map(|x| {
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                x + Complex64::new(a, b) * s
            })
            .collect();
        (rx, tx, c)
    }

    #[test]
    fn noiseless_gives_log2_m() {
        let (_, tx, c) = data(16, 4000, 0.0, 1);
        let mi = mi_lower_bound(&tx, &tx, &c, &MiOptions::default()).unwrap();
        assert!((mi - 4.0).abs() < 1e-3, "{mi}");
    }

    #[test]
    fn heavy_noise_goes_to_zero() {
        let (rx, tx, c) = data(16, 100_000, 400.0, 2);
        let mi = mi_lower_bound(&rx, &tx, &c, &MiOptions::default()).unwrap();
        assert!(mi < 0.05, "{mi}");
    }

    #[test]
    fn missing_point_is_an_error() {
        let c = QamConstellation::new(4).unwrap();
        let tx = vec![c.point(0); 100];
        let err = mi_lower_bound(&tx, &tx, &c, &MiOptions::default()).unwrap_err();
        assert!(matches!(err, Error::MissingPoint(1)));
    }

    #[test]
    fn subsampling_is_deterministic() {
        let (rx, tx, c) = data(16, 20_000, 0.05, 3);
        let o = MiOptions { max_samples: Some(5000), seed: 9, ..Default::default() };
        let a = mi_lower_bound(&rx, &tx, &c, &o).unwrap();
        let b = mi_lower_bound(&rx, &tx, &c, &o).unwrap();
        assert_eq!(a, b);
    }
}
