use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::data::QamConstellation;
use crate::error::Result;
use crate::metrics::{ber_count, ber_from_evm, evm_rms, q_from_ber_saturating, serde_float};

pub const DEFAULT_GAP_THRESHOLD_DB: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JailWindow {
    pub flagged: bool,
    #[serde(with = "serde_float")]
    pub q_counted_db: f64,
    /// Q implied by the EVM under the Gaussian assumption.
    #[serde(with = "serde_float")]
    pub q_est_db: f64,
    /// q_est - q_counted; NaN unless both are finite.
    #[serde(with = "serde_float")]
    pub q_gap_db: f64,
    /// Excess kurtosis of the error per transmitted point, averaged over
    /// the I and Q axes (0 for Gaussian clusters). NaN for points with
    /// fewer than 4 samples or no spread.
    #[serde(with = "crate::metrics::serde_float::vec")]
    pub cluster_kurtosis: Vec<f64>,
}

impl JailWindow {
    /// Largest |excess kurtosis| over the clusters that have one.
    pub fn max_abs_kurtosis(&self) -> f64 {
        self.cluster_kurtosis.iter().filter(|k| k.is_finite()).fold(0.0, |m, k| m.max(k.abs()))
    }
}

/// Gap rule alone: flag when q_est exceeds q_counted by more than the threshold.
pub fn jail_gap(q_est_db: f64, q_counted_db: f64, gap_threshold_db: f64) -> (bool, f64) {
    if q_est_db.is_finite() && q_counted_db.is_finite() {
        let gap = q_est_db - q_counted_db;
        (gap > gap_threshold_db, gap)
    } else {
        (false, f64::NAN)
    }
}

fn excess_kurtosis(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    if v.len() < 4 {
        return f64::NAN;
    }
    let mean = v.iter().sum::<f64>() / n;
    let m2 = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = v.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    if m2 <= 0.0 {
        return f64::NAN;
    }
    m4 / (m2 * m2) - 3.0
}

/// Compares the counted Q-factor with the Q the EVM predicts; a large
/// optimistic gap means the error clusters are far from Gaussian.
pub fn jail_window_detect(
    rx_eq: &[Complex64],
    tx: &[Complex64],
    constellation: &QamConstellation,
    kappa: f64,
    gap_threshold_db: f64,
) -> Result<JailWindow> {
    let counted = ber_count(rx_eq, tx, constellation)?;
    let evm = evm_rms(rx_eq, tx)?;
    let q_counted_db = q_from_ber_saturating(counted.ber);
    let q_est_db = q_from_ber_saturating(ber_from_evm(evm, constellation.order(), kappa).min(0.5));
    let (flagged, q_gap_db) = jail_gap(q_est_db, q_counted_db, gap_threshold_db);

    let m = constellation.order();
    let mut re: Vec<Vec<f64>> = vec![Vec::new(); m];
    let mut im: Vec<Vec<f64>> = vec![Vec::new(); m];
    for (y, x) in rx_eq.iter().zip(tx) {
        let k = constellation.decide(*x);
        let e = y - x;
        re[k].push(e.re);
        im[k].push(e.im);
    }
    let cluster_kurtosis = re
        .iter()
        .zip(&im)
        .map(|(a, b)| {
            let (ka, kb) = (excess_kurtosis(a), excess_kurtosis(b));
            match (ka.is_finite(), kb.is_finite()) {
                (true, true) => 0.5 * (ka + kb),
                (true, false) => ka,
                (false, true) => kb,
                _ => f64::NAN,
            }
        })
        .collect();
    Ok(JailWindow {
        flagged,
        q_counted_db,
        q_est_db,
        q_gap_db,
        cluster_kurtosis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_sequences_do_not_flag() {
        let c = QamConstellation::new(16).unwrap();
        let tx: Vec<_> = (0..64).map(|i| c.point(i % 16)).collect();
        let j = jail_window_detect(&tx, &tx, &c, 1.076, 2.0).unwrap();
        assert!(!j.flagged);
        assert_eq!(j.q_counted_db, f64::INFINITY);
        assert!(j.q_gap_db.is_nan());
    }

    #[test]
    fn printed_case_gap() {
        let (flag, gap) = jail_gap(13.62, 7.89, 2.0);
        assert!(flag);
        assert!((gap - 5.73).abs() < 1e-9);
    }

    #[test]
    fn kurtosis_of_known_shapes() {
        // two-point distribution: excess kurtosis -2
        let v: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!((excess_kurtosis(&v) + 2.0).abs() < 1e-12);
    }
}
