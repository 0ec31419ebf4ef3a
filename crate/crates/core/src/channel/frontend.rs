use num_complex::Complex64;

use super::shaping::{circular_filter, rrc_taps};
use super::{OpticalField, ShapingConfig};
use crate::error::{Error, Result};
use crate::signal::DualPol;

/// Matched RRC filter, symbol-rate decimation at the phase with the largest
/// output energy, and per-polarization complex least-squares scaling onto
/// the transmitted reference.
pub fn rx_frontend(field: &OpticalField, cfg: &ShapingConfig, tx: &DualPol) -> Result<DualPol> {
    let sps = cfg.samples_per_symbol;
    let n_sym = field.len() / sps;
    if field.len() % sps != 0 || n_sym != tx.len() {
        return Err(Error::Shape {
            expected: format!("{} samples ({} symbols x {sps})", tx.len() * sps, tx.len()),
            got: field.len().to_string(),
        });
    }
    let taps = rrc_taps(cfg)?;
    let fx = circular_filter(&field.samples.x, &taps);
    let fy = circular_filter(&field.samples.y, &taps);
    let phase = (0..sps)
        .map(|p| {
            let e: f64 = (0..n_sym)
                .map(|k| fx[k * sps + p].norm_sqr() + fy[k * sps + p].norm_sqr())
                .sum();
            (p, e)
        })
        .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
        .0;
    let decimate = |v: &[Complex64]| (0..n_sym).map(|k| v[k * sps + phase]).collect::<Vec<_>>();
    let mut out = DualPol {
        x: decimate(&fx),
        y: decimate(&fy),
    };
    normalize_to_reference(&mut out, tx);
    Ok(out)
}

/// Scale each polarization by the complex LS coefficient sum(conj(y) x) / sum(|y|^2).
pub fn normalize_to_reference(rx: &mut DualPol, tx: &DualPol) {
    for (r, t) in [(&mut rx.x, &tx.x), (&mut rx.y, &tx.y)] {
        let num: Complex64 = r.iter().zip(t.iter()).map(|(y, x)| y.conj() * x).sum();
        let den: f64 = r.iter().map(|y| y.norm_sqr()).sum();
        if den > 0.0 {
            let c = num / den;
            r.iter_mut().for_each(|y| *y *= c);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::pulse_shape;
    use crate::data::{generate_symbols, BitSource, QamConstellation};
    use crate::metrics::evm_rms;

    #[test]
    fn loopback_recovers_symbols() {
        let cfg = ShapingConfig::default();
        let c = QamConstellation::new(16).unwrap();
        let tx = generate_symbols(&BitSource::mersenne(21), &c, 4096).unwrap();
        let field = pulse_shape(&tx, &cfg, 3.0).unwrap();
        let rx = rx_frontend(&field, &cfg, &tx).unwrap();
        let evm = evm_rms(&rx.x, &tx.x).unwrap();
        assert!(evm < 0.01, "evm {evm}");
    }

    #[test]
    fn scale_invariant() {
        let cfg = ShapingConfig::default();
        let c = QamConstellation::new(16).unwrap();
        let tx = generate_symbols(&BitSource::mersenne(22), &c, 1024).unwrap();
        let field = pulse_shape(&tx, &cfg, 0.0).unwrap();
        let a = rx_frontend(&field, &cfg, &tx).unwrap();
        let mut scaled = field.clone();
        let k = Complex64::new(-3.0, 7.5);
        for v in scaled.samples.x.iter_mut().chain(scaled.samples.y.iter_mut()) {
            *v *= k;
        }
        let b = rx_frontend(&scaled, &cfg, &tx).unwrap();
        for (u, v) in a.x.iter().chain(&a.y).zip(b.x.iter().chain(&b.y)) {
            assert!((u - v).norm() < 1e-10);
        }
    }

    #[test]
    fn length_mismatch_rejected() {
        let cfg = ShapingConfig::default();
        let c = QamConstellation::new(4).unwrap();
        let tx = generate_symbols(&BitSource::mersenne(1), &c, 64).unwrap();
        let field = pulse_shape(&tx, &cfg, 0.0).unwrap();
        let short = tx.slice(0..60);
        assert!(rx_frontend(&field, &cfg, &short).is_err());
    }
}
