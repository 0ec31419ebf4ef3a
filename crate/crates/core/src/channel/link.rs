use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{cdc, edfa, pulse_shape, rx_frontend, ssfm_span, FiberParams, LinkConfig, ShapingConfig};
use crate::error::Result;
use crate::signal::DualPol;

/// Everything needed to push a symbol sequence through the fiber link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct LinkSimulation {
    pub fiber: FiberParams,
    pub link: LinkConfig,
    pub shaping: ShapingConfig,
}

impl LinkSimulation {
    pub fn validate(&self) -> Result<()> {
        self.fiber.validate()?;
        self.link.validate()?;
        self.shaping.validate()
    }
}

/// TX symbols to normalized RX symbols: shaping, spans of fiber each followed
/// by a loss-compensating EDFA, full CDC and the receiver front end.
pub fn simulate_link<R: Rng + ?Sized>(
    tx: &DualPol,
    sim: &LinkSimulation,
    rng: &mut R,
) -> Result<DualPol> {
    sim.validate()?;
    let mut field = pulse_shape(tx, &sim.shaping, sim.link.launch_power_dbm)?;
    let gain_db = sim.fiber.span_loss_db(sim.link.span_length_km);
    let carrier = sim.fiber.carrier_hz();
    for _ in 0..sim.link.num_spans {
        field = ssfm_span(&field, &sim.fiber, sim.link.span_length_km, sim.link.step_km)?;
        field = edfa(&field, gain_db, sim.link.edfa_noise_figure_db, carrier, rng);
    }
    let field = cdc(&field, &sim.fiber, sim.link.total_km());
    rx_frontend(&field, &sim.shaping, tx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_symbols, BitSource, QamConstellation};
    use crate::metrics::evm_rms;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sim(spans: usize, power: f64, gamma: f64, nf: f64) -> LinkSimulation {
        LinkSimulation {
            fiber: FiberParams {
                gamma_per_w_km: gamma,
                ..FiberParams::default()
            },
            link: LinkConfig {
                span_length_km: 50.0,
                num_spans: spans,
                step_km: 1.0,
                edfa_noise_figure_db: nf,
                launch_power_dbm: power,
            },
            shaping: ShapingConfig {
                samples_per_symbol: 4,
                ..ShapingConfig::default()
            },
        }
    }

    #[test]
    fn zero_spans_is_loopback() {
        let c = QamConstellation::new(16).unwrap();
        let tx = generate_symbols(&BitSource::mersenne(3), &c, 2048).unwrap();
        let rx = simulate_link(&tx, &sim(0, 0.0, 1.2, 4.5), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(evm_rms(&rx.x, &tx.x).unwrap() < 0.01);
    }

    #[test]
    fn nonlinearity_adds_distortion() {
        let c = QamConstellation::new(16).unwrap();
        let tx = generate_symbols(&BitSource::mersenne(4), &c, 2048).unwrap();
        // noiseless amplifiers isolate the Kerr effect
        let lin = simulate_link(&tx, &sim(2, 6.0, 0.0, f64::NEG_INFINITY), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let nl = simulate_link(&tx, &sim(2, 6.0, 1.2, f64::NEG_INFINITY), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let e_lin = evm_rms(&lin.x, &tx.x).unwrap();
        let e_nl = evm_rms(&nl.x, &tx.x).unwrap();
        assert!(e_lin < 0.005, "linear evm {e_lin}");
        assert!(e_nl > e_lin + 0.01, "nonlinear evm {e_nl}");
    }

    #[test]
    fn seeded_determinism() {
        let c = QamConstellation::new(16).unwrap();
        let tx = generate_symbols(&BitSource::mersenne(5), &c, 512).unwrap();
        let s = sim(1, 2.0, 1.2, 4.5);
        let a = simulate_link(&tx, &s, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = simulate_link(&tx, &s, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }
}
