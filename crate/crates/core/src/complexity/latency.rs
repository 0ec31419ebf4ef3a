use std::hint::black_box;
use std::time::Instant;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::nn::Model;

/// What the latency was measured on. Absolute values only compare within
/// one descriptor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineDescriptor {
    pub os: String,
    pub arch: String,
    pub logical_cpus: usize,
    /// Threads used by the benchmark; always 1.
    pub threads: usize,
}

impl MachineDescriptor {
    pub fn current() -> Self {
        Self {
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            logical_cpus: std::thread::available_parallelism().map_or(1, |n| n.get()),
            threads: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyReport {
    pub mean_s_per_symbol: f64,
    pub n_symbols: usize,
    pub machine: MachineDescriptor,
}

/// Mean wall-clock time to equalize one symbol, running one record at a
/// time on the calling thread. Inputs are random windows; the cost of a
/// forward pass does not depend on their values.
pub fn latency_bench(model: &Model, n_symbols: usize) -> Result<LatencyReport> {
    if n_symbols == 0 {
        return config("n_symbols must be >= 1");
    }
    let width = model.arch.input_width();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let inputs: Vec<Array2<f64>> = (0..n_symbols.min(1024))
        .map(|_| Array2::from_shape_fn((1, width), |_| rng.random_range(-1.0..1.0)))
        .collect();
    // warm-up so allocator and caches settle before timing
    for x in inputs.iter().take(16) {
        black_box(model.predict(x.view())?);
    }
    let start = Instant::now();
    for i in 0..n_symbols {
        let y = model.predict(black_box(inputs[i % inputs.len()].view()))?;
        black_box(y);
    }
    let elapsed = start.elapsed().as_secs_f64();
    Ok(LatencyReport {
        mean_s_per_symbol: elapsed / n_symbols as f64,
        n_symbols,
        machine: MachineDescriptor::current(),
    })
}
