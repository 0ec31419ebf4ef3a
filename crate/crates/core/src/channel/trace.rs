//! Binary trace container: little-endian f64 quadruples
//! (Re Ex, Im Ex, Re Ey, Im Ey) per sample plus a JSON sidecar.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::link::LinkSimulation;
use crate::data::BitSource;
use crate::error::{Error, Result};
use crate::signal::DualPol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    /// Oversampled optical field.
    Field,
    /// One sample per symbol.
    Symbols,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceMeta {
    pub kind: TraceKind,
    pub samples: usize,
    pub sample_rate_hz: f64,
    pub symbol_rate_hz: f64,
    #[serde(default)]
    pub launch_power_dbm: Option<f64>,
    pub seed: u64,
    #[serde(default)]
    pub link: Option<LinkSimulation>,
    pub generator: BitSource,
    #[serde(default)]
    pub config_hash: Option<String>,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn encode_samples(data: &DualPol) -> Vec<u8> {
    let mut out = Vec::with_capacity(data.len() * 32);
    for (a, b) in data.x.iter().zip(&data.y) {
        for v in [a.re, a.im, b.re, b.im] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode_samples(bytes: &[u8]) -> Result<DualPol> {
    if bytes.len() % 32 != 0 {
        return Err(Error::Shape {
            expected: "multiple of 32 bytes".into(),
            got: bytes.len().to_string(),
        });
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    DualPol::from_features(&values)
}

pub fn write_trace(path: &Path, data: &DualPol, meta: &TraceMeta) -> Result<()> {
    if meta.samples != data.len() {
        return Err(Error::Shape {
            expected: format!("{} samples in metadata", meta.samples),
            got: data.len().to_string(),
        });
    }
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(&encode_samples(data))?;
    w.flush()?;
    fs::write(sidecar_path(path), serde_json::to_string_pretty(meta)?)?;
    Ok(())
}

pub fn read_trace(path: &Path) -> Result<(DualPol, TraceMeta)> {
    let meta: TraceMeta = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
    let data = decode_samples(&fs::read(path)?)?;
    if data.len() != meta.samples {
        return Err(Error::Shape {
            expected: format!("{} samples", meta.samples),
            got: data.len().to_string(),
        });
    }
    Ok((data, meta))
}
