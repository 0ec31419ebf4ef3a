//! Model checkpoints: a JSON descriptor (architecture and layer manifest)
//! next to a little-endian f64 parameter blob.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::arch::ModelArch;
use super::model::Model;
use super::params::{ParamEntry, ParamSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointDescriptor {
    pub arch: ModelArch,
    pub layers: Vec<ParamEntry>,
    pub parameters: usize,
    /// Blob file name, relative to the descriptor.
    pub blob: String,
    #[serde(default)]
    pub config_hash: Option<String>,
}

pub fn blob_path(descriptor: &Path) -> PathBuf {
    descriptor.with_extension("bin")
}

pub fn save_checkpoint(model: &Model, descriptor: &Path, config_hash: Option<&str>) -> Result<()> {
    let blob = blob_path(descriptor);
    let desc = CheckpointDescriptor {
        arch: model.arch.clone(),
        layers: model.params.entries.clone(),
        parameters: model.params.len(),
        blob: blob
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
        config_hash: config_hash.map(str::to_owned),
    };
    let bytes: Vec<u8> = model.params.data.iter().flat_map(|v| v.to_le_bytes()).collect();
    fs::write(&blob, bytes)?;
    fs::write(descriptor, serde_json::to_string_pretty(&desc)?)?;
    Ok(())
}

pub fn load_checkpoint(descriptor: &Path) -> Result<(Model, CheckpointDescriptor)> {
    let desc: CheckpointDescriptor = serde_json::from_str(&fs::read_to_string(descriptor)?)?;
    desc.arch.validate()?;
    let expected = Model::layout(&desc.arch);
    let stored = ParamSet {
        entries: desc.layers.clone(),
        data: Vec::new(),
    };
    if expected.entries != stored.entries {
        return Err(Error::Shape {
            expected: "layer manifest matching the architecture".into(),
            got: format!("{} entries", desc.layers.len()),
        });
    }
    let dir = descriptor.parent().unwrap_or(Path::new("."));
    let bytes = fs::read(dir.join(&desc.blob))?;
    if bytes.len() != 8 * expected.len() {
        return Err(Error::Shape {
            expected: format!("{} bytes", 8 * expected.len()),
            got: bytes.len().to_string(),
        });
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let model = Model {
        arch: desc.arch.clone(),
        params: ParamSet {
            entries: expected.entries,
            data,
        },
    };
    Ok((model, desc))
}
