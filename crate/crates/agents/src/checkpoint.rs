//! JSON tensor dump of network parameters.
//!
//! `{"version": 1, "config": {...}, "layers": {"cm1.weight": {"shape": [in, out], "values": [...]}, ...}}`
//! with row-major values.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::net::{NetConfig, NetParams};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub config: NetConfig,
    pub layers: BTreeMap<String, Tensor>,
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("tensor {name}: {problem}")]
    Tensor { name: String, problem: String },
    #[error(transparent)]
    Net(#[from] crate::net::NetError),
}

pub fn to_checkpoint(p: &NetParams) -> Checkpoint {
    let mut layers = BTreeMap::new();
    for (name, l) in p.layers() {
        layers.insert(format!("{name}.weight"), Tensor { shape: vec![l.n_in, l.n_out], values: l.w.clone() });
        layers.insert(format!("{name}.bias"), Tensor { shape: vec![l.n_out], values: l.b.clone() });
    }
    Checkpoint { version: CHECKPOINT_VERSION, config: p.cfg.clone(), layers }
}

pub fn from_checkpoint(c: &Checkpoint) -> Result<NetParams, CheckpointError> {
    if c.version != CHECKPOINT_VERSION {
        return Err(CheckpointError::Version(c.version));
    }
    let mut p = NetParams::init(&c.config)?;
    for (name, l) in p.layers_mut() {
        for (suffix, shape, dst) in [
            ("weight", vec![l.n_in, l.n_out], &mut l.w),
            ("bias", vec![l.n_out], &mut l.b),
        ] {
            let key = format!("{name}.{suffix}");
            let t = c.layers.get(&key).ok_or_else(|| CheckpointError::Tensor { name: key.clone(), problem: "missing".into() })?;
            if t.shape != shape || t.values.len() != dst.len() {
                return Err(CheckpointError::Tensor { name: key, problem: format!("shape {:?}, expected {shape:?}", t.shape) });
            }
            dst.copy_from_slice(&t.values);
        }
    }
    Ok(p)
}

pub fn save_checkpoint<W: Write>(p: &NetParams, w: W) -> Result<(), CheckpointError> {
    serde_json::to_writer(w, &to_checkpoint(p))?;
    Ok(())
}

pub fn load_checkpoint<R: Read>(r: R) -> Result<NetParams, CheckpointError> {
    from_checkpoint(&serde_json::from_reader(r)?)
}
