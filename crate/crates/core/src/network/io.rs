//! Network file format.
//!
//! ```json
//! {"n": 3, "model": "excitation_preserving", "delta": 1.0, "gamma": 0.0,
//!  "edges": [[1, 2, 1.0], [2, 3, 0.5]], "fields": [0.0, 0.1, 0.0], "gateway": [1]}
//! ```
//!
//! Nodes are 1-based and unknown keys are rejected. Coupling signs are read
//! off the edge values.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ensure_valid, Coupling, ModelKind, SpinNetwork};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    n: usize,
    model: ModelKind,
    delta: f64,
    #[serde(default)]
    gamma: f64,
    edges: Vec<(usize, usize, f64)>,
    fields: Vec<f64>,
    #[serde(default)]
    gateway: Vec<usize>,
}

impl From<&SpinNetwork> for NetworkFile {
    fn from(net: &SpinNetwork) -> Self {
        NetworkFile {
            n: net.n,
            model: net.model,
            delta: net.delta,
            gamma: net.gamma,
            edges: net.couplings.iter().map(|c| (c.a, c.b, c.strength)).collect(),
            fields: net.fields.clone(),
            gateway: net.gateway.clone(),
        }
    }
}

impl From<NetworkFile> for SpinNetwork {
    fn from(f: NetworkFile) -> Self {
        let couplings = f.edges.iter().map(|&(a, b, c)| Coupling::new(a, b, c)).collect();
        SpinNetwork::new(f.n, f.model, f.delta, f.gamma, couplings, f.fields).with_gateway(f.gateway)
    }
}

pub fn network_to_json(net: &SpinNetwork) -> String {
    serde_json::to_string_pretty(&NetworkFile::from(net)).expect("network serializes")
}

/// Parses and validates a network document.
pub fn network_from_json(text: &str, origin: &Path) -> Result<SpinNetwork> {
    let file: NetworkFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_path_buf(),
        message: e.to_string(),
    })?;
    let net = SpinNetwork::from(file);
    ensure_valid(&net)?;
    Ok(net)
}

pub fn load_network(path: impl AsRef<Path>) -> Result<SpinNetwork> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    network_from_json(&text, path)
}

pub fn save_network(net: &SpinNetwork, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, network_to_json(net) + "\n").map_err(|source| Error::Io { path: path.to_path_buf(), source })
}
