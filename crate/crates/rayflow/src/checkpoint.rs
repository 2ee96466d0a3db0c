//! Versioned JSON checkpoints for trained models.
//!
//! JSON keeps the dump human-inspectable; f64 values round-trip bit-exactly
//! through serde_json's shortest-representation float formatting.

use std::path::Path;

use rayflow_core::net::Net;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetDump {
    pub dims: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl From<&Net> for NetDump {
    fn from(net: &Net) -> Self {
        NetDump {
            dims: net.dims.clone(),
            weights: net.weights.clone(),
            biases: net.biases.clone(),
        }
    }
}

impl NetDump {
    pub fn to_net(&self) -> Result<Net> {
        let net = Net {
            dims: self.dims.clone(),
            weights: self.weights.clone(),
            biases: self.biases.clone(),
        };
        if self.dims.len() < 2
            || self.weights.len() != self.dims.len() - 1
            || self.biases.len() != self.dims.len() - 1
        {
            return Err(Error::Checkpoint("inconsistent layer shapes".into()));
        }
        for l in 0..self.dims.len() - 1 {
            if self.weights[l].len() != self.dims[l] * self.dims[l + 1]
                || self.biases[l].len() != self.dims[l + 1]
            {
                return Err(Error::Checkpoint(format!("bad layer {l} shape")));
            }
        }
        Ok(net)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub schema_version: u32,
    pub dataset: String,
    pub t_steps: usize,
    pub beta_min: f64,
    pub beta_max: f64,
    pub sigma: f64,
    pub steps_k: usize,
    pub seed: u64,
    /// Global target mean learned during distillation (average of all
    /// per-pair eps_hat_mu), used as the sampling-time target mean.
    pub eps_mu: Vec<f64>,
    pub student: NetDump,
    pub sampler: NetDump,
}

impl Checkpoint {
    pub fn config(&self) -> Config {
        Config {
            t_steps: self.t_steps,
            beta_min: self.beta_min,
            beta_max: self.beta_max,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        let text = std::fs::read_to_string(path)?;
        let ckpt: Checkpoint = serde_json::from_str(&text)?;
        if ckpt.schema_version != SCHEMA_VERSION {
            return Err(Error::Checkpoint(format!(
                "schema_version {} unsupported (expected {SCHEMA_VERSION})",
                ckpt.schema_version
            )));
        }
        Ok(ckpt)
    }
}
