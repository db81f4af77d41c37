//! Versioned JSON documents: every file starts with the magic string and
//! schema version and embeds the resolved configuration.

use super::config::RunConfig;
use crate::oracle::VerifyReport;
use crate::sieve::{DyadicInterval, SweepProgress};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const MAGIC: &str = "psieve";
pub const SCHEMA: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("{0}: {1}")]
    Io(String, String),
    #[error("{0}: not a {1} document ({2})")]
    Format(String, String, String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub magic: String,
    pub schema: u32,
    pub kind: String,
    pub config: RunConfig,
    pub body: T,
}

impl<T: Serialize> Envelope<T> {
    pub fn new(kind: &str, config: &RunConfig, body: T) -> Envelope<T> {
        Envelope { magic: MAGIC.into(), schema: SCHEMA, kind: kind.into(), config: config.clone(), body }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<(), ReportError> {
        let io = |e: std::io::Error| ReportError::Io(path.display().to_string(), e.to_string());
        if let Some(d) = path.parent() {
            std::fs::create_dir_all(d).map_err(io)?;
        }
        // Write then rename, so an interrupted run never leaves half a file.
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, self.to_json()).map_err(io)?;
        std::fs::rename(&tmp, path).map_err(io)
    }
}

impl<T: DeserializeOwned> Envelope<T> {
    pub fn read(path: &Path, kind: &str) -> Result<Envelope<T>, ReportError> {
        let name = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| ReportError::Io(name.clone(), e.to_string()))?;
        let fmt = |m: String| ReportError::Format(name.clone(), kind.into(), m);
        let head: serde_json::Value = serde_json::from_str(&text).map_err(|e| fmt(e.to_string()))?;
        if head.get("magic").and_then(|v| v.as_str()) != Some(MAGIC) {
            return Err(fmt("missing magic".into()));
        }
        if head.get("schema").and_then(|v| v.as_u64()) != Some(SCHEMA as u64) {
            return Err(fmt(format!("schema {} expected", SCHEMA)));
        }
        if head.get("kind").and_then(|v| v.as_str()) != Some(kind) {
            return Err(fmt("wrong kind".into()));
        }
        serde_json::from_value(head).map_err(|e| fmt(e.to_string()))
    }
}

/// Extracted `beta`: the nested chain and its final cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// First `x` the sieve processed.
    pub q0: u64,
    pub q_max: u64,
    /// Nested chain, root `[0, 1]` first, one element per block level.
    pub beta_interval: Vec<DyadicInterval>,
    /// Endpoints of the final cell as exact `p/q`.
    pub beta_lo: String,
    pub beta_hi: String,
    /// Exact decimal midpoint of the final cell.
    pub beta_mid: String,
    /// Filled when the construction also verified the witness.
    pub verified_range: Option<[u64; 2]>,
    pub inf_value: Option<[f64; 2]>,
    pub verified: Option<bool>,
}

impl Witness {
    pub fn cell(&self) -> Option<&DyadicInterval> {
        self.beta_interval.last()
    }

    pub fn attach(&mut self, v: &VerifyReport) {
        self.verified_range = Some([v.from, v.to]);
        self.inf_value = v.min_value;
        self.verified = Some(v.pass);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub progress: SweepProgress,
}

pub const KIND_CHECK: &str = "admissibility-report";
pub const KIND_CONSTRUCT: &str = "construct-report";
pub const KIND_WITNESS: &str = "witness";
pub const KIND_CHECKPOINT: &str = "checkpoint";
pub const KIND_VERIFY: &str = "verify-report";
pub const KIND_ORACLE: &str = "oracle-report";
