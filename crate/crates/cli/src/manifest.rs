//! Run manifests embedded in every output.

use serde::{Deserialize, Serialize};

use crate::commands::Command;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything needed to reproduce an output: the command with its full
/// parameter set, the seed, the artifact version and the timestamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Command,
    pub seed: u64,
    pub version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: Command, seed: u64) -> Self {
        Self { command, seed, version: ARTIFACT_VERSION.to_owned(), timestamp: now() }
    }

    /// Same manifest with the timestamp of an earlier run.
    pub fn with_timestamp(mut self, timestamp: String) -> Self {
        self.timestamp = timestamp;
        self
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Sidecar path for a CSV output.
pub fn sidecar_path(out: &std::path::Path) -> std::path::PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    name.into()
}
