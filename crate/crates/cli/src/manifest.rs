//! Run manifests: the full effective configuration of a run plus the
//! outcome of every batch item. Replaying a manifest repeats the run.

use std::path::{Path, PathBuf};

use edbsw_core::baselines::BaselineParams;
use edbsw_core::{PipelineConfig, WaveletSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::io::atomic_write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Detect,
    Compare,
    Ablate,
}

/// How the entropy column is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EntropyMode {
    /// Binary entropy of the fraction of nonzero pixels.
    #[default]
    Binary,
    /// 256-bin histogram entropy divided by 8 bits.
    Histogram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
}

/// Outcome of one (input, operator, wavelet) item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemStatus {
    pub input: PathBuf,
    pub operator: String,
    pub wavelet: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub command: Command,
    pub inputs: Vec<PathBuf>,
    pub ground_truth_dir: Option<PathBuf>,
    /// Operator column values in the order they were requested.
    pub operators: Vec<String>,
    pub wavelets: Vec<WaveletSpec>,
    /// `ground_truth`, `operator:<name>`, or `none` for single detections.
    pub reference: String,
    pub entropy: EntropyMode,
    pub pipeline: PipelineConfig,
    pub baseline: BaselineParams,
    pub output: PathBuf,
    pub trace_dir: Option<PathBuf>,
    #[serde(default)]
    pub items: Vec<ItemStatus>,
}

impl RunManifest {
    /// Side-file location for a given output path.
    pub fn path_for(output: &Path) -> PathBuf {
        let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(".manifest.json");
        output.with_file_name(name)
    }

    pub fn write(&self) -> CliResult<PathBuf> {
        let path = Self::path_for(&self.output);
        let text = serde_json::to_string_pretty(self).expect("manifest serialises");
        atomic_write(&path, text.as_bytes())?;
        Ok(path)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read manifest {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::input(format!("invalid manifest {}: {e}", path.display())))
    }

    pub fn failures(&self) -> usize {
        self.items.iter().filter(|i| i.status == Status::Failed).count()
    }
}
