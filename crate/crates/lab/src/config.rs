//! Run configuration, embedded in every output.

use serde::{Deserialize, Serialize};

use crate::grid::FastPath;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Everything that determines a run's output. Thread count is left out on
/// purpose: results do not depend on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(rename = "N")]
    pub n: Vec<usize>,
    pub alpha: Vec<f64>,
    pub grid_budget: u64,
    pub tol: Option<f64>,
    pub seed: u64,
    pub out: Option<String>,
    pub format: Format,
    pub fast_path: FastPath,
    /// Command-specific arguments.
    pub args: serde_json::Map<String, serde_json::Value>,
}

impl RunConfig {
    /// Rejects values no command accepts.
    pub fn validate(&self) -> anyhow::Result<()> {
        if let Some(&n) = self.n.iter().find(|&&n| n == 0) {
            anyhow::bail!("--N must be positive, got {n}");
        }
        if let Some(a) = self.alpha.iter().find(|a| !a.is_finite()) {
            anyhow::bail!("--alpha must be finite, got {a}");
        }
        if let Some(t) = self.tol {
            if !(t >= 0.0) {
                anyhow::bail!("--tol must be nonnegative, got {t}");
            }
        }
        if self.grid_budget == 0 {
            anyhow::bail!("--grid-budget must be positive");
        }
        Ok(())
    }
}
