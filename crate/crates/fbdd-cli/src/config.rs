//! Experiment configuration: a JSON file plus command-line overrides,
//! with the flags taking precedence.

use std::path::Path;

use serde::Deserialize;

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub experiment: Option<String>,
    pub protocols: Option<Vec<String>>,
    pub omega_z: Option<f64>,
    pub eps_x: Option<f64>,
    pub eps_y: Option<f64>,
    pub eps_z: Option<f64>,
    pub t_total: Option<f64>,
    pub t_c: Option<f64>,
    pub delta_t: Option<f64>,
    pub cycles: Option<usize>,
    pub trials: Option<usize>,
    pub iterations: Option<usize>,
    pub seed: Option<u64>,
    pub eta_x: Option<f64>,
    pub eta_z: Option<f64>,
    pub mode: Option<String>,
    pub grid: Option<Vec<f64>>,
    pub axis: Option<String>,
    pub matrix_file: Option<String>,
    pub ds: Option<usize>,
    pub de: Option<usize>,
    pub output_path: Option<String>,
    pub format: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {}", path.display(), e))?;
        let cfg: FileConfig = serde_json::from_str(&text)
            .map_err(|e| anyhow::anyhow!("invalid config {}: {}", path.display(), e))?;
        Ok(cfg)
    }

    /// Reject a config whose `experiment` field names a different command.
    pub fn check_experiment(&self, command: &str) -> anyhow::Result<()> {
        if let Some(exp) = &self.experiment {
            if exp != command {
                anyhow::bail!(
                    "config declares experiment '{}' but the '{}' command was invoked",
                    exp,
                    command
                );
            }
        }
        Ok(())
    }
}

/// Merge precedence: flag value, then config value, then default.
pub fn pick<T: Clone>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

pub fn pick_opt<T: Clone>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}
