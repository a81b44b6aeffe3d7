use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use torvar::VarietyKind;

/// One experiment: seeded pairs on one variety at one geometry.
///
/// Loadable from TOML or JSON (`--config`); command-line flags override
/// individual fields afterwards.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub variety: VarietyKind,
    pub n: usize,
    pub m: usize,
    pub delta: f64,
    /// locality constant handed to the builders
    pub k_m: f64,
    pub seed: u64,
    pub samples_per_segment: usize,
    pub trials: usize,
    /// eth radius for drawing the second tuple of each pair; when unset the
    /// runner uses `delta` (`delta/2` on the disk, matching the builder's
    /// precondition)
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair_radius: Option<f64>,
    /// write one `trial_<k>_trace.csv` per built path next to the report
    pub trace: bool,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            variety: VarietyKind::Cube,
            n: 8,
            m: 2,
            delta: 0.05,
            k_m: 4.0,
            seed: 0,
            samples_per_segment: 256,
            trials: 10,
            pair_radius: None,
            trace: false,
            out: PathBuf::from("torvar-out"),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            bail!("n must be >= 1, got {}", self.n);
        }
        if self.m < 1 {
            bail!("m must be >= 1, got {}", self.m);
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            bail!("delta must lie in (0, 1], got {}", self.delta);
        }
        if self.trials < 1 {
            bail!("trials must be >= 1, got {}", self.trials);
        }
        if !self.k_m.is_finite() || self.k_m < 0.0 {
            bail!("k_m must be a finite nonnegative real, got {}", self.k_m);
        }
        if let Some(r) = self.pair_radius {
            if !r.is_finite() || r < 0.0 {
                bail!("pair_radius must be a finite nonnegative real, got {r}");
            }
        }
        Ok(())
    }

    /// Radius used to draw the second tuple of each pair.
    pub fn effective_pair_radius(&self) -> f64 {
        self.pair_radius.unwrap_or(match self.variety {
            VarietyKind::Disk => self.delta / 2.0,
            _ => self.delta,
        })
    }

    /// Load from a `.toml` or `.json` file, chosen by extension.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ExperimentConfig = match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => toml::from_str(&text)
                .with_context(|| format!("parsing TOML config {}", path.display()))?,
            Some("json") => serde_json::from_str(&text)
                .with_context(|| format!("parsing JSON config {}", path.display()))?,
            other => bail!(
                "config must be a .toml or .json file, got {:?} ({})",
                other.unwrap_or("none"),
                path.display()
            ),
        };
        Ok(cfg)
    }
}
