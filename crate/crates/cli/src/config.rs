use std::fs;
use std::path::{Path, PathBuf};

use opuc_core::weights::{WeightDef, WeightSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const SCHEMA: &str = "opuc-output/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub weight: WeightDef,
    pub n_list: Vec<usize>,
    /// Number of Neumann terms.
    #[serde(rename = "K", default = "default_terms")]
    pub k: usize,
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(rename = "N_quad", default)]
    pub n_quad: Option<usize>,
    pub outputs: PathBuf,
    #[serde(default)]
    pub format: Format,
    /// Overrides the radius `rho` the weight would otherwise report.
    #[serde(default)]
    pub rho: Option<f64>,
}

fn default_terms() -> usize {
    3
}

/// A parsed configuration together with its hash and the weight it describes.
pub struct Loaded {
    pub config: RunConfig,
    pub hash: String,
    pub weight: WeightSpec,
}

impl Loaded {
    pub fn n_max(&self) -> usize {
        *self.config.n_list.last().unwrap()
    }

    /// `rho` from the config if given, else the weight's declared or estimated radius.
    pub fn rho(&self, estimated: f64) -> f64 {
        self.config.rho.or(self.weight.base().rho_declared).unwrap_or(estimated)
    }

    pub fn manifest(&self, command: &str) -> Manifest {
        Manifest {
            schema: SCHEMA.into(),
            command: command.into(),
            config_sha256: self.hash.clone(),
            opuc_core: opuc_core::VERSION.into(),
            opuc_cli: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub schema: String,
    pub command: String,
    pub config_sha256: String,
    pub opuc_core: String,
    pub opuc_cli: String,
}

pub fn load(path: &Path) -> CliResult<Loaded> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let config: RunConfig = serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    validate(&config)?;
    let weight = WeightSpec::from_def(&config.weight).map_err(|e| CliError::Validation(e.to_string()))?;
    let canonical = serde_json::to_vec(&config).expect("config serializes");
    let hash = Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect();
    Ok(Loaded { config, hash, weight })
}

fn validate(c: &RunConfig) -> CliResult<()> {
    let bad = |m: String| Err(CliError::Validation(m));
    if c.n_list.is_empty() {
        return bad("n_list is empty".into());
    }
    if c.n_list[0] == 0 {
        return bad("degrees must be positive".into());
    }
    if c.n_list.windows(2).any(|w| w[0] >= w[1]) {
        return bad("n_list must be strictly increasing".into());
    }
    if c.k == 0 {
        return bad("K must be at least 1".into());
    }
    if let Some(r) = c.r {
        if !(r > 0.0 && r < 1.0) {
            return bad(format!("r = {r} is not in (0, 1)"));
        }
    }
    if let Some(q) = c.n_quad {
        if q < 2 * c.n_list.last().unwrap() + 2 {
            return bad(format!("N_quad = {q} is too small for the requested degrees"));
        }
    }
    if let Some(rho) = c.rho {
        if !(0.0..1.0).contains(&rho) {
            return bad(format!("rho = {rho} is not in [0, 1)"));
        }
    }
    Ok(())
}
