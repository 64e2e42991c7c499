//! Run configuration: a single JSON document with the keys `population`,
//! `io_table`, `policy`, `technologies`, `durables`, `horizon_quarters`,
//! `seed` and `output_dir`, plus an optional `sweep` block.
//!
//! Relative paths are resolved against the directory holding the config
//! file. The seed has no default.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::calibration::SweepSpec;
use crate::diffusion::{DiffusionError, DurableKind};
use crate::economy::{init_state, EconomyState, InitError, PolicySettings, Technology};
use crate::io_table::{IoTable, IoTableError};
use crate::population::{
    build_population, impute_wealth_tail, parse_microdata, FirmSizeDistribution, PopulationConfig,
    PopulationError, TailImputationConfig,
};
use crate::techlearn::{calibrate_exponent, AdoptionCurve, TechCurve, TechError, TechState};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("referenced file does not exist: {0}")]
    MissingPath(PathBuf),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Population(#[from] PopulationError),
    #[error(transparent)]
    Io(#[from] IoTableError),
    #[error(transparent)]
    Tech(#[from] TechError),
    #[error(transparent)]
    Durable(#[from] DiffusionError),
    #[error(transparent)]
    Init(#[from] InitError),
}

fn default_propensity() -> f64 {
    0.2
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationBlock {
    /// Micro-record CSV.
    pub microdata: PathBuf,
    pub n_households: usize,
    pub n_firms: usize,
    pub firm_size: FirmSizeDistribution,
    #[serde(default = "default_propensity")]
    pub propensity_to_consume: f64,
    #[serde(default)]
    pub tail_imputation: Option<TailImputationConfig>,
}

/// Pins the learning exponent so the curve reaches `cost` at
/// `cumulative_ratio` × x0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostAnchor {
    pub cost: f64,
    pub cumulative_ratio: f64,
}

/// A technology curve. Give either `learning_exponent` or `anchor`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TechnologyBlock {
    pub name: String,
    pub c0: f64,
    pub floor: f64,
    pub x0: f64,
    #[serde(default)]
    pub learning_exponent: Option<f64>,
    #[serde(default)]
    pub anchor: Option<CostAnchor>,
    #[serde(default)]
    pub adoption: Option<AdoptionCurve>,
    /// Cost units of deployment bought per USD of green purchases.
    #[serde(default = "one")]
    pub purchase_scale: f64,
}

impl TechnologyBlock {
    pub fn curve(&self) -> Result<TechCurve, ConfigError> {
        let mut curve = TechCurve {
            name: self.name.clone(),
            c0: self.c0,
            floor: self.floor,
            learning_exponent: 0.0,
            x0: self.x0,
        };
        curve.learning_exponent = match (self.learning_exponent, self.anchor) {
            (Some(b), None) => b,
            (None, Some(a)) => calibrate_exponent(&curve, a.cumulative_ratio * self.x0, a.cost)?,
            _ => {
                return Err(ConfigError::Invalid(format!(
                    "technology {}: give exactly one of learning_exponent or anchor",
                    self.name
                )))
            }
        };
        curve.validate()?;
        Ok(curve)
    }

    pub fn build(&self) -> Result<Technology, ConfigError> {
        if let Some(a) = &self.adoption {
            a.validate()?;
        }
        if !(self.purchase_scale >= 0.0) {
            return Err(ConfigError::Invalid(format!(
                "technology {}: purchase_scale must be >= 0",
                self.name
            )));
        }
        Ok(Technology {
            state: TechState::new(self.curve()?)?,
            adoption: self.adoption,
            purchase_scale: self.purchase_scale,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub population: PopulationBlock,
    pub io_table: PathBuf,
    #[serde(default)]
    pub policy: PolicySettings,
    #[serde(default)]
    pub technologies: Vec<TechnologyBlock>,
    #[serde(default)]
    pub durables: Vec<DurableKind>,
    pub horizon_quarters: u32,
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

impl RunConfig {
    /// Reads, resolves and checks a config file.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: RunConfig = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.check()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &Path| {
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };
        self.io_table = join(&self.io_table);
        self.population.microdata = join(&self.population.microdata);
        self.output_dir = join(&self.output_dir);
    }

    /// Structural checks that need no simulation.
    pub fn check(&self) -> Result<(), ConfigError> {
        for p in [&self.io_table, &self.population.microdata] {
            if !p.is_file() {
                return Err(ConfigError::MissingPath(p.clone()));
            }
        }
        if self.horizon_quarters == 0 {
            return Err(ConfigError::Invalid("horizon_quarters must be >= 1".into()));
        }
        if let Some(t) = &self.population.tail_imputation {
            t.validate()?;
        }
        let mut names: Vec<&str> = self.technologies.iter().map(|t| t.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(ConfigError::Invalid("duplicate technology name".into()));
        }
        for d in &self.durables {
            if let Some(r) = &d.tech_ref {
                if !self.technologies.iter().any(|t| &t.name == r) {
                    return Err(ConfigError::Invalid(format!(
                        "durable {} refers to unknown technology {r}",
                        d.name
                    )));
                }
            }
        }
        if self.durables.len() > 32 {
            return Err(ConfigError::Invalid("at most 32 durable kinds".into()));
        }
        Ok(())
    }

    /// SHA-256 over the canonical config with input files replaced by the
    /// hashes of their contents. The output directory and the sweep block
    /// are left out.
    pub fn hash(&self) -> Result<String, ConfigError> {
        let mut v = serde_json::to_value(self)?;
        let obj = v.as_object_mut().expect("config serializes to an object");
        obj.remove("output_dir");
        obj.remove("sweep");
        obj.insert("io_table".into(), file_hash(&self.io_table)?.into());
        obj.get_mut("population")
            .and_then(|p| p.as_object_mut())
            .expect("population block")
            .insert(
                "microdata".into(),
                file_hash(&self.population.microdata)?.into(),
            );
        Ok(sha256_hex(serde_json::to_string(&v)?.as_bytes()))
    }

    /// Builds the t = 0 economy.
    pub fn build_state(&self) -> Result<EconomyState, ConfigError> {
        let io = IoTable::from_csv(&self.io_table)?;
        let s = io.n_sectors();
        let mut records = parse_microdata(&self.population.microdata)?;
        if let Some(tail) = &self.population.tail_imputation {
            records = impute_wealth_tail(&records, tail, self.seed)?;
        }
        let pop = PopulationConfig {
            n_households: self.population.n_households,
            n_firms: self.population.n_firms,
            n_sectors: s,
            seed: self.seed,
            firm_size: self.population.firm_size,
            propensity_to_consume: self.population.propensity_to_consume,
        };
        let (households, firms) = build_population(&records, &pop)?;
        let tech = self
            .technologies
            .iter()
            .map(TechnologyBlock::build)
            .collect::<Result<Vec<_>, _>>()?;
        for d in &self.durables {
            d.validate(s)?;
        }
        Ok(init_state(
            households,
            firms,
            io,
            &self.policy,
            tech,
            self.durables.clone(),
            self.seed,
        )?)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_hash(path: &Path) -> Result<String, ConfigError> {
    let bytes = fs::read(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(sha256_hex(&bytes))
}
