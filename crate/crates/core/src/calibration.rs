//! Grid sweep over free behavioral parameters, ranking each grid point by
//! the weighted squared distance of its baseline moments from targets.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::economy::StepError;
use crate::metrics::IndicatorFrame;
use crate::runner::{simulate, Fault};

pub const RESULTS_FILE: &str = "sweep_results.json";

fn default_budget() -> usize {
    256
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Moment {
    MeanInflation,
    MeanUnemployment,
    MeanGdpGrowth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationTarget {
    pub moment: Moment,
    pub target: f64,
    pub weight: f64,
}

/// `points` evenly spaced values from `lower` to `upper` inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterRange {
    /// Field name (`markup_drift`) or dotted config path
    /// (`policy.behavior.markup_drift`).
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub points: usize,
}

impl ParameterRange {
    pub fn value(&self, k: usize) -> f64 {
        if k + 1 == self.points {
            return self.upper;
        }
        self.lower + (self.upper - self.lower) * k as f64 / (self.points - 1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub parameters: Vec<ParameterRange>,
    pub targets: Vec<CalibrationTarget>,
    pub burn_in: u32,
    pub horizon: u32,
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub budget: usize,
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("grid has {size} points, budget is {budget}")]
    BudgetExceeded { size: usize, budget: usize },
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("invalid sweep: {0}")]
    Invalid(String),
    #[error("grid point {index} {params:?}: {source}")]
    Audit {
        index: usize,
        params: Vec<(String, f64)>,
        #[source]
        source: StepError,
    },
    #[error("grid point {index}: {source}")]
    Run {
        index: usize,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub fn parse_sweep_spec(text: &str) -> Result<SweepSpec, SweepError> {
    let spec: SweepSpec = serde_json::from_str(text)?;
    spec.validate()?;
    Ok(spec)
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.horizon <= self.burn_in {
            return Err(SweepError::Invalid("horizon must exceed burn_in".into()));
        }
        for p in &self.parameters {
            if p.points < 2 {
                return Err(SweepError::Invalid(format!(
                    "{}: at least 2 grid points",
                    p.name
                )));
            }
            if !(p.lower.is_finite() && p.upper.is_finite()) {
                return Err(SweepError::Invalid(format!(
                    "{}: bounds must be finite",
                    p.name
                )));
            }
        }
        if self
            .targets
            .iter()
            .any(|t| !(t.weight >= 0.0) || !t.target.is_finite())
        {
            return Err(SweepError::Invalid(
                "target weights must be >= 0 and targets finite".into(),
            ));
        }
        Ok(())
    }

    /// Number of grid points; an empty parameter list is a single point.
    pub fn grid_size(&self) -> usize {
        self.parameters.iter().map(|p| p.points).product()
    }

    /// Parameter values of grid point `index`; the last parameter varies
    /// fastest.
    pub fn point(&self, mut index: usize) -> Vec<(String, f64)> {
        let mut out = vec![(String::new(), 0.0); self.parameters.len()];
        for (slot, p) in out.iter_mut().zip(&self.parameters).rev() {
            *slot = (p.name.clone(), p.value(index % p.points));
            index /= p.points;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean_inflation: f64,
    pub mean_unemployment: f64,
    /// Mean quarterly real GDP growth (log nominal growth less inflation).
    pub mean_gdp_growth: f64,
}

impl Moments {
    /// Moments over quarters `burn_in..`.
    pub fn of(frames: &[IndicatorFrame], burn_in: u32) -> Self {
        let start = (burn_in as usize).min(frames.len());
        let tail = &frames[start..];
        let n = tail.len().max(1) as f64;
        let mut growth = Vec::new();
        for i in start.max(1)..frames.len() {
            let (a, b) = (frames[i - 1].gdp, frames[i].gdp);
            if a > 0.0 && b > 0.0 {
                growth.push((b / a).ln() - frames[i].inflation);
            }
        }
        Self {
            mean_inflation: tail.iter().map(|f| f.inflation).sum::<f64>() / n,
            mean_unemployment: tail.iter().map(|f| f.unemployment).sum::<f64>() / n,
            mean_gdp_growth: growth.iter().sum::<f64>() / growth.len().max(1) as f64,
        }
    }

    pub fn get(&self, m: Moment) -> f64 {
        match m {
            Moment::MeanInflation => self.mean_inflation,
            Moment::MeanUnemployment => self.mean_unemployment,
            Moment::MeanGdpGrowth => self.mean_gdp_growth,
        }
    }
}

pub fn loss(moments: &Moments, targets: &[CalibrationTarget]) -> f64 {
    targets
        .iter()
        .map(|t| t.weight * (moments.get(t.moment) - t.target).powi(2))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub index: usize,
    pub params: Vec<(String, f64)>,
    pub config_hash: String,
    pub moments: Moments,
    pub loss: f64,
    #[serde(skip)]
    pub cached: bool,
}

/// Cached baseline frames for one (config hash, seed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub config_hash: String,
    pub seed: u64,
    pub frames: Vec<IndicatorFrame>,
}

pub fn cache_path(root: &Path, config_hash: &str, seed: u64) -> PathBuf {
    root.join("cache")
        .join(config_hash)
        .join(format!("{seed}.json"))
}

const SEARCH: [&str; 3] = ["policy.behavior", "policy", "population"];

/// Sets a numeric config field by name or dotted path.
pub fn set_parameter(config: &mut Value, name: &str, value: f64) -> Result<(), SweepError> {
    let unknown = || SweepError::UnknownParameter(name.to_string());
    let path = if name.contains('.') {
        name.to_string()
    } else {
        SEARCH
            .iter()
            .map(|p| format!("{p}.{name}"))
            .find(|p| lookup(config, p).is_some_and(Value::is_number))
            .ok_or_else(unknown)?
    };
    let slot = lookup_mut(config, &path)
        .filter(|v| v.is_number())
        .ok_or_else(unknown)?;
    *slot = if slot.is_u64() && value >= 0.0 && value.fract() == 0.0 {
        Value::from(value as u64)
    } else {
        Value::from(value)
    };
    Ok(())
}

fn lookup<'a>(v: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('.').try_fold(v, |v, k| v.get(k))
}

fn lookup_mut<'a>(v: &'a mut Value, path: &str) -> Option<&'a mut Value> {
    path.split('.').try_fold(v, |v, k| v.get_mut(k))
}

/// The config run at one grid point: base config with the sweep's seed,
/// horizon and parameter values.
pub fn point_config(
    base: &RunConfig,
    spec: &SweepSpec,
    params: &[(String, f64)],
) -> Result<RunConfig, SweepError> {
    let mut v = serde_json::to_value(base)?;
    for (name, value) in params {
        set_parameter(&mut v, name, *value)?;
    }
    let mut cfg: RunConfig =
        serde_json::from_value(v).map_err(|e| SweepError::Invalid(e.to_string()))?;
    cfg.seed = spec.seed;
    cfg.horizon_quarters = spec.horizon;
    cfg.sweep = None;
    Ok(cfg)
}

/// Runs every grid point (in parallel) and returns results sorted by loss,
/// ties broken by grid index. With `cache_root`, baseline frames are read
/// from and written to `cache_root/cache/<config-hash>/<seed>.json`.
pub fn sweep(
    base: &RunConfig,
    spec: &SweepSpec,
    cache_root: Option<&Path>,
) -> Result<Vec<SweepResult>, SweepError> {
    sweep_with_fault(base, spec, cache_root, None)
}

pub fn sweep_with_fault(
    base: &RunConfig,
    spec: &SweepSpec,
    cache_root: Option<&Path>,
    fault: Option<Fault>,
) -> Result<Vec<SweepResult>, SweepError> {
    spec.validate()?;
    let size = spec.grid_size();
    if size > spec.budget {
        return Err(SweepError::BudgetExceeded {
            size,
            budget: spec.budget,
        });
    }
    let points: Vec<(usize, Vec<(String, f64)>, RunConfig)> = (0..size)
        .map(|i| {
            let params = spec.point(i);
            point_config(base, spec, &params).map(|cfg| (i, params, cfg))
        })
        .collect::<Result<_, _>>()?;

    let outcomes: Vec<Result<SweepResult, SweepError>> = points
        .into_par_iter()
        .map(|(index, params, cfg)| run_point(index, params, &cfg, spec, cache_root, fault))
        .collect();
    let mut results = Vec::with_capacity(size);
    for r in outcomes {
        results.push(r?);
    }
    results.sort_by(|a, b| a.loss.total_cmp(&b.loss).then(a.index.cmp(&b.index)));
    Ok(results)
}

fn run_point(
    index: usize,
    params: Vec<(String, f64)>,
    cfg: &RunConfig,
    spec: &SweepSpec,
    cache_root: Option<&Path>,
    fault: Option<Fault>,
) -> Result<SweepResult, SweepError> {
    let config_hash = cfg.hash()?;
    let path = cache_root.map(|r| cache_path(r, &config_hash, cfg.seed));
    let cached = match &path {
        Some(p) if fault.is_none() => read_cache(p, &config_hash, cfg.seed),
        _ => None,
    };
    let (frames, was_cached) = match cached {
        Some(frames) => (frames, true),
        None => {
            let run_err = |source: ConfigError| SweepError::Run {
                index,
                source: Box::new(source),
            };
            let state = cfg.build_state().map_err(run_err)?;
            let out =
                simulate(state, cfg.horizon_quarters, None, fault).map_err(
                    |source| match source {
                        StepError::Audit { .. } => SweepError::Audit {
                            index,
                            params: params.clone(),
                            source,
                        },
                        other => SweepError::Run {
                            index,
                            source: Box::new(other),
                        },
                    },
                )?;
            if let Some(p) = &path {
                write_cache(p, &config_hash, cfg.seed, &out.frames)?;
            }
            (out.frames, false)
        }
    };
    let moments = Moments::of(&frames, spec.burn_in);
    Ok(SweepResult {
        index,
        params,
        config_hash,
        loss: loss(&moments, &spec.targets),
        moments,
        cached: was_cached,
    })
}

fn read_cache(path: &Path, config_hash: &str, seed: u64) -> Option<Vec<IndicatorFrame>> {
    let text = fs::read_to_string(path).ok()?;
    let entry: CacheEntry = serde_json::from_str(&text).ok()?;
    (entry.config_hash == config_hash && entry.seed == seed).then_some(entry.frames)
}

fn write_cache(
    path: &Path,
    config_hash: &str,
    seed: u64,
    frames: &[IndicatorFrame],
) -> Result<(), SweepError> {
    let io = |source| SweepError::Io {
        path: path.to_path_buf(),
        source,
    };
    fs::create_dir_all(path.parent().expect("cache file has a parent")).map_err(io)?;
    let entry = CacheEntry {
        config_hash: config_hash.to_string(),
        seed,
        frames: frames.to_vec(),
    };
    // Write then rename, so a reader never sees half a file.
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, serde_json::to_string(&entry)?).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

pub fn write_results(path: &Path, results: &[SweepResult]) -> Result<(), SweepError> {
    let io = |source| SweepError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(path, serde_json::to_string_pretty(results)? + "\n").map_err(io)
}
