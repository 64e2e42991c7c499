//! Whole runs: build the economy from a config, step it over the horizon
//! with an optional scenario, write the output directory, and compare two
//! output directories.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{file_hash, sha256_hex, ConfigError, RunConfig};
use crate::economy::{AuditError, EconomyState, StepError, StepReport, Subsystem};
use crate::metrics::{self, cb7_window, DeltaReport, IndicatorFrame, MetricsError};
use crate::scenario::{parse_scenario, ScenarioError, ScenarioSpec};

pub const MANIFEST: &str = "manifest.json";
pub const INDICATORS_CSV: &str = "indicators.csv";
pub const INDICATORS_JSON: &str = "indicators.json";
pub const DIAGNOSTICS_CSV: &str = "diagnostics.csv";
pub const BALANCE_SHEET: &str = "balance_sheet.json";
pub const DELTA_CSV: &str = "delta.csv";
pub const DELTA_JSON: &str = "delta.json";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Step(#[from] StepError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl RunError {
    /// 1 parse and input errors, 2 audit failure, 3 infeasible IO table,
    /// 4 horizon mismatch.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Step(StepError::Audit { .. }) => 2,
            RunError::Step(StepError::InfeasibleIo { .. })
            | RunError::Scenario(ScenarioError::InfeasibleIo(_)) => 3,
            RunError::Metrics(MetricsError::HorizonMismatch { .. }) => 4,
            _ => 1,
        }
    }

    pub fn audit(&self) -> Option<&AuditError> {
        match self {
            RunError::Step(StepError::Audit { source, .. }) => Some(source),
            _ => None,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Corrupts the books by `cents` in one quarter, to exercise the audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fault {
    pub quarter: u32,
    pub cents: i64,
}

/// Per-quarter rates and flows that are not headline indicators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuarterDiagnostics {
    pub t: u32,
    pub policy_rate: f64,
    pub spread: f64,
    pub government_rate: f64,
    pub debt_ratio: f64,
    pub audit_residual_cents: i128,
    pub issuance_cents: i128,
    pub consumption: f64,
    pub green_investment: f64,
    pub lever_a: f64,
    pub lever_b: f64,
    pub adoption: f64,
    pub wages: f64,
    pub taxes: f64,
    pub transfers: f64,
    pub subsidies: f64,
    pub dividends: f64,
    pub deposit_interest: f64,
    pub government_interest: f64,
    pub employed: usize,
}

impl QuarterDiagnostics {
    fn from_report(r: &StepReport, employed: usize) -> Self {
        let f = &r.flows;
        Self {
            t: r.frame.t,
            policy_rate: r.policy_rate,
            spread: r.spread,
            government_rate: r.government_rate,
            debt_ratio: r.frame.debt_ratio,
            audit_residual_cents: r.audit.residual_cents,
            issuance_cents: r.audit.issuance,
            consumption: f.consumption.as_currency(),
            green_investment: f.green_investment().as_currency(),
            lever_a: f.lever_a.as_currency(),
            lever_b: f.lever_b.as_currency(),
            adoption: f.adoption.as_currency(),
            wages: f.wages.as_currency(),
            taxes: f.taxes.as_currency(),
            transfers: f.transfers.as_currency(),
            subsidies: f.subsidies.as_currency(),
            dividends: f.dividends.as_currency(),
            deposit_interest: f.deposit_interest.as_currency(),
            government_interest: f.government_interest.as_currency(),
            employed,
        }
    }
}

/// Final-state balance sheets by sector, in currency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceSheetSummary {
    pub t: u32,
    pub households: usize,
    pub household_deposits: f64,
    pub household_illiquid_wealth: f64,
    pub households_overdrawn: usize,
    pub firms: usize,
    pub firm_deposits: f64,
    pub firm_green_capital: f64,
    pub firms_overdrawn: usize,
    pub government_deposits: f64,
    pub debt_ratio: f64,
    /// Signed sum of all deposits.
    pub money_stock: f64,
    pub employed: usize,
    pub durable_adopters: Vec<(String, usize)>,
    pub technology_costs: Vec<(String, f64)>,
}

impl BalanceSheetSummary {
    pub fn of(state: &EconomyState) -> Self {
        let cur = |c: crate::Cents| c.as_currency();
        Self {
            t: state.t,
            households: state.households.len(),
            household_deposits: cur(state.households.iter().map(|h| h.deposits).sum()),
            household_illiquid_wealth: cur(state
                .households
                .iter()
                .map(|h| h.illiquid_wealth)
                .sum()),
            households_overdrawn: state
                .households
                .iter()
                .filter(|h| h.deposits.is_negative())
                .count(),
            firms: state.firms.len(),
            firm_deposits: cur(state.firms.iter().map(|f| f.deposits).sum()),
            firm_green_capital: cur(state.firms.iter().map(|f| f.green_capital).sum()),
            firms_overdrawn: state
                .firms
                .iter()
                .filter(|f| f.deposits.is_negative())
                .count(),
            government_deposits: cur(state.government.deposits),
            debt_ratio: state.debt_ratio(),
            money_stock: state.money_stock() as f64 / 100.0,
            employed: state.employed(),
            durable_adopters: state
                .durables
                .iter()
                .enumerate()
                .map(|(k, d)| {
                    (
                        d.name.clone(),
                        state.households.iter().filter(|h| h.has_adopted(k)).count(),
                    )
                })
                .collect(),
            technology_costs: state
                .tech
                .iter()
                .map(|t| (t.state.curve.name.clone(), t.state.current_cost))
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub frames: Vec<IndicatorFrame>,
    pub diagnostics: Vec<QuarterDiagnostics>,
    pub final_state: EconomyState,
}

/// Steps `state` for `horizon` quarters.
pub fn simulate(
    mut state: EconomyState,
    horizon: u32,
    scenario: Option<&ScenarioSpec>,
    fault: Option<Fault>,
) -> Result<RunOutput, StepError> {
    let mut frames = Vec::with_capacity(horizon as usize);
    let mut diagnostics = Vec::with_capacity(horizon as usize);
    for _ in 0..horizon {
        let t = state.t;
        let report = match fault {
            Some(f) if f.quarter == t => state.step_with(scenario, |s| {
                s.ledger.inject_fault(Subsystem::Fiscal, f.cents)
            })?,
            _ => state.step(scenario)?,
        };
        diagnostics.push(QuarterDiagnostics::from_report(&report, state.employed()));
        frames.push(report.frame);
    }
    Ok(RunOutput {
        frames,
        diagnostics,
        final_state: state,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRecord {
    pub path: PathBuf,
    pub name: String,
    pub sha256: String,
    pub horizon_quarters: u32,
}

/// Everything needed to repeat a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config_path: Option<PathBuf>,
    pub config_hash: String,
    pub seed: u64,
    pub horizon_quarters: u32,
    pub scenario: Option<ScenarioRecord>,
    pub io_table: InputRecord,
    pub microdata: InputRecord,
    /// Resolved config as run (seed override applied).
    pub config: RunConfig,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn read(dir: &Path) -> Result<Self, RunError> {
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// A scenario file with its content hash.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub path: PathBuf,
    pub spec: ScenarioSpec,
    pub sha256: String,
}

impl LoadedScenario {
    pub fn load(path: &Path) -> Result<Self, RunError> {
        let bytes = fs::read(path).map_err(io_err(path))?;
        let text = String::from_utf8_lossy(&bytes);
        Ok(Self {
            path: path.to_path_buf(),
            spec: parse_scenario(&text)?,
            sha256: sha256_hex(&bytes),
        })
    }
}

/// Runs `cfg` (with the optional scenario) and writes the output directory.
pub fn execute(
    cfg: &RunConfig,
    config_path: Option<&Path>,
    scenario: Option<&LoadedScenario>,
    out: &Path,
    fault: Option<Fault>,
) -> Result<Manifest, RunError> {
    let state = cfg.build_state()?;
    if let Some(sc) = scenario {
        sc.spec
            .check_sectors(state.n_sectors(), state.green_sector)?;
    }
    let config_hash = cfg.hash()?;
    let output = simulate(
        state,
        cfg.horizon_quarters,
        scenario.map(|s| &s.spec),
        fault,
    )?;

    fs::create_dir_all(out).map_err(io_err(out))?;
    metrics::write_indicators_csv(&out.join(INDICATORS_CSV), &output.frames)?;
    let p = out.join(INDICATORS_JSON);
    metrics::write_indicators_json(&p, &output.frames).map_err(io_err(&p))?;
    write_diagnostics_csv(&out.join(DIAGNOSTICS_CSV), &output.diagnostics)?;
    write_json(
        &out.join(BALANCE_SHEET),
        &BalanceSheetSummary::of(&output.final_state),
    )?;

    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_path: config_path.map(Path::to_path_buf),
        config_hash,
        seed: cfg.seed,
        horizon_quarters: cfg.horizon_quarters,
        scenario: scenario.map(|s| ScenarioRecord {
            path: s.path.clone(),
            name: s.spec.name.clone(),
            sha256: s.sha256.clone(),
            horizon_quarters: s.spec.horizon_quarters,
        }),
        io_table: InputRecord {
            path: cfg.io_table.clone(),
            sha256: file_hash(&cfg.io_table)?,
        },
        microdata: InputRecord {
            path: cfg.population.microdata.clone(),
            sha256: file_hash(&cfg.population.microdata)?,
        },
        config: cfg.clone(),
        outputs: [
            INDICATORS_CSV,
            INDICATORS_JSON,
            DIAGNOSTICS_CSV,
            BALANCE_SHEET,
        ]
        .map(String::from)
        .to_vec(),
    };
    write_json(&out.join(MANIFEST), &manifest)?;
    Ok(manifest)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), RunError> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n").map_err(io_err(path))
}

pub fn write_diagnostics_csv(path: &Path, rows: &[QuarterDiagnostics]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_diagnostics_csv(path: &Path) -> Result<Vec<QuarterDiagnostics>, csv::Error> {
    csv::Reader::from_path(path)?.deserialize().collect()
}

/// Outcome of comparing two run directories.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub report: DeltaReport,
    pub warnings: Vec<String>,
}

/// Scenario run minus baseline run, per quarter and averaged, with the
/// carbon-budget window average. Writes the delta files into `out`.
pub fn compare_dirs(baseline: &Path, scenario: &Path, out: &Path) -> Result<Comparison, RunError> {
    let (ma, mb) = (Manifest::read(baseline)?, Manifest::read(scenario)?);
    let mut warnings = Vec::new();
    if ma.horizon_quarters != mb.horizon_quarters {
        return Err(MetricsError::HorizonMismatch {
            baseline: ma.horizon_quarters as usize,
            scenario: mb.horizon_quarters as usize,
        }
        .into());
    }
    if ma.seed != mb.seed {
        warnings.push(format!("seeds differ: {} vs {}", ma.seed, mb.seed));
    }
    if ma.config_hash != mb.config_hash {
        warnings.push("config hashes differ".into());
    }
    let a = metrics::read_indicators_csv(&baseline.join(INDICATORS_CSV))?;
    let b = metrics::read_indicators_csv(&scenario.join(INDICATORS_CSV))?;
    let report = metrics::compare_runs(&a, &b, Some(cb7_window()))?;
    fs::create_dir_all(out).map_err(io_err(out))?;
    metrics::write_delta_csv(&out.join(DELTA_CSV), &report)?;
    let p = out.join(DELTA_JSON);
    metrics::write_delta_json(&p, &report).map_err(io_err(&p))?;
    Ok(Comparison { report, warnings })
}
