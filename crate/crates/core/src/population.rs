//! Survey-style micro-records and synthetic population construction.
//!
//! Records are read from a pre-linked CSV, the top of the wealth
//! distribution is redrawn from a Pareto tail to correct for under-sampled
//! rich households, and the result is resampled by survey weight into the
//! simulator's households. Firms are laid out round-robin over sectors with
//! lognormal sizes.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::{Gamma, LogNormal, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::economy::agents::{Firm, Household};
use crate::money::Cents;
use crate::rng::{generator, Stream};

pub const N_REGIONS: u8 = 12;
const SHARE_TOLERANCE: f64 = 1e-9;
const FIXED_COLUMNS: [&str; 6] = [
    "record_id",
    "survey_weight",
    "gross_income",
    "net_wealth",
    "region_code",
    "household_size",
];

#[derive(Debug, Error)]
pub enum PopulationError {
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("row {line}: {reason}")]
    RowInvariantViolation { line: usize, reason: String },
    #[error("microdata file has no records")]
    EmptyFile,
    #[error("tail threshold undefined: net wealth is degenerate")]
    DegenerateTail,
    #[error("no records to build a population from")]
    EmptyRecords,
    #[error("{n_firms} firms cannot cover {n_sectors} sectors")]
    SectorUnderflow { n_firms: usize, n_sectors: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicroRecord {
    pub record_id: u64,
    pub survey_weight: f64,
    /// Currency per year.
    pub gross_income: f64,
    pub net_wealth: f64,
    pub region_code: u8,
    pub household_size: u32,
    pub expenditure_shares: Vec<f64>,
}

impl MicroRecord {
    fn validate(&self) -> Result<(), String> {
        if !(self.survey_weight > 0.0 && self.survey_weight.is_finite()) {
            return Err(format!(
                "survey_weight must be > 0, got {}",
                self.survey_weight
            ));
        }
        if !(self.gross_income >= 0.0 && self.gross_income.is_finite()) {
            return Err(format!(
                "gross_income must be >= 0, got {}",
                self.gross_income
            ));
        }
        if !self.net_wealth.is_finite() {
            return Err("net_wealth is not finite".into());
        }
        if self.household_size < 1 {
            return Err("household_size must be >= 1".into());
        }
        if !(1..=N_REGIONS).contains(&self.region_code) {
            return Err(format!(
                "region_code {} outside 1..={N_REGIONS}",
                self.region_code
            ));
        }
        if self.expenditure_shares.iter().any(|s| !(*s >= 0.0)) {
            return Err("expenditure shares must be non-negative".into());
        }
        let sum: f64 = self.expenditure_shares.iter().sum();
        if (sum - 1.0).abs() > SHARE_TOLERANCE {
            return Err(format!("expenditure shares sum to {sum}, expected 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailImputationConfig {
    pub tail_quantile: f64,
    pub pareto_alpha: f64,
    #[serde(default)]
    pub target_top_share: Option<f64>,
}

impl TailImputationConfig {
    pub fn validate(&self) -> Result<(), PopulationError> {
        if !(self.tail_quantile > 0.0 && self.tail_quantile < 1.0) {
            return Err(PopulationError::InvalidConfig(format!(
                "tail_quantile {} not in (0,1)",
                self.tail_quantile
            )));
        }
        if !(self.pareto_alpha > 1.0) {
            return Err(PopulationError::InvalidConfig(format!(
                "pareto_alpha {} must exceed 1",
                self.pareto_alpha
            )));
        }
        if let Some(s) = self.target_top_share {
            if !(s > 0.0 && s < 1.0) {
                return Err(PopulationError::InvalidConfig(format!(
                    "target_top_share {s} not in (0,1)"
                )));
            }
        }
        Ok(())
    }
}

/// Lognormal firm sizes: `mean` employees, `sigma` on the log scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FirmSizeDistribution {
    pub mean: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationConfig {
    pub n_households: usize,
    pub n_firms: usize,
    pub n_sectors: usize,
    pub seed: u64,
    pub firm_size: FirmSizeDistribution,
    pub propensity_to_consume: f64,
}

impl PopulationConfig {
    pub fn validate(&self) -> Result<(), PopulationError> {
        if self.n_households == 0 {
            return Err(PopulationError::InvalidConfig(
                "n_households must be >= 1".into(),
            ));
        }
        if self.n_sectors == 0 {
            return Err(PopulationError::InvalidConfig(
                "n_sectors must be >= 1".into(),
            ));
        }
        if self.n_firms < self.n_sectors {
            return Err(PopulationError::SectorUnderflow {
                n_firms: self.n_firms,
                n_sectors: self.n_sectors,
            });
        }
        if !(self.firm_size.mean > 0.0 && self.firm_size.sigma >= 0.0) {
            return Err(PopulationError::InvalidConfig(
                "firm size distribution needs mean > 0 and sigma >= 0".into(),
            ));
        }
        if !(self.propensity_to_consume > 0.0 && self.propensity_to_consume <= 1.0) {
            return Err(PopulationError::InvalidConfig(
                "propensity_to_consume must lie in (0,1]".into(),
            ));
        }
        Ok(())
    }
}

pub fn parse_microdata(path: &Path) -> Result<Vec<MicroRecord>, PopulationError> {
    let file = File::open(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));
    let headers = reader.headers()?.clone();
    let n_shares = check_header(&headers)?;

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i + 1;
        let row = row?;
        let record = parse_row(&row, n_shares)
            .and_then(|r| r.validate().map(|_| r))
            .map_err(|reason| PopulationError::RowInvariantViolation { line, reason })?;
        records.push(record);
    }
    if records.is_empty() {
        return Err(PopulationError::EmptyFile);
    }
    Ok(records)
}

fn check_header(headers: &csv::StringRecord) -> Result<usize, PopulationError> {
    for (i, name) in FIXED_COLUMNS.iter().enumerate() {
        if headers.get(i) != Some(*name) {
            return Err(PopulationError::MissingColumn((*name).to_string()));
        }
    }
    let n_shares = headers.len().saturating_sub(FIXED_COLUMNS.len());
    if n_shares == 0 {
        return Err(PopulationError::MissingColumn("share_1".into()));
    }
    for k in 0..n_shares {
        let expected = format!("share_{}", k + 1);
        if headers.get(FIXED_COLUMNS.len() + k) != Some(expected.as_str()) {
            return Err(PopulationError::MissingColumn(expected));
        }
    }
    Ok(n_shares)
}

fn parse_row(row: &csv::StringRecord, n_shares: usize) -> Result<MicroRecord, String> {
    if row.len() != FIXED_COLUMNS.len() + n_shares {
        return Err(format!(
            "expected {} fields, found {}",
            FIXED_COLUMNS.len() + n_shares,
            row.len()
        ));
    }
    fn field<T: std::str::FromStr>(
        row: &csv::StringRecord,
        i: usize,
        name: &str,
    ) -> Result<T, String> {
        row[i]
            .parse::<T>()
            .map_err(|_| format!("cannot parse {name} from `{}`", &row[i]))
    }
    let expenditure_shares = (0..n_shares)
        .map(|k| field::<f64>(row, FIXED_COLUMNS.len() + k, "share"))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MicroRecord {
        record_id: field(row, 0, "record_id")?,
        survey_weight: field(row, 1, "survey_weight")?,
        gross_income: field(row, 2, "gross_income")?,
        net_wealth: field(row, 3, "net_wealth")?,
        region_code: field(row, 4, "region_code")?,
        household_size: field(row, 5, "household_size")?,
        expenditure_shares,
    })
}

/// Reads the `# total_weight=<value>` footer written by [`generate_sample`].
pub fn read_total_weight_footer(path: &Path) -> Result<Option<f64>, PopulationError> {
    let reader = BufReader::new(File::open(path)?);
    let mut found = None;
    for line in reader.lines() {
        let line = line?;
        if let Some(v) = line.trim().strip_prefix("# total_weight=") {
            found = v.trim().parse::<f64>().ok();
        }
    }
    Ok(found)
}

/// Indices of `records` sorted by (net_wealth, record_id).
fn wealth_order(records: &[MicroRecord]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| {
        records[a]
            .net_wealth
            .total_cmp(&records[b].net_wealth)
            .then(records[a].record_id.cmp(&records[b].record_id))
    });
    order
}

/// Redraws net wealth above the empirical `tail_quantile` from a Pareto tail.
///
/// With `n` records sorted by wealth, ranks `ceil(q n)..n` form the tail and
/// the threshold is the wealth at rank `ceil(q n) - 1`. Tail values become
/// `threshold * U^(-1/alpha)`.
pub fn impute_wealth_tail(
    records: &[MicroRecord],
    cfg: &TailImputationConfig,
    seed: u64,
) -> Result<Vec<MicroRecord>, PopulationError> {
    if records.is_empty() {
        return Err(PopulationError::EmptyRecords);
    }
    cfg.validate()?;
    let first = records[0].net_wealth;
    if records.iter().all(|r| r.net_wealth == first) {
        return Err(PopulationError::DegenerateTail);
    }

    let n = records.len();
    let order = wealth_order(records);
    let cut = ((cfg.tail_quantile * n as f64).ceil() as usize).clamp(1, n);
    let mut out = records.to_vec();
    if cut == n {
        return Ok(out);
    }
    let threshold = records[order[cut - 1]].net_wealth;
    if !(threshold > 0.0) {
        return Err(PopulationError::DegenerateTail);
    }

    let mut rng = generator(seed, Stream::TailImputation, &[]);
    let inv_alpha = 1.0 / cfg.pareto_alpha;
    for &idx in &order[cut..] {
        // 1 - U lies in (0, 1], so the draw is finite and >= threshold.
        let u: f64 = 1.0 - rng.random::<f64>();
        out[idx].net_wealth = threshold * u.powf(-inv_alpha);
    }

    if let Some(target) = cfg.target_top_share {
        rescale_tail_share(&mut out, &order[cut..], threshold, target);
    }
    Ok(out)
}

/// Scales tail excesses over `threshold` so the tail holds `target` of
/// total positive wealth. Tail values stay at or above the threshold.
fn rescale_tail_share(records: &mut [MicroRecord], tail: &[usize], threshold: f64, target: f64) {
    let is_tail = {
        let mut flags = vec![false; records.len()];
        for &i in tail {
            flags[i] = true;
        }
        flags
    };
    let rest: f64 = records
        .iter()
        .enumerate()
        .filter(|(i, _)| !is_tail[*i])
        .map(|(_, r)| r.net_wealth.max(0.0))
        .sum();
    let base = threshold * tail.len() as f64;
    let excess: f64 = tail
        .iter()
        .map(|&i| records[i].net_wealth - threshold)
        .sum();
    // Solve (base + s*excess) / (rest + base + s*excess) = target for s.
    let wanted_tail = target * rest / (1.0 - target);
    if excess <= 0.0 || wanted_tail <= base {
        return;
    }
    let s = (wanted_tail - base) / excess;
    for &i in tail {
        records[i].net_wealth = threshold + s * (records[i].net_wealth - threshold);
    }
}

/// Initial liquid deposits: 15% of positive net wealth plus one quarter of
/// annual gross income. Everything else in net wealth is illiquid.
pub fn initial_balance_split(gross_income: f64, net_wealth: f64) -> (Cents, Cents) {
    let liquid_wealth = Cents::from_currency(0.15 * net_wealth.max(0.0));
    let deposits = liquid_wealth + Cents::from_currency(0.25 * gross_income);
    let illiquid = Cents::from_currency(net_wealth) - liquid_wealth;
    (deposits, illiquid)
}

pub fn build_population(
    records: &[MicroRecord],
    cfg: &PopulationConfig,
) -> Result<(Vec<Household>, Vec<Firm>), PopulationError> {
    if records.is_empty() {
        return Err(PopulationError::EmptyRecords);
    }
    cfg.validate()?;
    let n_shares = records[0].expenditure_shares.len();
    if n_shares != cfg.n_sectors {
        return Err(PopulationError::InvalidConfig(format!(
            "records carry {n_shares} expenditure categories but the economy has {} sectors",
            cfg.n_sectors
        )));
    }
    if records
        .iter()
        .any(|r| r.expenditure_shares.len() != n_shares)
    {
        return Err(PopulationError::InvalidConfig(
            "ragged expenditure shares".into(),
        ));
    }

    let weights: Vec<f64> = records.iter().map(|r| r.survey_weight).collect();
    let picker = WeightedIndex::new(&weights)
        .map_err(|e| PopulationError::InvalidConfig(format!("survey weights: {e}")))?;
    let mut rng = generator(cfg.seed, Stream::Population, &[]);
    let picks: Vec<usize> = (0..cfg.n_households)
        .map(|_| picker.sample(&mut rng))
        .collect();

    let mean_income =
        picks.iter().map(|&i| records[i].gross_income).sum::<f64>() / picks.len() as f64;
    let households = picks
        .iter()
        .enumerate()
        .map(|(id, &i)| {
            let r = &records[i];
            let (deposits, illiquid_wealth) = initial_balance_split(r.gross_income, r.net_wealth);
            let skill = if mean_income > 0.0 {
                r.gross_income / mean_income
            } else {
                1.0
            };
            Household {
                id: id as u32,
                deposits,
                illiquid_wealth,
                employed_by: None,
                wage: Cents::ZERO,
                skill,
                consumption_weights: r.expenditure_shares.clone(),
                durables: 0,
                region_code: r.region_code,
                household_size: r.household_size,
                propensity_to_consume: cfg.propensity_to_consume,
                forced_overdraft: false,
                income_last: Cents::from_currency(r.gross_income / 4.0),
                green_spend_last: Cents::ZERO,
                income_current: Cents::ZERO,
                green_spend_current: Cents::ZERO,
            }
        })
        .collect();

    let firms = build_firms(cfg)?;
    Ok((households, firms))
}

fn build_firms(cfg: &PopulationConfig) -> Result<Vec<Firm>, PopulationError> {
    let FirmSizeDistribution { mean, sigma } = cfg.firm_size;
    let mu = mean.ln() - 0.5 * sigma * sigma;
    let sizes = LogNormal::new(mu, sigma)
        .map_err(|e| PopulationError::InvalidConfig(format!("firm size distribution: {e}")))?;
    let mut rng = generator(cfg.seed, Stream::Firms, &[]);
    Ok((0..cfg.n_firms)
        .map(|id| {
            let size = sizes.sample(&mut rng).round().max(1.0);
            Firm::new(id as u32, id % cfg.n_sectors, size)
        })
        .collect())
}

/// Default Dirichlet concentration for a ten-category household budget.
const TEN_SECTOR_PROFILE: [f64; 10] = [0.10, 0.09, 0.04, 0.03, 0.04, 0.05, 0.03, 0.08, 0.44, 0.10];

/// Writes a synthetic micro-record CSV with lognormal incomes, wealth
/// correlated with income and Dirichlet expenditure shares. The survey
/// weights sum to 28 million households and the total is written as a
/// `# total_weight=` footer.
pub fn generate_sample(
    out: &Path,
    n_rows: usize,
    n_sectors: usize,
    seed: u64,
) -> Result<(), PopulationError> {
    if n_rows == 0 {
        return Err(PopulationError::InvalidConfig("n_rows must be >= 1".into()));
    }
    if n_sectors == 0 {
        return Err(PopulationError::InvalidConfig(
            "n_sectors must be >= 1".into(),
        ));
    }
    const TOTAL_WEIGHT: f64 = 28_000_000.0;
    let mut rng = generator(seed, Stream::SampleData, &[]);
    let log_income = Normal::new(10.35, 0.55).expect("valid normal");
    let log_wealth_ratio = Normal::new(1.1, 0.9).expect("valid normal");
    let jitter = LogNormal::new(0.0, 0.3).expect("valid lognormal");
    let profile: Vec<f64> = if n_sectors == TEN_SECTOR_PROFILE.len() {
        TEN_SECTOR_PROFILE.to_vec()
    } else {
        vec![1.0 / n_sectors as f64; n_sectors]
    };
    let gammas: Vec<Gamma<f64>> = profile
        .iter()
        .map(|a| Gamma::new(a * 60.0, 1.0).expect("valid gamma"))
        .collect();

    let raw_weights: Vec<f64> = (0..n_rows).map(|_| jitter.sample(&mut rng)).collect();
    let raw_total: f64 = raw_weights.iter().sum();

    let mut w = std::io::BufWriter::new(File::create(out)?);
    write!(w, "{}", FIXED_COLUMNS.join(","))?;
    for k in 1..=n_sectors {
        write!(w, ",share_{k}")?;
    }
    writeln!(w)?;

    let mut written_total = 0.0;
    for (i, raw) in raw_weights.iter().enumerate() {
        let weight = (raw / raw_total * TOTAL_WEIGHT * 1e4).round() / 1e4;
        written_total += weight;
        let income = (log_income.sample(&mut rng) as f64).exp().round();
        let wealth = if rng.random::<f64>() < 0.05 {
            -(income * 0.5 * rng.random::<f64>()).round()
        } else {
            (income * (log_wealth_ratio.sample(&mut rng) as f64).exp()).round()
        };
        let region = rng.random_range(1..=N_REGIONS);
        let size = rng.random_range(1..=5u32);
        let draws: Vec<f64> = gammas
            .iter()
            .map(|g| g.sample(&mut rng).max(1e-12))
            .collect();
        let total: f64 = draws.iter().sum();
        write!(w, "{},{weight},{income},{wealth},{region},{size}", i + 1)?;
        for d in &draws {
            write!(w, ",{}", d / total)?;
        }
        writeln!(w)?;
    }
    writeln!(w, "# total_weight={}", (written_total * 1e4).round() / 1e4)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_csv(body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(body.as_bytes()).unwrap();
        f
    }

    const HEADER: &str = "record_id,survey_weight,gross_income,net_wealth,region_code,household_size,share_1,share_2\n";

    pub(crate) fn record(id: u64, weight: f64, income: f64, wealth: f64) -> MicroRecord {
        MicroRecord {
            record_id: id,
            survey_weight: weight,
            gross_income: income,
            net_wealth: wealth,
            region_code: 1,
            household_size: 2,
            expenditure_shares: vec![0.5, 0.5],
        }
    }

    #[test]
    fn parses_valid_rows() {
        let f = write_csv(&format!(
            "{HEADER}1,10,30000,50000,1,2,0.5,0.5\n2,20,40000,-100,3,1,0.25,0.75\n3,5,10000,0,12,4,1,0\n"
        ));
        let recs = parse_microdata(f.path()).unwrap();
        assert_eq!(recs.len(), 3);
        assert_eq!(recs[1].record_id, 2);
        for r in &recs {
            assert!((r.expenditure_shares.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn bad_share_sum_is_reported_with_row() {
        let f = write_csv(&format!(
            "{HEADER}1,10,30000,50000,1,2,0.5,0.5\n2,20,40000,-100,3,1,0.4,0.4\n"
        ));
        match parse_microdata(f.path()) {
            Err(PopulationError::RowInvariantViolation { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_column_and_empty_file() {
        let f =
            write_csv("record_id,survey_weight,gross_income,region_code,household_size,share_1\n");
        assert!(matches!(
            parse_microdata(f.path()),
            Err(PopulationError::MissingColumn(c)) if c == "net_wealth"
        ));
        let f = write_csv(HEADER);
        assert!(matches!(
            parse_microdata(f.path()),
            Err(PopulationError::EmptyFile)
        ));
    }

    #[test]
    fn nonpositive_weight_rejected() {
        let f = write_csv(&format!("{HEADER}1,0,30000,50000,1,2,0.5,0.5\n"));
        assert!(matches!(
            parse_microdata(f.path()),
            Err(PopulationError::RowInvariantViolation { line: 1, .. })
        ));
    }

    #[test]
    fn tail_quantile_beyond_rank_granularity_is_identity() {
        let recs: Vec<_> = (0..100)
            .map(|i| record(i, 1.0, 1000.0, i as f64 * 10.0))
            .collect();
        let cfg = TailImputationConfig {
            tail_quantile: 0.999,
            pareto_alpha: 1.5,
            target_top_share: None,
        };
        assert_eq!(impute_wealth_tail(&recs, &cfg, 1).unwrap(), recs);
    }

    #[test]
    fn tail_imputation_deterministic_and_above_threshold() {
        let recs: Vec<_> = (0..1000)
            .map(|i| record(i, 1.0, 1000.0, (i * 37 % 1000) as f64 + 1.0))
            .collect();
        let cfg = TailImputationConfig {
            tail_quantile: 0.95,
            pareto_alpha: 2.0,
            target_top_share: None,
        };
        let a = impute_wealth_tail(&recs, &cfg, 9).unwrap();
        let b = impute_wealth_tail(&recs, &cfg, 9).unwrap();
        assert_eq!(a, b);
        let threshold = 950.0;
        let mut changed = 0;
        for (x, y) in recs.iter().zip(&a) {
            if x.net_wealth > threshold {
                assert!(y.net_wealth >= threshold);
                changed += 1;
            } else {
                assert_eq!(x, y);
            }
        }
        assert_eq!(changed, 50);
    }

    #[test]
    fn degenerate_tail() {
        let recs: Vec<_> = (0..10).map(|i| record(i, 1.0, 1.0, 5.0)).collect();
        let cfg = TailImputationConfig {
            tail_quantile: 0.5,
            pareto_alpha: 1.5,
            target_top_share: None,
        };
        assert!(matches!(
            impute_wealth_tail(&recs, &cfg, 0),
            Err(PopulationError::DegenerateTail)
        ));
    }

    #[test]
    fn target_top_share_is_hit() {
        let recs: Vec<_> = (0..1000)
            .map(|i| record(i, 1.0, 1.0, i as f64 + 1.0))
            .collect();
        let cfg = TailImputationConfig {
            tail_quantile: 0.99,
            pareto_alpha: 2.0,
            target_top_share: Some(0.2),
        };
        let out = impute_wealth_tail(&recs, &cfg, 3).unwrap();
        let total: f64 = out.iter().map(|r| r.net_wealth).sum();
        let tail: f64 = out[990..].iter().map(|r| r.net_wealth).sum();
        assert!((tail / total - 0.2).abs() < 1e-9);
        assert!(out[990..].iter().all(|r| r.net_wealth >= 990.0));
    }

    fn pop_cfg(n_households: usize, n_firms: usize, n_sectors: usize) -> PopulationConfig {
        PopulationConfig {
            n_households,
            n_firms,
            n_sectors,
            seed: 42,
            firm_size: FirmSizeDistribution {
                mean: 20.0,
                sigma: 1.0,
            },
            propensity_to_consume: 0.2,
        }
    }

    #[test]
    fn single_record_resample() {
        let recs = vec![record(7, 3.0, 40_000.0, 10_000.0)];
        let (hh, _) = build_population(&recs, &pop_cfg(5, 2, 2)).unwrap();
        assert_eq!(hh.len(), 5);
        for (i, h) in hh.iter().enumerate() {
            assert_eq!(h.id, i as u32);
            let mut a = h.clone();
            a.id = 0;
            let mut b = hh[0].clone();
            b.id = 0;
            assert_eq!(a, b);
        }
        // 15% of 10,000 + a quarter of 40,000
        assert_eq!(hh[0].deposits, Cents::from_currency(11_500.0));
        assert_eq!(hh[0].illiquid_wealth, Cents::from_currency(8_500.0));
    }

    #[test]
    fn one_firm_per_sector_when_equal() {
        let recs = vec![MicroRecord {
            expenditure_shares: vec![0.1; 10],
            ..record(1, 1.0, 1.0, 1.0)
        }];
        let (_, firms) = build_population(&recs, &pop_cfg(3, 10, 10)).unwrap();
        let mut sectors: Vec<_> = firms.iter().map(|f| f.sector).collect();
        sectors.sort();
        assert_eq!(sectors, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn build_errors() {
        assert!(matches!(
            build_population(&[], &pop_cfg(3, 2, 2)),
            Err(PopulationError::EmptyRecords)
        ));
        assert!(matches!(
            build_population(&[record(1, 1.0, 1.0, 1.0)], &pop_cfg(3, 1, 2)),
            Err(PopulationError::SectorUnderflow { .. })
        ));
    }
}
