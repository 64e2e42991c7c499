//! Headline indicators per quarter and baseline-versus-scenario deltas.

use std::ops::RangeInclusive;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::economy::EconomyState;
use crate::money::Cents;

/// Calendar year of quarter 0.
pub const START_YEAR: u32 = 2025;

/// Quarters covering calendar years `from..=to`.
pub fn year_window(from: u32, to: u32) -> RangeInclusive<u32> {
    (from - START_YEAR) * 4..=(to - START_YEAR) * 4 + 3
}

/// The seventh carbon budget period, 2038 to 2042.
pub fn cb7_window() -> RangeInclusive<u32> {
    year_window(2038, 2042)
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("no open ledger for the quarter")]
    MissingLedger,
    #[error("all values are zero")]
    AllZero,
    #[error("need at least 10 values, got {0}")]
    TooFewValues(usize),
    #[error("horizons differ: {baseline} vs {scenario} quarters")]
    HorizonMismatch { baseline: usize, scenario: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorFrame {
    pub t: u32,
    /// Currency per quarter.
    pub gdp: f64,
    pub unemployment: f64,
    /// Quarterly log change of the CPI.
    pub inflation: f64,
    pub gini_income: f64,
    pub gini_wealth: f64,
    pub decile_income_shares: [f64; 10],
    /// Tonnes CO2 per quarter.
    pub emissions: f64,
    /// Government debt over annualized GDP.
    pub debt_ratio: f64,
    pub green_investment_share: f64,
    /// Amount (currency) added to every net wealth before the wealth Gini;
    /// nonzero only when some household has negative net wealth.
    pub wealth_shift: f64,
}

pub const FRAME_COLUMNS: usize = 20;

impl IndicatorFrame {
    pub fn header() -> Vec<String> {
        let mut h: Vec<String> = [
            "t",
            "gdp",
            "unemployment",
            "inflation",
            "gini_income",
            "gini_wealth",
        ]
        .map(String::from)
        .to_vec();
        h.extend((1..=10).map(|d| format!("decile_income_shares_{d}")));
        h.extend(
            [
                "emissions",
                "debt_ratio",
                "green_investment_share",
                "wealth_shift",
            ]
            .map(String::from),
        );
        h
    }

    pub fn record(&self) -> Vec<String> {
        let mut r = vec![
            self.t.to_string(),
            self.gdp.to_string(),
            self.unemployment.to_string(),
            self.inflation.to_string(),
            self.gini_income.to_string(),
            self.gini_wealth.to_string(),
        ];
        r.extend(self.decile_income_shares.iter().map(f64::to_string));
        r.extend(
            [
                self.emissions,
                self.debt_ratio,
                self.green_investment_share,
                self.wealth_shift,
            ]
            .map(|v| v.to_string()),
        );
        r
    }
}

/// Indicators of the quarter just stepped. `cpi_prev` is the CPI level at
/// the end of the previous quarter (1 at the base).
pub fn compute_indicators(
    state: &EconomyState,
    cpi_prev: f64,
) -> Result<IndicatorFrame, MetricsError> {
    if !state.ledger.is_open() {
        return Err(MetricsError::MissingLedger);
    }
    let gdp = expenditure_gdp(state);
    let n = state.households.len();
    let unemployment = 1.0 - state.employed() as f64 / n as f64;
    let inflation = (state.consumer_price_index() / cpi_prev).ln();

    let incomes: Vec<f64> = state
        .households
        .iter()
        .map(|h| h.income_last.as_currency())
        .collect();
    let wealth: Vec<f64> = state
        .households
        .iter()
        .map(|h| h.net_wealth().as_currency())
        .collect();
    let gini_income = gini(&incomes).unwrap_or(0.0);
    let (gini_wealth, wealth_shift) = gini_with_shift(&wealth).unwrap_or((0.0, 0.0));
    let decile_income_shares = decile_shares(&incomes).unwrap_or([0.1; 10]);

    let gdp_f = gdp.as_f64();
    let debt_ratio = state.debt_ratio_with(Some(gdp));
    let green_investment_share = if gdp_f > 0.0 {
        state.flows.green_investment().as_f64() / gdp_f
    } else {
        0.0
    };

    Ok(IndicatorFrame {
        t: state.t,
        gdp: gdp.as_currency(),
        unemployment,
        inflation,
        gini_income,
        gini_wealth,
        decile_income_shares,
        emissions: state.flows.emissions,
        debt_ratio,
        green_investment_share,
        wealth_shift,
    })
}

/// Final consumption plus green investment; government consumption is zero.
pub fn expenditure_gdp(state: &EconomyState) -> Cents {
    state.flows.consumption + state.flows.green_investment()
}

/// Gini coefficient, shifting negative values up so the minimum is zero.
pub fn gini(values: &[f64]) -> Result<f64, MetricsError> {
    gini_with_shift(values).map(|(g, _)| g)
}

/// Gini coefficient and the shift applied to make every value non-negative.
pub fn gini_with_shift(values: &[f64]) -> Result<(f64, f64), MetricsError> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let shift = if min < 0.0 { -min } else { 0.0 };
    let mut x: Vec<f64> = values.iter().map(|v| v + shift).collect();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let total: f64 = x.iter().sum();
    if x.is_empty() || total <= 0.0 {
        return Err(MetricsError::AllZero);
    }
    let weighted: f64 = x
        .iter()
        .enumerate()
        .map(|(i, v)| (2.0 * (i as f64 + 1.0) - n - 1.0) * v)
        .sum();
    Ok(((weighted / (n * total)).max(0.0), shift))
}

/// Income shares of the ten rank groups, poorest first. Ties are ordered by
/// position in `values`.
pub fn decile_shares(values: &[f64]) -> Result<[f64; 10], MetricsError> {
    let n = values.len();
    if n < 10 {
        return Err(MetricsError::TooFewValues(n));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let total: f64 = values.iter().sum();
    if total <= 0.0 {
        return Err(MetricsError::AllZero);
    }
    let mut shares = [0.0; 10];
    for (d, share) in shares.iter_mut().enumerate() {
        let (lo, hi) = (d * n / 10, (d + 1) * n / 10);
        *share = order[lo..hi].iter().map(|&i| values[i]).sum::<f64>() / total;
    }
    Ok(shares)
}

/// Scenario minus baseline for one quarter or an average over quarters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub t: Option<u32>,
    pub gdp: f64,
    /// Difference in quarterly log GDP growth.
    pub gdp_growth: f64,
    pub unemployment: f64,
    pub inflation: f64,
    pub gini_income: f64,
    pub gini_wealth: f64,
    pub decile_income_shares: [f64; 10],
    pub emissions: f64,
    pub debt_ratio: f64,
    pub green_investment_share: f64,
}

impl DeltaRow {
    pub fn header() -> Vec<String> {
        let mut h: Vec<String> = [
            "t",
            "gdp",
            "gdp_growth",
            "unemployment",
            "inflation",
            "gini_income",
            "gini_wealth",
        ]
        .map(String::from)
        .to_vec();
        h.extend((1..=10).map(|d| format!("decile_income_shares_{d}")));
        h.extend(["emissions", "debt_ratio", "green_investment_share"].map(String::from));
        h
    }

    pub fn record(&self, label: &str) -> Vec<String> {
        let mut r = vec![
            self.t.map_or_else(|| label.to_string(), |t| t.to_string()),
            self.gdp.to_string(),
            self.gdp_growth.to_string(),
            self.unemployment.to_string(),
            self.inflation.to_string(),
            self.gini_income.to_string(),
            self.gini_wealth.to_string(),
        ];
        r.extend(self.decile_income_shares.iter().map(f64::to_string));
        r.extend(
            [self.emissions, self.debt_ratio, self.green_investment_share].map(|v| v.to_string()),
        );
        r
    }

    fn between(
        t: u32,
        base: &IndicatorFrame,
        scen: &IndicatorFrame,
        base_growth: f64,
        scen_growth: f64,
    ) -> Self {
        let mut deciles = [0.0; 10];
        for (d, v) in deciles.iter_mut().enumerate() {
            *v = scen.decile_income_shares[d] - base.decile_income_shares[d];
        }
        DeltaRow {
            t: Some(t),
            gdp: scen.gdp - base.gdp,
            gdp_growth: scen_growth - base_growth,
            unemployment: scen.unemployment - base.unemployment,
            inflation: scen.inflation - base.inflation,
            gini_income: scen.gini_income - base.gini_income,
            gini_wealth: scen.gini_wealth - base.gini_wealth,
            decile_income_shares: deciles,
            emissions: scen.emissions - base.emissions,
            debt_ratio: scen.debt_ratio - base.debt_ratio,
            green_investment_share: scen.green_investment_share - base.green_investment_share,
        }
    }

    fn mean(rows: &[DeltaRow]) -> Self {
        let n = rows.len().max(1) as f64;
        let mut m = DeltaRow::default();
        for r in rows {
            m.gdp += r.gdp / n;
            m.gdp_growth += r.gdp_growth / n;
            m.unemployment += r.unemployment / n;
            m.inflation += r.inflation / n;
            m.gini_income += r.gini_income / n;
            m.gini_wealth += r.gini_wealth / n;
            for d in 0..10 {
                m.decile_income_shares[d] += r.decile_income_shares[d] / n;
            }
            m.emissions += r.emissions / n;
            m.debt_ratio += r.debt_ratio / n;
            m.green_investment_share += r.green_investment_share / n;
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub per_quarter: Vec<DeltaRow>,
    pub period_average: DeltaRow,
    /// Average over the requested window, when the run covers it.
    pub window: Option<(u32, u32)>,
    pub window_average: Option<DeltaRow>,
}

fn growth(frames: &[IndicatorFrame], i: usize) -> f64 {
    if i == 0 || frames[i - 1].gdp <= 0.0 || frames[i].gdp <= 0.0 {
        return 0.0;
    }
    (frames[i].gdp / frames[i - 1].gdp).ln()
}

pub fn compare_runs(
    baseline: &[IndicatorFrame],
    scenario: &[IndicatorFrame],
    window: Option<RangeInclusive<u32>>,
) -> Result<DeltaReport, MetricsError> {
    if baseline.len() != scenario.len() {
        return Err(MetricsError::HorizonMismatch {
            baseline: baseline.len(),
            scenario: scenario.len(),
        });
    }
    let per_quarter: Vec<DeltaRow> = (0..baseline.len())
        .map(|i| {
            DeltaRow::between(
                baseline[i].t,
                &baseline[i],
                &scenario[i],
                growth(baseline, i),
                growth(scenario, i),
            )
        })
        .collect();
    let period_average = DeltaRow::mean(&per_quarter);
    let (window, window_average) = match window {
        Some(w)
            if per_quarter
                .iter()
                .any(|r| r.t.is_some_and(|t| t >= *w.end())) =>
        {
            let rows: Vec<DeltaRow> = per_quarter
                .iter()
                .filter(|r| r.t.is_some_and(|t| w.contains(&t)))
                .cloned()
                .collect();
            (Some((*w.start(), *w.end())), Some(DeltaRow::mean(&rows)))
        }
        _ => (None, None),
    };
    Ok(DeltaReport {
        per_quarter,
        period_average,
        window,
        window_average,
    })
}

pub fn write_indicators_csv(path: &Path, frames: &[IndicatorFrame]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(IndicatorFrame::header())?;
    for f in frames {
        w.write_record(f.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_indicators_csv(path: &Path) -> Result<Vec<IndicatorFrame>, csv::Error> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let v = |i: usize| -> f64 { rec.get(i).and_then(|s| s.parse().ok()).unwrap_or(f64::NAN) };
        let mut deciles = [0.0; 10];
        for (d, x) in deciles.iter_mut().enumerate() {
            *x = v(6 + d);
        }
        out.push(IndicatorFrame {
            t: rec.get(0).and_then(|s| s.parse().ok()).unwrap_or(0),
            gdp: v(1),
            unemployment: v(2),
            inflation: v(3),
            gini_income: v(4),
            gini_wealth: v(5),
            decile_income_shares: deciles,
            emissions: v(16),
            debt_ratio: v(17),
            green_investment_share: v(18),
            wealth_shift: v(19),
        });
    }
    Ok(out)
}

pub fn write_indicators_json(path: &Path, frames: &[IndicatorFrame]) -> std::io::Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(frames)? + "\n")
}

pub fn write_delta_csv(path: &Path, report: &DeltaReport) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(DeltaRow::header())?;
    for r in &report.per_quarter {
        w.write_record(r.record(""))?;
    }
    w.write_record(report.period_average.record("period_average"))?;
    if let Some(avg) = &report.window_average {
        w.write_record(avg.record("window_average"))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_delta_json(path: &Path, report: &DeltaReport) -> std::io::Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(report)? + "\n")
}
