//! Quarterly stock-flow-consistent economy.
//!
//! One call to [`EconomyState::step`] advances the economy by a quarter,
//! running the sub-steps in a fixed order:
//!
//! 1. scenario levers D and E (they edit parameters)
//! 2. [`labor::labor_market_step`]
//! 3. [`production::production_step`]
//! 4. [`pricing::pricing_step`]
//! 5. [`consumption::consumption_step`] (lever B forcing first)
//! 6. firm green investment (lever A) and dividend payout
//! 7. [`fiscal::fiscal_step`] (lever C)
//! 8. [`monetary::monetary_step`]
//! 9. [`crate::diffusion::diffusion_step`]
//! 10. technology learning
//! 11. indicators and the stock-flow audit
//!
//! All balances are integer cents. Agent intentions are computed against a
//! frozen snapshot (in parallel where it pays) and committed serially in
//! ascending id.

pub mod agents;
pub mod consumption;
pub mod finance;
pub mod fiscal;
pub mod labor;
pub mod ledger;
pub(crate) mod market;
pub mod monetary;
pub mod pricing;
pub mod production;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffusion::{build_network, diffusion_step, DiffusionError, DurableKind, SocialGraph};
use crate::io_table::{IoTable, IoTableError};
use crate::metrics::{compute_indicators, IndicatorFrame};
use crate::money::Cents;
use crate::rng::{uniform, Stream};
use crate::scenario::{self, ScenarioError, ScenarioSpec};
use crate::techlearn::{advance_tech, scheduled_deployment, AdoptionCurve, TechState};

pub use agents::{Firm, FirmId, Household, HouseholdId};
pub use ledger::{audit, Account, AuditError, AuditReport, Ledger, Subsystem};

/// Free behavioral parameters. None of these come from data; they are the
/// knobs the calibration sweep turns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Behavior {
    pub initial_markup: f64,
    /// Markup change per quarter (absolute) when inventories are off target.
    pub markup_drift: f64,
    pub target_inventory_ratio: f64,
    /// Relative dead band around the inventory target.
    pub inventory_band: f64,
    pub max_markup: f64,
    /// Weight on last quarter's sales in adaptive sales expectations.
    pub sales_smoothing: f64,
    /// Wage response to the unemployment gap, per quarter.
    pub wage_phillips: f64,
    /// Weight of trailing inflation in wage indexation; the rest is the
    /// inflation target.
    pub wage_indexation: f64,
    pub natural_unemployment: f64,
    /// Share of deposits above the working-capital buffer paid out per quarter.
    pub dividend_payout: f64,
    pub firm_buffer_quarters: f64,
    /// Quarterly amortization rate of green capital, charged into unit cost.
    pub amortization_rate: f64,
    pub initial_firm_deposit_quarters: f64,
}

impl Default for Behavior {
    fn default() -> Self {
        Self {
            initial_markup: 0.15,
            markup_drift: 0.01,
            target_inventory_ratio: 0.10,
            inventory_band: 0.25,
            max_markup: 0.6,
            sales_smoothing: 0.5,
            wage_phillips: 0.1,
            wage_indexation: 0.5,
            natural_unemployment: 0.05,
            dividend_payout: 0.5,
            firm_buffer_quarters: 1.0,
            amortization_rate: 0.025,
            initial_firm_deposit_quarters: 1.0,
        }
    }
}

/// Fiscal, monetary and structural settings from the run config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicySettings {
    pub tax_rate_income: f64,
    /// Currency per household per quarter.
    pub transfer_per_household: f64,
    pub debt_ceiling_ratio: f64,
    pub spread_slope: f64,
    /// Government debt at t = 0 as a multiple of annual GDP.
    pub initial_debt_ratio: f64,
    /// Quarterly rates.
    pub neutral_rate: f64,
    pub inflation_target: f64,
    pub taylor_pi: f64,
    pub taylor_gap: f64,
    /// Sector that supplies green capital and goods.
    pub green_sector: usize,
    /// USD per unit of model currency, for technology cost anchors.
    pub usd_per_currency: f64,
    pub behavior: Behavior,
}

impl Default for PolicySettings {
    fn default() -> Self {
        Self {
            tax_rate_income: 0.2,
            transfer_per_household: 1_500.0,
            debt_ceiling_ratio: 1.0,
            spread_slope: 0.02,
            initial_debt_ratio: 0.9,
            neutral_rate: -0.0025,
            inflation_target: 0.005,
            taylor_pi: 0.0,
            taylor_gap: 0.5,
            green_sector: 0,
            usd_per_currency: 1.27,
            behavior: Behavior::default(),
        }
    }
}

impl PolicySettings {
    pub fn validate(&self, n_sectors: usize) -> Result<(), InitError> {
        let bad = |m: &str| Err(InitError::InvalidPolicy(m.to_string()));
        if !(0.0..1.0).contains(&self.tax_rate_income) {
            return bad("tax_rate_income must lie in [0,1)");
        }
        if self.transfer_per_household < 0.0 {
            return bad("transfer_per_household must be >= 0");
        }
        if self.spread_slope < 0.0 {
            return bad("spread_slope must be >= 0");
        }
        if self.green_sector >= n_sectors {
            return bad("green_sector outside the sector range");
        }
        let b = &self.behavior;
        if b.markup_drift < 0.0 || b.initial_markup < 0.0 || b.max_markup < b.initial_markup {
            return bad("markup parameters must be non-negative with max_markup >= initial_markup");
        }
        if !(0.0..=1.0).contains(&b.sales_smoothing)
            || !(0.0..=1.0).contains(&b.dividend_payout)
            || !(0.0..=1.0).contains(&b.wage_indexation)
        {
            return bad("sales_smoothing, dividend_payout and wage_indexation must lie in [0,1]");
        }
        if b.target_inventory_ratio < 0.0 || b.amortization_rate < 0.0 {
            return bad("inventory target and amortization rate must be >= 0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Government {
    /// Negative balances are debt.
    pub deposits: Cents,
    pub tax_rate_income: f64,
    pub transfer_per_household: Cents,
    pub debt_ceiling_ratio: f64,
    pub spread_slope: f64,
    /// Premium over the policy rate set by the last monetary step.
    pub spread: f64,
    /// Rate charged on debt in the last fiscal step.
    pub last_interest_rate: f64,
}

impl Government {
    pub fn debt(&self) -> Cents {
        (-self.deposits).max(Cents::ZERO)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralBank {
    pub policy_rate: f64,
    pub neutral_rate: f64,
    pub inflation_target: f64,
    pub taylor_pi: f64,
    pub taylor_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Technology {
    pub state: TechState,
    pub adoption: Option<AdoptionCurve>,
    /// Cost units (USD) of deployment bought per USD of green purchases.
    pub purchase_scale: f64,
}

/// Monetary flows of the current quarter, by purpose.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StepFlows {
    pub consumption: Cents,
    pub lever_a: Cents,
    pub lever_b: Cents,
    pub adoption: Cents,
    pub wages: Cents,
    pub intermediate: Cents,
    pub taxes: Cents,
    pub transfers: Cents,
    pub subsidies: Cents,
    pub dividends: Cents,
    pub government_interest: Cents,
    pub deposit_interest: Cents,
    pub emissions: f64,
    pub output_units: f64,
}

impl StepFlows {
    pub fn green_investment(&self) -> Cents {
        self.lever_a + self.lever_b + self.adoption
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub gdp: Vec<Cents>,
    pub inflation: Vec<f64>,
    pub unemployment: Vec<f64>,
    pub cpi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EconomyState {
    pub t: u32,
    pub seed: u64,
    pub households: Vec<Household>,
    pub firms: Vec<Firm>,
    pub government: Government,
    pub central_bank: CentralBank,
    pub io: IoTable,
    pub tech: Vec<Technology>,
    pub durables: Vec<DurableKind>,
    /// One graph per durable kind.
    pub networks: Vec<SocialGraph>,
    pub behavior: Behavior,
    pub green_sector: usize,
    pub usd_per_currency: f64,
    /// Cents per quarter per unit of skill, by sector.
    pub wage_index: Vec<f64>,
    /// Firm indices per sector, ascending.
    pub firms_by_sector: Vec<Vec<usize>>,
    pub cpi_base_quantities: Vec<f64>,
    pub cpi_base_value: f64,
    pub history: History,
    pub flows: StepFlows,
    pub ledger: Ledger,
    pub last_scenario_quarter: Option<u32>,
    /// GDP estimate at initialization, used until a quarter has been observed.
    pub initial_gdp: Cents,
}

#[derive(Debug, Error)]
pub enum InitError {
    #[error(transparent)]
    Io(#[from] IoTableError),
    #[error("population is empty")]
    EmptyPopulation,
    #[error("invalid policy settings: {0}")]
    InvalidPolicy(String),
    #[error("population does not match the input-output table: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Network(#[from] DiffusionError),
}

#[derive(Debug, Error)]
pub enum StepError {
    #[error("quarter {t}: {source}")]
    Audit {
        t: u32,
        #[source]
        source: AuditError,
    },
    #[error("quarter {t}: {source}")]
    InfeasibleIo {
        t: u32,
        #[source]
        source: IoTableError,
    },
    #[error("quarter {t}: {source}")]
    Scenario {
        t: u32,
        #[source]
        source: ScenarioError,
    },
}

/// Everything observable about one completed quarter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub frame: IndicatorFrame,
    pub audit: AuditReport,
    pub flows: StepFlows,
    /// Policy rate in force during the quarter's fiscal step.
    pub policy_rate: f64,
    pub spread: f64,
    /// Rate actually charged on government debt this quarter.
    pub government_rate: f64,
}

/// Builds the t = 0 state from a synthetic population.
pub fn init_state(
    mut households: Vec<Household>,
    mut firms: Vec<Firm>,
    io: IoTable,
    policy: &PolicySettings,
    tech: Vec<Technology>,
    durables: Vec<DurableKind>,
    seed: u64,
) -> Result<EconomyState, InitError> {
    io.validate()?;
    if households.is_empty() || firms.is_empty() {
        return Err(InitError::EmptyPopulation);
    }
    let s = io.n_sectors();
    policy.validate(s)?;
    if households.iter().any(|h| h.consumption_weights.len() != s) {
        return Err(InitError::Mismatch(
            "consumption weights length differs from sector count".into(),
        ));
    }
    if firms.iter().any(|f| f.sector >= s) {
        return Err(InitError::Mismatch("firm sector outside the table".into()));
    }
    let b = policy.behavior.clone();

    let mut firms_by_sector = vec![Vec::new(); s];
    for (i, f) in firms.iter().enumerate() {
        firms_by_sector[f.sector].push(i);
    }
    if let Some(empty) = firms_by_sector.iter().position(|v| v.is_empty()) {
        return Err(InitError::Mismatch(format!("sector {empty} has no firms")));
    }

    // Initial demand and wage level. Household income is assumed to be
    // recirculated GDP, so demand C solves C = c (M + C - tax + transfers)
    // with M the household money stock. The wage level is then set so that C
    // employs the labor force at the natural rate of unemployment.
    let n = households.len() as f64;
    let mut mean_weights = vec![0.0; s];
    for h in &households {
        for (j, w) in h.consumption_weights.iter().enumerate() {
            mean_weights[j] += w / n;
        }
    }
    let unit_prices = io.markup_prices(&io.labor_coefficients, b.initial_markup);
    let unit_final: Vec<f64> = mean_weights
        .iter()
        .zip(&unit_prices)
        .map(|(w, p)| w / p)
        .collect();
    let unit_output = io.leontief_output(&unit_final);
    // Workers (at a unit wage) per unit of currency spent.
    let kappa: f64 = unit_output
        .iter()
        .zip(&io.labor_coefficients)
        .map(|(x, l)| x * l)
        .sum();
    let c = households
        .iter()
        .map(|h| h.propensity_to_consume)
        .sum::<f64>()
        / n;
    let money: f64 = households.iter().map(|h| h.deposits.as_f64()).sum();
    let transfers = n * Cents::from_currency(policy.transfer_per_household).as_f64();
    let demand = c * (money + transfers) / (1.0 - c * (1.0 - policy.tax_rate_income * kappa));
    let target_employment = ((1.0 - b.natural_unemployment) * n).max(1.0);
    let wage0 = (kappa * demand / target_employment).max(1.0);
    let wage_index = vec![wage0; s];
    let prices: Vec<f64> = unit_prices.iter().map(|p| p * wage0).collect();
    let final_spend: Vec<f64> = mean_weights.iter().map(|w| w * demand).collect();
    let final_units: Vec<f64> = final_spend
        .iter()
        .zip(&prices)
        .map(|(v, p)| v / p)
        .collect();
    let gross_output = io.leontief_output(&final_units);

    for (sector, idxs) in firms_by_sector.iter().enumerate() {
        let total_size: f64 = idxs.iter().map(|&i| firms[i].size_weight).sum();
        for &i in idxs {
            let f = &mut firms[i];
            let y = gross_output[sector] * f.size_weight / total_size;
            f.price = prices[sector];
            f.markup = b.initial_markup;
            f.unit_cost = prices[sector] / (1.0 + b.initial_markup);
            f.output_last = y;
            f.expected_sales = y;
            f.planned_output = y;
            f.inventory = b.target_inventory_ratio * y;
            f.inventory_carried = f.inventory;
            f.revenue_last = Cents::from_currency(y * f.price / 100.0);
            f.deposits = Cents(crate::money::round_half_even(
                b.initial_firm_deposit_quarters * y * f.unit_cost,
            ));
        }
    }

    // Initial hiring: ceil(output guess x labor coefficient) per firm,
    // filled in ascending (firm id, household id) order.
    let mut next = 0usize;
    for f in firms.iter_mut() {
        let demand = labor::labor_demand(f.planned_output, io.labor_coefficients[f.sector]);
        while f.employees.len() < demand && next < households.len() {
            let h = &mut households[next];
            h.employed_by = Some(f.id);
            h.wage = Cents(crate::money::round_half_even(
                wage_index[f.sector] * h.skill,
            ));
            f.employees.push(h.id);
            next += 1;
        }
    }
    let transfer = Cents::from_currency(policy.transfer_per_household);
    for h in households.iter_mut() {
        h.income_last = h.wage + transfer;
    }

    let initial_gdp = Cents(crate::money::round_half_even(final_spend.iter().sum()));
    let government = Government {
        deposits: -initial_gdp.scale(4.0 * policy.initial_debt_ratio),
        tax_rate_income: policy.tax_rate_income,
        transfer_per_household: Cents::from_currency(policy.transfer_per_household),
        debt_ceiling_ratio: policy.debt_ceiling_ratio,
        spread_slope: policy.spread_slope,
        spread: monetary::spread(
            policy.spread_slope,
            policy.initial_debt_ratio,
            policy.debt_ceiling_ratio,
        ),
        last_interest_rate: 0.0,
    };
    let central_bank = CentralBank {
        policy_rate: (policy.neutral_rate + policy.inflation_target).max(0.0),
        neutral_rate: policy.neutral_rate,
        inflation_target: policy.inflation_target,
        taylor_pi: policy.taylor_pi,
        taylor_gap: policy.taylor_gap,
    };

    // Laspeyres base: aggregate household weights at initial prices.
    let mut base_weights = vec![0.0; s];
    for h in &households {
        for (j, w) in h.consumption_weights.iter().enumerate() {
            base_weights[j] += w;
        }
    }
    let cpi_base_quantities: Vec<f64> = base_weights
        .iter()
        .zip(&prices)
        .map(|(w, p)| w / p)
        .collect();
    let cpi_base_value: f64 = cpi_base_quantities
        .iter()
        .zip(&prices)
        .map(|(q, p)| q * p)
        .sum();

    let mut networks = Vec::with_capacity(durables.len());
    for (k, d) in durables.iter().enumerate() {
        networks.push(build_network(
            &households,
            d.degree_k,
            d.rewire_p,
            seed.wrapping_add(k as u64),
        )?);
        if d.initial_share > 0.0 {
            for h in households.iter_mut() {
                if uniform(seed, Stream::Adoption, &[u64::MAX, k as u64, h.id as u64])
                    < d.initial_share
                {
                    h.durables |= 1 << k;
                }
            }
        }
    }

    Ok(EconomyState {
        t: 0,
        seed,
        households,
        firms,
        government,
        central_bank,
        io,
        tech,
        durables,
        networks,
        behavior: b,
        green_sector: policy.green_sector,
        usd_per_currency: policy.usd_per_currency,
        wage_index,
        firms_by_sector,
        cpi_base_quantities,
        cpi_base_value,
        history: History::default(),
        flows: StepFlows::default(),
        ledger: Ledger::default(),
        last_scenario_quarter: None,
        initial_gdp,
    })
}

impl EconomyState {
    pub fn n_sectors(&self) -> usize {
        self.io.n_sectors()
    }

    /// Signed sum of every deposit balance.
    pub fn money_stock(&self) -> i128 {
        let h: i128 = self.households.iter().map(|h| h.deposits.0 as i128).sum();
        let f: i128 = self.firms.iter().map(|f| f.deposits.0 as i128).sum();
        h + f + self.government.deposits.0 as i128
    }

    pub fn employed(&self) -> usize {
        self.households
            .iter()
            .filter(|h| h.employed_by.is_some())
            .count()
    }

    /// Mean technology cost relative to t = 0; scales the green sector's
    /// labor requirement.
    pub fn tech_cost_index(&self) -> f64 {
        if self.tech.is_empty() {
            return 1.0;
        }
        self.tech.iter().map(|t| t.state.cost_index()).sum::<f64>() / self.tech.len() as f64
    }

    pub fn labor_coefficient(&self, sector: usize) -> f64 {
        let l = self.io.labor_coefficients[sector];
        if sector == self.green_sector {
            l * self.tech_cost_index()
        } else {
            l
        }
    }

    /// Current price of one unit of sector output: inventory-value weighted
    /// over the sector's firms, falling back to output weights.
    pub fn sector_price(&self, sector: usize) -> f64 {
        market::sector_price(&self.firms, &self.firms_by_sector[sector])
    }

    pub fn sector_prices(&self) -> Vec<f64> {
        (0..self.n_sectors())
            .map(|s| self.sector_price(s))
            .collect()
    }

    pub fn consumer_price_index(&self) -> f64 {
        let value: f64 = self
            .cpi_base_quantities
            .iter()
            .enumerate()
            .map(|(j, q)| q * self.sector_price(j))
            .sum();
        value / self.cpi_base_value
    }

    pub fn last_gdp(&self) -> Cents {
        self.history.gdp.last().copied().unwrap_or(self.initial_gdp)
    }

    /// Four times the mean GDP of the last (up to) four quarters, with
    /// `current` appended to the recorded history when given.
    pub fn annualized_gdp(&self, current: Option<Cents>) -> f64 {
        let mut recent: Vec<f64> = self
            .history
            .gdp
            .iter()
            .rev()
            .take(4)
            .map(|g| g.as_f64())
            .collect();
        if let Some(c) = current {
            recent.insert(0, c.as_f64());
            recent.truncate(4);
        }
        if recent.is_empty() {
            return 4.0 * self.initial_gdp.as_f64();
        }
        4.0 * recent.iter().sum::<f64>() / recent.len() as f64
    }

    pub fn debt_ratio(&self) -> f64 {
        self.debt_ratio_with(None)
    }

    pub fn debt_ratio_with(&self, current: Option<Cents>) -> f64 {
        let annual = self.annualized_gdp(current);
        if annual <= 0.0 {
            return 0.0;
        }
        self.government.debt().as_f64() / annual
    }

    pub(crate) fn balance_mut(&mut self, account: Account) -> &mut Cents {
        match account {
            Account::Household(i) => &mut self.households[i as usize].deposits,
            Account::Firm(i) => &mut self.firms[i as usize].deposits,
            Account::Government => &mut self.government.deposits,
        }
    }

    pub(crate) fn debit(&mut self, sub: Subsystem, account: Account, amount: Cents) {
        *self.balance_mut(account) -= amount;
        self.ledger.debit(sub, amount);
    }

    pub(crate) fn credit(&mut self, sub: Subsystem, account: Account, amount: Cents) {
        *self.balance_mut(account) += amount;
        self.ledger.credit(sub, amount);
    }

    pub(crate) fn transfer(&mut self, sub: Subsystem, from: Account, to: Account, amount: Cents) {
        if amount == Cents::ZERO {
            return;
        }
        self.debit(sub, from, amount);
        self.credit(sub, to, amount);
    }

    /// Central-bank money creation (positive) or destruction (negative).
    pub(crate) fn issue(&mut self, sub: Subsystem, to: Account, amount: Cents) {
        if amount == Cents::ZERO {
            return;
        }
        *self.balance_mut(to) += amount;
        self.ledger.issue(sub, amount);
    }

    /// Advances one quarter. The scenario may be `None` for the baseline.
    pub fn step(&mut self, scenario: Option<&ScenarioSpec>) -> Result<StepReport, StepError> {
        self.step_with(scenario, |_| {})
    }

    /// Like [`step`](Self::step), but runs `before_audit` on the state just
    /// before the audit. Tests use it to corrupt the books.
    pub fn step_with(
        &mut self,
        scenario: Option<&ScenarioSpec>,
        before_audit: impl FnOnce(&mut EconomyState),
    ) -> Result<StepReport, StepError> {
        let t = self.t;
        let cpi_prev = self.history.cpi.last().copied().unwrap_or(1.0);
        self.ledger.open(self.money_stock());
        self.flows = StepFlows::default();
        for h in self.households.iter_mut() {
            h.income_current = Cents::ZERO;
            h.green_spend_current = Cents::ZERO;
        }
        for f in self.firms.iter_mut() {
            f.revenue_current = Cents::ZERO;
            f.units_sold_current = 0.0;
            f.green_spend_current = Cents::ZERO;
        }

        if let Some(sc) = scenario {
            scenario::apply_parameter_levers(self, sc, t).map_err(|e| match e {
                ScenarioError::InfeasibleIo(source) => StepError::InfeasibleIo { t, source },
                source => StepError::Scenario { t, source },
            })?;
        }

        labor::labor_market_step(self);
        production::production_step(self);
        pricing::pricing_step(self);
        consumption::consumption_step(self, scenario);
        if let Some(shares) = scenario.and_then(|sc| sc.lever_a_shares(t, self.n_sectors())) {
            scenario::apply_lever_a(self, &shares);
        }
        finance::dividend_step(self);
        let policy_rate = self.central_bank.policy_rate;
        let spread = self.government.spread;
        fiscal::fiscal_step(self, scenario);
        let government_rate = self.government.last_interest_rate;
        monetary::monetary_step(self);
        diffusion_step(self, scenario);
        self.tech_step();
        self.close_quarter();

        let frame = compute_indicators(self, cpi_prev).expect("ledger is open");
        before_audit(self);
        let report = audit(&self.ledger, self.money_stock())
            .map_err(|source| StepError::Audit { t, source })?;

        self.history.gdp.push(crate::metrics::expenditure_gdp(self));
        self.history.inflation.push(frame.inflation);
        self.history.unemployment.push(frame.unemployment);
        self.history.cpi.push(cpi_prev * frame.inflation.exp());
        self.t += 1;
        Ok(StepReport {
            frame,
            audit: report,
            flows: self.flows.clone(),
            policy_rate,
            spread,
            government_rate,
        })
    }

    fn tech_step(&mut self) {
        let green_usd = self.flows.green_investment().as_currency() * self.usd_per_currency;
        let t = self.t;
        for tech in self.tech.iter_mut() {
            let dx = scheduled_deployment(
                tech.adoption.as_ref(),
                t,
                green_usd * tech.purchase_scale,
                tech.state.current_cost,
            );
            tech.state = advance_tech(&tech.state, dx);
        }
    }

    /// Rolls current-quarter accumulators into last-quarter fields.
    fn close_quarter(&mut self) {
        let lambda = self.behavior.sales_smoothing;
        for f in self.firms.iter_mut() {
            f.revenue_last = f.revenue_current;
            f.inventory_carried = (f.inventory - f.backlog).max(0.0);
            f.green_spend_last = f.green_spend_current;
            f.expected_sales = lambda * f.units_sold_current + (1.0 - lambda) * f.expected_sales;
        }
        for h in self.households.iter_mut() {
            h.income_last = h.income_current;
            h.green_spend_last = h.green_spend_current;
        }
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::population::{
        build_population, FirmSizeDistribution, MicroRecord, PopulationConfig,
    };

    /// Ten households and two firms over two sectors.
    pub fn tiny_io() -> IoTable {
        IoTable::new(
            vec![vec![0.1, 0.2], vec![0.1, 0.1]],
            vec![0.05, 0.05],
            vec![0.5, 0.1],
        )
        .unwrap()
    }

    pub fn records(n: usize, sectors: usize) -> Vec<MicroRecord> {
        (0..n)
            .map(|i| MicroRecord {
                record_id: i as u64,
                survey_weight: 1.0 + (i % 3) as f64,
                gross_income: 20_000.0 + 1_000.0 * (i % 7) as f64,
                net_wealth: 30_000.0 + 5_000.0 * (i % 5) as f64,
                region_code: (i % 12 + 1) as u8,
                household_size: 2,
                expenditure_shares: vec![1.0 / sectors as f64; sectors],
            })
            .collect()
    }

    pub fn policy(green_sector: usize) -> PolicySettings {
        PolicySettings {
            green_sector,
            transfer_per_household: 500.0,
            ..PolicySettings::default()
        }
    }

    pub fn state(n_households: usize, n_firms: usize, io: IoTable, seed: u64) -> EconomyState {
        let s = io.n_sectors();
        let cfg = PopulationConfig {
            n_households,
            n_firms,
            n_sectors: s,
            seed,
            firm_size: FirmSizeDistribution {
                mean: 5.0,
                sigma: 0.5,
            },
            propensity_to_consume: 0.2,
        };
        let (hh, firms) = build_population(&records(50, s), &cfg).unwrap();
        init_state(hh, firms, io, &policy(s - 1), vec![], vec![], seed).unwrap()
    }

    pub fn ten_sector_io() -> IoTable {
        let s = 10;
        let coefficients = (0..s)
            .map(|i| (0..s).map(|j| if i == j { 0.05 } else { 0.02 }).collect())
            .collect();
        IoTable::new(coefficients, vec![0.02; s], vec![0.3; s]).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn init_rejects_infeasible_io() {
        let io = IoTable {
            coefficients: vec![vec![0.5, 0.1], vec![0.52, 0.2]],
            labor_coefficients: vec![0.1, 0.1],
            emission_intensity: vec![0.0, 0.0],
        };
        let ok = state(10, 2, tiny_io(), 1);
        let err =
            init_state(ok.households, ok.firms, io, &policy(1), vec![], vec![], 1).unwrap_err();
        assert!(matches!(
            err,
            InitError::Io(IoTableError::InfeasibleIO { sector: 0, .. })
        ));
    }

    #[test]
    fn init_is_deterministic() {
        let a = state(100, 10, ten_sector_io(), 42);
        let b = state(100, 10, ten_sector_io(), 42);
        assert_eq!(a, b);
    }

    #[test]
    fn employment_after_init_is_min_of_demand_and_labor_force() {
        let s = state(10, 2, tiny_io(), 3);
        let demand: usize = s
            .firms
            .iter()
            .map(|f| labor::labor_demand(f.planned_output, s.io.labor_coefficients[f.sector]))
            .sum();
        assert_eq!(s.employed(), demand.min(10));
        // Ascending firm then household order.
        let mut expected = 0u32;
        for f in &s.firms {
            for &h in &f.employees {
                assert_eq!(h, expected);
                expected += 1;
            }
        }
    }

    #[test]
    fn one_null_step_conserves_money() {
        let mut s = state(10, 2, tiny_io(), 3);
        let r = s.step(None).unwrap();
        assert_eq!(s.t, 1);
        assert_eq!(r.audit.residual_cents, 0);
    }

    #[test]
    fn identical_states_step_identically() {
        let mut a = state(60, 6, tiny_io(), 9);
        let mut b = a.clone();
        let ra = a.step(None).unwrap();
        let rb = b.step(None).unwrap();
        assert_eq!(ra, rb);
        assert_eq!(a, b);
    }

    #[test]
    fn corrupted_ledger_aborts_step() {
        let mut s = state(10, 2, tiny_io(), 3);
        let err = s
            .step_with(None, |st| st.ledger.inject_fault(Subsystem::Consumption, 1))
            .unwrap_err();
        match err {
            StepError::Audit {
                source: AuditError::AuditFailure { residual_cents, .. },
                ..
            } => assert_eq!(residual_cents, 1),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn long_null_run_stays_sane() {
        let mut s = state(200, 20, ten_sector_io(), 5);
        for _ in 0..200 {
            let r = s.step(None).unwrap();
            assert_eq!(r.audit.residual_cents, 0);
            assert!((0.0..=1.0).contains(&r.frame.unemployment));
            assert!(s.firms.iter().all(|f| f.price > 0.0 && f.price.is_finite()));
            assert!(s.firms.iter().all(|f| f.inventory >= 0.0));
            assert!(r.policy_rate >= 0.0);
            for h in &s.households {
                let sum: f64 = h.consumption_weights.iter().sum();
                assert!((sum - 1.0).abs() < 1e-9);
            }
        }
    }
}
