//! Policy scenarios: five levers applied as time-indexed changes to flows
//! and coefficients. See `SCENARIO.md` for the file grammar.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::economy::fiscal::{self, Allocation, Financing, SubsidyTarget};
use crate::economy::ledger::Subsystem;
use crate::economy::{Account, EconomyState};
use crate::io_table::IoTableError;
use crate::money::Cents;

const LEVERS: [&str; 5] = ["lever_a", "lever_b", "lever_c", "lever_d", "lever_e"];

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("unknown lever `{0}`")]
    UnknownLever(String),
    #[error("negative value in {0}")]
    NegativePathway(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    InfeasibleIo(IoTableError),
    #[error("levers for quarter {t} were already applied")]
    Replay { t: u32 },
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
}

/// Constant `value` over quarters `from..=to`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub from: u32,
    pub to: u32,
    pub value: f64,
}

/// Piecewise-constant schedule, zero outside its segments.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Pathway(pub Vec<Segment>);

impl Pathway {
    pub fn value_at(&self, t: u32) -> f64 {
        self.0
            .iter()
            .find(|s| s.from <= t && t <= s.to)
            .map_or(0.0, |s| s.value)
    }

    fn validate(&self, what: &str, horizon: u32) -> Result<(), ScenarioError> {
        for s in &self.0 {
            if !(s.value >= 0.0) || !s.value.is_finite() {
                return Err(ScenarioError::NegativePathway(what.to_string()));
            }
            if s.from > s.to || s.to >= horizon {
                return Err(ScenarioError::Invalid(format!(
                    "{what}: segment {}..={} outside horizon {horizon}",
                    s.from, s.to
                )));
            }
        }
        let mut sorted = self.0.clone();
        sorted.sort_by_key(|s| s.from);
        if sorted.windows(2).any(|w| w[1].from <= w[0].to) {
            return Err(ScenarioError::Invalid(format!(
                "{what}: overlapping segments"
            )));
        }
        Ok(())
    }
}

/// Firms spend a share of last quarter's revenue on green capital.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeverA {
    pub pathway: Pathway,
    /// Sectors subject to the lever; all when absent.
    #[serde(default)]
    pub sectors: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Targeting {
    All,
    NonAdopters,
}

/// Households spend a fixed amount (currency per quarter) on green goods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeverB {
    pub pathway: Pathway,
    #[serde(default = "all")]
    pub targeting: Targeting,
}

fn all() -> Targeting {
    Targeting::All
}

/// Subsidy totals (currency per quarter).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeverC {
    pub pathway: Pathway,
    pub target: SubsidyTarget,
    #[serde(default = "uniform")]
    pub allocation: Allocation,
    pub financing: Financing,
}

fn uniform() -> Allocation {
    Allocation::Uniform
}

/// Linear path of one technical coefficient `a[sector_from][sector_to]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientEdit {
    pub sector_from: usize,
    pub sector_to: usize,
    pub start_quarter: u32,
    pub end_quarter: u32,
    pub start_value: f64,
    pub end_value: f64,
}

impl CoefficientEdit {
    /// Coefficient value at `t`, or `None` before the edit starts.
    pub fn value_at(&self, t: u32) -> Option<f64> {
        if t < self.start_quarter {
            return None;
        }
        if t >= self.end_quarter {
            return Some(self.end_value);
        }
        let span = (self.end_quarter - self.start_quarter) as f64;
        let x = (t - self.start_quarter) as f64 / span;
        Some(self.start_value + x * (self.end_value - self.start_value))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Trigger {
    /// Applies to every household at this quarter.
    Quarter(u32),
    /// Applies to each household when it adopts the named durable.
    Adoption(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightShiftRule {
    pub category_from: usize,
    pub category_to: usize,
    pub fraction: f64,
    pub trigger: Trigger,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    pub horizon_quarters: u32,
    #[serde(default)]
    pub green_sector: Option<usize>,
    #[serde(default)]
    pub lever_a: Option<LeverA>,
    #[serde(default)]
    pub lever_b: Option<LeverB>,
    #[serde(default)]
    pub lever_c: Option<LeverC>,
    #[serde(default)]
    pub lever_d: Vec<CoefficientEdit>,
    #[serde(default)]
    pub lever_e: Vec<WeightShiftRule>,
}

/// Lever C settings in force for one quarter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeverCAt {
    pub total: Cents,
    pub target: SubsidyTarget,
    pub allocation: Allocation,
    pub financing: Financing,
}

pub fn load_scenario(path: &Path) -> Result<ScenarioSpec, ScenarioError> {
    parse_scenario(&std::fs::read_to_string(path)?)
}

pub fn parse_scenario(text: &str) -> Result<ScenarioSpec, ScenarioError> {
    let parse_err = |e: serde_json::Error| ScenarioError::ParseError {
        line: e.line(),
        message: e.to_string(),
    };
    let value: serde_json::Value = serde_json::from_str(text).map_err(parse_err)?;
    if let Some(obj) = value.as_object() {
        if let Some(k) = obj
            .keys()
            .find(|k| k.starts_with("lever_") && !LEVERS.contains(&k.as_str()))
        {
            return Err(ScenarioError::UnknownLever(k.clone()));
        }
    }
    let spec: ScenarioSpec = serde_json::from_str(text).map_err(parse_err)?;
    spec.validate()?;
    Ok(spec)
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let h = self.horizon_quarters;
        if h == 0 {
            return Err(ScenarioError::Invalid(
                "horizon_quarters must be >= 1".into(),
            ));
        }
        if let Some(a) = &self.lever_a {
            a.pathway.validate("lever_a", h)?;
        }
        if let Some(b) = &self.lever_b {
            b.pathway.validate("lever_b", h)?;
        }
        if let Some(c) = &self.lever_c {
            c.pathway.validate("lever_c", h)?;
        }
        for e in &self.lever_d {
            if !(e.start_value >= 0.0) || !(e.end_value >= 0.0) {
                return Err(ScenarioError::NegativePathway("lever_d".into()));
            }
            if e.start_quarter > e.end_quarter {
                return Err(ScenarioError::Invalid(
                    "lever_d: start_quarter after end_quarter".into(),
                ));
            }
        }
        for e in &self.lever_e {
            if !(0.0..=1.0).contains(&e.fraction) {
                return Err(ScenarioError::Invalid(
                    "lever_e: fraction outside [0,1]".into(),
                ));
            }
        }
        Ok(())
    }

    /// Checks sector indices against an economy with `n_sectors` sectors.
    pub fn check_sectors(
        &self,
        n_sectors: usize,
        green_sector: usize,
    ) -> Result<(), ScenarioError> {
        if let Some(g) = self.green_sector {
            if g != green_sector {
                return Err(ScenarioError::Invalid(format!(
                    "green_sector {g} differs from the run config ({green_sector})"
                )));
            }
        }
        let out = |s: usize| s >= n_sectors;
        let bad_a = self
            .lever_a
            .as_ref()
            .and_then(|a| a.sectors.as_ref())
            .is_some_and(|v| v.iter().any(|&s| out(s)));
        let bad_d = self
            .lever_d
            .iter()
            .any(|e| out(e.sector_from) || out(e.sector_to));
        let bad_e = self
            .lever_e
            .iter()
            .any(|e| out(e.category_from) || out(e.category_to));
        if bad_a || bad_d || bad_e {
            return Err(ScenarioError::Invalid(format!(
                "sector index outside 0..{n_sectors}"
            )));
        }
        Ok(())
    }

    pub fn lever_a_shares(&self, t: u32, n_sectors: usize) -> Option<Vec<f64>> {
        let a = self.lever_a.as_ref()?;
        let share = a.pathway.value_at(t);
        if share == 0.0 {
            return None;
        }
        Some(match &a.sectors {
            None => vec![share; n_sectors],
            Some(list) => (0..n_sectors)
                .map(|s| if list.contains(&s) { share } else { 0.0 })
                .collect(),
        })
    }

    pub fn lever_b_at(&self, t: u32) -> Option<(Cents, Targeting)> {
        let b = self.lever_b.as_ref()?;
        let amount = Cents::from_currency(b.pathway.value_at(t));
        (amount > Cents::ZERO).then_some((amount, b.targeting))
    }

    pub fn lever_c_at(&self, t: u32) -> Option<LeverCAt> {
        let c = self.lever_c.as_ref()?;
        let total = Cents::from_currency(c.pathway.value_at(t));
        (total > Cents::ZERO).then_some(LeverCAt {
            total,
            target: c.target,
            allocation: c.allocation,
            financing: c.financing,
        })
    }

    /// Applies the lever-E shifts triggered by adopting durable `kind`.
    pub fn apply_adoption_shifts(&self, kind: &str, weights: &mut [f64]) {
        for e in &self.lever_e {
            if matches!(&e.trigger, Trigger::Adoption(name) if name == kind) {
                shift_weights(weights, e.category_from, e.category_to, e.fraction);
            }
        }
    }
}

/// Levers that edit parameters rather than move money: D (coefficients)
/// and quarter-triggered E (consumption weights). Each quarter may be
/// applied once.
pub fn apply_parameter_levers(
    state: &mut EconomyState,
    spec: &ScenarioSpec,
    t: u32,
) -> Result<(), ScenarioError> {
    if state.last_scenario_quarter.is_some_and(|q| q >= t) {
        return Err(ScenarioError::Replay { t });
    }
    state.last_scenario_quarter = Some(t);
    apply_lever_d(state, &spec.lever_d, t)?;
    apply_lever_e(state, &spec.lever_e, t);
    Ok(())
}

pub fn apply_lever_d(
    state: &mut EconomyState,
    edits: &[CoefficientEdit],
    t: u32,
) -> Result<(), ScenarioError> {
    let mut changed = false;
    for e in edits {
        if let Some(v) = e.value_at(t) {
            state.io.coefficients[e.sector_from][e.sector_to] = v;
            changed = true;
        }
    }
    if changed {
        state
            .io
            .check_feasible()
            .map_err(ScenarioError::InfeasibleIo)?;
    }
    Ok(())
}

pub fn apply_lever_e(state: &mut EconomyState, shifts: &[WeightShiftRule], t: u32) {
    for e in shifts {
        if e.trigger == Trigger::Quarter(t) && e.fraction > 0.0 {
            for h in state.households.iter_mut() {
                shift_weights(
                    &mut h.consumption_weights,
                    e.category_from,
                    e.category_to,
                    e.fraction,
                );
            }
        }
    }
}

/// Moves `fraction` of `weights[from]` to `weights[to]` and renormalizes.
pub fn shift_weights(weights: &mut [f64], from: usize, to: usize, fraction: f64) {
    if from == to || fraction == 0.0 {
        return;
    }
    let moved = weights[from] * fraction;
    weights[from] -= moved;
    weights[to] += moved;
    for w in weights.iter_mut() {
        *w = w.max(0.0);
    }
    let sum: f64 = weights.iter().sum();
    if sum > 0.0 {
        for w in weights.iter_mut() {
            *w /= sum;
        }
    }
}

/// Each firm buys `share × last-quarter revenue` of green capital from the
/// green sector.
pub fn apply_lever_a(state: &mut EconomyState, shares: &[f64]) {
    let mut total = Cents::ZERO;
    for i in 0..state.firms.len() {
        let f = &state.firms[i];
        let share = shares[f.sector];
        if share <= 0.0 {
            continue;
        }
        let spend = f.revenue_last.scale(share);
        if spend <= Cents::ZERO {
            continue;
        }
        let id = f.id;
        state.debit(Subsystem::LeverA, Account::Firm(id), spend);
        let f = &mut state.firms[i];
        f.green_capital += spend;
        f.green_spend_current += spend;
        if f.deposits < Cents::ZERO {
            f.forced_overdraft = true;
        }
        total += spend;
    }
    state.flows.lever_a += total;
    let green = state.green_sector;
    state.settle_sector_sale(Subsystem::LeverA, green, total);
}

/// Targeted households buy `amount` of green goods before discretionary
/// consumption, going into overdraft if they must.
pub fn apply_lever_b(state: &mut EconomyState, amount: Cents, targeting: Targeting) {
    if amount <= Cents::ZERO {
        return;
    }
    let mut total = Cents::ZERO;
    for i in 0..state.households.len() {
        if targeting == Targeting::NonAdopters && state.households[i].has_adopted_any() {
            continue;
        }
        state.debit(Subsystem::LeverB, Account::Household(i as u32), amount);
        let h = &mut state.households[i];
        h.green_spend_current += amount;
        if h.deposits < Cents::ZERO {
            h.forced_overdraft = true;
        }
        total += amount;
    }
    state.flows.lever_b += total;
    let green = state.green_sector;
    state.settle_sector_sale(Subsystem::LeverB, green, total);
}

/// Pays the quarter's subsidy and the household transfers. Under
/// `ReducedSpending` the transfer pool is cut by the subsidy first.
pub fn apply_lever_c(
    state: &mut EconomyState,
    total: Cents,
    target: SubsidyTarget,
    allocation: Allocation,
    financing: Financing,
) {
    match financing {
        Financing::Expansion => {
            fiscal::pay_transfers(state, Cents::ZERO);
        }
        Financing::ReducedSpending => {
            fiscal::pay_transfers(state, total);
        }
    }
    fiscal::pay_subsidy(state, total, target, allocation);
}
