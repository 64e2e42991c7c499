use serde::{Deserialize, Serialize};

use crate::money::Cents;

pub type HouseholdId = u32;
pub type FirmId = u32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Household {
    pub id: HouseholdId,
    pub deposits: Cents,
    pub illiquid_wealth: Cents,
    pub employed_by: Option<FirmId>,
    /// Wage paid for the current quarter when employed.
    pub wage: Cents,
    /// Earnings multiplier relative to the sector wage index (mean 1).
    pub skill: f64,
    pub consumption_weights: Vec<f64>,
    /// Adoption flags, one bit per configured durable kind.
    pub durables: u32,
    pub region_code: u8,
    pub household_size: u32,
    pub propensity_to_consume: f64,
    /// Set when lever-B forcing pushed deposits below zero.
    pub forced_overdraft: bool,
    /// Gross income received during the last completed quarter.
    pub income_last: Cents,
    pub green_spend_last: Cents,
    pub(crate) income_current: Cents,
    pub(crate) green_spend_current: Cents,
}

impl Household {
    pub fn has_adopted(&self, kind: usize) -> bool {
        self.durables & (1 << kind) != 0
    }

    pub fn has_adopted_any(&self) -> bool {
        self.durables != 0
    }

    pub fn net_wealth(&self) -> Cents {
        self.deposits + self.illiquid_wealth
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Firm {
    pub id: FirmId,
    pub sector: usize,
    /// Employees in hiring order; separations remove from the back.
    pub employees: Vec<HouseholdId>,
    /// Cents per unit.
    pub price: f64,
    /// Cents per unit.
    pub unit_cost: f64,
    pub markup: f64,
    pub inventory: f64,
    /// Stock left at the end of last quarter, net of backlog.
    #[serde(default)]
    pub inventory_carried: f64,
    pub deposits: Cents,
    pub green_capital: Cents,
    pub output_last: f64,
    /// Relative capacity drawn from the firm-size distribution.
    pub size_weight: f64,
    pub expected_sales: f64,
    pub planned_output: f64,
    /// Units already paid for but not yet delivered.
    pub backlog: f64,
    pub revenue_last: Cents,
    pub wage_bill_last: Cents,
    pub intermediate_cost_last: Cents,
    pub green_spend_last: Cents,
    pub forced_overdraft: bool,
    pub(crate) revenue_current: Cents,
    pub(crate) units_sold_current: f64,
    pub(crate) green_spend_current: Cents,
}

impl Firm {
    pub fn new(id: FirmId, sector: usize, size_weight: f64) -> Self {
        Self {
            id,
            sector,
            employees: Vec::new(),
            price: 0.0,
            unit_cost: 0.0,
            markup: 0.0,
            inventory: 0.0,
            inventory_carried: 0.0,
            deposits: Cents::ZERO,
            green_capital: Cents::ZERO,
            output_last: 0.0,
            size_weight,
            expected_sales: 0.0,
            planned_output: 0.0,
            backlog: 0.0,
            revenue_last: Cents::ZERO,
            wage_bill_last: Cents::ZERO,
            intermediate_cost_last: Cents::ZERO,
            green_spend_last: Cents::ZERO,
            forced_overdraft: false,
            revenue_current: Cents::ZERO,
            units_sold_current: 0.0,
            green_spend_current: Cents::ZERO,
        }
    }
}
