//! Taxes, transfers, subsidies and interest on government debt.

use serde::{Deserialize, Serialize};

use crate::economy::ledger::Subsystem;
use crate::economy::{Account, EconomyState};
use crate::money::{split_proportional, Cents};
use crate::scenario::{self, ScenarioSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Financing {
    /// Other spending unchanged; debt absorbs the subsidy.
    Expansion,
    /// Transfers are cut by the subsidy total (down to zero); any remainder
    /// goes to debt.
    ReducedSpending,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsidyTarget {
    Firms,
    Households,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Allocation {
    Uniform,
    ProportionalToGreenSpend,
}

pub fn fiscal_step(state: &mut EconomyState, scenario: Option<&ScenarioSpec>) {
    collect_income_tax(state);
    match scenario.and_then(|sc| sc.lever_c_at(state.t)) {
        Some(c) if c.total > Cents::ZERO => {
            scenario::apply_lever_c(state, c.total, c.target, c.allocation, c.financing)
        }
        _ => {
            pay_transfers(state, Cents::ZERO);
        }
    }
    charge_debt_interest(state);
}

pub fn collect_income_tax(state: &mut EconomyState) {
    let rate = state.government.tax_rate_income;
    if rate == 0.0 {
        return;
    }
    for i in 0..state.households.len() {
        let tax = state.households[i].wage.scale(rate);
        if tax > Cents::ZERO {
            state.transfer(
                Subsystem::Fiscal,
                Account::Household(i as u32),
                Account::Government,
                tax,
            );
            state.flows.taxes += tax;
        }
    }
}

/// Pays the per-household transfer, with the whole pool reduced by `cut`.
/// Returns the amount actually cut.
pub fn pay_transfers(state: &mut EconomyState, cut: Cents) -> Cents {
    let base = state.government.transfer_per_household;
    let n = state.households.len();
    let pool = Cents(base.0 * n as i64);
    let cut = cut.min(pool).max(Cents::ZERO);
    if cut == Cents::ZERO {
        if base > Cents::ZERO {
            for i in 0..n {
                pay_household(state, i, base);
            }
            state.flows.transfers += pool;
        }
        return Cents::ZERO;
    }
    let remaining = pool - cut;
    if remaining > Cents::ZERO {
        let parts = split_proportional(remaining, &vec![1; n]).expect("non-empty population");
        for (i, part) in parts.into_iter().enumerate() {
            pay_household(state, i, part);
        }
    }
    state.flows.transfers += remaining;
    cut
}

fn pay_household(state: &mut EconomyState, i: usize, amount: Cents) {
    if amount == Cents::ZERO {
        return;
    }
    state.transfer(
        Subsystem::Fiscal,
        Account::Government,
        Account::Household(i as u32),
        amount,
    );
    state.households[i].income_current += amount;
}

/// Pays `total` from the government to the targeted agents.
pub fn pay_subsidy(
    state: &mut EconomyState,
    total: Cents,
    target: SubsidyTarget,
    allocation: Allocation,
) {
    if total <= Cents::ZERO {
        return;
    }
    let weights: Vec<u128> = match (target, allocation) {
        (SubsidyTarget::Households, Allocation::ProportionalToGreenSpend) => state
            .households
            .iter()
            .map(|h| h.green_spend_last.0.max(0) as u128)
            .collect(),
        (SubsidyTarget::Firms, Allocation::ProportionalToGreenSpend) => state
            .firms
            .iter()
            .map(|f| f.green_spend_last.0.max(0) as u128)
            .collect(),
        (SubsidyTarget::Households, Allocation::Uniform) => vec![1; state.households.len()],
        (SubsidyTarget::Firms, Allocation::Uniform) => vec![1; state.firms.len()],
    };
    let parts = split_proportional(total, &weights)
        .unwrap_or_else(|| split_proportional(total, &vec![1; weights.len()]).expect("non-empty"));
    for (i, part) in parts.into_iter().enumerate() {
        if part == Cents::ZERO {
            continue;
        }
        match target {
            SubsidyTarget::Households => {
                state.transfer(
                    Subsystem::Fiscal,
                    Account::Government,
                    Account::Household(i as u32),
                    part,
                );
                state.households[i].income_current += part;
            }
            SubsidyTarget::Firms => {
                let id = state.firms[i].id;
                state.transfer(
                    Subsystem::Fiscal,
                    Account::Government,
                    Account::Firm(id),
                    part,
                );
            }
        }
    }
    state.flows.subsidies += total;
}

/// Interest on debt at the policy rate plus the debt spread. The payment
/// goes to the central bank and leaves the money stock.
pub fn charge_debt_interest(state: &mut EconomyState) {
    let rate = state.central_bank.policy_rate + state.government.spread;
    state.government.last_interest_rate = rate;
    let debt = state.government.debt();
    let interest = debt.scale(rate);
    if interest > Cents::ZERO {
        state.issue(Subsystem::Fiscal, Account::Government, -interest);
        state.flows.government_interest += interest;
    }
}
