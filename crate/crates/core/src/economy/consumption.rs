//! Household consumption.
//!
//! Budget = propensity × (deposits + disposable income), where disposable
//! income is this quarter's wage net of the tax due plus the base transfer.
//! The wage is already in deposits when this step runs, so the budget is
//! computed as `propensity × (deposits - tax_due + transfer)`, capped at the
//! deposits actually held. Spending is split by consumption weights;
//! shortages ration every buyer of a sector by the same fill ratio and the
//! unmet part stays in deposits.

use rayon::prelude::*;

use crate::economy::ledger::Subsystem;
use crate::economy::market::sector_stock_value;
use crate::economy::{Account, EconomyState};
use crate::money::Cents;
use crate::scenario::{self, ScenarioSpec};

/// Quantities bought with `budget` at `prices` under `weights`.
pub fn basket(budget: f64, weights: &[f64], prices: &[f64]) -> Vec<f64> {
    weights
        .iter()
        .zip(prices)
        .map(|(w, p)| budget * w / p)
        .collect()
}

pub fn consumption_step(state: &mut EconomyState, scenario: Option<&ScenarioSpec>) {
    if let Some(sc) = scenario {
        if let Some((amount, targeting)) = sc.lever_b_at(state.t) {
            scenario::apply_lever_b(state, amount, targeting);
        }
    }

    let s = state.n_sectors();
    let tax_rate = state.government.tax_rate_income;
    let transfer = state.government.transfer_per_household;

    // Intentions against a frozen snapshot, in integer cents.
    let mut desired = vec![0i64; state.households.len() * s];
    desired
        .par_chunks_mut(s)
        .zip(state.households.par_iter())
        .for_each(|(row, h)| {
            let budget = household_budget(
                h.propensity_to_consume,
                h.deposits,
                h.wage.scale(tax_rate),
                transfer,
            );
            for (d, w) in row.iter_mut().zip(&h.consumption_weights) {
                *d = (budget * w).floor() as i64;
            }
        });

    let mut demand = vec![0i64; s];
    for row in desired.chunks(s) {
        for (j, d) in row.iter().enumerate() {
            demand[j] += d;
        }
    }
    let fill: Vec<f64> = (0..s)
        .map(|j| {
            let stock = sector_stock_value(&state.firms, &state.firms_by_sector[j]);
            fill_ratio(stock, demand[j] as f64)
        })
        .collect();

    let mut receipts = vec![Cents::ZERO; s];
    for (h, row) in desired.chunks(s).enumerate() {
        let mut spend = Cents::ZERO;
        for (j, &d) in row.iter().enumerate() {
            let paid = if fill[j] >= 1.0 {
                d
            } else {
                (d as f64 * fill[j]).floor() as i64
            };
            receipts[j] += Cents(paid);
            spend += Cents(paid);
        }
        state.debit(Subsystem::Consumption, Account::Household(h as u32), spend);
        state.flows.consumption += spend;
    }
    for (j, total) in receipts.into_iter().enumerate() {
        state.settle_sector_sale(Subsystem::Consumption, j, total);
    }
}

/// Fill ratio a sector can honour for `demand` cents of orders.
pub fn fill_ratio(stock_value: f64, demand: f64) -> f64 {
    if demand > stock_value {
        (stock_value / demand).max(0.0)
    } else {
        1.0
    }
}

/// Discretionary budget in cents, never more than the deposits held.
pub fn household_budget(propensity: f64, deposits: Cents, tax_due: Cents, transfer: Cents) -> f64 {
    let disposable = (deposits - tax_due + transfer).as_f64();
    (propensity * disposable).min(deposits.as_f64()).max(0.0)
}
