//! Firm profit distribution.

use crate::economy::ledger::Subsystem;
use crate::economy::{Account, EconomyState};
use crate::money::{split_proportional, Cents};

/// Firms pay out a share of deposits above a working-capital buffer
/// (a multiple of last quarter's wage and input bill). The pool goes to
/// households in proportion to their positive illiquid wealth, which stands
/// in for equity ownership.
pub fn dividend_step(state: &mut EconomyState) {
    let payout_rate = state.behavior.dividend_payout;
    let buffer_quarters = state.behavior.firm_buffer_quarters;
    let mut pool = Cents::ZERO;
    for i in 0..state.firms.len() {
        let f = &state.firms[i];
        let buffer = (f.wage_bill_last + f.intermediate_cost_last).scale(buffer_quarters);
        let excess = f.deposits - buffer;
        if excess <= Cents::ZERO {
            continue;
        }
        let payout = excess.scale(payout_rate);
        let id = f.id;
        state.debit(Subsystem::Dividends, Account::Firm(id), payout);
        pool += payout;
    }
    if pool == Cents::ZERO {
        return;
    }
    let weights: Vec<u128> = state
        .households
        .iter()
        .map(|h| h.illiquid_wealth.0.max(0) as u128)
        .collect();
    let parts = split_proportional(pool, &weights)
        .unwrap_or_else(|| split_proportional(pool, &vec![1; weights.len()]).expect("non-empty"));
    for (i, part) in parts.into_iter().enumerate() {
        if part != Cents::ZERO {
            state.credit(Subsystem::Dividends, Account::Household(i as u32), part);
            state.households[i].income_current += part;
        }
    }
    state.flows.dividends += pool;
}
