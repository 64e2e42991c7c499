//! Labor market: vacancies, separations and wages.

use crate::economy::EconomyState;
use crate::money::{round_half_even, Cents};

/// Workers needed for `planned_output`, rounded up.
pub fn labor_demand(planned_output: f64, labor_coefficient: f64) -> usize {
    let raw = planned_output.max(0.0) * labor_coefficient;
    // Absorb float noise so an exact integer requirement is not bumped up.
    (raw - 1e-9).ceil().max(0.0) as usize
}

/// Planned output covers expected sales, restores the inventory target and
/// works off any backlog.
pub fn planned_output(expected_sales: f64, target_ratio: f64, backlog: f64, inventory: f64) -> f64 {
    (expected_sales * (1.0 + target_ratio) + backlog - inventory).max(0.0)
}

/// Sector wage indices move with a mix of trailing inflation and the
/// inflation target, plus a response to the unemployment gap.
pub fn update_wage_index(state: &mut EconomyState) {
    let h = &state.history;
    if h.inflation.is_empty() {
        return;
    }
    let window = &h.inflation[h.inflation.len().saturating_sub(4)..];
    let trailing = window.iter().sum::<f64>() / window.len() as f64;
    let u = h.unemployment.last().copied().unwrap_or(0.0);
    let b = &state.behavior;
    let anchor = b.wage_indexation * trailing
        + (1.0 - b.wage_indexation) * state.central_bank.inflation_target;
    let growth = (anchor + b.wage_phillips * (b.natural_unemployment - u)).exp();
    for w in state.wage_index.iter_mut() {
        *w *= growth;
    }
}

pub fn labor_market_step(state: &mut EconomyState) {
    update_wage_index(state);
    let ratio = state.behavior.target_inventory_ratio;

    let mut demands = Vec::with_capacity(state.firms.len());
    for i in 0..state.firms.len() {
        let l = state.labor_coefficient(state.firms[i].sector);
        let f = &mut state.firms[i];
        f.planned_output = planned_output(f.expected_sales, ratio, f.backlog, f.inventory);
        demands.push(labor_demand(f.planned_output, l));
    }
    match_workers(state, &demands);

    for h in state.households.iter_mut() {
        h.wage = match h.employed_by {
            Some(fid) => {
                let sector = state.firms[fid as usize].sector;
                Cents(round_half_even(state.wage_index[sector] * h.skill))
            }
            None => Cents::ZERO,
        };
    }
}

/// Separates the most recent hires where demand fell, then fills vacancies
/// with unemployed households in ascending (household id, firm id) order.
pub fn match_workers(state: &mut EconomyState, demands: &[usize]) {
    for (f, &demand) in state.firms.iter_mut().zip(demands) {
        while f.employees.len() > demand {
            let h = f.employees.pop().expect("non-empty");
            state.households[h as usize].employed_by = None;
        }
    }
    let pool: Vec<u32> = state
        .households
        .iter()
        .filter(|h| h.employed_by.is_none())
        .map(|h| h.id)
        .collect();
    let mut unemployed = pool.into_iter();
    'firms: for (f, &demand) in state.firms.iter_mut().zip(demands) {
        while f.employees.len() < demand {
            match unemployed.next() {
                Some(h) => {
                    f.employees.push(h);
                    state.households[h as usize].employed_by = Some(f.id);
                }
                None => break 'firms,
            }
        }
    }
}
