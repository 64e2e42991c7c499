//! Leontief production with labor and input constraints.

use crate::economy::ledger::Subsystem;
use crate::economy::{Account, EconomyState};
use crate::money::{round_half_even, Cents};

const FEASIBILITY_ITERATIONS: usize = 64;

pub fn production_step(state: &mut EconomyState) {
    pay_wages(state);

    let desired: Vec<f64> = state
        .firms
        .iter()
        .map(|f| {
            if f.employees.is_empty() {
                0.0
            } else {
                let labor_feasible = f.employees.len() as f64 / state.labor_coefficient(f.sector);
                f.planned_output.min(labor_feasible)
            }
        })
        .collect();
    let output = input_feasible_output(state, &desired);

    let intensity = state.io.emission_intensity.clone();
    for (f, &y) in state.firms.iter_mut().zip(&output) {
        f.inventory += y;
        f.output_last = y;
        let delivered = f.backlog.min(f.inventory);
        f.inventory -= delivered;
        f.backlog -= delivered;
        state.flows.emissions += y * intensity[f.sector];
        state.flows.output_units += y;
    }

    buy_intermediates(state, &output);
}

fn pay_wages(state: &mut EconomyState) {
    for i in 0..state.firms.len() {
        let fid = state.firms[i].id;
        let employees = std::mem::take(&mut state.firms[i].employees);
        let mut bill = Cents::ZERO;
        for &h in &employees {
            let wage = state.households[h as usize].wage;
            state.transfer(
                Subsystem::Production,
                Account::Firm(fid),
                Account::Household(h),
                wage,
            );
            state.households[h as usize].income_current += wage;
            bill += wage;
        }
        state.firms[i].employees = employees;
        state.firms[i].wage_bill_last = bill;
        state.flows.wages += bill;
    }
}

/// Scales each firm's desired output by the worst fill ratio among the
/// inputs it uses. A sector's supply is its stock plus this quarter's
/// output; requests made at desired output are rationed proportionally.
/// Output only falls across iterations, so the loop converges.
pub fn input_feasible_output(state: &EconomyState, desired: &[f64]) -> Vec<f64> {
    let s = state.n_sectors();
    let a = &state.io.coefficients;
    let mut request = vec![0.0; s];
    for (f, &y) in state.firms.iter().zip(desired) {
        for i in 0..s {
            request[i] += a[i][f.sector] * y;
        }
    }
    let mut out = desired.to_vec();
    for _ in 0..FEASIBILITY_ITERATIONS {
        let mut supply = vec![0.0; s];
        for (f, &y) in state.firms.iter().zip(&out) {
            supply[f.sector] += f.inventory + y;
        }
        let ratio: Vec<f64> = (0..s)
            .map(|i| {
                if request[i] > supply[i] {
                    supply[i] / request[i]
                } else {
                    1.0
                }
            })
            .collect();
        let next: Vec<f64> = state
            .firms
            .iter()
            .zip(desired)
            .map(|(f, &d)| {
                let fill = (0..s)
                    .filter(|&i| a[i][f.sector] > 0.0)
                    .map(|i| ratio[i])
                    .fold(1.0, f64::min);
                d * fill
            })
            .collect();
        let change = next
            .iter()
            .zip(&out)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        out = next;
        if change <= 1e-12 {
            break;
        }
    }
    out
}

fn buy_intermediates(state: &mut EconomyState, output: &[f64]) {
    let s = state.n_sectors();
    let prices = state.sector_prices();
    let mut receipts = vec![Cents::ZERO; s];
    for (k, &y) in output.iter().enumerate() {
        let j = state.firms[k].sector;
        let fid = state.firms[k].id;
        let mut cost = Cents::ZERO;
        if y > 0.0 {
            for i in 0..s {
                let coef = state.io.coefficients[i][j];
                if coef > 0.0 {
                    let pay = Cents(round_half_even(coef * y * prices[i]));
                    receipts[i] += pay;
                    cost += pay;
                }
            }
        }
        state.debit(Subsystem::Production, Account::Firm(fid), cost);
        state.firms[k].intermediate_cost_last = cost;
        state.flows.intermediate += cost;
    }
    for (i, total) in receipts.into_iter().enumerate() {
        state.settle_sector_sale(Subsystem::Production, i, total);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economy::fixtures::*;
    use crate::io_table::IoTable;

    #[test]
    fn no_employees_no_output() {
        let mut s = state(10, 2, tiny_io(), 3);
        for f in s.firms.iter_mut() {
            f.employees.clear();
        }
        for h in s.households.iter_mut() {
            h.employed_by = None;
        }
        production_step(&mut s);
        assert!(s
            .firms
            .iter()
            .all(|f| f.output_last == 0.0 && f.intermediate_cost_last == Cents::ZERO));
    }

    #[test]
    fn single_sector_without_inputs_is_labor_bound() {
        let io = IoTable::new(vec![vec![0.0]], vec![0.05], vec![1.0]).unwrap();
        let mut s = state(10, 1, io, 3);
        s.firms[0].planned_output = 1e9;
        let n = s.firms[0].employees.len() as f64;
        production_step(&mut s);
        assert!((s.firms[0].output_last - n / 0.05).abs() < 1e-9);
        assert!((s.flows.emissions - n / 0.05).abs() < 1e-6);
    }

    #[test]
    fn leontief_input_bound() {
        // Sector 1 needs 0.5 units of sector 0 per unit; sector 0 cannot
        // produce, so sector 1 is capped at twice sector 0's inventory.
        let io = IoTable::new(
            vec![vec![0.0, 0.5], vec![0.0, 0.0]],
            vec![0.01, 0.01],
            vec![0.0, 0.0],
        )
        .unwrap();
        let mut s = state(40, 2, io, 3);
        let (f0, f1) = (
            s.firms.iter().position(|f| f.sector == 0).unwrap(),
            s.firms.iter().position(|f| f.sector == 1).unwrap(),
        );
        for f in s.firms.iter_mut() {
            f.employees.clear();
        }
        for h in s.households.iter_mut() {
            h.employed_by = None;
        }
        s.firms[f1].employees = vec![0, 1, 2];
        s.firms[f0].inventory = 30.0;
        s.firms[f1].planned_output = 1e6;
        production_step(&mut s);
        assert!(
            (s.firms[f1].output_last - 60.0).abs() < 1e-6,
            "{}",
            s.firms[f1].output_last
        );
        // Payments are whole cents, so the stock left is below one cent of value.
        assert!(
            s.firms[f0].inventory * s.firms[f0].price < 1.0,
            "{}",
            s.firms[f0].inventory
        );
    }

    #[test]
    fn production_books_balance() {
        let mut s = state(40, 20, ten_sector_io(), 8);
        s.ledger.open(s.money_stock());
        production_step(&mut s);
        crate::economy::audit(&s.ledger, s.money_stock()).unwrap();
    }
}
