//! Taylor rule, the debt spread hinge and central-bank deposit interest.

use crate::economy::ledger::Subsystem;
use crate::economy::{Account, EconomyState};
use crate::money::Cents;

const GAP_WINDOW: usize = 8;

/// `max(0, neutral + π + taylor_pi (π - target) + taylor_gap × gap)`.
pub fn taylor_rate(
    neutral: f64,
    inflation: f64,
    target: f64,
    taylor_pi: f64,
    taylor_gap: f64,
    gap: f64,
) -> f64 {
    (neutral + inflation + taylor_pi * (inflation - target) + taylor_gap * gap).max(0.0)
}

/// Borrowing premium above the debt ceiling, per quarter.
pub fn spread(slope: f64, debt_ratio: f64, ceiling: f64) -> f64 {
    slope * (debt_ratio - ceiling).max(0.0)
}

/// Relative deviation of the latest real GDP from the mean of the (up to
/// eight) quarters before it. `cpi` deflates `gdp` quarter by quarter. Zero
/// until two quarters exist.
pub fn output_gap(gdp: &[Cents], cpi: &[f64]) -> f64 {
    let real: Vec<f64> = gdp.iter().zip(cpi).map(|(g, p)| g.as_f64() / p).collect();
    let Some((last, earlier)) = real.split_last() else {
        return 0.0;
    };
    if earlier.is_empty() {
        return 0.0;
    }
    let window = &earlier[earlier.len().saturating_sub(GAP_WINDOW)..];
    let mean = window.iter().sum::<f64>() / window.len() as f64;
    if mean <= 0.0 {
        return 0.0;
    }
    (last - mean) / mean
}

pub fn monetary_step(state: &mut EconomyState) {
    let cb = &state.central_bank;
    let inflation = state
        .history
        .inflation
        .last()
        .copied()
        .unwrap_or(cb.inflation_target);
    let gap = output_gap(&state.history.gdp, &state.history.cpi);
    let rate = taylor_rate(
        cb.neutral_rate,
        inflation,
        cb.inflation_target,
        cb.taylor_pi,
        cb.taylor_gap,
        gap,
    );
    state.central_bank.policy_rate = rate;
    let g = &state.government;
    state.government.spread = spread(g.spread_slope, state.debt_ratio(), g.debt_ceiling_ratio);
    pay_deposit_interest(state, rate);
}

/// Interest at `rate` on every private balance: paid on positive deposits,
/// charged on overdrafts. Both sides are money issuance by the central bank.
pub fn pay_deposit_interest(state: &mut EconomyState, rate: f64) {
    if rate == 0.0 {
        return;
    }
    let mut paid = Cents::ZERO;
    for i in 0..state.households.len() {
        let interest = state.households[i].deposits.scale(rate);
        if interest != Cents::ZERO {
            state.issue(Subsystem::Monetary, Account::Household(i as u32), interest);
            if interest > Cents::ZERO {
                state.households[i].income_current += interest;
            }
            paid += interest;
        }
    }
    for i in 0..state.firms.len() {
        let interest = state.firms[i].deposits.scale(rate);
        let id = state.firms[i].id;
        state.issue(Subsystem::Monetary, Account::Firm(id), interest);
        paid += interest;
    }
    if state.government.deposits > Cents::ZERO {
        let interest = state.government.deposits.scale(rate);
        state.issue(Subsystem::Monetary, Account::Government, interest);
        paid += interest;
    }
    state.flows.deposit_interest += paid;
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rule_identity_at_target() {
        assert_eq!(taylor_rate(0.005, 0.005, 0.005, 1.5, 0.5, 0.0), 0.01);
    }

    #[test]
    fn zero_lower_bound() {
        assert_eq!(taylor_rate(0.005, -0.05, 0.005, 1.5, 0.5, -0.1), 0.0);
    }

    #[test]
    fn spread_hinge() {
        assert_eq!(spread(0.02, 0.8, 1.0), 0.0);
        assert_eq!(spread(0.02, 1.0, 1.0), 0.0);
        assert!((spread(0.02, 1.5, 1.0) - 0.01).abs() < 1e-15);
    }

    #[test]
    fn gap_from_history() {
        assert_eq!(output_gap(&[], &[]), 0.0);
        assert_eq!(output_gap(&[Cents(100)], &[1.0]), 0.0);
        assert!((output_gap(&[Cents(100), Cents(100), Cents(110)], &[1.0; 3]) - 0.1).abs() < 1e-12);
        // Pure price growth is not a gap.
        assert!(output_gap(&[Cents(100), Cents(110), Cents(121)], &[1.0, 1.1, 1.21]).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn spread_monotone(slope in 0.0f64..1.0, d1 in 0.0f64..5.0, d2 in 0.0f64..5.0, ceiling in 0.0f64..3.0) {
            let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            prop_assert!(spread(slope, lo, ceiling) <= spread(slope, hi, ceiling));
        }

        #[test]
        fn rate_never_negative(n in -0.1f64..0.1, pi in -0.2f64..0.2, t in -0.1f64..0.1, a in 0.0f64..3.0, b in 0.0f64..3.0, g in -1.0f64..1.0) {
            prop_assert!(taylor_rate(n, pi, t, a, b, g) >= 0.0);
        }
    }
}
