//! Markup pricing with inventory-driven markup drift.

use crate::economy::EconomyState;

const MIN_OUTPUT: f64 = 1e-9;

/// Unit cost from the quarter's wage bill, intermediate spend and green
/// capital amortization. Returns `None` when nothing was produced.
pub fn unit_cost(
    wage_bill: f64,
    intermediate_cost: f64,
    amortization: f64,
    output: f64,
) -> Option<f64> {
    if output <= MIN_OUTPUT {
        return None;
    }
    Some((wage_bill + intermediate_cost + amortization) / output.max(MIN_OUTPUT))
}

/// Moves the markup one drift step toward the inventory/output target.
/// `inventory` is the stock carried into the quarter, net of backlog.
pub fn drift_markup(
    markup: f64,
    inventory: f64,
    output: f64,
    target: f64,
    band: f64,
    drift: f64,
    max: f64,
) -> f64 {
    let ratio = if output > MIN_OUTPUT {
        inventory / output
    } else {
        f64::INFINITY
    };
    let next = if ratio < target * (1.0 - band) {
        markup + drift
    } else if ratio > target * (1.0 + band) {
        markup - drift
    } else {
        markup
    };
    next.clamp(0.0, max)
}

pub fn pricing_step(state: &mut EconomyState) {
    let b = state.behavior.clone();
    for f in state.firms.iter_mut() {
        let amortization = f.green_capital.as_f64() * b.amortization_rate;
        if let Some(c) = unit_cost(
            f.wage_bill_last.as_f64(),
            f.intermediate_cost_last.as_f64(),
            amortization,
            f.output_last,
        ) {
            if c > 0.0 {
                f.unit_cost = c;
            }
        }
        f.markup = drift_markup(
            f.markup,
            f.inventory_carried,
            f.output_last,
            b.target_inventory_ratio,
            b.inventory_band,
            b.markup_drift,
            b.max_markup,
        );
        f.price = f.unit_cost * (1.0 + f.markup);
    }
}
