//! Sector-level goods markets.
//!
//! Buyers pay a sector, not a firm. The sector's receipts are split across
//! its firms in proportion to the value of their available stock, and each
//! firm delivers `receipt / price` units. Orders that exceed a firm's stock
//! become backlog, delivered from later production.

use crate::economy::agents::Firm;
use crate::economy::ledger::Subsystem;
use crate::economy::{Account, EconomyState};
use crate::money::{split_proportional, weight_key, Cents};

/// Inventory-value weighted price; output-weighted when nothing is in stock.
pub(crate) fn sector_price(firms: &[Firm], idxs: &[usize]) -> f64 {
    let (mut value, mut units) = (0.0, 0.0);
    for &i in idxs {
        value += firms[i].inventory * firms[i].price;
        units += firms[i].inventory;
    }
    if units > 0.0 {
        return value / units;
    }
    let (mut value, mut units) = (0.0, 0.0);
    for &i in idxs {
        value += firms[i].output_last * firms[i].price;
        units += firms[i].output_last;
    }
    if units > 0.0 {
        return value / units;
    }
    idxs.iter().map(|&i| firms[i].price).sum::<f64>() / idxs.len() as f64
}

/// Value of the stock currently offered by a sector, in cents.
pub(crate) fn sector_stock_value(firms: &[Firm], idxs: &[usize]) -> f64 {
    idxs.iter()
        .map(|&i| firms[i].inventory * firms[i].price)
        .sum()
}

fn allocation_weights(firms: &[Firm], idxs: &[usize]) -> Vec<u128> {
    let by_stock: Vec<u128> = idxs
        .iter()
        .map(|&i| weight_key(firms[i].inventory * firms[i].price))
        .collect();
    if by_stock.iter().any(|&w| w > 0) {
        return by_stock;
    }
    let by_output: Vec<u128> = idxs
        .iter()
        .map(|&i| weight_key(firms[i].output_last * firms[i].price))
        .collect();
    if by_output.iter().any(|&w| w > 0) {
        return by_output;
    }
    vec![1; idxs.len()]
}

impl EconomyState {
    /// Credits `total` to the firms of `sector` and removes the purchased
    /// units from their stock. The matching debits must already have been
    /// posted under `sub`. Returns the number of units sold.
    pub(crate) fn settle_sector_sale(
        &mut self,
        sub: Subsystem,
        sector: usize,
        total: Cents,
    ) -> f64 {
        if total == Cents::ZERO {
            return 0.0;
        }
        let idxs = self.firms_by_sector[sector].clone();
        let weights = allocation_weights(&self.firms, &idxs);
        let parts = split_proportional(total, &weights).expect("weights are non-zero");
        let mut units_total = 0.0;
        for (&i, part) in idxs.iter().zip(parts) {
            if part == Cents::ZERO {
                continue;
            }
            let id = self.firms[i].id;
            self.credit(sub, Account::Firm(id), part);
            let f = &mut self.firms[i];
            let units = part.as_f64() / f.price;
            let delivered = units.min(f.inventory);
            f.inventory -= delivered;
            f.backlog += units - delivered;
            f.revenue_current += part;
            f.units_sold_current += units;
            units_total += units;
        }
        units_total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_price_weights_by_stock() {
        let mut a = Firm::new(0, 0, 1.0);
        a.price = 2.0;
        a.inventory = 1.0;
        let mut b = Firm::new(1, 0, 1.0);
        b.price = 5.0;
        b.inventory = 3.0;
        assert_eq!(
            sector_price(&[a.clone(), b.clone()], &[0, 1]),
            (2.0 + 15.0) / 4.0
        );
        a.inventory = 0.0;
        b.inventory = 0.0;
        assert_eq!(sector_price(&[a, b], &[0, 1]), 3.5);
    }
}
