//! Per-step flow ledger and the stock-flow audit.
//!
//! Every deposit change goes through [`Ledger`] postings tagged with the
//! sub-step that caused it. A transfer debits one account and credits
//! another within the same subsystem; central-bank interest is posted as
//! issuance (positive when money is created, negative when destroyed).

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::money::Cents;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subsystem {
    Production,
    Consumption,
    LeverB,
    LeverA,
    Dividends,
    Fiscal,
    Monetary,
    Diffusion,
}

impl Subsystem {
    pub const ALL: [Subsystem; 8] = [
        Subsystem::Production,
        Subsystem::Consumption,
        Subsystem::LeverB,
        Subsystem::LeverA,
        Subsystem::Dividends,
        Subsystem::Fiscal,
        Subsystem::Monetary,
        Subsystem::Diffusion,
    ];

    fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Subsystem::Production => "production",
            Subsystem::Consumption => "consumption",
            Subsystem::LeverB => "lever_b",
            Subsystem::LeverA => "lever_a",
            Subsystem::Dividends => "dividends",
            Subsystem::Fiscal => "fiscal",
            Subsystem::Monetary => "monetary",
            Subsystem::Diffusion => "diffusion",
        }
    }
}

impl fmt::Display for Subsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Account {
    Household(u32),
    Firm(u32),
    Government,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowTotals {
    pub debits: i128,
    pub credits: i128,
    pub issuance: i128,
}

impl FlowTotals {
    fn residual(&self) -> i128 {
        self.credits - self.debits - self.issuance
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    opening_money: i128,
    flows: [FlowTotals; 8],
    open: bool,
}

impl Ledger {
    pub fn open(&mut self, money_stock: i128) {
        self.opening_money = money_stock;
        self.flows = Default::default();
        self.open = true;
    }

    pub fn is_open(&self) -> bool {
        self.open
    }

    pub fn debit(&mut self, sub: Subsystem, amount: Cents) {
        self.flows[sub.index()].debits += amount.0 as i128;
    }

    pub fn credit(&mut self, sub: Subsystem, amount: Cents) {
        self.flows[sub.index()].credits += amount.0 as i128;
    }

    pub fn issue(&mut self, sub: Subsystem, amount: Cents) {
        let f = &mut self.flows[sub.index()];
        f.credits += amount.0 as i128;
        f.issuance += amount.0 as i128;
    }

    pub fn totals(&self, sub: Subsystem) -> FlowTotals {
        self.flows[sub.index()]
    }

    pub fn total_issuance(&self) -> i128 {
        self.flows.iter().map(|f| f.issuance).sum()
    }

    /// Shifts one subsystem's recorded credits by `cents` without touching
    /// any balance. Used to check that the audit catches corrupted books.
    pub fn inject_fault(&mut self, sub: Subsystem, cents: i64) {
        self.flows[sub.index()].credits += cents as i128;
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AuditError {
    #[error("stock-flow audit failed: residual {residual_cents} cents in {subsystem}")]
    AuditFailure {
        residual_cents: i128,
        subsystem: String,
    },
    #[error("stock-flow audit has no ledger for this step")]
    MissingLedger,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsystemFlow {
    pub subsystem: Subsystem,
    /// Gross credits posted, in cents.
    pub gross_flow: i128,
    pub issuance: i128,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub residual_cents: i128,
    pub money_change: i128,
    pub issuance: i128,
    pub flows: Vec<SubsystemFlow>,
}

/// Checks that each subsystem's postings balance and that the change in the
/// money stock equals central-bank issuance, exactly.
pub fn audit(ledger: &Ledger, closing_money: i128) -> Result<AuditReport, AuditError> {
    if !ledger.open {
        return Err(AuditError::MissingLedger);
    }
    for sub in Subsystem::ALL {
        let r = ledger.totals(sub).residual();
        if r != 0 {
            return Err(AuditError::AuditFailure {
                residual_cents: r,
                subsystem: sub.name().to_string(),
            });
        }
    }
    let issuance = ledger.total_issuance();
    let money_change = closing_money - ledger.opening_money;
    let residual = money_change - issuance;
    if residual != 0 {
        return Err(AuditError::AuditFailure {
            residual_cents: residual,
            subsystem: "balance_sheets".to_string(),
        });
    }
    Ok(AuditReport {
        residual_cents: 0,
        money_change,
        issuance,
        flows: Subsystem::ALL
            .iter()
            .map(|&s| SubsystemFlow {
                subsystem: s,
                gross_flow: ledger.totals(s).credits,
                issuance: ledger.totals(s).issuance,
            })
            .collect(),
    })
}
