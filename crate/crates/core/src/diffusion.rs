//! Peer-driven adoption of household durables over a small-world network.
//!
//! Households sit on a ring ordered by (region, id), each linked to its `k`
//! nearest ring neighbors, and every edge is rewired with probability `p`
//! to a random non-neighbor. Each quarter a non-adopter adopts with a
//! logistic probability that rises with the share of adopting neighbors.
//! Decisions are drawn against the adopter set at the start of the quarter
//! and committed in ascending id.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::economy::agents::Household;
use crate::economy::ledger::Subsystem;
use crate::economy::{Account, EconomyState};
use crate::money::Cents;
use crate::rng::{generator, uniform, Stream};
use crate::scenario::{self, ScenarioSpec};

#[derive(Debug, Error, PartialEq)]
pub enum DiffusionError {
    #[error("degree {k} must be even with 2 <= k < n (n = {n})")]
    DegreeTooLarge { k: usize, n: usize },
    #[error("invalid diffusion parameter: {0}")]
    InvalidParameter(String),
    #[error("adopter set is empty")]
    EmptyAdopterSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocialGraph {
    /// Sorted neighbor ids, indexed by household id.
    pub adjacency: Vec<Vec<u32>>,
    pub degree_k: usize,
    pub rewire_p: f64,
}

impl SocialGraph {
    pub fn n_nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn n_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdoptionParams {
    pub base: f64,
    pub price_coeff: f64,
    pub income_coeff: f64,
    pub peer_coeff: f64,
    pub subsidy_coeff: f64,
}

impl AdoptionParams {
    pub fn validate(&self) -> Result<(), DiffusionError> {
        if self.price_coeff > 0.0
            || self.income_coeff < 0.0
            || self.peer_coeff < 0.0
            || self.subsidy_coeff < 0.0
        {
            return Err(DiffusionError::InvalidParameter(
                "price_coeff must be <= 0; income, peer and subsidy coefficients >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Moves `fraction` of the weight on sector `from` to sector `to`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightShift {
    pub from: usize,
    pub to: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DurableKind {
    pub name: String,
    pub degree_k: usize,
    pub rewire_p: f64,
    pub params: AdoptionParams,
    #[serde(default)]
    pub weight_shift: Option<WeightShift>,
    /// Purchase price in currency at t = 0.
    pub price: f64,
    /// Fixed government subsidy per purchase, in currency.
    #[serde(default)]
    pub subsidy: f64,
    /// Technology whose cost index scales the price over time.
    #[serde(default)]
    pub tech_ref: Option<String>,
    /// Share of households owning the durable at t = 0.
    #[serde(default)]
    pub initial_share: f64,
}

impl DurableKind {
    pub fn validate(&self, n_sectors: usize) -> Result<(), DiffusionError> {
        self.params.validate()?;
        if !(0.0..=1.0).contains(&self.rewire_p) {
            return Err(DiffusionError::InvalidParameter(format!(
                "{}: rewire_p outside [0,1]",
                self.name
            )));
        }
        if self.price <= 0.0 || self.subsidy < 0.0 {
            return Err(DiffusionError::InvalidParameter(format!(
                "{}: price must be > 0, subsidy >= 0",
                self.name
            )));
        }
        if !(0.0..=1.0).contains(&self.initial_share) {
            return Err(DiffusionError::InvalidParameter(format!(
                "{}: initial_share outside [0,1]",
                self.name
            )));
        }
        if let Some(w) = &self.weight_shift {
            if !(0.0..=1.0).contains(&w.fraction) || w.from >= n_sectors || w.to >= n_sectors {
                return Err(DiffusionError::InvalidParameter(format!(
                    "{}: bad weight_shift",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

pub fn build_network(
    households: &[Household],
    degree_k: usize,
    rewire_p: f64,
    seed: u64,
) -> Result<SocialGraph, DiffusionError> {
    let n = households.len();
    if degree_k < 2 || degree_k % 2 != 0 || degree_k >= n {
        return Err(DiffusionError::DegreeTooLarge { k: degree_k, n });
    }
    if !(0.0..=1.0).contains(&rewire_p) {
        return Err(DiffusionError::InvalidParameter(
            "rewire_p outside [0,1]".into(),
        ));
    }
    let mut ring: Vec<(u8, u32)> = households.iter().map(|h| (h.region_code, h.id)).collect();
    ring.sort_unstable();
    let ring: Vec<u32> = ring.into_iter().map(|(_, id)| id).collect();
    small_world(&ring, degree_k, rewire_p, seed)
}

/// Watts-Strogatz graph over node ids `0..n` placed around a ring in the
/// order given by `ring`.
pub fn small_world(
    ring: &[u32],
    degree_k: usize,
    rewire_p: f64,
    seed: u64,
) -> Result<SocialGraph, DiffusionError> {
    let n = ring.len();
    if degree_k < 2 || degree_k % 2 != 0 || degree_k >= n {
        return Err(DiffusionError::DegreeTooLarge { k: degree_k, n });
    }
    if !(0.0..=1.0).contains(&rewire_p) {
        return Err(DiffusionError::InvalidParameter(
            "rewire_p outside [0,1]".into(),
        ));
    }
    let mut seen = vec![false; n];
    for &id in ring {
        if id as usize >= n || std::mem::replace(&mut seen[id as usize], true) {
            return Err(DiffusionError::InvalidParameter(
                "ring must be a permutation of 0..n".into(),
            ));
        }
    }
    let mut adj: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); n];
    for i in 0..n {
        for j in 1..=degree_k / 2 {
            let (a, b) = (ring[i], ring[(i + j) % n]);
            adj[a as usize].insert(b);
            adj[b as usize].insert(a);
        }
    }
    if rewire_p > 0.0 {
        let mut rng = generator(seed, Stream::Network, &[n as u64, degree_k as u64]);
        for j in 1..=degree_k / 2 {
            for i in 0..n {
                let (a, b) = (ring[i], ring[(i + j) % n]);
                if !adj[a as usize].contains(&b) || rng.random::<f64>() >= rewire_p {
                    continue;
                }
                if adj[a as usize].len() >= n - 1 {
                    continue;
                }
                let c = loop {
                    let c = rng.random_range(0..n as u32);
                    if c != a && !adj[a as usize].contains(&c) {
                        break c;
                    }
                };
                adj[a as usize].remove(&b);
                adj[b as usize].remove(&a);
                adj[a as usize].insert(c);
                adj[c as usize].insert(a);
            }
        }
    }
    Ok(SocialGraph {
        adjacency: adj.into_iter().map(|s| s.into_iter().collect()).collect(),
        degree_k,
        rewire_p,
    })
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `logistic(base + price_coeff·price/income + income_coeff·ln(income)
/// + peer_coeff·peer_share + subsidy_coeff·subsidy/price)`.
pub fn adoption_probability(
    params: &AdoptionParams,
    income: f64,
    peer_share: f64,
    price: f64,
    subsidy: f64,
) -> f64 {
    let income = income.max(f64::MIN_POSITIVE);
    let price = price.max(f64::MIN_POSITIVE);
    logistic(
        params.base
            + params.price_coeff * price / income
            + params.income_coeff * income.ln()
            + params.peer_coeff * peer_share
            + params.subsidy_coeff * subsidy / price,
    )
}

/// Share of a node's neighbors that have adopted.
pub fn peer_share(graph: &SocialGraph, adopters: &[bool], node: usize) -> f64 {
    let nb = &graph.adjacency[node];
    if nb.is_empty() {
        return 0.0;
    }
    nb.iter().filter(|&&j| adopters[j as usize]).count() as f64 / nb.len() as f64
}

/// Nodes that decide to adopt this quarter, ascending. `incomes` are annual
/// and in the same currency as `price` and `subsidy`.
#[allow(clippy::too_many_arguments)]
pub fn adoption_decisions(
    graph: &SocialGraph,
    adopters: &[bool],
    params: &AdoptionParams,
    incomes: &[f64],
    price: f64,
    subsidy: f64,
    seed: u64,
    t: u32,
    kind: usize,
) -> Vec<u32> {
    (0..graph.n_nodes())
        .into_par_iter()
        .filter(|&i| {
            if adopters[i] {
                return false;
            }
            let p = adoption_probability(
                params,
                incomes[i],
                peer_share(graph, adopters, i),
                price,
                subsidy,
            );
            uniform(seed, Stream::Adoption, &[t as u64, kind as u64, i as u64]) < p
        })
        .map(|i| i as u32)
        .collect()
}

/// Price and subsidy of one unit of durable `kind` this quarter, in cents.
pub fn durable_price(state: &EconomyState, kind: usize) -> (Cents, Cents) {
    let d = &state.durables[kind];
    let index = d
        .tech_ref
        .as_ref()
        .and_then(|name| state.tech.iter().find(|t| &t.state.curve.name == name))
        .map_or(1.0, |t| t.state.cost_index());
    let price = Cents::from_currency(d.price * index);
    let subsidy = Cents::from_currency(d.subsidy).min(price);
    (price, subsidy)
}

pub fn diffusion_step(state: &mut EconomyState, scenario: Option<&ScenarioSpec>) {
    if state.durables.is_empty() {
        return;
    }
    let incomes: Vec<f64> = state
        .households
        .iter()
        .map(|h| 4.0 * h.income_last.as_currency())
        .collect();
    let mut decisions = Vec::with_capacity(state.durables.len());
    for k in 0..state.durables.len() {
        let adopters: Vec<bool> = state.households.iter().map(|h| h.has_adopted(k)).collect();
        let (price, subsidy) = durable_price(state, k);
        decisions.push(adoption_decisions(
            &state.networks[k],
            &adopters,
            &state.durables[k].params,
            &incomes,
            price.as_currency(),
            subsidy.as_currency(),
            state.seed,
            state.t,
            k,
        ));
    }

    let green = state.green_sector;
    for (k, ids) in decisions.into_iter().enumerate() {
        let (price, subsidy) = durable_price(state, k);
        let net = price - subsidy;
        let shift = state.durables[k].weight_shift;
        let name = state.durables[k].name.clone();
        let mut sales = Cents::ZERO;
        let mut subsidies = Cents::ZERO;
        for id in ids {
            let i = id as usize;
            if state.households[i].deposits < net {
                continue;
            }
            state.debit(Subsystem::Diffusion, Account::Household(id), net);
            state.debit(Subsystem::Diffusion, Account::Government, subsidy);
            sales += price;
            subsidies += subsidy;
            let h = &mut state.households[i];
            h.durables |= 1 << k;
            h.green_spend_current += price;
            if let Some(w) = shift {
                scenario::shift_weights(&mut h.consumption_weights, w.from, w.to, w.fraction);
            }
            if let Some(sc) = scenario {
                sc.apply_adoption_shifts(&name, &mut h.consumption_weights);
            }
        }
        state.flows.adoption += sales;
        state.flows.subsidies += subsidies;
        state.settle_sector_sale(Subsystem::Diffusion, green, sales);
    }
}

/// Peer-driven spread from `initial` adopters over `quarters`, with unit
/// income and price and no subsidy.
pub fn spread_from(
    graph: &SocialGraph,
    params: &AdoptionParams,
    initial: &[bool],
    quarters: u32,
    seed: u64,
) -> Vec<bool> {
    let n = graph.n_nodes();
    let ones = vec![1.0; n];
    let mut adopters = initial.to_vec();
    for t in 0..quarters {
        for i in adoption_decisions(graph, &adopters, params, &ones, 1.0, 0.0, seed, t, 0) {
            adopters[i as usize] = true;
        }
    }
    adopters
}

/// Mean hotspot index over `trials` random relabelings of `adopters`.
pub fn shuffled_null_mean(
    graph: &SocialGraph,
    adopters: &[bool],
    trials: usize,
    seed: u64,
) -> Result<f64, DiffusionError> {
    let mut labels = adopters.to_vec();
    let mut rng = generator(seed, Stream::Network, &[u64::MAX, trials as u64]);
    let mut sum = 0.0;
    for _ in 0..trials {
        labels.shuffle(&mut rng);
        sum += hotspot_index(graph, &labels)?;
    }
    Ok(sum / trials as f64)
}

/// Excess share of adopter-adopter edge ends over random placement,
/// normalized so that 0 is random and 1 is perfect segregation.
pub fn hotspot_index(graph: &SocialGraph, adopters: &[bool]) -> Result<f64, DiffusionError> {
    let n = graph.n_nodes();
    let m = adopters.iter().filter(|&&a| a).count();
    if m == 0 {
        return Err(DiffusionError::EmptyAdopterSet);
    }
    if m == n {
        return Ok(1.0);
    }
    let (mut ends, mut same) = (0usize, 0usize);
    for (i, nb) in graph.adjacency.iter().enumerate() {
        if adopters[i] {
            ends += nb.len();
            same += nb.iter().filter(|&&j| adopters[j as usize]).count();
        }
    }
    if ends == 0 {
        return Ok(0.0);
    }
    let observed = same as f64 / ends as f64;
    let expected = (m - 1) as f64 / (n - 1) as f64;
    Ok((observed - expected) / (1.0 - expected))
}
