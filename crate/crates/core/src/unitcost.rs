//! Repeated PPM over a discrete memoryless channel with a free input.
//!
//! Bits are grouped into bursts of `L`. Burst-slot `s` holds `2^(sL)`
//! sub-slots, one per prefix of `sL` bits, and each sub-slot holds `K`
//! channel uses. The sub-slot named by the current prefix carries the
//! [`BurstPlan`] symbols; every other position carries the free input `x0`.
//! A candidate path is scored by the sum of per-use log-likelihood ratios
//! `ln P(y | planned x) - ln P(y | x0)` over its own sub-slots, which is the
//! log-likelihood of the whole output block relative to the all-`x0` input.

use serde::{Deserialize, Serialize};

use crate::channel::{dmc_uniform, random_bits, DmcSpec};
use crate::error::{check_capacity, domain};
use crate::montecarlo::{check_trials, max_delay, tally, ErrorCurve};
use crate::{Error, Result};

/// Largest number of bits spanned by the simulated burst tree.
pub const MAX_COST_TREE_BITS: u32 = 24;
/// Log-likelihood ratios are clipped to `[-LLR_CLAMP, LLR_CLAMP]` so that
/// outputs impossible under one hypothesis stay finite.
pub const LLR_CLAMP: f64 = 1e4;
/// Relative slack for accumulated floating-point cost.
pub const COST_SLACK: f64 = 1e-9;

/// `D(P(.|x) || P(.|x0))` in nats; infinite when `x` reaches an output that
/// `x0` cannot.
pub fn divergence(dmc: &DmcSpec, x: usize) -> f64 {
    let x0 = dmc.row(dmc.zero_cost_input());
    dmc.row(x)
        .iter()
        .zip(x0)
        .filter(|(&p, _)| p > 0.0)
        .map(|(&p, &q)| if q > 0.0 { p * (p / q).ln() } else { f64::INFINITY })
        .sum()
}

fn first_unreachable_output(dmc: &DmcSpec, x: usize) -> Option<usize> {
    let x0 = dmc.row(dmc.zero_cost_input());
    (0..dmc.outputs()).find(|&y| dmc.row(x)[y] > 0.0 && x0[y] == 0.0)
}

/// `max_x D(P(.|x) || P(.|x0)) / cost(x)` over positive-cost inputs, nats per
/// cost unit.
pub fn capacity_per_unit_cost(dmc: &DmcSpec) -> Result<f64> {
    let x0 = dmc.zero_cost_input();
    let mut best: Option<f64> = None;
    for x in (0..dmc.inputs()).filter(|&x| x != x0) {
        if let Some(output) = first_unreachable_output(dmc, x) {
            return Err(Error::InfiniteDivergence { input: x, output });
        }
        let d = divergence(dmc, x);
        if dmc.cost(x) == 0.0 {
            if d > 0.0 {
                return domain(format!(
                    "free input {x} is distinguishable from the reference input {x0}"
                ));
            }
            continue;
        }
        best = Some(best.map_or(d / dmc.cost(x), |b: f64| b.max(d / dmc.cost(x))));
    }
    best.map_or_else(|| domain("no input has positive cost"), Ok)
}

/// Smallest cost per bit for reliable communication, `ln 2 / C_cost`.
pub fn threshold_eb_cost(dmc: &DmcSpec) -> Result<f64> {
    let c = capacity_per_unit_cost(dmc)?;
    if c <= 0.0 {
        return domain("capacity per unit cost is zero");
    }
    Ok(std::f64::consts::LN_2 / c)
}

/// Symbols sent in the active sub-slot of one burst.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurstPlan {
    pub burst_length: u32,
    pub symbols: Vec<usize>,
    pub cost: f64,
    pub divergence: f64,
}

/// Greedy plan: inputs in decreasing order of divergence per unit cost
/// (ties to the lower index), each repeated while it still fits in
/// `burst_length * eb_cost`. Only positive-cost inputs are planned.
pub fn plan_burst(dmc: &DmcSpec, burst_length: u32, eb_cost: f64) -> Result<BurstPlan> {
    if burst_length == 0 {
        return domain("burst length must be at least one bit");
    }
    check_capacity("burst length", burst_length as u64, MAX_COST_TREE_BITS as u64)?;
    if !(eb_cost.is_finite() && eb_cost > 0.0) {
        return domain(format!("cost per bit must be positive and finite, got {eb_cost}"));
    }
    let budget = burst_length as f64 * eb_cost;
    let mut order: Vec<(usize, f64)> = (0..dmc.inputs())
        .filter(|&x| x != dmc.zero_cost_input() && dmc.cost(x) > 0.0)
        .map(|x| (x, divergence(dmc, x) / dmc.cost(x)))
        .collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut symbols = Vec::new();
    let mut cost = 0.0;
    for (x, _) in order {
        while cost + dmc.cost(x) <= budget {
            cost += dmc.cost(x);
            symbols.push(x);
        }
    }
    if symbols.is_empty() {
        return Err(Error::EmptyPlan { budget });
    }
    Ok(BurstPlan {
        burst_length,
        divergence: symbols.iter().map(|&x| divergence(dmc, x)).sum(),
        symbols,
        cost,
    })
}

/// Cost accounting for a streaming encoder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBudget {
    pub eb_cost: f64,
    pub bits_received: u64,
    pub spent: f64,
}

impl CostBudget {
    pub fn new(eb_cost: f64) -> Self {
        Self {
            eb_cost,
            bits_received: 0,
            spent: 0.0,
        }
    }

    pub fn allowance(&self) -> f64 {
        self.eb_cost * self.bits_received as f64
    }

    /// `spent <= eb_cost * bits_received`, up to [`COST_SLACK`].
    pub fn holds(&self) -> bool {
        self.spent <= self.allowance() * (1.0 + COST_SLACK)
    }

    pub fn receive_bit(&mut self) {
        self.bits_received += 1;
    }

    /// Charges `cost`, refusing anything that would break the invariant.
    pub fn charge(&mut self, cost: f64) -> Result<()> {
        let next = Self {
            spent: self.spent + cost,
            ..*self
        };
        if !next.holds() {
            return domain(format!(
                "spending {} exceeds the allowance {} after {} bits",
                next.spent,
                next.allowance(),
                self.bits_received
            ));
        }
        *self = next;
        Ok(())
    }
}

/// One burst-slot of channel input. Every sub-slot except `active_subslot`
/// carries the free input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Burst {
    pub slot: u32,
    pub active_subslot: u64,
    pub symbols: Vec<usize>,
    pub free_input: usize,
}

impl Burst {
    /// Input at use `k` of sub-slot `subslot`.
    pub fn symbol_at(&self, subslot: u64, k: usize) -> usize {
        if subslot == self.active_subslot {
            self.symbols[k]
        } else {
            self.free_input
        }
    }
}

/// Streaming encoder that emits a burst every `L` bits.
#[derive(Debug, Clone)]
pub struct BurstEncoder {
    plan: BurstPlan,
    free_input: usize,
    budget: CostBudget,
    prefix: u64,
    pending: u32,
    bursts: u32,
}

impl BurstEncoder {
    pub fn new(dmc: &DmcSpec, burst_length: u32, eb_cost: f64) -> Result<Self> {
        Ok(Self {
            plan: plan_burst(dmc, burst_length, eb_cost)?,
            free_input: dmc.zero_cost_input(),
            budget: CostBudget::new(eb_cost),
            prefix: 0,
            pending: 0,
            bursts: 0,
        })
    }

    pub fn plan(&self) -> &BurstPlan {
        &self.plan
    }

    pub fn budget(&self) -> &CostBudget {
        &self.budget
    }

    pub fn push(&mut self, bit: u8) -> Result<Option<Burst>> {
        if bit > 1 {
            return domain(format!("bits must be 0 or 1, got {bit}"));
        }
        check_capacity(
            "encoded bits",
            self.budget.bits_received + 1,
            crate::codec::MAX_SLOT as u64,
        )?;
        self.prefix = 2 * self.prefix + bit as u64;
        self.budget.receive_bit();
        self.pending += 1;
        if self.pending < self.plan.burst_length {
            return Ok(None);
        }
        self.budget.charge(self.plan.cost)?;
        self.pending = 0;
        self.bursts += 1;
        Ok(Some(Burst {
            slot: self.bursts,
            active_subslot: self.prefix,
            symbols: self.plan.symbols.clone(),
            free_input: self.free_input,
        }))
    }
}

/// `llr[k][y] = ln P(y | symbols[k]) - ln P(y | x0)`, clipped.
pub(crate) fn llr_table(dmc: &DmcSpec, symbols: &[usize]) -> Vec<Vec<f64>> {
    let x0 = dmc.row(dmc.zero_cost_input());
    symbols
        .iter()
        .map(|&x| {
            dmc.row(x)
                .iter()
                .zip(x0)
                .map(|(&p, &q)| match (p > 0.0, q > 0.0) {
                    (true, true) => (p.ln() - q.ln()).clamp(-LLR_CLAMP, LLR_CLAMP),
                    (true, false) => LLR_CLAMP,
                    (false, true) => -LLR_CLAMP,
                    (false, false) => 0.0,
                })
                .collect()
        })
        .collect()
}

/// Outputs of one simulated burst stream, drawn lazily by address
/// `(seed, trial, burst-slot, sub-slot, use)`.
struct CostTree<'a> {
    dmc: &'a DmcSpec,
    symbols: &'a [usize],
    llr: &'a [Vec<f64>],
    seed: u64,
    trial: u64,
    burst_length: u32,
    /// Active sub-slot per burst-slot.
    active: Vec<u64>,
}

impl CostTree<'_> {
    fn output(&self, slot: u32, subslot: u64, k: usize) -> usize {
        let x = if self.active[slot as usize - 1] == subslot {
            self.symbols[k]
        } else {
            self.dmc.zero_cost_input()
        };
        self.dmc
            .sample_at(x, dmc_uniform(self.seed, &[self.trial, slot as u64, subslot, k as u64]))
    }

    fn observe(&self, slot: u32, subslot: u64) -> f64 {
        (0..self.symbols.len())
            .map(|k| self.llr[k][self.output(slot, subslot, k)])
            .sum()
    }

    /// Best metric per burst-slot depth below `(slot, subslot)`.
    fn explore(&self, best: &mut [f64], slot: u32, subslot: u64, prefix: f64) {
        let metric = prefix + self.observe(slot, subslot);
        let entry = &mut best[slot as usize - 1];
        *entry = entry.max(metric);
        if (slot as usize) < best.len() {
            let first_child = subslot << self.burst_length;
            for child in first_child..first_child + (1 << self.burst_length) {
                self.explore(best, slot + 1, child, metric);
            }
        }
    }
}

fn bursts_for_delay(d: u32, burst_length: u32) -> u32 {
    1 + d.div_ceil(burst_length)
}

/// Genie-aided error rate of the first burst, deciding after `d` more bits
/// (rounded up to whole bursts) have been sent. The wrong hypotheses are all
/// `2^L - 1` other first bursts; ties count as errors.
pub fn run_cost_curve(
    dmc: &DmcSpec,
    eb_cost: f64,
    burst_length: u32,
    delays: &[u32],
    trials: u64,
    seed: u64,
) -> Result<ErrorCurve> {
    check_trials(trials)?;
    let plan = plan_burst(dmc, burst_length, eb_cost)?;
    let depth = bursts_for_delay(max_delay(delays)?, burst_length);
    check_capacity(
        "burst tree depth in bits",
        depth as u64 * burst_length as u64,
        MAX_COST_TREE_BITS as u64,
    )?;
    let llr = llr_table(dmc, &plan.symbols);
    let first_bursts = 1u64 << burst_length;

    let counts = tally(trials, delays.len(), |trial, acc| {
        let bits = random_bits(seed, trial, (depth * burst_length) as usize);
        let active = (1..=depth)
            .map(|s| {
                bits[..(s * burst_length) as usize]
                    .iter()
                    .fold(0u64, |m, &b| 2 * m + b as u64)
            })
            .collect();
        let tree = CostTree {
            dmc,
            symbols: &plan.symbols,
            llr: &llr,
            seed,
            trial,
            burst_length,
            active,
        };
        let truth = tree.active[0];
        let mut right = vec![f64::NEG_INFINITY; depth as usize];
        let mut wrong = right.clone();
        tree.explore(&mut right, 1, truth, 0.0);
        for m in (0..first_bursts).filter(|&m| m != truth) {
            tree.explore(&mut wrong, 1, m, 0.0);
        }
        for (slot, &d) in acc.iter_mut().zip(delays) {
            let s = bursts_for_delay(d, burst_length) as usize - 1;
            *slot += (wrong[s] >= right[s]) as u64;
        }
    });
    let mut curve = ErrorCurve::from_counts(delays, trials, &counts);
    curve.cost_per_delay_unit = Some(eb_cost);
    Ok(curve)
}
