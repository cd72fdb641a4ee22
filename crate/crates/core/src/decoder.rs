//! Maximum-likelihood decoding over the repeated-PPM code tree.
//!
//! Every candidate path puts the same energy into each slot, so the Gaussian
//! log-likelihood of a path differs from the sum of the matched-filter
//! outputs it visits only by a path-independent constant:
//!
//! ```text
//! -|y - x_b|^2 = -|y|^2 - n * 2eb + 2 sqrt(2eb) * sum_k Z(k, m_k(b))
//! ```
//!
//! The decoders therefore maximize the path metric `sum_k Z(k, m_k(b))`.
//!
//! The tree search is a depth-first walk that carries the prefix metric down
//! the tree and records, for every depth, the best node seen so far. Children
//! are visited bit 0 first and a record is only replaced by a strictly larger
//! metric, so among equal metrics the lexicographically smallest path wins:
//! ties go to bit 0 at the shallowest slot where the candidates differ. One
//! walk to depth `n` yields the ML path for every horizon `t <= n` at once,
//! with `O(n)` live state and `2^(n+1)` node visits.

use serde::{Deserialize, Serialize};

use crate::channel::{query, Observations};
use crate::codec;
use crate::error::{check_capacity, domain};
use crate::Result;

pub const MAX_WINDOW_HORIZON: u32 = 28;
pub const MAX_EXHAUSTIVE_HORIZON: u32 = 16;
pub const MAX_ANYTIME_HORIZON: u32 = 24;
pub const MAX_GENIE_DELAY: u32 = 26;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult {
    pub horizon: u32,
    pub ml_path: Vec<u8>,
    pub metric: f64,
}

/// `estimate(t, i)` is bit `i` of the ML path computed from slots `1..=t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnytimeEstimates {
    paths: Vec<Vec<u8>>,
}

impl AnytimeEstimates {
    pub fn horizon(&self) -> u32 {
        self.paths.len() as u32
    }

    /// # Panics
    /// Unless `1 <= i <= t <= horizon`.
    pub fn estimate(&self, t: u32, i: u32) -> u8 {
        assert!(1 <= i && i <= t && t <= self.horizon(), "need 1 <= i <= t <= horizon");
        self.paths[t as usize - 1][i as usize - 1]
    }

    pub fn path(&self, t: u32) -> &[u8] {
        &self.paths[t as usize - 1]
    }
}

/// Best `(metric, sub-slot)` per depth of a subtree.
#[derive(Debug, Clone)]
pub(crate) struct DepthLeaders {
    first_slot: u32,
    best: Vec<(f64, u64)>,
}

impl DepthLeaders {
    pub(crate) fn new(first_slot: u32, last_slot: u32) -> Self {
        Self {
            first_slot,
            best: vec![(f64::NEG_INFINITY, u64::MAX); (last_slot - first_slot + 1) as usize],
        }
    }

    fn last_slot(&self) -> u32 {
        self.first_slot + self.best.len() as u32 - 1
    }

    /// Walks the subtree rooted at `(slot, subslot)` down to the last slot.
    pub(crate) fn explore<O: Observations + ?Sized>(
        &mut self,
        obs: &O,
        slot: u32,
        subslot: u64,
        prefix: f64,
    ) {
        let metric = prefix + obs.observe(slot, subslot);
        let entry = &mut self.best[(slot - self.first_slot) as usize];
        if metric > entry.0 || entry.1 == u64::MAX {
            *entry = (metric, subslot);
        }
        if slot < self.last_slot() {
            self.explore(obs, slot + 1, 2 * subslot, metric);
            self.explore(obs, slot + 1, 2 * subslot + 1, metric);
        }
    }

    pub(crate) fn at(&self, slot: u32) -> (f64, u64) {
        self.best[(slot - self.first_slot) as usize]
    }
}

fn subslot_bits(subslot: u64, slot: u32) -> Vec<u8> {
    (0..slot).rev().map(|s| ((subslot >> s) & 1) as u8).collect()
}

fn check_horizon<O: Observations + ?Sized>(obs: &O, n: u32, limit: u32) -> Result<()> {
    if n == 0 {
        return domain("horizon must be at least one slot");
    }
    check_capacity("decoding horizon", n as u64, limit as u64)?;
    if n > obs.horizon() {
        return domain(format!("horizon {n} exceeds the {} observed slots", obs.horizon()));
    }
    Ok(())
}

/// ML leaders for every horizon `1..=n`, from a single walk.
pub(crate) fn leaders<O: Observations + ?Sized>(obs: &O, n: u32) -> DepthLeaders {
    let mut leaders = DepthLeaders::new(1, n);
    leaders.explore(obs, 1, 0, 0.0);
    leaders.explore(obs, 1, 1, 0.0);
    leaders
}

/// Sum of the outputs visited by `bits`, in slot order.
pub fn path_metric<O: Observations + ?Sized>(bits: &[u8], obs: &O) -> Result<f64> {
    let subslots = codec::prefix_subslots(bits)?;
    if bits.len() > obs.horizon() as usize {
        return domain(format!(
            "path of {} slots exceeds the {} observed slots",
            bits.len(),
            obs.horizon()
        ));
    }
    subslots
        .iter()
        .zip(1u32..)
        .try_fold(0.0, |acc, (&m, k)| Ok(acc + query(obs, k, m)?))
}

/// ML path over slots `1..=n` (no prefix commitment).
pub fn ml_window_decode<O: Observations + ?Sized>(obs: &O, n: u32) -> Result<DecodeResult> {
    check_horizon(obs, n, MAX_WINDOW_HORIZON)?;
    let (metric, subslot) = leaders(obs, n).at(n);
    Ok(DecodeResult {
        horizon: n,
        ml_path: subslot_bits(subslot, n),
        metric,
    })
}

/// Brute force over all `2^n` paths, same tie rule. Test oracle.
pub fn exhaustive_decode<O: Observations + ?Sized>(obs: &O, n: u32) -> Result<DecodeResult> {
    check_horizon(obs, n, MAX_EXHAUSTIVE_HORIZON)?;
    let mut best: Option<(f64, Vec<u8>)> = None;
    for m in 0..1u64 << n {
        let bits = subslot_bits(m, n);
        let metric = path_metric(&bits, obs)?;
        if best.as_ref().is_none_or(|(b, _)| metric > *b) {
            best = Some((metric, bits));
        }
    }
    let (metric, ml_path) = best.expect("at least one path");
    Ok(DecodeResult {
        horizon: n,
        ml_path,
        metric,
    })
}

/// Tentative ML decisions at every horizon `t = 1..=n`. The decoder keeps no
/// memory of earlier decisions; each horizon is a fresh ML decode.
pub fn anytime_estimates<O: Observations + ?Sized>(obs: &O, n: u32) -> Result<AnytimeEstimates> {
    check_horizon(obs, n, MAX_ANYTIME_HORIZON)?;
    let leaders = leaders(obs, n);
    Ok(AnytimeEstimates {
        paths: (1..=n).map(|t| subslot_bits(leaders.at(t).1, t)).collect(),
    })
}

/// Genie-aided suffix errors for every delay `0..=max_delay`.
///
/// With bits `1..window_start` known, compares the best path whose bit
/// `window_start` is wrong against the best path whose bit is right, over
/// slots `window_start..=window_start + d`. Entry `d` is true when the wrong
/// subtree is at least as good (ties count as errors).
pub fn genie_suffix_errors<O: Observations + ?Sized>(
    obs: &O,
    max_delay: u32,
    window_start: u32,
) -> Result<Vec<bool>> {
    check_capacity("genie delay", max_delay as u64, MAX_GENIE_DELAY as u64)?;
    if window_start == 0 {
        return domain("window start is 1-based");
    }
    let last = window_start as u64 + max_delay as u64;
    if last > obs.horizon() as u64 {
        return domain(format!(
            "window {window_start}..={last} exceeds the {} observed slots",
            obs.horizon()
        ));
    }
    let last = last as u32;
    let bits = obs.true_bits();
    let prefix = bits[..window_start as usize - 1]
        .iter()
        .fold(0u64, |m, &b| 2 * m + b as u64);
    let bit = bits[window_start as usize - 1] as u64;

    let mut right = DepthLeaders::new(window_start, last);
    right.explore(obs, window_start, 2 * prefix + bit, 0.0);
    let mut wrong = DepthLeaders::new(window_start, last);
    wrong.explore(obs, window_start, 2 * prefix + (1 - bit), 0.0);

    Ok((window_start..=last)
        .map(|slot| wrong.at(slot).0 >= right.at(slot).0)
        .collect())
}

pub fn genie_suffix_error<O: Observations + ?Sized>(
    obs: &O,
    delay: u32,
    window_start: u32,
) -> Result<bool> {
    Ok(genie_suffix_errors(obs, delay, window_start)?[delay as usize])
}
