//! Monte Carlo experiments over the repeated-PPM code.
//!
//! Trials are independent and addressed by index, so every experiment is a
//! parallel map over `0..trials` folded into integer count vectors. Integer
//! addition commutes, so the result does not depend on how rayon splits the
//! range or on the thread count.

mod curve;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::addressed::{self, tag};
use crate::channel::{random_bits, GaussianNoise, NoiseSource, ObservationOracle, Observations};
use crate::decoder::{self, MAX_ANYTIME_HORIZON, MAX_GENIE_DELAY};
use crate::error::{check_capacity, domain};
use crate::theory::{exponent_eb, ChannelSpec};
use crate::Result;

pub use curve::{
    fit_exponent, fit_exponent_from, wilson_interval, CurvePoint, ErrorCurve, ExponentFit,
    MIN_FIT_ERRORS, Z_95,
};

pub const MAX_BLOCK_MESSAGES: u64 = 1 << 20;
pub const MAX_FEEDBACK_LENGTH: u32 = 24;
/// First age bin of the feedback tail.
pub const FEEDBACK_TAIL_START: u32 = 3;

/// Sums per-trial count vectors of length `width` over `0..trials`.
pub(crate) fn tally<F>(trials: u64, width: usize, per_trial: F) -> Vec<u64>
where
    F: Fn(u64, &mut [u64]) + Sync,
{
    (0..trials)
        .into_par_iter()
        .fold(
            || vec![0u64; width],
            |mut acc, trial| {
                per_trial(trial, &mut acc);
                acc
            },
        )
        .reduce(
            || vec![0u64; width],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

pub(crate) fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return domain("need at least one trial");
    }
    Ok(())
}

pub(crate) fn max_delay(delays: &[u32]) -> Result<u32> {
    delays
        .iter()
        .copied()
        .max()
        .map_or_else(|| domain("delay list is empty"), Ok)
}

fn oracle<N: NoiseSource>(noise: N, spec: &ChannelSpec, seed: u64, trial: u64, len: u32) -> ObservationOracle<N> {
    ObservationOracle::new(noise, trial, *spec, random_bits(seed, trial, len as usize))
        .expect("random bits are valid")
}

/// Genie-aided suffix error rate of bit 1 at each delay.
pub fn run_genie_curve(spec: &ChannelSpec, delays: &[u32], trials: u64, seed: u64) -> Result<ErrorCurve> {
    run_genie_curve_with(&GaussianNoise::new(seed), spec, delays, trials, seed)
}

pub fn run_genie_curve_with<N: NoiseSource>(
    noise: &N,
    spec: &ChannelSpec,
    delays: &[u32],
    trials: u64,
    seed: u64,
) -> Result<ErrorCurve> {
    check_trials(trials)?;
    let dmax = max_delay(delays)?;
    check_capacity("genie delay", dmax as u64, MAX_GENIE_DELAY as u64)?;
    let counts = tally(trials, delays.len(), |trial, acc| {
        let obs = oracle(noise, spec, seed, trial, dmax + 1);
        let errs = decoder::genie_suffix_errors(&obs, dmax, 1).expect("window within horizon");
        for (slot, &d) in acc.iter_mut().zip(delays) {
            *slot += errs[d as usize] as u64;
        }
    });
    Ok(ErrorCurve::from_counts(delays, trials, &counts))
}

/// Error rate of the anytime estimate of bit `bit_index` at horizon
/// `bit_index + d`, for each delay `d`.
pub fn run_anytime_curve(
    spec: &ChannelSpec,
    bit_index: u32,
    delays: &[u32],
    trials: u64,
    seed: u64,
) -> Result<ErrorCurve> {
    run_anytime_curve_with(&GaussianNoise::new(seed), spec, bit_index, delays, trials, seed)
}

pub fn run_anytime_curve_with<N: NoiseSource>(
    noise: &N,
    spec: &ChannelSpec,
    bit_index: u32,
    delays: &[u32],
    trials: u64,
    seed: u64,
) -> Result<ErrorCurve> {
    check_trials(trials)?;
    if bit_index == 0 {
        return domain("bit positions are numbered from 1");
    }
    let horizon = bit_index as u64 + max_delay(delays)? as u64;
    check_capacity("anytime horizon", horizon, MAX_ANYTIME_HORIZON as u64)?;
    let horizon = horizon as u32;
    let counts = tally(trials, delays.len(), |trial, acc| {
        let obs = oracle(noise, spec, seed, trial, horizon);
        let truth = obs.true_bits()[bit_index as usize - 1] as u64;
        let leaders = decoder::leaders(&obs, horizon);
        for (slot, &d) in acc.iter_mut().zip(delays) {
            let estimate = (leaders.at(bit_index + d).1 >> d) & 1;
            *slot += (estimate != truth) as u64;
        }
    });
    Ok(ErrorCurve::from_counts(delays, trials, &counts))
}

/// Monte Carlo error rate of one M-ary orthogonal block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockEstimate {
    pub messages: u64,
    pub eb: f64,
    pub trials: u64,
    pub errors: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl BlockEstimate {
    pub fn std_error(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.trials as f64).sqrt()
    }
}

/// ML detection of one of `messages` orthogonal signals, each carrying
/// `log2(messages)` bits at `eb` per bit.
pub fn run_block_baseline(messages: u64, spec: &ChannelSpec, trials: u64, seed: u64) -> Result<BlockEstimate> {
    run_block_baseline_with(1.0, messages, spec, trials, seed)
}

/// As [`run_block_baseline`] with every noise draw multiplied by `noise_scale`.
pub fn run_block_baseline_with(
    noise_scale: f64,
    messages: u64,
    spec: &ChannelSpec,
    trials: u64,
    seed: u64,
) -> Result<BlockEstimate> {
    check_trials(trials)?;
    if messages < 2 {
        return domain("a block needs at least two messages");
    }
    check_capacity("block size", messages, MAX_BLOCK_MESSAGES)?;
    let shift = (2.0 * spec.eb() * (messages as f64).log2()).sqrt();
    let errors = tally(trials, 1, |trial, acc| {
        let sent = addressed::hash_address(seed, &[tag::BLOCK_MESSAGE, trial]) % messages;
        let mut best = (f64::NEG_INFINITY, u64::MAX);
        for j in 0..messages {
            let z = noise_scale * addressed::standard_normal(seed, &[tag::BLOCK_NOISE, trial, j])
                + if j == sent { shift } else { 0.0 };
            if z > best.0 {
                best = (z, j);
            }
        }
        acc[0] += (best.1 != sent) as u64;
    })[0];
    let p = CurvePoint::from_counts(0, trials, errors);
    Ok(BlockEstimate {
        messages,
        eb: spec.eb(),
        trials,
        errors,
        p_hat: p.p_hat,
        ci_lo: p.ci_lo,
        ci_hi: p.ci_hi,
    })
}

/// Age of the earliest wrong bit in the tentative decisions, the quantity a
/// feedback-free error-signal transmitter would have to describe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackReport {
    pub stream_length: u32,
    /// Point `d = a` counts the `(trial, t)` pairs with age `a`; its trial
    /// count is `trials * stream_length`.
    pub histogram: ErrorCurve,
    /// Fit of `-ln P(a)` over `a >= FEEDBACK_TAIL_START`.
    pub tail_fit: Option<ExponentFit>,
    pub tail_monotone: bool,
    /// Per-bit-slot exponent at this `eb`, nats.
    pub theory_exponent: f64,
    /// Tail slope in `log2 P` against `log2 f`, with `log2 f = a / 2`.
    pub empirical_log2_slope: Option<f64>,
    /// Candidate `-E / 2` for the same slope.
    pub caption_log2_slope: f64,
    /// Candidate `-2 E / ln 2` for the same slope.
    pub derived_log2_slope: f64,
}

/// Earliest-error age histogram over horizons `t = 1..=n`. Age
/// `a = t - i + 1` for the first wrong bit `i` of the horizon-`t` decision,
/// and `0` when the decision is correct.
pub fn run_feedback_bandwidth(spec: &ChannelSpec, n: u32, trials: u64, seed: u64) -> Result<FeedbackReport> {
    run_feedback_bandwidth_with(&GaussianNoise::new(seed), spec, n, trials, seed)
}

pub fn run_feedback_bandwidth_with<N: NoiseSource>(
    noise: &N,
    spec: &ChannelSpec,
    n: u32,
    trials: u64,
    seed: u64,
) -> Result<FeedbackReport> {
    check_trials(trials)?;
    if n == 0 {
        return domain("stream length must be at least one slot");
    }
    check_capacity("feedback stream length", n as u64, MAX_FEEDBACK_LENGTH as u64)?;
    let counts = tally(trials, n as usize + 1, |trial, acc| {
        let obs = oracle(noise, spec, seed, trial, n);
        let leaders = decoder::leaders(&obs, n);
        for t in 1..=n {
            let diff = leaders.at(t).1 ^ obs.true_subslot(t);
            acc[(u64::BITS - diff.leading_zeros()) as usize] += 1;
        }
    });
    let ages: Vec<u32> = (0..=n).collect();
    let histogram = ErrorCurve::from_counts(&ages, trials * n as u64, &counts);
    let tail = &counts[(FEEDBACK_TAIL_START.min(n + 1)) as usize..];
    let tail_monotone = tail.windows(2).all(|w| w[1] <= w[0]);
    let tail_fit = fit_exponent_from(&histogram, FEEDBACK_TAIL_START).ok();
    let e = exponent_eb(spec.eb())?.nats();
    let ln2 = std::f64::consts::LN_2;
    Ok(FeedbackReport {
        stream_length: n,
        tail_fit,
        tail_monotone,
        theory_exponent: e,
        empirical_log2_slope: tail_fit.map(|f| -2.0 * f.slope / ln2),
        caption_log2_slope: -e / 2.0,
        derived_log2_slope: -2.0 * e / ln2,
        histogram,
    })
}
