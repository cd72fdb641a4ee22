//! Closed-form capacities, delay exponents and the high-rate converse.
//!
//! Exponents are always carried in nats. Two normalizations are used:
//!
//! * rate domain: nats per unit time, as a function of the rate `R` and the
//!   infinite-bandwidth capacity `C_inf` (both in bits per unit time);
//! * eb domain: nats per bit-slot, as a function of the normalized energy
//!   per bit `eb = E_b / N0`.
//!
//! The two are tied together by `eb * R = ln2 * C_inf`, so the rate fraction
//! `r = R / C_inf` equals `ln2 / eb`.

mod quadrature;

use std::f64::consts::{LN_2, LOG2_E, PI};

use serde::{Deserialize, Serialize};

use crate::error::domain;
use crate::Result;

pub use quadrature::integrate;

/// Absolute tolerance used by [`exact_block_error`].
pub const BLOCK_ERROR_TOLERANCE: f64 = 1e-10;

/// Physical parameters of the infinite-bandwidth AWGN link.
///
/// `eb` is always present; the time-domain view (`c_inf`, `tau`) is optional
/// and, when set, satisfies `eb * R = ln2 * c_inf` with `R = 1 / tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    eb: f64,
    c_inf: Option<f64>,
    tau: Option<f64>,
}

impl ChannelSpec {
    pub fn from_eb(eb: f64) -> Result<Self> {
        if !(eb > 0.0 && eb.is_finite()) {
            return domain(format!("energy per bit must be positive and finite, got {eb}"));
        }
        Ok(Self {
            eb,
            c_inf: None,
            tau: None,
        })
    }

    /// Builds the spec for rate fraction `r = R / C_inf`.
    pub fn from_rate_fraction(r: f64) -> Result<Self> {
        Self::from_eb(eb_from_rate_fraction(r)?)
    }

    /// Builds the spec from a capacity and a bit rate, both in bits per unit
    /// time. The bit-slot duration is `1 / rate`.
    pub fn with_time_domain(c_inf: f64, rate: f64) -> Result<Self> {
        if !(c_inf > 0.0 && c_inf.is_finite()) {
            return domain(format!("capacity must be positive, got {c_inf}"));
        }
        if !(rate > 0.0 && rate.is_finite()) {
            return domain(format!("rate must be positive, got {rate}"));
        }
        let mut spec = Self::from_eb(LN_2 * c_inf / rate)?;
        spec.c_inf = Some(c_inf);
        spec.tau = Some(1.0 / rate);
        Ok(spec)
    }

    pub fn eb(&self) -> f64 {
        self.eb
    }

    pub fn rate_fraction(&self) -> f64 {
        LN_2 / self.eb
    }

    /// Matched-filter amplitude of a pulse in unit-variance noise coordinates.
    pub fn amplitude(&self) -> f64 {
        (2.0 * self.eb).sqrt()
    }

    pub fn c_inf(&self) -> Option<f64> {
        self.c_inf
    }

    pub fn tau(&self) -> Option<f64> {
        self.tau
    }

    pub fn rate(&self) -> Option<f64> {
        self.tau.map(|t| 1.0 / t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExponentDomain {
    /// Nats per unit time.
    Rate,
    /// Nats per bit-slot.
    Eb,
}

/// A nonnegative error exponent in nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentValue {
    value: f64,
    domain: ExponentDomain,
}

impl ExponentValue {
    fn new(value: f64, domain: ExponentDomain) -> Self {
        debug_assert!(value >= 0.0);
        Self {
            value: value.max(0.0),
            domain,
        }
    }

    pub fn nats(&self) -> f64 {
        self.value
    }

    pub fn domain(&self) -> ExponentDomain {
        self.domain
    }
}

/// Infinite-bandwidth capacity `P/N0 * log2(e)` in bits per unit time.
pub fn capacity_rate(p_over_n0: f64) -> Result<f64> {
    if !(p_over_n0 >= 0.0) {
        return domain(format!("power ratio must be nonnegative, got {p_over_n0}"));
    }
    Ok(p_over_n0 * LOG2_E)
}

/// Orthogonal-signaling block exponent `E_orth(R)` in nats per unit time.
pub fn exponent_rate(rate: f64, c_inf: f64) -> Result<ExponentValue> {
    if !(c_inf > 0.0 && c_inf.is_finite()) {
        return domain(format!("capacity must be positive, got {c_inf}"));
    }
    if !(rate >= 0.0) {
        return domain(format!("rate must be nonnegative, got {rate}"));
    }
    let value = if rate <= c_inf / 4.0 {
        (c_inf / 2.0 - rate) * LN_2
    } else if rate < c_inf {
        let gap = c_inf.sqrt() - rate.sqrt();
        gap * gap * LN_2
    } else {
        0.0
    };
    Ok(ExponentValue::new(value, ExponentDomain::Rate))
}

/// The same exponent expressed per bit-slot as a function of `eb`.
pub fn exponent_eb(eb: f64) -> Result<ExponentValue> {
    if !(eb >= 0.0) {
        return domain(format!("energy per bit must be nonnegative, got {eb}"));
    }
    let value = if eb > 4.0 * LN_2 {
        (eb / (2.0 * LN_2) - 1.0) * LN_2
    } else if eb > LN_2 {
        let gap = (eb / LN_2).sqrt() - 1.0;
        gap * gap * LN_2
    } else {
        0.0
    };
    Ok(ExponentValue::new(value, ExponentDomain::Eb))
}

/// High-rate upper bound on the delay exponent, `(sqrt(C) - sqrt(R))^2 ln2`.
///
/// This is the large-delay limit of the sphere-packing style argument. It
/// coincides with [`exponent_rate`] for `C/4 < R < C` and lies strictly above
/// it below `C/4`, where the bound is not known to be tight.
pub fn converse_exponent(rate: f64, c_inf: f64) -> Result<ExponentValue> {
    if !(c_inf > 0.0 && c_inf.is_finite()) {
        return domain(format!("capacity must be positive, got {c_inf}"));
    }
    if !(rate > 0.0 && rate < c_inf) {
        return domain(format!("rate must lie in (0, {c_inf}), got {rate}"));
    }
    let gap = c_inf.sqrt() - rate.sqrt();
    Ok(ExponentValue::new(gap * gap * LN_2, ExponentDomain::Rate))
}

/// `1 / (e^x - 1)`: the geometric-series factor that turns the suffix-error
/// constant into the constant for an unknown prefix, with `x = tau * E`.
pub fn prefix_constant(tau_times_exponent: f64) -> Result<f64> {
    if !(tau_times_exponent > 0.0) {
        return domain(format!(
            "prefix series diverges for nonpositive exponent {tau_times_exponent}"
        ));
    }
    Ok(1.0 / tau_times_exponent.exp_m1())
}

pub fn eb_from_rate_fraction(r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return domain(format!("rate fraction must be positive, got {r}"));
    }
    Ok(LN_2 / r)
}

pub fn rate_fraction_from_eb(eb: f64) -> Result<f64> {
    if !(eb > 0.0 && eb.is_finite()) {
        return domain(format!("energy per bit must be positive, got {eb}"));
    }
    Ok(LN_2 / eb)
}

/// Standard Gaussian upper tail `Q(x) = P(N > x)`.
pub fn gaussian_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

fn gaussian_density(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Exact ML error probability of `M`-ary orthogonal signaling carrying
/// `log2 M` bits at energy `eb` per bit.
///
/// Evaluates `1 - ∫ φ(z) Φ(z + a)^(M-1) dz` with `a = sqrt(2 eb log2 M)` by
/// integrating the complementary integrand directly, which keeps small error
/// probabilities accurate.
pub fn exact_block_error(messages: u64, eb: f64) -> Result<f64> {
    if messages < 2 {
        return domain(format!("need at least two messages, got {messages}"));
    }
    if !(eb > 0.0) {
        return domain(format!("energy per bit must be positive, got {eb}"));
    }
    let competitors = (messages - 1) as f64;
    let shift = (2.0 * eb * (messages as f64).log2()).sqrt();
    let integrand = |z: f64| {
        let log_cdf = (-gaussian_tail(z + shift)).ln_1p();
        gaussian_density(z) * -(competitors * log_cdf).exp_m1()
    };
    let p = integrate(integrand, -10.0, 10.0 + shift, BLOCK_ERROR_TOLERANCE)?;
    Ok(p.clamp(0.0, 1.0))
}
