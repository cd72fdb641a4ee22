//! Streaming semi-orthogonal ("repeated pulse position modulation") anytime
//! code for the infinite-bandwidth AWGN channel.
//!
//! Everything works in matched-filter coordinates: slot `k` of the stream is
//! split into `2^k` sub-slots and the encoder pours the whole per-bit energy
//! into the sub-slot named by the bits seen so far. The crate provides
//!
//! * [`theory`]: closed-form capacities, delay exponents, the high-rate
//!   converse and an exact block-error oracle,
//! * [`codec`]: the encoder and its semi-orthogonality certificates,
//! * [`channel`]: counter-addressed (stateless) simulated channels,
//! * [`decoder`]: ML tree decoding, anytime estimates and genie suffix tests,
//! * [`montecarlo`]: delay/error experiments, exponent fitting and the
//!   feedback bandwidth study,
//! * [`unitcost`]: the capacity-per-unit-cost variant over a DMC with a
//!   zero-cost input.

pub mod channel;
pub mod codec;
pub mod decoder;
mod error;
pub mod montecarlo;
pub mod theory;
pub mod unitcost;

pub use error::{Error, Result};
