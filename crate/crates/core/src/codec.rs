//! Repeated pulse position modulation encoder.
//!
//! Slot `k` (1-based) is divided into `2^k` sub-slots. After bit `b_k`
//! arrives the encoder puts its whole energy into sub-slot
//! `m = b_1 b_2 ... b_k` read as a binary number, most significant bit first.
//! The sub-slots of slot `k + 1` refine those of slot `k`: the children of
//! `m` are `2m` and `2m + 1`.

use serde::{Deserialize, Serialize};

use crate::error::{check_capacity, domain};
use crate::theory::ChannelSpec;
use crate::{Error, Result};

/// Largest slot index whose sub-slot count `2^k` (and heap address
/// `2^k + m`) fits in a `u64`.
pub const MAX_SLOT: u32 = 62;

/// One leaf of the code tree: a slot together with a sub-slot inside it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PathIndex {
    slot: u32,
    subslot: u64,
}

impl PathIndex {
    pub fn new(slot: u32, subslot: u64) -> Result<Self> {
        if slot == 0 {
            return domain("slots are numbered from 1");
        }
        check_capacity("slot", slot as u64, MAX_SLOT as u64)?;
        if subslot >> slot != 0 {
            return domain(format!("sub-slot {subslot} out of range for slot {slot}"));
        }
        Ok(Self { slot, subslot })
    }

    pub fn slot(&self) -> u32 {
        self.slot
    }

    pub fn subslot(&self) -> u64 {
        self.subslot
    }

    /// The refinement of this sub-slot selected by the next bit.
    pub fn child(&self, bit: u8) -> Result<Self> {
        check_bit(bit)?;
        check_capacity("slot", self.slot as u64 + 1, MAX_SLOT as u64)?;
        Ok(Self {
            slot: self.slot + 1,
            subslot: 2 * self.subslot + bit as u64,
        })
    }

    /// Bits `b_1..b_k` that lead to this node.
    pub fn bits(&self) -> Vec<u8> {
        (0..self.slot)
            .rev()
            .map(|shift| ((self.subslot >> shift) & 1) as u8)
            .collect()
    }

    /// Heap-style address `2^k + m`, unique over the whole tree.
    pub fn node_id(&self) -> u64 {
        node_id(self.slot, self.subslot)
    }
}

#[inline]
pub(crate) fn node_id(slot: u32, subslot: u64) -> u64 {
    (1u64 << slot) | subslot
}

/// A pulse in matched-filter coordinates: where the energy goes, and how much.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub path: PathIndex,
    pub energy: f64,
}

fn check_bit(bit: u8) -> Result<()> {
    if bit > 1 {
        return domain(format!("bits must be 0 or 1, got {bit}"));
    }
    Ok(())
}

pub(crate) fn check_bits(bits: &[u8]) -> Result<()> {
    if bits.is_empty() {
        return domain("bit sequence is empty");
    }
    check_capacity("bit sequence length", bits.len() as u64, MAX_SLOT as u64)?;
    bits.iter().try_for_each(|&b| check_bit(b))
}

/// Sub-slot index of every prefix: entry `k - 1` is the sub-slot used in slot `k`.
pub fn prefix_subslots(bits: &[u8]) -> Result<Vec<u64>> {
    check_bits(bits)?;
    Ok(bits
        .iter()
        .scan(0u64, |m, &b| {
            *m = 2 * *m + b as u64;
            Some(*m)
        })
        .collect())
}

pub fn subslot_index(bits: &[u8]) -> Result<PathIndex> {
    let subslot = *prefix_subslots(bits)?.last().expect("nonempty");
    Ok(PathIndex {
        slot: bits.len() as u32,
        subslot,
    })
}

pub fn encode_slot(bits: &[u8], spec: &ChannelSpec) -> Result<Pulse> {
    Ok(Pulse {
        path: subslot_index(bits)?,
        energy: spec.eb(),
    })
}

/// Inner product of the waveforms of `a` and `b` restricted to slots
/// `from_slot..=n`, in units of energy.
///
/// Two sub-slot pulses overlap only when they occupy the same sub-slot, so the
/// product is `eb` times the number of slots in range on which the prefixes
/// agree. It vanishes as soon as the sequences differ at or before
/// `from_slot`.
pub fn tail_inner_product(a: &[u8], b: &[u8], from_slot: usize, spec: &ChannelSpec) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Domain(format!(
            "sequences have different lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    if from_slot == 0 || from_slot > a.len() {
        return domain(format!(
            "start slot {from_slot} outside 1..={}",
            a.len()
        ));
    }
    let pa = prefix_subslots(a)?;
    let pb = prefix_subslots(b)?;
    let shared = pa[from_slot - 1..]
        .iter()
        .zip(&pb[from_slot - 1..])
        .filter(|(x, y)| x == y)
        .count();
    Ok(shared as f64 * spec.eb())
}

/// Streaming encoder: one pulse out per bit in.
#[derive(Debug, Clone)]
pub struct StreamEncoder {
    spec: ChannelSpec,
    current: Option<PathIndex>,
}

impl StreamEncoder {
    pub fn new(spec: ChannelSpec) -> Self {
        Self {
            spec,
            current: None,
        }
    }

    pub fn push(&mut self, bit: u8) -> Result<Pulse> {
        check_bit(bit)?;
        let next = match self.current {
            None => PathIndex {
                slot: 1,
                subslot: bit as u64,
            },
            Some(p) => p.child(bit)?,
        };
        self.current = Some(next);
        Ok(Pulse {
            path: next,
            energy: self.spec.eb(),
        })
    }

    pub fn slots_sent(&self) -> u32 {
        self.current.map_or(0, |p| p.slot)
    }
}
