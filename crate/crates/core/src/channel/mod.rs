//! Simulated channels, evaluated lazily.
//!
//! Slot `k` of the code tree has `2^k` sub-slots, so the received signal can
//! never be materialized. Instead each matched-filter output is a pure
//! function of its address `(seed, trial, slot, sub-slot)`, computed on
//! demand through [`addressed`] randomness. Oracles are immutable and can be
//! shared freely between threads.

pub mod addressed;
mod dmc;

use std::collections::HashMap;

use crate::codec::{self, node_id};
use crate::error::domain;
use crate::theory::ChannelSpec;
use crate::Result;

pub use dmc::{dmc_sample, DmcSpec, ROW_SUM_TOLERANCE};
pub(crate) use dmc::dmc_uniform;

use addressed::tag;

/// Noise added to each matched-filter output.
pub trait NoiseSource: Send + Sync {
    fn noise(&self, trial: u64, slot: u32, subslot: u64) -> f64;
}

impl<N: NoiseSource + ?Sized> NoiseSource for &N {
    #[inline]
    fn noise(&self, trial: u64, slot: u32, subslot: u64) -> f64 {
        (**self).noise(trial, slot, subslot)
    }
}

/// Counter-addressed iid standard normal noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaussianNoise {
    seed: u64,
}

impl GaussianNoise {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl NoiseSource for GaussianNoise {
    #[inline]
    fn noise(&self, trial: u64, slot: u32, subslot: u64) -> f64 {
        addressed::standard_normal(self.seed, &[tag::TREE_NOISE, trial, node_id(slot, subslot)])
    }
}

/// Noise forced to zero (test hook).
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroNoise;

impl NoiseSource for ZeroNoise {
    fn noise(&self, _: u64, _: u32, _: u64) -> f64 {
        0.0
    }
}

/// Another noise source multiplied by a constant (test hook; a tiny scale
/// emulates `eb -> infinity`).
#[derive(Debug, Clone, Copy)]
pub struct ScaledNoise<N> {
    pub inner: N,
    pub scale: f64,
}

impl<N: NoiseSource> NoiseSource for ScaledNoise<N> {
    fn noise(&self, trial: u64, slot: u32, subslot: u64) -> f64 {
        self.scale * self.inner.noise(trial, slot, subslot)
    }
}

/// Noise read from a table keyed by `(slot, sub-slot)`, with a default for
/// missing entries (test hook).
#[derive(Debug, Clone, Default)]
pub struct TableNoise {
    values: HashMap<(u32, u64), f64>,
    default: f64,
}

impl TableNoise {
    pub fn new(default: f64) -> Self {
        Self {
            values: HashMap::new(),
            default,
        }
    }

    pub fn set(mut self, slot: u32, subslot: u64, value: f64) -> Self {
        self.values.insert((slot, subslot), value);
        self
    }
}

impl NoiseSource for TableNoise {
    fn noise(&self, _: u64, slot: u32, subslot: u64) -> f64 {
        self.values.get(&(slot, subslot)).copied().unwrap_or(self.default)
    }
}

/// Read access to matched-filter outputs of one transmitted stream.
pub trait Observations {
    /// Number of slots observed.
    fn horizon(&self) -> u32;

    /// The transmitted bits, at least `horizon()` of them.
    fn true_bits(&self) -> &[u8];

    /// Output for `(slot, subslot)`; the caller guarantees the address is in
    /// range.
    fn observe(&self, slot: u32, subslot: u64) -> f64;
}

/// Range-checked read of one matched-filter output.
pub fn query<O: Observations + ?Sized>(obs: &O, slot: u32, subslot: u64) -> Result<f64> {
    if slot == 0 || slot > obs.horizon() {
        return domain(format!("slot {slot} outside 1..={}", obs.horizon()));
    }
    if subslot >> slot != 0 {
        return domain(format!("sub-slot {subslot} out of range for slot {slot}"));
    }
    Ok(obs.observe(slot, subslot))
}

/// Matched-filter outputs for one trial:
/// `Z(k, m) = noise(trial, k, m) + sqrt(2 eb) [m is the true sub-slot of slot k]`.
#[derive(Debug, Clone)]
pub struct ObservationOracle<N = GaussianNoise> {
    noise: N,
    trial: u64,
    spec: ChannelSpec,
    true_bits: Vec<u8>,
    true_path: Vec<u64>,
    amplitude: f64,
}

impl<N: NoiseSource> ObservationOracle<N> {
    pub fn new(noise: N, trial: u64, spec: ChannelSpec, true_bits: Vec<u8>) -> Result<Self> {
        let true_path = codec::prefix_subslots(&true_bits)?;
        Ok(Self {
            noise,
            trial,
            amplitude: spec.amplitude(),
            spec,
            true_bits,
            true_path,
        })
    }

    pub fn spec(&self) -> &ChannelSpec {
        &self.spec
    }

    pub fn trial(&self) -> u64 {
        self.trial
    }

    /// Sub-slot carrying the pulse in `slot`.
    pub fn true_subslot(&self, slot: u32) -> u64 {
        self.true_path[slot as usize - 1]
    }

    pub fn query(&self, slot: u32, subslot: u64) -> Result<f64> {
        query(self, slot, subslot)
    }
}

impl<N: NoiseSource> Observations for ObservationOracle<N> {
    fn horizon(&self) -> u32 {
        self.true_bits.len() as u32
    }

    fn true_bits(&self) -> &[u8] {
        &self.true_bits
    }

    #[inline]
    fn observe(&self, slot: u32, subslot: u64) -> f64 {
        let signal = if self.true_path[slot as usize - 1] == subslot {
            self.amplitude
        } else {
            0.0
        };
        signal + self.noise.noise(self.trial, slot, subslot)
    }
}

/// Explicit matched-filter outputs, for hand-built decoder cases.
#[derive(Debug, Clone)]
pub struct ObservationTable {
    true_bits: Vec<u8>,
    values: HashMap<(u32, u64), f64>,
    default: f64,
}

impl ObservationTable {
    pub fn new(true_bits: Vec<u8>, default: f64) -> Result<Self> {
        codec::prefix_subslots(&true_bits)?;
        Ok(Self {
            true_bits,
            values: HashMap::new(),
            default,
        })
    }

    pub fn set(mut self, slot: u32, subslot: u64, z: f64) -> Self {
        self.values.insert((slot, subslot), z);
        self
    }
}

impl Observations for ObservationTable {
    fn horizon(&self) -> u32 {
        self.true_bits.len() as u32
    }

    fn true_bits(&self) -> &[u8] {
        &self.true_bits
    }

    fn observe(&self, slot: u32, subslot: u64) -> f64 {
        self.values.get(&(slot, subslot)).copied().unwrap_or(self.default)
    }
}

/// Equiprobable data bits for a trial, addressed by `(seed, trial, index)`.
pub fn random_bits(seed: u64, trial: u64, len: usize) -> Vec<u8> {
    (0..len as u64)
        .map(|j| (addressed::hash_address(seed, &[tag::DATA_BITS, trial, j]) >> 63) as u8)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::gaussian_tail;

    const DRAWS: u64 = 1_000_000;

    fn spec(eb: f64) -> ChannelSpec {
        ChannelSpec::from_eb(eb).unwrap()
    }

    #[test]
    fn zero_noise_gives_pure_signal() {
        let o = ObservationOracle::new(ZeroNoise, 0, spec(2.0), vec![1, 0, 1]).unwrap();
        assert_eq!(o.query(1, 1).unwrap(), 2.0);
        assert_eq!(o.query(2, 2).unwrap(), 2.0);
        assert_eq!(o.query(3, 5).unwrap(), 2.0);
        assert_eq!(o.query(3, 4).unwrap(), 0.0);
        assert_eq!(o.query(1, 0).unwrap(), 0.0);
    }

    #[test]
    fn queries_are_deterministic() {
        let bits = random_bits(11, 3, 30);
        let a = ObservationOracle::new(GaussianNoise::new(11), 3, spec(1.0), bits.clone()).unwrap();
        let b = ObservationOracle::new(GaussianNoise::new(11), 3, spec(1.0), bits).unwrap();
        for (k, m) in [(1, 0), (5, 17), (30, (1 << 30) - 1)] {
            assert_eq!(a.query(k, m).unwrap(), a.query(k, m).unwrap());
            assert_eq!(a.query(k, m).unwrap(), b.query(k, m).unwrap());
        }
    }

    #[test]
    fn out_of_range_queries() {
        let o = ObservationOracle::new(ZeroNoise, 0, spec(1.0), vec![0, 1]).unwrap();
        assert!(o.query(0, 0).is_err());
        assert!(o.query(3, 0).is_err());
        assert!(o.query(2, 4).is_err());
        assert!(ObservationOracle::new(ZeroNoise, 0, spec(1.0), vec![]).is_err());
    }

    #[test]
    fn deep_tree_is_lazy() {
        // 2^40 sub-slots in the last slot; a query touches a single address.
        let bits = random_bits(5, 0, 40);
        let o = ObservationOracle::new(GaussianNoise::new(5), 0, spec(1.0), bits).unwrap();
        let m = o.true_subslot(40);
        let z = o.query(40, m).unwrap();
        assert!((z - o.spec().amplitude()).abs() < 8.0);
        assert!(o.query(40, (1 << 40) - 1).unwrap().is_finite());
    }

    #[test]
    fn table_and_scaled_hooks() {
        let t = TableNoise::new(0.0).set(1, 1, -0.5);
        assert_eq!(t.noise(0, 1, 1), -0.5);
        assert_eq!(t.noise(0, 1, 0), 0.0);
        let s = ScaledNoise { inner: GaussianNoise::new(1), scale: 1e-6 };
        assert!(s.noise(0, 3, 2).abs() < 1e-5);
        let table = ObservationTable::new(vec![0], 0.0).unwrap().set(1, 1, 0.5);
        assert_eq!(query(&table, 1, 1).unwrap(), 0.5);
        assert_eq!(query(&table, 1, 0).unwrap(), 0.0);
    }

    #[test]
    fn random_bits_are_balanced() {
        let ones: u64 = (0..2000).flat_map(|t| random_bits(1, t, 50)).map(u64::from).sum();
        // 1e5 fair bits: sd = 158
        assert!((ones as f64 - 50_000.0).abs() < 800.0, "{ones}");
    }

    fn noise_samples() -> Vec<f64> {
        let n = GaussianNoise::new(2024);
        (0..DRAWS).map(|i| n.noise(i / 1000, 20, i % 1000)).collect()
    }

    #[test]
    fn noise_moments() {
        let xs = noise_samples();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 0.004, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "variance {var}");
    }

    #[test]
    fn noise_kolmogorov_smirnov() {
        let mut xs = noise_samples();
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        let stat = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let cdf = 1.0 - gaussian_tail(x);
                (cdf - i as f64 / n).abs().max(((i + 1) as f64 / n - cdf).abs())
            })
            .fold(0.0, f64::max);
        // asymptotic 1% critical value
        let critical = 1.628 / n.sqrt();
        assert!(stat < critical, "KS statistic {stat} >= {critical}");
    }

    #[test]
    fn neighbouring_addresses_uncorrelated() {
        let noise = GaussianNoise::new(77);
        let (mut sxy, mut sx, mut sy, mut sxx, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..DRAWS {
            let k = 10 + (i % 20) as u32;
            let m = 2 * (i / 20);
            let x = noise.noise(i % 7, k, m);
            let y = noise.noise(i % 7, k, m + 1);
            sxy += x * y;
            sx += x;
            sy += y;
            sxx += x * x;
            syy += y * y;
        }
        let n = DRAWS as f64;
        let cov = sxy / n - sx * sy / (n * n);
        let corr = cov / ((sxx / n - (sx / n).powi(2)) * (syy / n - (sy / n).powi(2))).sqrt();
        assert!(corr.abs() < 0.005, "correlation {corr}");
    }

    #[test]
    fn dmc_frequencies_match_rows() {
        let spec = DmcSpec::new(
            vec![vec![0.95, 0.05, 0.0], vec![0.1, 0.6, 0.3]],
            vec![0.0, 1.0],
        )
        .unwrap();
        for x in 0..2 {
            let mut counts = [0u64; 3];
            for a in 0..DRAWS {
                counts[dmc_sample(&spec, 31, &[a, x as u64], x).unwrap()] += 1;
            }
            let mut chi2 = 0.0;
            for (y, &p) in spec.row(x).iter().enumerate() {
                let expected = p * DRAWS as f64;
                if p == 0.0 {
                    assert_eq!(counts[y], 0);
                    continue;
                }
                let sd = (expected * (1.0 - p)).sqrt();
                assert!((counts[y] as f64 - expected).abs() < 4.0 * sd, "x={x} y={y}");
                chi2 += (counts[y] as f64 - expected).powi(2) / expected;
            }
            // chi-square with at most 2 degrees of freedom, 0.1% critical value
            assert!(chi2 < 13.82, "chi2 {chi2}");
        }
    }
}
