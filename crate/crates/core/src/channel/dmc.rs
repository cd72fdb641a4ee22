use std::path::Path;

use serde::{Deserialize, Serialize};

use super::addressed::{tag, uniform};
use crate::error::domain;
use crate::{Error, Result};

/// Row-sum tolerance for transition matrices.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// Discrete memoryless channel with per-input costs and a free input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmcSpec {
    transition: Vec<Vec<f64>>,
    cost: Vec<f64>,
    zero_cost_input: usize,
    #[serde(skip)]
    cumulative: Vec<Vec<f64>>,
}

impl DmcSpec {
    /// The zero-cost input is the first input whose cost is exactly 0.
    pub fn new(transition: Vec<Vec<f64>>, cost: Vec<f64>) -> Result<Self> {
        let zero = cost
            .iter()
            .position(|&c| c == 0.0)
            .ok_or_else(|| Error::Domain("no zero-cost input".into()))?;
        Self::with_zero_cost_input(transition, cost, zero)
    }

    pub fn with_zero_cost_input(
        transition: Vec<Vec<f64>>,
        cost: Vec<f64>,
        zero_cost_input: usize,
    ) -> Result<Self> {
        let inputs = transition.len();
        if inputs == 0 {
            return domain("channel has no inputs");
        }
        let outputs = transition[0].len();
        if outputs == 0 {
            return domain("channel has no outputs");
        }
        if cost.len() != inputs {
            return domain(format!("{} costs for {inputs} inputs", cost.len()));
        }
        for (x, row) in transition.iter().enumerate() {
            if row.len() != outputs {
                return domain(format!("row {x} has {} entries, expected {outputs}", row.len()));
            }
            if let Some(p) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return domain(format!("row {x} has probability {p} outside [0, 1]"));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return domain(format!("row {x} sums to {sum}"));
            }
        }
        if let Some(c) = cost.iter().find(|c| !(**c >= 0.0 && c.is_finite())) {
            return domain(format!("costs must be nonnegative and finite, got {c}"));
        }
        if zero_cost_input >= inputs || cost[zero_cost_input] != 0.0 {
            return domain(format!("input {zero_cost_input} is not a zero-cost input"));
        }
        let cumulative = transition
            .iter()
            .map(|row| {
                row.iter()
                    .scan(0.0, |acc, p| {
                        *acc += p;
                        Some(*acc)
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            transition,
            cost,
            zero_cost_input,
            cumulative,
        })
    }

    /// Parses the plain-text matrix format:
    ///
    /// ```text
    /// <inputs> <outputs>
    /// <cost_0> ... <cost_{inputs-1}>
    /// <P(0|0)> ... <P(outputs-1|0)>
    /// ...
    /// ```
    ///
    /// Tokens are whitespace separated; `#` starts a comment.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut tokens = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(str::split_whitespace);
        let mut next = |what: &str| -> Result<&str> {
            tokens
                .next()
                .ok_or_else(|| Error::Parse(format!("unexpected end of input reading {what}")))
        };
        let size = |s: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| Error::Parse(format!("invalid alphabet size {s:?}")))
        };
        let number = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Parse(format!("invalid number {s:?}")))
        };
        let inputs = size(next("input count")?)?;
        let outputs = size(next("output count")?)?;
        let cost = (0..inputs)
            .map(|_| number(next("cost row")?))
            .collect::<Result<Vec<_>>>()?;
        let transition = (0..inputs)
            .map(|_| {
                (0..outputs)
                    .map(|_| number(next("transition row")?))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(extra) = tokens.next() {
            return Err(Error::Parse(format!("trailing token {extra:?}")));
        }
        Self::new(transition, cost)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn inputs(&self) -> usize {
        self.transition.len()
    }

    pub fn outputs(&self) -> usize {
        self.transition[0].len()
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.transition[x]
    }

    pub fn cost(&self, x: usize) -> f64 {
        self.cost[x]
    }

    pub fn zero_cost_input(&self) -> usize {
        self.zero_cost_input
    }

    /// Inverse-CDF sample of row `x` at uniform `u` in `[0, 1)`.
    pub(crate) fn sample_at(&self, x: usize, u: f64) -> usize {
        let cum = &self.cumulative[x];
        match cum.iter().position(|&c| c > u) {
            Some(y) => y,
            // u landed in the rounding slack above the last partial sum
            None => self.transition[x]
                .iter()
                .rposition(|&p| p > 0.0)
                .expect("row has positive mass"),
        }
    }
}

/// Draws an output of input `x`, addressed by `address` under `seed`.
pub fn dmc_sample(spec: &DmcSpec, seed: u64, address: &[u64], x: usize) -> Result<usize> {
    if x >= spec.inputs() {
        return domain(format!("input symbol {x} outside alphabet of {}", spec.inputs()));
    }
    Ok(spec.sample_at(x, dmc_uniform(seed, address)))
}

#[inline]
pub(crate) fn dmc_uniform(seed: u64, address: &[u64]) -> f64 {
    // Tag prepended without allocating for the common short addresses.
    let mut buf = [0u64; 8];
    if address.len() < buf.len() {
        buf[0] = tag::DMC_OUTPUT;
        buf[1..=address.len()].copy_from_slice(address);
        uniform(seed, &buf[..=address.len()])
    } else {
        let mut v = Vec::with_capacity(address.len() + 1);
        v.push(tag::DMC_OUTPUT);
        v.extend_from_slice(address);
        uniform(seed, &v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn toy() -> DmcSpec {
        DmcSpec::new(vec![vec![0.95, 0.05], vec![0.1, 0.9]], vec![0.0, 1.0]).unwrap()
    }

    #[test]
    fn parse_text_format() {
        let text = "# toy channel\n2 2\n0 1\n0.95 0.05\n0.1 0.9\n";
        assert_eq!(DmcSpec::from_text(text).unwrap(), toy());
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(DmcSpec::from_text("2 2\n0 1\n0.95 0.05\n"), Err(Error::Parse(_))));
        assert!(matches!(DmcSpec::from_text("2 x\n"), Err(Error::Parse(_))));
        assert!(matches!(
            DmcSpec::from_text("1 2\n0\n0.5 0.5\n7"),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            DmcSpec::from_text("2 2\n0 1\n0.9 0.05\n0.1 0.9\n"),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            DmcSpec::from_text("2 2\n1 1\n0.95 0.05\n0.1 0.9\n"),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn validation() {
        assert!(DmcSpec::new(vec![vec![1.2, -0.2]], vec![0.0]).is_err());
        assert!(DmcSpec::new(vec![vec![1.0]], vec![-1.0]).is_err());
        assert!(DmcSpec::with_zero_cost_input(vec![vec![1.0], vec![1.0]], vec![0.0, 1.0], 1).is_err());
        let near = 1.0 - 5e-13;
        assert!(DmcSpec::new(vec![vec![near, 0.0]], vec![0.0]).is_ok());
    }

    #[test]
    fn degenerate_row_always_hits() {
        let spec = DmcSpec::new(vec![vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0]], vec![0.0, 2.0]).unwrap();
        for a in 0..10_000u64 {
            assert_eq!(dmc_sample(&spec, 9, &[a], 0).unwrap(), 1);
            assert_eq!(dmc_sample(&spec, 9, &[a, 3], 1).unwrap(), 0);
        }
    }

    #[test]
    fn repeatable_and_validated() {
        let spec = toy();
        let a = dmc_sample(&spec, 1, &[4, 5, 6], 1).unwrap();
        assert_eq!(a, dmc_sample(&spec, 1, &[4, 5, 6], 1).unwrap());
        assert!(dmc_sample(&spec, 1, &[0], 2).is_err());
        let long: Vec<u64> = (0..20).collect();
        assert!(dmc_sample(&spec, 1, &long, 0).is_ok());
    }

    #[test]
    fn rounding_slack_falls_back_to_last_support() {
        let spec = DmcSpec::new(vec![vec![0.5, 0.5 - 4e-13, 0.0]], vec![0.0]).unwrap();
        assert_eq!(spec.sample_at(0, 0.999_999_999_999_9), 1);
    }
}
