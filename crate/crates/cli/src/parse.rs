//! Flag value parsers. All parsing goes through `str::parse`, which is
//! locale-independent.

use std::f64::consts::LN_2;

/// A decimal number, optionally a multiple of `ln2`: `2.5`, `ln2`, `8ln2`,
/// `0.5*ln2`.
pub fn number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let value = match s.strip_suffix("ln2") {
        Some(coef) => {
            let coef = coef.trim_end().trim_end_matches('*').trim_end();
            let c = if coef.is_empty() {
                1.0
            } else {
                coef.parse::<f64>().map_err(|_| format!("invalid number {s:?}"))?
            };
            c * LN_2
        }
        None => s.parse::<f64>().map_err(|_| format!("invalid number {s:?}"))?,
    };
    if !value.is_finite() {
        return Err(format!("{s:?} is not finite"));
    }
    Ok(value)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// `lo:hi:count`, endpoints included.
pub fn grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, count] = parts[..] else {
        return Err(format!("expected lo:hi:count, got {s:?}"));
    };
    let g = Grid {
        lo: number(lo)?,
        hi: number(hi)?,
        count: count
            .trim()
            .parse()
            .map_err(|_| format!("invalid point count {count:?}"))?,
    };
    if g.count == 0 || (g.count == 1 && g.lo != g.hi) || g.lo > g.hi {
        return Err(format!("grid {s:?} needs lo <= hi and count >= 2 (or lo == hi)"));
    }
    Ok(g)
}

impl Grid {
    fn fraction(&self, j: usize) -> f64 {
        if self.count == 1 {
            0.0
        } else {
            j as f64 / (self.count - 1) as f64
        }
    }

    pub fn linear(&self) -> Vec<f64> {
        (0..self.count)
            .map(|j| match j {
                0 => self.lo,
                j if j + 1 == self.count => self.hi,
                j => self.lo + (self.hi - self.lo) * self.fraction(j),
            })
            .collect()
    }

    /// Geometric spacing, `lo * (hi/lo)^(j/(count-1))`. Exact at points where
    /// the exponent of a power-of-two ratio is an integer.
    pub fn geometric(&self) -> Result<Vec<f64>, String> {
        if self.lo <= 0.0 {
            return Err("a geometric grid needs lo > 0".into());
        }
        let octaves = (self.hi / self.lo).log2();
        Ok((0..self.count)
            .map(|j| match j {
                0 => self.lo,
                j if j + 1 == self.count => self.hi,
                j => self.lo * (octaves * j as f64 / (self.count - 1) as f64).exp2(),
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
#[serde(transparent)]
pub struct Delays(pub Vec<u32>);

/// Delays in bit-slots: `lo:hi` (inclusive), `a,b,c`, or a single value.
pub fn delays(s: &str) -> Result<Delays, String> {
    let int = |t: &str| {
        t.trim()
            .parse::<u32>()
            .map_err(|_| format!("invalid delay {t:?}"))
    };
    let out = if let Some((lo, hi)) = s.split_once(':') {
        let (lo, hi) = (int(lo)?, int(hi)?);
        if lo > hi {
            return Err(format!("empty delay range {s:?}"));
        }
        (lo..=hi).collect()
    } else {
        s.split(',').map(int).collect::<Result<Vec<_>, _>>()?
    };
    Ok(Delays(out))
}
