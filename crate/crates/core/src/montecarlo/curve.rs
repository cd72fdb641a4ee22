//! Delay/error curves, Wilson intervals and the delay-exponent fit.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Points with fewer errors are left out of exponent fits.
pub const MIN_FIT_ERRORS: u64 = 10;

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    assert!(trials > 0 && errors <= trials);
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // exact endpoints when p is 0 or 1
    let lo = if errors == 0 { 0.0 } else { (center - half).clamp(0.0, p) };
    let hi = if errors == trials { 1.0 } else { (center + half).clamp(p, 1.0) };
    (lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Delay in bit-slots (or, for histograms, the bin).
    pub d: u32,
    pub trials: u64,
    pub errors: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl CurvePoint {
    pub fn from_counts(d: u32, trials: u64, errors: u64) -> Self {
        let (ci_lo, ci_hi) = wilson_interval(errors, trials);
        Self {
            d,
            trials,
            errors,
            p_hat: errors as f64 / trials as f64,
            ci_lo,
            ci_hi,
        }
    }

    /// Binomial standard error of `p_hat`.
    pub fn std_error(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.trials as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurve {
    pub points: Vec<CurvePoint>,
    /// Cost spent per unit of delay, for unit-cost experiments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_per_delay_unit: Option<f64>,
}

const COLUMNS: [&str; 6] = ["d", "trials", "errors", "p_hat", "ci_lo", "ci_hi"];
const COST_COLUMN: &str = "cost_per_delay_unit";

impl ErrorCurve {
    pub fn from_counts(delays: &[u32], trials: u64, errors: &[u64]) -> Self {
        Self {
            points: delays
                .iter()
                .zip(errors)
                .map(|(&d, &e)| CurvePoint::from_counts(d, trials, e))
                .collect(),
            cost_per_delay_unit: None,
        }
    }

    pub fn point(&self, d: u32) -> Option<&CurvePoint> {
        self.points.iter().find(|p| p.d == d)
    }

    /// Writes `d,trials,errors,p_hat,ci_lo,ci_hi[,cost_per_delay_unit]`.
    /// Floats use shortest round-trip formatting.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = COLUMNS.to_vec();
        if self.cost_per_delay_unit.is_some() {
            header.push(COST_COLUMN);
        }
        w.write_record(&header)?;
        for p in &self.points {
            let mut row = vec![
                p.d.to_string(),
                p.trials.to_string(),
                p.errors.to_string(),
                p.p_hat.to_string(),
                p.ci_lo.to_string(),
                p.ci_hi.to_string(),
            ];
            if let Some(c) = self.cost_per_delay_unit {
                row.push(c.to_string());
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Reads a curve written by [`ErrorCurve::write_csv`]. Columns are matched
    /// by header name; unknown columns are ignored. Missing interval columns
    /// are recomputed from the counts.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = r.headers()?.clone();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let need = |name: &str| {
            col(name).ok_or_else(|| Error::Parse(format!("missing column {name:?}")))
        };
        let (cd, ct, ce) = (need("d")?, need("trials")?, need("errors")?);
        let (cp, clo, chi, ccost) = (col("p_hat"), col("ci_lo"), col("ci_hi"), col(COST_COLUMN));

        fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: usize) -> Result<T> {
            let s = rec.get(i).unwrap_or("");
            s.parse()
                .map_err(|_| Error::Parse(format!("line {line}: invalid value {s:?}")))
        }

        let mut points = Vec::new();
        let mut cost = None;
        for (row, rec) in r.records().enumerate() {
            let rec = rec?;
            let line = row + 2;
            let (d, trials, errors) = (field(&rec, cd, line)?, field(&rec, ct, line)?, field(&rec, ce, line)?);
            if trials == 0 || errors > trials {
                return Err(Error::Parse(format!("line {line}: need 0 <= errors <= trials, trials > 0")));
            }
            let mut p = CurvePoint::from_counts(d, trials, errors);
            if let Some(i) = cp {
                p.p_hat = field(&rec, i, line)?;
            }
            if let (Some(lo), Some(hi)) = (clo, chi) {
                p.ci_lo = field(&rec, lo, line)?;
                p.ci_hi = field(&rec, hi, line)?;
            }
            if let Some(i) = ccost {
                cost = Some(field(&rec, i, line)?);
            }
            points.push(p);
        }
        Ok(Self {
            points,
            cost_per_delay_unit: cost,
        })
    }
}

/// Weighted least-squares fit of `-ln p_hat = intercept + slope * d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    /// Empirical delay exponent, nats per bit-slot.
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub points_used: usize,
}

/// Fits the delay exponent using points with at least [`MIN_FIT_ERRORS`]
/// errors, weighting each by its error count (the inverse of the
/// delta-method variance of `ln p_hat`). `stderr` is the slope standard
/// error under those variances.
pub fn fit_exponent(curve: &ErrorCurve) -> Result<ExponentFit> {
    fit_exponent_from(curve, 0)
}

/// As [`fit_exponent`], restricted to points with `d >= first_d`.
pub fn fit_exponent_from(curve: &ErrorCurve, first_d: u32) -> Result<ExponentFit> {
    let usable: Vec<_> = curve
        .points
        .iter()
        .filter(|p| p.d >= first_d && p.errors >= MIN_FIT_ERRORS && p.p_hat > 0.0)
        .collect();
    if usable.len() < 3 {
        return Err(Error::InsufficientData {
            usable: usable.len(),
            required: 3,
        });
    }
    let w_sum: f64 = usable.iter().map(|p| p.errors as f64).sum();
    let d_mean = usable.iter().map(|p| p.errors as f64 * p.d as f64).sum::<f64>() / w_sum;
    let y = |p: &CurvePoint| -p.p_hat.ln();
    let y_mean = usable.iter().map(|p| p.errors as f64 * y(p)).sum::<f64>() / w_sum;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for p in &usable {
        let w = p.errors as f64;
        let dx = p.d as f64 - d_mean;
        sxx += w * dx * dx;
        sxy += w * dx * (y(p) - y_mean);
    }
    if sxx <= 0.0 {
        return Err(Error::InsufficientData {
            usable: 1,
            required: 3,
        });
    }
    let slope = sxy / sxx;
    Ok(ExponentFit {
        slope,
        intercept: y_mean - slope * d_mean,
        stderr: (1.0 / sxx).sqrt(),
        points_used: usable.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::addressed::uniform;

    fn synthetic(p: impl Fn(f64) -> f64) -> ErrorCurve {
        ErrorCurve {
            points: (0..8)
                .map(|d| CurvePoint {
                    d,
                    trials: 1_000_000,
                    errors: 1000,
                    p_hat: p(d as f64),
                    ci_lo: 0.0,
                    ci_hi: 1.0,
                })
                .collect(),
            cost_per_delay_unit: None,
        }
    }

    #[test]
    fn pure_exponential() {
        let fit = fit_exponent(&synthetic(|d| (-0.7 * d).exp())).unwrap();
        assert!((fit.slope - 0.7).abs() < 1e-9);
        assert!(fit.intercept.abs() < 1e-9);
        assert_eq!(fit.points_used, 8);
    }

    #[test]
    fn constant_goes_to_intercept() {
        let fit = fit_exponent(&synthetic(|d| 0.3 * (-0.2 * d).exp())).unwrap();
        assert!((fit.slope - 0.2).abs() < 1e-9);
        assert!((fit.intercept - (1.0f64 / 0.3).ln()).abs() < 1e-9);
    }

    #[test]
    fn sparse_points_are_excluded() {
        let mut c = synthetic(|d| (-0.5 * d).exp());
        for p in c.points.iter_mut().skip(2) {
            p.errors = 9;
        }
        assert!(matches!(
            fit_exponent(&c),
            Err(Error::InsufficientData { usable: 2, required: 3 })
        ));
        c.points[2].errors = 10;
        c.points[2].p_hat = 0.5; // outlier would bend the fit if it were weighted evenly
        assert_eq!(fit_exponent(&c).unwrap().points_used, 3);
        assert!(fit_exponent_from(&c, 1).is_err());
    }

    #[test]
    fn wilson_brackets_estimate() {
        for (e, n) in [(0, 10), (10, 10), (3, 1000), (500, 1000), (1, 1)] {
            let (lo, hi) = wilson_interval(e, n);
            let p = e as f64 / n as f64;
            assert!(lo <= p && p <= hi && 0.0 <= lo && hi <= 1.0, "{e}/{n}");
        }
        let (lo, hi) = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.036_994).abs() < 1e-5);
    }

    #[test]
    fn wilson_coverage() {
        let (p, n) = (0.1, 1000u64);
        let covered = (0..1000u64)
            .filter(|&rep| {
                let errors = (0..n).filter(|&i| uniform(4242, &[rep, i]) < p).count() as u64;
                let (lo, hi) = wilson_interval(errors, n);
                lo <= p && p <= hi
            })
            .count();
        assert!(covered >= 930, "coverage {covered}/1000");
    }

    #[test]
    fn csv_round_trip() {
        let mut c = ErrorCurve::from_counts(&[2, 3, 4], 1000, &[300, 120, 45]);
        let text = c.to_csv_string().unwrap();
        assert!(text.starts_with("d,trials,errors,p_hat,ci_lo,ci_hi\n2,1000,300,0.3,"));
        assert_eq!(ErrorCurve::read_csv(text.as_bytes()).unwrap(), c);
        c.cost_per_delay_unit = Some(0.25);
        let text = c.to_csv_string().unwrap();
        assert!(text.lines().next().unwrap().ends_with(",cost_per_delay_unit"));
        assert_eq!(ErrorCurve::read_csv(text.as_bytes()).unwrap(), c);
    }

    #[test]
    fn csv_errors() {
        assert!(matches!(ErrorCurve::read_csv("d,trials\n1,2\n".as_bytes()), Err(Error::Parse(_))));
        assert!(matches!(
            ErrorCurve::read_csv("d,trials,errors\n1,2,x\n".as_bytes()),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            ErrorCurve::read_csv("d,trials,errors\n1,2,3\n".as_bytes()),
            Err(Error::Parse(_))
        ));
        let minimal = ErrorCurve::read_csv("d,trials,errors\n1,100,7\n".as_bytes()).unwrap();
        assert_eq!(minimal.points[0], CurvePoint::from_counts(1, 100, 7));
    }
}
