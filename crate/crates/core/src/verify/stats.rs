use std::fmt;

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub replicas: usize,
}

impl StatEstimate {
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(Error::Domain(format!("an estimate needs at least 2 replicas, got {n}")));
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
        Ok(Self {
            mean,
            std_error: (var / n as f64).sqrt(),
            replicas: n,
        })
    }

    /// Estimate of E(X − Y) from paired samples.
    pub fn paired_difference(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Domain("paired samples must have equal length".into()));
        }
        let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        Self::from_samples(&d)
    }

    /// Difference of two independent estimates.
    pub fn minus(&self, other: &StatEstimate) -> StatEstimate {
        StatEstimate {
            mean: self.mean - other.mean,
            std_error: self.std_error.hypot(other.std_error),
            replicas: self.replicas.min(other.replicas),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Inconclusive,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Inconclusive => "INCONCLUSIVE",
            Verdict::Fail => "FAIL",
        })
    }
}

/// One oracle comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonResult {
    pub name: String,
    pub observed: StatEstimate,
    pub expected: f64,
    pub z_score: f64,
    pub threshold: f64,
    pub truncation_halfwidth: f64,
    pub verdict: Verdict,
}

impl ComparisonResult {
    /// Passes when |observed − expected| ≤ threshold·SE + halfwidth and the
    /// halfwidth is within the statistical tolerance threshold·SE; a match
    /// that only holds thanks to a larger halfwidth is inconclusive.
    pub fn new(name: impl Into<String>, observed: StatEstimate, expected: f64, halfwidth: f64, threshold: f64) -> Self {
        let diff = observed.mean - expected;
        let se = observed.std_error;
        let z_score = if se > 0.0 {
            diff / se
        } else if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        };
        let tol = threshold * se;
        let verdict = if diff.abs() <= tol + halfwidth {
            if halfwidth <= tol || diff.abs() <= tol {
                Verdict::Pass
            } else {
                Verdict::Inconclusive
            }
        } else {
            Verdict::Fail
        };
        Self {
            name: name.into(),
            observed,
            expected,
            z_score,
            threshold,
            truncation_halfwidth: halfwidth,
            verdict,
        }
    }

    /// Passes when |observed − expected| ≤ `tolerance`·|expected|.
    pub fn relative(name: impl Into<String>, observed: StatEstimate, expected: f64, tolerance: f64) -> Self {
        let diff = observed.mean - expected;
        let z_score = if observed.std_error > 0.0 {
            diff / observed.std_error
        } else {
            0.0
        };
        let verdict = if diff.abs() <= tolerance * expected.abs() {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Self {
            name: name.into(),
            observed,
            expected,
            z_score,
            threshold: tolerance,
            truncation_halfwidth: 0.0,
            verdict,
        }
    }

    /// Relative error (observed − expected)/expected.
    pub fn relative_error(&self) -> f64 {
        (self.observed.mean - self.expected) / self.expected
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Two-sided z threshold after a Bonferroni correction over `tests` checks
/// at family-wise level `level`.
pub fn bonferroni_threshold(level: f64, tests: usize) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    normal.inverse_cdf(1.0 - level / (2.0 * tests.max(1) as f64))
}

/// Median of a sample (mean of the middle pair for even sizes).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
