use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Right-continuous nondecreasing step function starting at 0.
///
/// Stored as strictly increasing jump times with cumulative values, so
/// evaluation and inversion are binary searches. `horizon` is the end of the
/// window on which the path is known (∞ for hand-built paths).
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePath {
    times: Vec<f64>,
    cum: Vec<f64>,
    horizon: f64,
}

impl Default for PiecewisePath {
    fn default() -> Self {
        Self::empty()
    }
}

impl PiecewisePath {
    pub fn empty() -> Self {
        Self {
            times: Vec::new(),
            cum: Vec::new(),
            horizon: f64::INFINITY,
        }
    }

    /// From (time, size) pairs with strictly increasing times and positive sizes.
    pub fn from_jumps(jumps: &[(f64, f64)]) -> Result<Self> {
        let mut times = Vec::with_capacity(jumps.len());
        let mut cum = Vec::with_capacity(jumps.len());
        let mut acc = 0.0;
        for (i, &(t, s)) in jumps.iter().enumerate() {
            if !(t >= 0.0) || !(s > 0.0) || !s.is_finite() {
                return Err(Error::Domain(format!("invalid jump ({t}, {s})")));
            }
            if i > 0 && !(t > jumps[i - 1].0) {
                return Err(Error::Domain("jump times must increase strictly".into()));
            }
            acc += s;
            times.push(t);
            cum.push(acc);
        }
        Ok(Self {
            times,
            cum,
            horizon: f64::INFINITY,
        })
    }

    /// From jump times and cumulative values; zero-size jumps are dropped.
    pub fn from_cumulative(times: Vec<f64>, cum: Vec<f64>, horizon: f64) -> Self {
        let mut t_out = Vec::with_capacity(times.len());
        let mut c_out: Vec<f64> = Vec::with_capacity(cum.len());
        let mut last = 0.0;
        for (t, c) in times.into_iter().zip(cum) {
            if c > last {
                t_out.push(t);
                c_out.push(c);
                last = c;
            }
        }
        Self {
            times: t_out,
            cum: c_out,
            horizon,
        }
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cum
    }

    pub fn jumps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times
            .iter()
            .zip(&self.cum)
            .scan(0.0, |prev, (&t, &c)| {
                let s = c - *prev;
                *prev = c;
                Some((t, s))
            })
    }

    /// Total mass of the stored jumps.
    pub fn total(&self) -> f64 {
        self.cum.last().copied().unwrap_or(0.0)
    }

    /// Σ of jump sizes at times ≤ t.
    pub fn value(&self, t: f64) -> f64 {
        let n = self.times.partition_point(|&s| s <= t);
        if n == 0 {
            0.0
        } else {
            self.cum[n - 1]
        }
    }

    /// Σ of jump sizes at times < t.
    pub fn left_limit(&self, t: f64) -> f64 {
        let n = self.times.partition_point(|&s| s < t);
        if n == 0 {
            0.0
        } else {
            self.cum[n - 1]
        }
    }

    /// inf{r ≥ 0 : value(r) > s}.
    pub fn inverse(&self, s: f64) -> Result<f64> {
        let i = self.cum.partition_point(|&c| c <= s);
        if i == self.cum.len() {
            return Err(Error::HorizonExceeded {
                requested: s,
                available: self.total(),
            });
        }
        Ok(self.times[i])
    }

    /// t ↦ outer(inner(t)); jumps sit at jump times of `inner`.
    pub fn compose(outer: &PiecewisePath, inner: &PiecewisePath) -> Result<PiecewisePath> {
        if inner.total() >= outer.horizon {
            return Err(Error::HorizonExceeded {
                requested: inner.total(),
                available: outer.horizon,
            });
        }
        let cum: Vec<f64> = inner.cum.iter().map(|&c| outer.value(c)).collect();
        Ok(PiecewisePath::from_cumulative(inner.times.clone(), cum, inner.horizon))
    }

    /// Keeps the jumps at times ≤ t and sets the horizon to t.
    pub fn restrict(&self, t: f64) -> PiecewisePath {
        let n = self.times.partition_point(|&s| s <= t);
        PiecewisePath {
            times: self.times[..n].to_vec(),
            cum: self.cum[..n].to_vec(),
            horizon: t.min(self.horizon),
        }
    }

    /// Two-column text (jump time, cumulative value) after a header line.
    pub fn dump(&self, header: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {header} horizon={:.16e}", self.horizon);
        for (t, c) in self.times.iter().zip(&self.cum) {
            let _ = writeln!(out, "{t:.16e} {c:.16e}");
        }
        out
    }
}
