//! Numerical classification of infinite schedules.
//!
//! Both series involved, Σ(1−α_k) and Σ(1−α_{k+1})/(1−α_k), are decided
//! from their Cauchy-condensed form Σ_j 2^j a(2^j) whenever the terms are
//! nonincreasing, which lets a horizon of K dyadic blocks probe indices up
//! to 2^K. Nonmonotone term sequences fall back to direct partial sums.

use std::fmt::{self, Write as _};

use super::recursions::d_from_gaps;
use crate::env::GapRule;

/// Consecutive condensed terms below this count as a converged tail.
pub const TAIL_TOLERANCE: f64 = 1e-12;
/// Partial sums above this count as divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1e3;
/// Number of consecutive terms inspected by both tests.
pub const WINDOW: usize = 20;
/// Largest dyadic block whose index 2^j is finite in double precision.
pub const MAX_BLOCKS: usize = 1023;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Nontrivial,
    Trivial,
    Uncovered,
    Indeterminate,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Nontrivial => "NONTRIVIAL",
            Regime::Trivial => "TRIVIAL",
            Regime::Uncovered => "UNCOVERED",
            Regime::Indeterminate => "INDETERMINATE",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesVerdict {
    Convergent,
    Divergent,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub family: String,
    pub horizon: usize,
    pub classification: Regime,
    pub gap_verdict: SeriesVerdict,
    pub ratio_verdict: SeriesVerdict,
    /// Σ_{k≤K} (1 − α_k), direct.
    pub gap_partial_sums: Vec<f64>,
    /// Σ_{k≤K} (1 − α_{k+1})/(1 − α_k), direct.
    pub ratio_partial_sums: Vec<f64>,
    /// Partial sums of the series the verdicts were taken from.
    pub gap_decision_trace: Vec<f64>,
    pub ratio_decision_trace: Vec<f64>,
    pub d_values: Vec<f64>,
    pub one_minus_d_partial_sums: Vec<f64>,
    pub b_product: Vec<f64>,
}

fn verdict(terms: &[f64]) -> (SeriesVerdict, Vec<f64>) {
    let mut sums = Vec::with_capacity(terms.len());
    let mut acc = 0.0;
    for &t in terms {
        acc += t;
        sums.push(acc);
    }
    let n = terms.len();
    if n >= WINDOW {
        let tail = &terms[n - WINDOW..];
        if tail.iter().all(|&t| t.abs() < TAIL_TOLERANCE) {
            return (SeriesVerdict::Convergent, sums);
        }
        let nondecreasing = tail.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12));
        if acc > DIVERGENCE_THRESHOLD && nondecreasing {
            return (SeriesVerdict::Divergent, sums);
        }
    }
    (SeriesVerdict::Inconclusive, sums)
}

/// Terms of a series given by its logarithm, via condensation when the
/// terms are nonincreasing on the sampled indices, directly otherwise.
fn decision_terms(log_term: impl Fn(f64) -> f64, horizon: usize) -> Vec<f64> {
    let direct: Vec<f64> = (1..=horizon.max(2)).map(|k| log_term(k as f64)).collect();
    let monotone = direct.windows(2).all(|w| w[1] <= w[0] + 1e-15);
    if monotone {
        let blocks = horizon.min(MAX_BLOCKS);
        (0..blocks)
            .map(|j| {
                let k = (j as f64).exp2();
                (j as f64 * std::f64::consts::LN_2 + log_term(k)).exp()
            })
            .collect()
    } else {
        direct.iter().map(|l| l.exp()).collect()
    }
}

/// Classifies a gap rule. `horizon` bounds both the number of direct terms
/// in the traces and the number of dyadic blocks used for the verdicts.
pub fn classify_schedule(rule: GapRule, horizon: usize) -> RegimeReport {
    let horizon = horizon.max(WINDOW);
    let (gap_verdict, gap_trace) = verdict(&decision_terms(|k| rule.log_gap(k), horizon));
    let (ratio_verdict, ratio_trace) = verdict(&decision_terms(|k| rule.log_ratio(k), horizon));

    let classification = match (gap_verdict, ratio_verdict) {
        (_, SeriesVerdict::Convergent) => Regime::Nontrivial,
        (SeriesVerdict::Divergent, _) => Regime::Uncovered,
        (SeriesVerdict::Convergent, SeriesVerdict::Divergent) => Regime::Trivial,
        _ => Regime::Indeterminate,
    };

    let mut gap_partial_sums = Vec::with_capacity(horizon);
    let mut ratio_partial_sums = Vec::with_capacity(horizon);
    let mut d_values = Vec::with_capacity(horizon);
    let mut one_minus_d = Vec::with_capacity(horizon);
    let mut b_product = Vec::with_capacity(horizon);
    let (mut gs, mut rs, mut ds, mut bp, mut alpha_prod) = (0.0, 0.0, 0.0, 1.0, 1.0);
    for k in 1..=horizon {
        let kf = k as f64;
        let g = rule.log_gap(kf).exp();
        let rho = rule.log_ratio(kf).exp();
        let g_next = rule.log_gap(kf + 1.0).exp();
        gs += g;
        rs += rho;
        gap_partial_sums.push(gs);
        ratio_partial_sums.push(rs);
        if g < 1.0 {
            let d = d_from_gaps(g, g_next, rho);
            d_values.push(d);
            ds += 1.0 - d;
            one_minus_d.push(ds);
            bp *= d.powf(alpha_prod);
            b_product.push(bp);
            alpha_prod *= 1.0 - g;
        }
    }

    RegimeReport {
        family: rule.name(),
        horizon,
        classification,
        gap_verdict,
        ratio_verdict,
        gap_partial_sums,
        ratio_partial_sums,
        gap_decision_trace: gap_trace,
        ratio_decision_trace: ratio_trace,
        d_values,
        one_minus_d_partial_sums: one_minus_d,
        b_product,
    }
}

impl RegimeReport {
    /// Structured text: header lines, then one CSV row per index.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# gremk regime report");
        let _ = writeln!(out, "family {}", self.family);
        let _ = writeln!(out, "horizon {}", self.horizon);
        let _ = writeln!(out, "classification {}", self.classification);
        let _ = writeln!(out, "gap_series {:?}", self.gap_verdict);
        let _ = writeln!(out, "ratio_series {:?}", self.ratio_verdict);
        let _ = writeln!(out, "tail_tolerance {TAIL_TOLERANCE:e}");
        let _ = writeln!(out, "divergence_threshold {DIVERGENCE_THRESHOLD:e}");
        let _ = writeln!(out, "window {WINDOW}");
        let _ = writeln!(out, "[direct]");
        let _ = writeln!(out, "k,gap_partial_sum,ratio_partial_sum,d,one_minus_d_partial_sum,b_product");
        for i in 0..self.gap_partial_sums.len() {
            let opt = |v: &Vec<f64>| v.get(i).map(|x| format!("{x:.16e}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{:.16e},{:.16e},{},{},{}",
                i + 1,
                self.gap_partial_sums[i],
                self.ratio_partial_sums[i],
                opt(&self.d_values),
                opt(&self.one_minus_d_partial_sums),
                opt(&self.b_product)
            );
        }
        let _ = writeln!(out, "[decision]");
        let _ = writeln!(out, "j,gap_decision_sum,ratio_decision_sum");
        let n = self.gap_decision_trace.len().max(self.ratio_decision_trace.len());
        for j in 0..n {
            let g = self.gap_decision_trace.get(j).map(|x| format!("{x:.16e}")).unwrap_or_default();
            let r = self.ratio_decision_trace.get(j).map(|x| format!("{x:.16e}")).unwrap_or_default();
            let _ = writeln!(out, "{j},{g},{r}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_families() {
        let r = classify_schedule(GapRule::DoubleExponential, 1023);
        assert_eq!(r.classification, Regime::Nontrivial);
        let r = classify_schedule(GapRule::Geometric { ratio: 0.5 }, 1023);
        assert_eq!(r.classification, Regime::Trivial);
        let r = classify_schedule(GapRule::Harmonic, 1023);
        assert_eq!(r.classification, Regime::Uncovered);
    }

    #[test]
    fn short_horizon_is_indeterminate_for_harmonic() {
        let r = classify_schedule(GapRule::Harmonic, 100);
        assert_eq!(r.classification, Regime::Indeterminate);
    }

    #[test]
    fn one_minus_d_tracks_ratio_series() {
        // bounded together for the nontrivial family, growing together for the trivial one
        let non = classify_schedule(GapRule::DoubleExponential, 200);
        let tri = classify_schedule(GapRule::Geometric { ratio: 0.5 }, 200);
        let last = |v: &Vec<f64>| *v.last().unwrap();
        assert!(last(&non.one_minus_d_partial_sums) < 1.0);
        assert!(last(&non.ratio_partial_sums) < 1.0);
        assert!(last(&tri.one_minus_d_partial_sums) > 20.0);
        assert!(last(&tri.ratio_partial_sums) > 20.0);
        assert!(last(&tri.b_product) < 1e-3);
        assert!(last(&non.b_product) > 0.1);
    }

    #[test]
    fn text_report_has_traces() {
        let r = classify_schedule(GapRule::DoubleExponential, 30);
        let t = r.to_text();
        assert!(t.contains("classification NONTRIVIAL"));
        assert_eq!(t.lines().filter(|l| l.starts_with("5,")).count(), 2);
    }
}
