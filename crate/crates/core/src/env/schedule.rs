use std::fmt;

use crate::analytics::gamma::{gamma_one_plus, gamma_unchecked};
use crate::error::{Error, Result};

/// Generator rule for the gap 1 − α_k as a function of k ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GapRule {
    /// 1 − α_k = r^k.
    Geometric { ratio: f64 },
    /// 1 − α_k = 2^{−2^k}.
    DoubleExponential,
    /// 1 − α_k = 1/k.
    Harmonic,
}

impl GapRule {
    /// ln(1 − α_k); `k` may be any real ≥ 1 (dyadic condensation uses k = 2^j).
    pub fn log_gap(&self, k: f64) -> f64 {
        match *self {
            GapRule::Geometric { ratio } => k * ratio.ln(),
            GapRule::DoubleExponential => -(k.exp2()) * std::f64::consts::LN_2,
            GapRule::Harmonic => -k.ln(),
        }
    }

    pub fn gap(&self, k: u32) -> f64 {
        self.log_gap(k as f64).exp()
    }

    /// ln[(1 − α_{k+1}) / (1 − α_k)].
    pub fn log_ratio(&self, kf: f64) -> f64 {
        match *self {
            GapRule::Geometric { ratio } => ratio.ln(),
            GapRule::DoubleExponential => -(kf.exp2()) * std::f64::consts::LN_2,
            GapRule::Harmonic => (kf / (kf + 1.0)).ln(),
        }
    }

    pub fn name(&self) -> String {
        match *self {
            GapRule::Geometric { ratio } => format!("geometric-gap r={ratio}"),
            GapRule::DoubleExponential => "double-exponential-gap".to_string(),
            GapRule::Harmonic => "harmonic-gap".to_string(),
        }
    }

    /// Parses `geometric-gap r=0.5`, `double-exponential-gap` or `harmonic-gap`.
    pub fn parse(spec: &str) -> Result<GapRule> {
        let spec = spec.trim();
        let mut parts = spec.split_whitespace();
        let head = parts.next().unwrap_or("");
        let rule = match head {
            "double-exponential-gap" => GapRule::DoubleExponential,
            "harmonic-gap" => GapRule::Harmonic,
            "geometric-gap" => {
                let mut ratio = None;
                for p in parts.by_ref() {
                    if let Some(v) = p.strip_prefix("r=") {
                        ratio = Some(v.parse::<f64>().map_err(|e| Error::Parse(format!("{spec}: {e}")))?);
                    } else {
                        return Err(Error::Parse(format!("unexpected token `{p}` in `{spec}`")));
                    }
                }
                let ratio = ratio.unwrap_or(0.5);
                if !(ratio > 0.0 && ratio < 1.0) {
                    return Err(Error::Domain(format!("geometric ratio must lie in (0,1), got {ratio}")));
                }
                GapRule::Geometric { ratio }
            }
            _ => return Err(Error::Parse(format!("unknown schedule family `{spec}`"))),
        };
        if let Some(extra) = parts.next() {
            return Err(Error::Parse(format!("unexpected token `{extra}` in `{spec}`")));
        }
        Ok(rule)
    }
}

impl fmt::Display for GapRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Strictly increasing exponents α_1 < … < α_{n+1}, stored together with
/// the gaps 1 − α_k so that exponents within rounding of 1 stay distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSchedule {
    alphas: Vec<f64>,
    gaps: Vec<f64>,
    rule: Option<GapRule>,
}

impl AlphaSchedule {
    pub fn from_alphas(alphas: Vec<f64>) -> Result<Self> {
        let gaps = alphas.iter().map(|a| 1.0 - a).collect();
        Self::from_parts(alphas, gaps, None)
    }

    /// The first `len` terms of a rule-generated schedule.
    pub fn from_rule(rule: GapRule, len: usize) -> Result<Self> {
        let gaps: Vec<f64> = (1..=len as u32).map(|k| rule.gap(k)).collect();
        let alphas = gaps.iter().map(|g| 1.0 - g).collect();
        Self::from_parts(alphas, gaps, Some(rule))
    }

    pub fn from_parts(alphas: Vec<f64>, gaps: Vec<f64>, rule: Option<GapRule>) -> Result<Self> {
        if alphas.len() < 2 {
            return Err(Error::Domain(format!(
                "schedule needs at least two exponents, got {}",
                alphas.len()
            )));
        }
        if alphas.len() != gaps.len() {
            return Err(Error::Domain("alphas and gaps differ in length".into()));
        }
        let last = gaps.len() - 1;
        for (i, (&a, &g)) in alphas.iter().zip(&gaps).enumerate() {
            if !a.is_finite() || !g.is_finite() {
                return Err(Error::Domain(format!("alpha_{} is not finite", i + 1)));
            }
            let ok = if i == last { (0.0..1.0).contains(&g) && a > 0.0 } else { g > 0.0 && g < 1.0 && a > 0.0 };
            if !ok {
                return Err(Error::Domain(format!(
                    "alpha_{} = {a} outside its admissible range",
                    i + 1
                )));
            }
            if i > 0 && !(g < gaps[i - 1]) {
                return Err(Error::Domain(format!(
                    "exponents must increase strictly: alpha_{} = {} vs alpha_{} = {a}",
                    i,
                    alphas[i - 1],
                    i + 1
                )));
            }
        }
        Ok(Self { alphas, gaps, rule })
    }

    /// Number of stored exponents, n + 1.
    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// Deepest tree level the schedule supports (c_n needs α_{n+1}).
    pub fn max_depth(&self) -> usize {
        self.alphas.len() - 1
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn rule(&self) -> Option<GapRule> {
        self.rule
    }

    /// α_k, 1-indexed.
    pub fn alpha(&self, k: usize) -> f64 {
        self.alphas[k - 1]
    }

    /// 1 − α_k, 1-indexed.
    pub fn gap(&self, k: usize) -> f64 {
        self.gaps[k - 1]
    }

    /// 1 − α_k/α_{k+1}, computed from the gaps.
    pub fn ratio_gap(&self, k: usize) -> f64 {
        let (gk, gk1) = (self.gap(k), self.gap(k + 1));
        (gk - gk1) / (1.0 - gk1)
    }

    /// c_k = α_k / Γ(1 − α_k/α_{k+1}).
    pub fn c(&self, k: usize) -> f64 {
        let r = self.ratio_gap(k);
        // Γ(r) = Γ(1+r)/r keeps precision when r is tiny
        self.alpha(k) * r / gamma_one_plus(r)
    }

    /// Γ(1 − α_k) evaluated from the gap.
    pub fn gamma_of_gap(&self, k: usize) -> f64 {
        let g = self.gap(k);
        gamma_one_plus(g) / g
    }

    /// Γ(1 − α_k/α_{k+1}) evaluated from the gap.
    pub fn gamma_of_ratio_gap(&self, k: usize) -> f64 {
        let r = self.ratio_gap(k);
        gamma_one_plus(r) / r
    }

    /// Schedule α_{j+1}, α_{j+2}, … used for subtrees rooted at depth j.
    pub fn shifted(&self, j: usize) -> Result<Self> {
        Self::from_parts(self.alphas[j..].to_vec(), self.gaps[j..].to_vec(), None)
    }

    /// Truncates to the first `len` exponents.
    pub fn truncated(&self, len: usize) -> Result<Self> {
        Self::from_parts(self.alphas[..len].to_vec(), self.gaps[..len].to_vec(), self.rule)
    }

    pub fn describe(&self) -> String {
        match self.rule {
            Some(r) => r.name(),
            None => {
                let parts: Vec<String> = self.alphas.iter().map(|a| format!("{a}")).collect();
                format!("explicit ({})", parts.join(", "))
            }
        }
    }
}

/// α_k / Γ(1 − α_k/α_{k+1}).
pub fn constant_c(alpha_k: f64, alpha_k1: f64) -> Result<f64> {
    if !(alpha_k > 0.0 && alpha_k < alpha_k1 && alpha_k1 <= 1.0) {
        return Err(Error::Domain(format!(
            "constant_c needs 0 < alpha_k < alpha_k1 <= 1, got ({alpha_k}, {alpha_k1})"
        )));
    }
    Ok(alpha_k / gamma_unchecked(1.0 - alpha_k / alpha_k1))
}
