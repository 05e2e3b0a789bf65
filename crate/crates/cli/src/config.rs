use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use gremk::env::{AlphaSchedule, GapRule, DEFAULT_NODE_BUDGET};
use gremk::clocks::DEFAULT_EVENT_BUDGET;

use crate::CliError;

/// Every suite `verify` knows, in the order they run.
pub const ALL_CHECKS: [&str; 11] = [
    "laplace",
    "environment",
    "martingale",
    "stable",
    "composition",
    "subordinator",
    "adjusted",
    "occupation",
    "cycles",
    "convergence",
    "state",
];

/// Either an explicit exponent list or a named gap family.
#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleSpec {
    Explicit(Vec<f64>),
    Family(GapRule),
}

impl ScheduleSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let text = text.trim();
        if text.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
            let alphas = text
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<f64>().map_err(|e| CliError::Config(format!("bad exponent `{t}`: {e}"))))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(ScheduleSpec::Explicit(alphas))
        } else {
            Ok(ScheduleSpec::Family(GapRule::parse(text)?))
        }
    }

    /// Schedule with at least `len` exponents; families are evaluated to `len`.
    pub fn build(&self, len: usize) -> Result<AlphaSchedule, CliError> {
        let s = match self {
            ScheduleSpec::Explicit(a) => AlphaSchedule::from_alphas(a.clone())?,
            ScheduleSpec::Family(rule) => AlphaSchedule::from_rule(*rule, len)?,
        };
        if s.len() < len {
            return Err(CliError::Config(format!(
                "schedule has {} exponents, at least {len} needed",
                s.len()
            )));
        }
        Ok(s)
    }
}

impl fmt::Display for ScheduleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleSpec::Explicit(a) => {
                let parts: Vec<String> = a.iter().map(|x| x.to_string()).collect();
                f.write_str(&parts.join(","))
            }
            ScheduleSpec::Family(r) => write!(f, "{r}"),
        }
    }
}

/// Run parameters, read from a flat `key = value` file and overridden by flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub schedule: ScheduleSpec,
    pub depth: usize,
    pub breadth: usize,
    /// Physical time.
    pub horizon: f64,
    pub replicas: usize,
    pub seed: u64,
    pub replicate: u64,
    pub out: PathBuf,
    pub checks: Vec<String>,
    pub workers: usize,
    pub threshold: f64,
    pub node_budget: usize,
    pub event_budget: usize,
    pub env: Option<PathBuf>,
    pub family: Option<String>,
    pub classify_horizon: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schedule: ScheduleSpec::Explicit(vec![0.5, 0.8, 0.9]),
            depth: 2,
            breadth: 20,
            horizon: 10.0,
            replicas: 1000,
            seed: 1,
            replicate: 0,
            out: PathBuf::from("out"),
            checks: ALL_CHECKS.iter().map(|s| s.to_string()).collect(),
            workers: 1,
            threshold: 3.0,
            node_budget: DEFAULT_NODE_BUDGET,
            event_budget: DEFAULT_EVENT_BUDGET,
            env: None,
            family: None,
            classify_horizon: 1023,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| CliError::Config(format!("`{key}`: cannot parse `{value}`: {e}")))
}

/// Splits a comma-separated check selection; unknown names are rejected.
pub fn parse_checks(text: &str) -> Result<Vec<String>, CliError> {
    let text = text.trim();
    if text == "all" {
        return Ok(ALL_CHECKS.iter().map(|s| s.to_string()).collect());
    }
    let names: Vec<String> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect();
    if names.is_empty() {
        return Err(CliError::Config("empty check selection".into()));
    }
    for n in &names {
        if !ALL_CHECKS.contains(&n.as_str()) {
            return Err(CliError::Config(format!(
                "unknown check `{n}` (known: {})",
                ALL_CHECKS.join(",")
            )));
        }
    }
    Ok(names)
}

impl RunConfig {
    /// Parses `key = value` lines. `#` starts a comment; a unit may follow
    /// the value after whitespace (`horizon = 10 time`) and is ignored.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", no + 1)))?;
            let key = k.trim().to_string();
            if map.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(CliError::Config(format!("duplicate key `{key}`")));
            }
        }
        let mut cfg = RunConfig::default();
        for (key, value) in &map {
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let first = value.split_whitespace().next().unwrap_or("");
        match key {
            "schedule" => self.schedule = ScheduleSpec::parse(value)?,
            "depth" => self.depth = parse_num(key, first)?,
            "breadth" => self.breadth = parse_num(key, first)?,
            "horizon" => self.horizon = parse_num(key, first)?,
            "replicas" => self.replicas = parse_num(key, first)?,
            "seed" => self.seed = parse_num(key, first)?,
            "replicate" => self.replicate = parse_num(key, first)?,
            "out" => self.out = PathBuf::from(value),
            "checks" => self.checks = parse_checks(value)?,
            "workers" => self.workers = parse_num(key, first)?,
            "threshold" => self.threshold = parse_num(key, first)?,
            "node_budget" => self.node_budget = parse_num(key, first)?,
            "event_budget" => self.event_budget = parse_num(key, first)?,
            "env" => self.env = Some(PathBuf::from(value)),
            "family" => self.family = Some(value.to_string()),
            "classify_horizon" => self.classify_horizon = parse_num(key, first)?,
            _ => return Err(CliError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("depth", self.depth),
            ("breadth", self.breadth),
            ("replicas", self.replicas),
            ("workers", self.workers),
            ("node_budget", self.node_budget),
            ("event_budget", self.event_budget),
            ("classify_horizon", self.classify_horizon),
        ];
        for (k, v) in positive {
            if v == 0 {
                return Err(CliError::Config(format!("`{k}` must be positive")));
            }
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(CliError::Config(format!("`horizon` must be finite and nonnegative, got {}", self.horizon)));
        }
        if !(self.threshold > 0.0) {
            return Err(CliError::Config("`threshold` must be positive".into()));
        }
        if self.checks.is_empty() {
            return Err(CliError::Config("empty check selection".into()));
        }
        self.schedule()?;
        Ok(())
    }

    /// The schedule covering depth n plus the exponent α_{n+1}.
    pub fn schedule(&self) -> Result<AlphaSchedule, CliError> {
        self.schedule.build(self.depth + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_file() {
        let cfg = RunConfig::parse(
            "# run\nschedule = 0.5, 0.8, 0.9\ndepth = 2\nbreadth = 30\nhorizon = 5 time\nreplicas = 100\nseed = 9\n",
        )
        .unwrap();
        assert_eq!(cfg.schedule, ScheduleSpec::Explicit(vec![0.5, 0.8, 0.9]));
        assert_eq!(cfg.breadth, 30);
        assert_eq!(cfg.horizon, 5.0);
        assert_eq!(cfg.seed, 9);
    }

    #[test]
    fn family_schedule() {
        let cfg = RunConfig::parse("schedule = geometric-gap r=0.5\ndepth = 3\n").unwrap();
        let s = cfg.schedule().unwrap();
        assert_eq!(s.len(), 4);
        assert!((s.gap(2) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(RunConfig::parse("schedule = 0.8,0.5,0.9"), Err(CliError::Config(_)) | Err(CliError::Core(_))));
        assert!(RunConfig::parse("depth = 0").is_err());
        assert!(RunConfig::parse("colour = red").is_err());
        assert!(RunConfig::parse("depth = 2\ndepth = 3").is_err());
        assert!(RunConfig::parse("schedule = 0.5,0.8\ndepth = 2").is_err());
        assert!(parse_checks(" , ").is_err());
        assert!(parse_checks("laplace,bogus").is_err());
        assert_eq!(parse_checks("laplace,martingale").unwrap(), vec!["laplace", "martingale"]);
    }
}
