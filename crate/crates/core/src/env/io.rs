//! Plain-text environment files.
//!
//! ```text
//! # gremk environment
//! schema_version 1
//! depth 2
//! breadth 3
//! seed 42
//! replicate 0
//! rule none
//! alphas <17-digit floats>
//! gaps <17-digit floats>
//! node root tail <t> marks <m_1> ... <m_M>
//! node 1 tail <t> marks ...
//! ```
//!
//! Node lines list every internal node (depth < n) in depth-first order.

use std::fmt::Write as _;

use super::schedule::{AlphaSchedule, GapRule};
use super::tree::{Environment, NodePath};
use crate::error::{Error, Result};
use crate::seed::RandomSeedPlan;

pub const SCHEMA_VERSION: u32 = 1;

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(" ")
}

pub fn write_environment(env: &Environment) -> String {
    let mut out = String::new();
    let s = env.schedule();
    let _ = writeln!(out, "# gremk environment");
    let _ = writeln!(out, "schema_version {SCHEMA_VERSION}");
    let _ = writeln!(out, "depth {}", env.depth());
    let _ = writeln!(out, "breadth {}", env.breadth());
    let _ = writeln!(out, "seed {}", env.plan().base_seed);
    let _ = writeln!(out, "replicate {}", env.replicate());
    let rule = s.rule().map(|r| r.name()).unwrap_or_else(|| "none".into());
    let _ = writeln!(out, "rule {rule}");
    let _ = writeln!(out, "alphas {}", join(s.alphas()));
    let _ = writeln!(out, "gaps {}", join(s.gaps()));
    write_subtree(env, &NodePath::root(), 0, &mut out);
    out
}

fn write_subtree(env: &Environment, node: &NodePath, index: usize, out: &mut String) {
    let k = node.depth();
    if k >= env.depth() {
        return;
    }
    let m = env.breadth();
    let marks = &env.level_marks(k + 1)[index * m..(index + 1) * m];
    let tail = env.level_tail(k + 1)[index];
    let _ = writeln!(out, "node {node} tail {} marks {}", fmt_f64(tail), join(marks));
    for x in 0..m {
        write_subtree(env, &node.child(x as u32 + 1), index * m + x, out);
    }
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("bad number `{t}`: {e}"))))
        .collect()
}

fn field<'a>(line: &'a str, key: &str) -> Result<&'a str> {
    line.strip_prefix(key)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or_else(|| Error::Parse(format!("expected `{key}` line, got `{line}`")))
}

fn parse_usize(s: &str) -> Result<u64> {
    s.trim().parse::<u64>().map_err(|e| Error::Parse(format!("bad integer `{s}`: {e}")))
}

pub fn read_environment(text: &str) -> Result<Environment> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let mut next = |key: &str| -> Result<String> {
        let line = lines.next().ok_or_else(|| Error::Parse(format!("missing `{key}` line")))?;
        Ok(field(line, key)?.to_string())
    };
    let version = parse_usize(&next("schema_version")?)?;
    if version != SCHEMA_VERSION as u64 {
        return Err(Error::Parse(format!("unsupported schema version {version}")));
    }
    let depth = parse_usize(&next("depth")?)? as usize;
    let breadth = parse_usize(&next("breadth")?)? as usize;
    let seed = parse_usize(&next("seed")?)?;
    let replicate = parse_usize(&next("replicate")?)?;
    let rule_text = next("rule")?;
    let rule = if rule_text.trim() == "none" { None } else { Some(GapRule::parse(&rule_text)?) };
    let alphas = parse_floats(&next("alphas")?)?;
    let gaps = parse_floats(&next("gaps")?)?;
    let schedule = AlphaSchedule::from_parts(alphas, gaps, rule)?;
    if breadth == 0 || depth == 0 {
        return Err(Error::Parse("depth and breadth must be positive".into()));
    }
    let mut marks: Vec<Vec<f64>> = (1..=depth).map(|k| vec![0.0; breadth.pow(k as u32)]).collect();
    let mut tail: Vec<Vec<f64>> = (1..=depth).map(|k| vec![0.0; breadth.pow(k as u32 - 1)]).collect();
    let mut seen: Vec<Vec<bool>> = (1..=depth).map(|k| vec![false; breadth.pow(k as u32 - 1)]).collect();
    for line in lines {
        let rest = field(line, "node")?;
        let mut parts = rest.splitn(2, " tail ");
        let path: NodePath = parts.next().unwrap_or("").parse()?;
        let rest = parts.next().ok_or_else(|| Error::Parse(format!("missing tail in `{line}`")))?;
        let mut parts = rest.splitn(2, " marks ");
        let t = parse_floats(parts.next().unwrap_or(""))?;
        let m = parse_floats(parts.next().ok_or_else(|| Error::Parse(format!("missing marks in `{line}`")))?)?;
        let k = path.depth();
        if k >= depth || m.len() != breadth || t.len() != 1 {
            return Err(Error::Parse(format!("malformed node line for {path}")));
        }
        let mut idx = 0usize;
        for &x in path.coords() {
            if x as usize > breadth {
                return Err(Error::Parse(format!("node {path} exceeds breadth {breadth}")));
            }
            idx = idx * breadth + x as usize - 1;
        }
        marks[k][idx * breadth..(idx + 1) * breadth].copy_from_slice(&m);
        tail[k][idx] = t[0];
        seen[k][idx] = true;
    }
    if seen.iter().flatten().any(|s| !s) {
        return Err(Error::Parse("environment file is missing node lines".into()));
    }
    Environment::from_marks(schedule, breadth, RandomSeedPlan::new(seed), replicate, marks, tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::generate_environment;

    #[test]
    fn round_trip_is_exact() {
        let s = AlphaSchedule::from_alphas(vec![0.35, 0.6, 0.85, 0.97]).unwrap();
        let env = generate_environment(&s, 3, 3, RandomSeedPlan::new(99)).unwrap();
        let text = write_environment(&env);
        let back = read_environment(&text).unwrap();
        assert_eq!(back, env);
        assert_eq!(write_environment(&back), text);
    }

    #[test]
    fn rule_schedules_round_trip() {
        let s = AlphaSchedule::from_rule(GapRule::DoubleExponential, 8).unwrap();
        let env = generate_environment(&s, 2, 2, RandomSeedPlan::new(1)).unwrap();
        let back = read_environment(&write_environment(&env)).unwrap();
        assert_eq!(back.schedule(), env.schedule());
    }

    #[test]
    fn rejects_truncated_files() {
        let s = AlphaSchedule::from_alphas(vec![0.5, 0.8, 0.9]).unwrap();
        let env = generate_environment(&s, 2, 2, RandomSeedPlan::new(1)).unwrap();
        let text = write_environment(&env);
        let cut: String = text.lines().take(11).map(|l| format!("{l}\n")).collect();
        assert!(read_environment(&cut).is_err());
        assert!(read_environment("schema_version 9\n").is_err());
    }
}
