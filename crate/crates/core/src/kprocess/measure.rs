use std::fmt::Write as _;

use super::trajectory::Trajectory;
use crate::env::{sample_stable_gap, AlphaSchedule, Environment, NodePath};
use crate::error::{Error, Result};
use crate::seed::{Purpose, RandomSeedPlan};
use crate::verify::StatEstimate;

/// Lebesgue measure of {s ≤ t : X(s) starts with `prefix`}.
pub fn local_time(traj: &Trajectory, prefix: &NodePath, t: f64) -> f64 {
    traj.segments()
        .iter()
        .take_while(|s| s.start < t)
        .filter(|s| s.state.matches(prefix))
        .map(|s| s.end.min(t) - s.start)
        .fold(0.0, |acc, d| acc + d)
}

/// Fraction of [0, horizon] spent in the cylinder.
pub fn occupation_fraction(traj: &Trajectory, cylinder: &NodePath) -> Result<f64> {
    if !(traj.horizon() > 0.0) {
        return Err(Error::Domain("occupation needs a positive horizon".into()));
    }
    Ok(local_time(traj, cylinder, traj.horizon()) / traj.horizon())
}

/// Σ_{y|_n ∈ [x|_k]_n} γ̄_n(y|_n) / Σ_{y|_n} γ̄_n(y|_n) over retained nodes.
pub fn pi_formula(env: &Environment, cylinder: &NodePath, at_depth: usize) -> Result<f64> {
    let k = cylinder.depth();
    if k > at_depth || at_depth > env.depth() {
        return Err(Error::LevelMismatch(format!(
            "cylinder depth {k} and evaluation depth {at_depth} must satisfy k <= n <= {}",
            env.depth()
        )));
    }
    let idx = env.index_of(cylinder)?;
    if at_depth == 0 {
        return Ok(1.0);
    }
    let gbar = env.level_gbar(at_depth);
    let part: f64 = gbar[env.descendant_range(k, idx, at_depth)].iter().sum();
    Ok(part / env.sum_gbar(at_depth))
}

/// The `count` depth-1 cylinders of largest π mass at depth `at_depth`,
/// largest first.
pub fn top_cylinders(env: &Environment, at_depth: usize, count: usize) -> Result<Vec<NodePath>> {
    let mut all = (1..=env.breadth() as u32)
        .map(|x| {
            let c = NodePath::new(vec![x])?;
            Ok((pi_formula(env, &c, at_depth)?, c))
        })
        .collect::<Result<Vec<_>>>()?;
    all.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(all.into_iter().take(count).map(|(_, c)| c).collect())
}

/// Entrance and exit times of one cylinder.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CycleStats {
    pub entrances: Vec<f64>,
    pub exits: Vec<f64>,
    pub sojourn_sum: f64,
    pub gap_sum: f64,
}

impl CycleStats {
    pub fn len(&self) -> usize {
        self.entrances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entrances.is_empty()
    }

    pub fn sojourns(&self) -> Vec<f64> {
        self.entrances.iter().zip(&self.exits).map(|(u, v)| v - u).collect()
    }

    /// U_{i+1} − V_i for consecutive complete cycles.
    pub fn gaps(&self) -> Vec<f64> {
        self.exits.iter().zip(self.entrances.iter().skip(1)).map(|(v, u)| u - v).collect()
    }
}

/// One cycle per level-k event landing in the cylinder (k its depth): the
/// entrance is θ_k^n(σ−), the exit θ_k^n(σ). Cycles still open at the
/// horizon are dropped. Consecutive visits with no time spent elsewhere give
/// a zero gap, and a visit during which no deeper event fires gives a zero
/// sojourn.
pub fn cycle_stats(traj: &Trajectory, cylinder: &NodePath) -> CycleStats {
    let k = cylinder.depth();
    if k == 0 || k > traj.depth() {
        return CycleStats::default();
    }
    let m = traj.breadth();
    if cylinder.coords().iter().any(|&x| x as usize > m) {
        return CycleStats::default();
    }
    let idx = cylinder
        .coords()
        .iter()
        .fold(0usize, |acc, &x| acc * m + (x as usize - 1));
    let mut out = CycleStats::default();
    for s in traj.level_spans(k).iter().filter(|s| s.node == idx) {
        if s.end >= traj.horizon() {
            break;
        }
        out.entrances.push(s.start);
        out.exits.push(s.end);
    }
    out.sojourn_sum = out.sojourns().iter().sum();
    out.gap_sum = out.gaps().iter().sum();
    out
}

/// Two-column text: cylinder path and occupation fraction.
pub fn occupation_report(traj: &Trajectory, cylinders: &[NodePath]) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "# cylinder fraction");
    for c in cylinders {
        let _ = writeln!(out, "{c} {:.16e}", occupation_fraction(traj, c)?);
    }
    let _ = writeln!(out, "OTHER {:.16e}", traj.infinity_time() / traj.horizon());
    Ok(out)
}

/// MC estimate of E|W − 1|^{α_k} for W positive α_{k+1}-stable.
pub fn w_control_diagnostic(schedule: &AlphaSchedule, k: usize, replicas: usize, plan: RandomSeedPlan) -> Result<StatEstimate> {
    if k == 0 || k >= schedule.len() {
        return Err(Error::LevelMismatch(format!(
            "W-control level must lie in 1..={}, got {k}",
            schedule.max_depth()
        )));
    }
    let gap = schedule.gap(k + 1);
    let alpha = schedule.alpha(k);
    let mut rng = plan.stream_parts(Purpose::WField, k as u32, &[], u64::MAX);
    let samples: Vec<f64> = (0..replicas)
        .map(|_| (sample_stable_gap(gap, &mut rng) - 1.0).abs().powf(alpha))
        .collect();
    StatEstimate::from_samples(&samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kprocess::{Coord, Segment, Span, State};

    fn simple() -> Trajectory {
        let st = |c: &[u32]| State::new(c.iter().map(|&x| Coord::Finite(x)).collect());
        let segments = vec![
            Segment {
                start: 0.0,
                end: 2.0,
                state: st(&[1, 1]),
            },
            Segment {
                start: 2.0,
                end: 3.0,
                state: st(&[2, 1]),
            },
            Segment {
                start: 3.0,
                end: 5.0,
                state: st(&[1, 2]),
            },
        ];
        let l1 = vec![
            Span {
                start: 0.0,
                end: 2.0,
                node: 0,
            },
            Span {
                start: 2.0,
                end: 3.0,
                node: 1,
            },
            Span {
                start: 3.0,
                end: 5.0,
                node: 0,
            },
        ];
        let l2 = vec![
            Span {
                start: 0.0,
                end: 2.0,
                node: 0,
            },
            Span {
                start: 2.0,
                end: 3.0,
                node: 2,
            },
            Span {
                start: 3.0,
                end: 5.0,
                node: 1,
            },
        ];
        Trajectory::new(2, 2, 5.0, segments, vec![l1, l2])
    }

    #[test]
    fn local_time_examples() {
        let t = simple();
        let one = NodePath::new(vec![1]).unwrap();
        assert_eq!(local_time(&t, &one, 0.0), 0.0);
        assert_eq!(local_time(&t, &one, 4.0), 3.0);
        assert_eq!(local_time(&t, &NodePath::root(), 4.5), 4.5);
        let total = local_time(&t, &one, 5.0) + local_time(&t, &NodePath::new(vec![2]).unwrap(), 5.0);
        assert_eq!(total + t.infinity_time(), 5.0);
    }

    #[test]
    fn cycles_drop_open_visit() {
        let t = simple();
        let c = cycle_stats(&t, &NodePath::new(vec![1]).unwrap());
        assert_eq!(c.entrances, vec![0.0]);
        assert_eq!(c.exits, vec![2.0]);
        assert!(c.gaps().is_empty());
        assert!(cycle_stats(&t, &NodePath::new(vec![2, 2]).unwrap()).is_empty());
    }

    #[test]
    fn occupation_sums_to_one() {
        let t = simple();
        let a = occupation_fraction(&t, &NodePath::new(vec![1]).unwrap()).unwrap();
        let b = occupation_fraction(&t, &NodePath::new(vec![2]).unwrap()).unwrap();
        assert!((a + b - 1.0).abs() < 1e-15);
    }

    #[test]
    fn top_cylinders_are_sorted_by_mass() {
        let s = AlphaSchedule::from_alphas(vec![0.5, 0.8, 0.9]).unwrap();
        let env = crate::env::generate_environment(&s, 2, 10, RandomSeedPlan::new(8)).unwrap();
        let top = top_cylinders(&env, 2, 3).unwrap();
        assert_eq!(top.len(), 3);
        let pis: Vec<f64> = top.iter().map(|c| pi_formula(&env, c, 2).unwrap()).collect();
        assert!(pis.windows(2).all(|w| w[0] >= w[1]));
        let rest = (1..=10u32)
            .map(|x| NodePath::new(vec![x]).unwrap())
            .filter(|c| !top.contains(c))
            .map(|c| pi_formula(&env, &c, 2).unwrap());
        assert!(rest.into_iter().all(|p| p <= pis[2]));
    }

    #[test]
    fn w_control_degenerate_and_positive() {
        let s = AlphaSchedule::from_alphas(vec![0.5, 0.8, 1.0]).unwrap();
        let plan = RandomSeedPlan::new(3);
        assert_eq!(w_control_diagnostic(&s, 2, 100, plan).unwrap().mean, 0.0);
        assert!(w_control_diagnostic(&s, 1, 100, plan).unwrap().mean > 0.0);
    }
}
