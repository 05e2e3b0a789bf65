//! Lazy simulation of the level clocks Ξ_1, …, Ξ_n of one dynamics replica.
//!
//! Level k owns one stream keyed by (level, environment replicate, dynamics
//! replicate). Its events are produced in time order on the level-(k−1)
//! axis: a merged rate-M Poisson stream with uniform channel labels and a
//! unit-mean exponential weight per event. The parent of an event at time σ
//! is the level-(k−1) node whose jump span [Ξ_{k−1}(σ'−), Ξ_{k−1}(σ')) holds
//! σ, so lower levels are extended on demand. Because every level draws
//! from its own stream in a fixed order, the realized events do not depend
//! on how far any level was extended or which top level was requested.

use rand::Rng;
use rand_distr::Exp1;

use super::path::PiecewisePath;
use crate::env::{Environment, NodePath};
use crate::error::{Error, Result};
use crate::kprocess::{Segment, Span, State, Trajectory};
use crate::seed::{Purpose, RandomSeedPlan, Stream};

/// Default cap on the number of events generated by one replica.
pub const DEFAULT_EVENT_BUDGET: usize = 20_000_000;

/// One event σ_i^{k,x} of the level-k clock.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub level: usize,
    pub channel: u32,
    pub time: f64,
    pub duration_weight: f64,
    pub parent_state: NodePath,
}

#[derive(Debug, Clone)]
struct LevelState {
    rng: Stream,
    next_time: f64,
    times: Vec<f64>,
    nodes: Vec<usize>,
    weights: Vec<f64>,
    cum: Vec<f64>,
    adjusted: Vec<f64>,
}

impl LevelState {
    fn count_le(&self, s: f64) -> usize {
        self.times.partition_point(|&t| t <= s)
    }

    fn value(&self, s: f64, adjusted: bool) -> f64 {
        let n = self.count_le(s);
        if n == 0 {
            0.0
        } else if adjusted {
            self.adjusted[n - 1]
        } else {
            self.cum[n - 1]
        }
    }

    fn last_cum(&self) -> f64 {
        self.cum.last().copied().unwrap_or(0.0)
    }
}

/// Clock system of one dynamics replica over a fixed environment.
#[derive(Debug, Clone)]
pub struct Dynamics<'e> {
    env: &'e Environment,
    top: usize,
    replicate: u64,
    levels: Vec<LevelState>,
    top_weights: Option<Vec<f64>>,
    budget: usize,
    generated: usize,
}

fn level_stream(plan: RandomSeedPlan, level: usize, env_replicate: u64, replicate: u64) -> Stream {
    let path = [(env_replicate & 0xffff_ffff) as u32, (env_replicate >> 32) as u32];
    plan.stream_parts(Purpose::Dynamics, level as u32, &path, replicate)
}

impl<'e> Dynamics<'e> {
    /// Clocks for levels 1..=top, seeded from the environment's plan.
    pub fn new(env: &'e Environment, top: usize, replicate: u64) -> Result<Self> {
        Self::with_plan(env, top, env.plan(), replicate)
    }

    pub fn with_plan(env: &'e Environment, top: usize, plan: RandomSeedPlan, replicate: u64) -> Result<Self> {
        if top == 0 || top > env.depth() {
            return Err(Error::LevelMismatch(format!(
                "clock level must lie in 1..={}, got {top}",
                env.depth()
            )));
        }
        let m = env.breadth() as f64;
        let levels = (1..=top)
            .map(|k| {
                let mut rng = level_stream(plan, k, env.replicate(), replicate);
                let first: f64 = rng.sample(Exp1);
                LevelState {
                    rng,
                    next_time: first / m,
                    times: Vec::new(),
                    nodes: Vec::new(),
                    weights: Vec::new(),
                    cum: Vec::new(),
                    adjusted: Vec::new(),
                }
            })
            .collect();
        Ok(Self {
            env,
            top,
            replicate,
            levels,
            top_weights: None,
            budget: DEFAULT_EVENT_BUDGET,
            generated: 0,
        })
    }

    /// Multiplies every top-level jump by the weight of its node (the W factors).
    pub fn with_top_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.env.level_len(self.top) {
            return Err(Error::LevelMismatch(format!(
                "expected {} top-level weights, got {}",
                self.env.level_len(self.top),
                weights.len()
            )));
        }
        if self.generated > 0 {
            return Err(Error::Domain("weights must be set before any event is generated".into()));
        }
        self.top_weights = Some(weights);
        Ok(self)
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn env(&self) -> &'e Environment {
        self.env
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn replicate(&self) -> u64 {
        self.replicate
    }

    pub fn events_generated(&self) -> usize {
        self.generated
    }

    pub fn is_adjusted(&self) -> bool {
        self.top_weights.is_some()
    }

    fn check_level(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.top {
            return Err(Error::LevelMismatch(format!("level {k} outside 1..={}", self.top)));
        }
        Ok(())
    }

    fn generate_one(&mut self, k: usize) -> Result<()> {
        if self.generated >= self.budget {
            return Err(Error::BudgetExceeded(format!(
                "event budget of {} exhausted at level {k}",
                self.budget
            )));
        }
        let m = self.env.breadth();
        let sigma = self.levels[k - 1].next_time;
        let parent = if k == 1 {
            0
        } else {
            self.ensure_range(k - 1, sigma)?;
            let lower = &self.levels[k - 2];
            let i = lower.cum.partition_point(|&c| c <= sigma);
            if i == lower.cum.len() {
                return Err(Error::ParentGap(sigma));
            }
            lower.nodes[i]
        };
        let env = self.env;
        let weight_of = self.top_weights.as_ref().filter(|_| k == self.top);
        let st = &mut self.levels[k - 1];
        let channel = st.rng.random_range(0..m);
        let t: f64 = st.rng.sample(Exp1);
        let gap: f64 = st.rng.sample(Exp1);
        st.next_time = sigma + gap / m as f64;
        let node = parent * m + channel;
        let jump = env.gamma(k, node) * t;
        let prev = st.last_cum();
        st.times.push(sigma);
        st.nodes.push(node);
        st.weights.push(t);
        st.cum.push(prev + jump);
        if let Some(w) = weight_of {
            let prev_adj = st.adjusted.last().copied().unwrap_or(0.0);
            st.adjusted.push(prev_adj + w[node] * jump);
        }
        self.generated += 1;
        Ok(())
    }

    /// Generates level-k events until every event at time ≤ s is known.
    pub fn ensure_cover(&mut self, k: usize, s: f64) -> Result<()> {
        self.check_level(k)?;
        while self.levels[k - 1].next_time <= s {
            self.generate_one(k)?;
        }
        Ok(())
    }

    /// Generates level-k events until Ξ_k exceeds v.
    pub fn ensure_range(&mut self, k: usize, v: f64) -> Result<()> {
        self.check_level(k)?;
        while self.levels[k - 1].last_cum() <= v {
            self.generate_one(k)?;
        }
        Ok(())
    }

    fn adjusted_at(&self, k: usize, adjusted: bool) -> bool {
        adjusted && k == self.top && self.top_weights.is_some()
    }

    /// Ξ_k(s), or Ξ̃_k(s) when `adjusted` and k is the weighted top level.
    pub fn xi_value(&mut self, k: usize, s: f64, adjusted: bool) -> Result<f64> {
        self.ensure_cover(k, s)?;
        Ok(self.levels[k - 1].value(s, self.adjusted_at(k, adjusted)))
    }

    /// θ_j^n(s) = Ξ_n ∘ … ∘ Ξ_j(s).
    pub fn theta_value(&mut self, j: usize, n: usize, s: f64, adjusted: bool) -> Result<f64> {
        if j > n {
            return Err(Error::LevelMismatch(format!("composition needs j <= n, got {j} > {n}")));
        }
        let mut v = s;
        for l in j..=n {
            v = self.xi_value(l, v, adjusted)?;
        }
        Ok(v)
    }

    /// The already generated part of Ξ_k, known on [0, horizon).
    pub fn xi_path(&self, k: usize, adjusted: bool) -> Result<PiecewisePath> {
        self.check_level(k)?;
        let st = &self.levels[k - 1];
        let cum = if self.adjusted_at(k, adjusted) {
            st.adjusted.clone()
        } else {
            st.cum.clone()
        };
        Ok(PiecewisePath::from_cumulative(st.times.clone(), cum, st.next_time))
    }

    /// θ_j^n on the internal window [0, s_max].
    pub fn theta_path(&mut self, j: usize, n: usize, s_max: f64, adjusted: bool) -> Result<PiecewisePath> {
        if j > n {
            return Err(Error::LevelMismatch(format!("composition needs j <= n, got {j} > {n}")));
        }
        self.ensure_cover(j, s_max)?;
        let count = self.levels[j - 1].count_le(s_max);
        let times = self.levels[j - 1].times[..count].to_vec();
        let mut vals = if self.adjusted_at(j, adjusted) {
            self.levels[j - 1].adjusted[..count].to_vec()
        } else {
            self.levels[j - 1].cum[..count].to_vec()
        };
        for l in j + 1..=n {
            if let Some(&last) = vals.last() {
                self.ensure_cover(l, last)?;
            }
            let adj = self.adjusted_at(l, adjusted);
            let st = &self.levels[l - 1];
            for v in vals.iter_mut() {
                *v = st.value(*v, adj);
            }
        }
        Ok(PiecewisePath::from_cumulative(times, vals, s_max))
    }

    /// θ_j^n on a window [0, S] with θ_j^n(S) > `external`, doubling S from
    /// a first guess based on the expected clock rate.
    pub fn theta_covering(&mut self, j: usize, n: usize, external: f64, adjusted: bool) -> Result<PiecewisePath> {
        let rate = self.env.sum_gbar(n) / self.env.sum_gbar(j - 1);
        let mut s = if rate > 0.0 && external > 0.0 {
            external / rate
        } else {
            1.0
        };
        if !(s.is_finite() && s > 0.0) {
            s = 1.0;
        }
        while self.theta_value(j, n, s, adjusted)? <= external {
            s *= 2.0;
        }
        self.theta_path(j, n, s, adjusted)
    }

    /// Generated level-k events with their parent states.
    pub fn events(&self, k: usize) -> Result<Vec<EventRecord>> {
        self.check_level(k)?;
        let m = self.env.breadth();
        let st = &self.levels[k - 1];
        Ok((0..st.times.len())
            .map(|i| {
                let node = st.nodes[i];
                EventRecord {
                    level: k,
                    channel: (node % m) as u32 + 1,
                    time: st.times[i],
                    duration_weight: st.weights[i],
                    parent_state: self.env.path_of(k - 1, node / m),
                }
            })
            .collect())
    }

    /// Trajectory of X_n on [0, horizon] for n ≤ top, with the spans
    /// [θ_j^n(σ−), θ_j^n(σ)) of every level-j event that starts before the horizon.
    pub fn trajectory(&mut self, n: usize, horizon: f64) -> Result<Trajectory> {
        self.check_level(n)?;
        if !(horizon >= 0.0) {
            return Err(Error::Domain(format!("horizon must be nonnegative, got {horizon}")));
        }
        if horizon == 0.0 {
            return Ok(Trajectory::new(n, self.env.breadth(), 0.0, Vec::new(), vec![Vec::new(); n]));
        }
        // h[l] is the internal time on the level-(l−1) axis at which θ_l^n passes the horizon
        let mut h = vec![0.0; n + 2];
        let mut last = vec![0usize; n + 1];
        h[n + 1] = horizon;
        for l in (1..=n).rev() {
            self.ensure_range(l, h[l + 1])?;
            let st = &self.levels[l - 1];
            let i = st.cum.partition_point(|&c| c <= h[l + 1]);
            last[l] = i;
            h[l] = st.times[i];
        }
        let clamp = |levels: &[LevelState], from: usize, mut v: f64| -> f64 {
            for l in from..=n {
                if v >= h[l] {
                    return horizon;
                }
                v = levels[l - 1].value(v, false);
            }
            v.min(horizon)
        };
        let mut spans = Vec::with_capacity(n);
        for l in 1..=n {
            let st = &self.levels[l - 1];
            let mut level_spans = Vec::with_capacity(last[l] + 1);
            let mut prev = 0.0;
            for i in 0..=last[l] {
                let start = clamp(&self.levels, l + 1, prev);
                let end = clamp(&self.levels, l + 1, st.cum[i]);
                level_spans.push(Span {
                    start,
                    end,
                    node: st.nodes[i],
                });
                prev = st.cum[i];
            }
            spans.push(level_spans);
        }
        let segments = spans[n - 1]
            .iter()
            .filter(|s| s.end > s.start)
            .map(|s| Segment {
                start: s.start,
                end: s.end,
                state: State::from_path(&self.env.path_of(n, s.node)),
            })
            .collect();
        Ok(Trajectory::new(n, self.env.breadth(), horizon, segments, spans))
    }
}

/// Ξ_k of one replica on the internal window [0, horizon] with its events.
pub fn simulate_xi(
    env: &Environment,
    level: usize,
    horizon: f64,
    replicate: u64,
) -> Result<(PiecewisePath, Vec<EventRecord>)> {
    let mut dynamics = Dynamics::new(env, level, replicate)?;
    dynamics.ensure_cover(level, horizon)?;
    let path = dynamics.theta_path(level, level, horizon, false)?;
    let events = dynamics
        .events(level)?
        .into_iter()
        .filter(|e| e.time <= horizon)
        .collect();
    Ok((path, events))
}

/// θ_k^n of one replica on a window whose value exceeds `horizon_external`.
pub fn simulate_theta(env: &Environment, k: usize, n: usize, horizon_external: f64, replicate: u64) -> Result<PiecewisePath> {
    let mut dynamics = Dynamics::new(env, n, replicate)?;
    dynamics.theta_covering(k, n, horizon_external, false)
}

/// θ̃_k^n with the given top-level W factors.
pub fn simulate_theta_adjusted(
    env: &Environment,
    k: usize,
    n: usize,
    weights: Vec<f64>,
    horizon_external: f64,
    replicate: u64,
) -> Result<PiecewisePath> {
    let mut dynamics = Dynamics::new(env, n, replicate)?.with_top_weights(weights)?;
    dynamics.theta_covering(k, n, horizon_external, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{generate_environment, AlphaSchedule};

    fn env3() -> Environment {
        let s = AlphaSchedule::from_alphas(vec![0.5, 0.7, 0.85, 0.95]).unwrap();
        generate_environment(&s, 3, 6, RandomSeedPlan::new(21)).unwrap()
    }

    #[test]
    fn horizon_zero_is_empty() {
        let env = env3();
        let (p, ev) = simulate_xi(&env, 1, 0.0, 0).unwrap();
        assert!(p.is_empty());
        assert!(ev.is_empty());
    }

    #[test]
    fn prefix_consistency_across_extension_order() {
        let env = env3();
        let mut a = Dynamics::new(&env, 3, 5).unwrap();
        a.ensure_cover(3, 2.0).unwrap();
        let mut b = Dynamics::new(&env, 3, 5).unwrap();
        b.ensure_cover(1, 50.0).unwrap();
        b.ensure_cover(2, 30.0).unwrap();
        b.ensure_cover(3, 2.0).unwrap();
        let ea = a.events(3).unwrap();
        let eb = b.events(3).unwrap();
        let n = ea.len().min(eb.len());
        assert!(n > 0);
        assert_eq!(ea[..n], eb[..n]);
    }

    #[test]
    fn parents_come_from_lower_spans() {
        let env = env3();
        let mut d = Dynamics::new(&env, 2, 1).unwrap();
        d.ensure_cover(2, 3.0).unwrap();
        let xi1 = d.xi_path(1, false).unwrap();
        let lower = d.events(1).unwrap();
        for e in d.events(2).unwrap() {
            let i = xi1.cumulative().partition_point(|&c| c <= e.time);
            assert_eq!(e.parent_state, NodePath::new(vec![lower[i].channel]).unwrap());
        }
    }

    #[test]
    fn unit_weights_reproduce_plain_clock() {
        let env = env3();
        let ones = vec![1.0; env.level_len(3)];
        let plain = simulate_theta(&env, 1, 3, 5.0, 2).unwrap();
        let adj = simulate_theta_adjusted(&env, 1, 3, ones, 5.0, 2).unwrap();
        assert_eq!(plain, adj);
    }

    #[test]
    fn composition_identity_on_shared_streams() {
        let env = env3();
        let mut d = Dynamics::new(&env, 3, 9).unwrap();
        let whole = d.theta_path(1, 3, 4.0, false).unwrap();
        let lower = d.theta_path(1, 1, 4.0, false).unwrap();
        let upper = d.theta_path(2, 3, lower.total() + 1.0, false).unwrap();
        let composed = PiecewisePath::compose(&upper, &lower).unwrap();
        for i in 0..=80 {
            let t = i as f64 * 0.05;
            assert_eq!(whole.value(t), composed.value(t));
        }
        // jump times of θ_1^3 are level-1 event times
        let times = d.xi_path(1, false).unwrap();
        assert!(whole.times().iter().all(|t| times.times().contains(t)));
    }

    #[test]
    fn covering_exceeds_external_horizon() {
        let env = env3();
        let p = simulate_theta(&env, 2, 3, 7.5, 4).unwrap();
        assert!(p.total() > 7.5);
        assert!(p.value(p.horizon()) > 7.5);
    }

    #[test]
    fn budget_is_enforced() {
        let env = env3();
        let mut d = Dynamics::new(&env, 3, 0).unwrap().with_budget(10);
        assert!(matches!(d.ensure_cover(3, 1e6), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn trajectory_partitions_horizon() {
        let env = env3();
        let mut d = Dynamics::new(&env, 3, 3).unwrap();
        let tr = d.trajectory(3, 10.0).unwrap();
        let segs = tr.segments();
        assert_eq!(segs[0].start, 0.0);
        assert_eq!(segs.last().unwrap().end, 10.0);
        assert!(segs.windows(2).all(|w| w[0].end == w[1].start));
        assert!(segs.iter().all(|s| s.start < s.end));
    }
}
