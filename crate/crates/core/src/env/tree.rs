use std::fmt;
use std::str::FromStr;

use super::marks::{ordered_ppp_marks, tail_mass_from_gap};
use super::schedule::AlphaSchedule;
use crate::error::{Error, Result};
use crate::seed::{Purpose, RandomSeedPlan};

/// Default cap on the number of stored nodes, Σ_k M^k.
pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

/// A finite path x|_k = (x_1, …, x_k) from the root; empty for ∅.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct NodePath(Vec<u32>);

impl NodePath {
    pub fn root() -> Self {
        NodePath(Vec::new())
    }

    pub fn new(coords: Vec<u32>) -> Result<Self> {
        if coords.contains(&0) {
            return Err(Error::Domain(format!("node coordinates must be >= 1, got {coords:?}")));
        }
        Ok(NodePath(coords))
    }

    pub fn coords(&self) -> &[u32] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn child(&self, x: u32) -> NodePath {
        let mut c = self.0.clone();
        c.push(x);
        NodePath(c)
    }

    pub fn prefix(&self, k: usize) -> NodePath {
        NodePath(self.0[..k].to_vec())
    }

    pub fn starts_with(&self, other: &NodePath) -> bool {
        self.0.starts_with(&other.0)
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("root");
        }
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for NodePath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "root" || s.is_empty() {
            return Ok(NodePath::root());
        }
        let coords = s
            .split('.')
            .map(|p| p.parse::<u32>().map_err(|e| Error::Parse(format!("bad node path `{s}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        NodePath::new(coords)
    }
}

/// Truncated hierarchical environment.
///
/// Level k (1-based) holds M^k marks in a flat vector; the mark of node
/// x|_k sits at index `parent_index * M + x_k − 1` where `parent_index` is
/// the flat index of x|_{k−1} (the root has index 0).
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    schedule: AlphaSchedule,
    depth: usize,
    breadth: usize,
    plan: RandomSeedPlan,
    replicate: u64,
    marks: Vec<Vec<f64>>,
    gbar: Vec<Vec<f64>>,
    tail: Vec<Vec<f64>>,
    constants: Vec<f64>,
}

fn total_nodes(breadth: usize, depth: usize) -> Option<usize> {
    let mut total: usize = 0;
    let mut width: usize = 1;
    for _ in 0..depth {
        width = width.checked_mul(breadth)?;
        total = total.checked_add(width)?;
    }
    Some(total)
}

impl Environment {
    /// Builds the environment for one replicate under an explicit node budget.
    pub fn generate(
        schedule: &AlphaSchedule,
        depth: usize,
        breadth: usize,
        plan: RandomSeedPlan,
        replicate: u64,
        node_budget: usize,
    ) -> Result<Self> {
        if depth == 0 {
            return Err(Error::Domain("environment depth must be at least 1".into()));
        }
        if breadth == 0 {
            return Err(Error::Domain("breadth must be at least 1".into()));
        }
        if depth > schedule.max_depth() {
            return Err(Error::LevelMismatch(format!(
                "depth {depth} needs {} exponents, schedule has {}",
                depth + 1,
                schedule.len()
            )));
        }
        match total_nodes(breadth, depth) {
            Some(t) if t <= node_budget => {}
            _ => {
                return Err(Error::BudgetExceeded(format!(
                    "breadth {breadth} at depth {depth} exceeds the node budget {node_budget}"
                )))
            }
        }
        let constants: Vec<f64> = (1..=depth).map(|k| schedule.c(k)).collect();
        let mut marks = Vec::with_capacity(depth);
        let mut gbar: Vec<Vec<f64>> = Vec::with_capacity(depth);
        let mut tail = Vec::with_capacity(depth);
        let mut path = vec![0u32; depth];
        for k in 1..=depth {
            let parents = breadth.pow(k as u32 - 1);
            let (c, alpha, gap) = (constants[k - 1], schedule.alpha(k), schedule.gap(k));
            let mut level = Vec::with_capacity(parents * breadth);
            let mut level_tail = Vec::with_capacity(parents);
            for p in 0..parents {
                decode_path(p, breadth, k - 1, &mut path);
                let mut rng = plan.stream_parts(Purpose::Environment, k as u32, &path[..k - 1], replicate);
                let m = ordered_ppp_marks(c, alpha, breadth, &mut rng)?;
                level_tail.push(tail_mass_from_gap(c, gap, *m.last().unwrap())?);
                level.extend_from_slice(&m);
            }
            let gb: Vec<f64> = if k == 1 {
                level.clone()
            } else {
                let prev = &gbar[k - 2];
                level.iter().enumerate().map(|(i, g)| prev[i / breadth] * g).collect()
            };
            marks.push(level);
            gbar.push(gb);
            tail.push(level_tail);
        }
        Ok(Self {
            schedule: schedule.clone(),
            depth,
            breadth,
            plan,
            replicate,
            marks,
            gbar,
            tail,
            constants,
        })
    }

    /// Reassembles an environment from stored marks, e.g. after parsing.
    pub fn from_marks(
        schedule: AlphaSchedule,
        breadth: usize,
        plan: RandomSeedPlan,
        replicate: u64,
        marks: Vec<Vec<f64>>,
        tail: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let depth = marks.len();
        if depth == 0 || depth > schedule.max_depth() {
            return Err(Error::LevelMismatch(format!("cannot store {depth} levels for this schedule")));
        }
        for k in 1..=depth {
            let width = breadth.pow(k as u32);
            if marks[k - 1].len() != width || tail[k - 1].len() != width / breadth {
                return Err(Error::LevelMismatch(format!("level {k} has the wrong number of entries")));
            }
            for chunk in marks[k - 1].chunks(breadth) {
                if chunk.iter().any(|&g| !(g > 0.0)) || chunk.windows(2).any(|w| !(w[0] > w[1])) {
                    return Err(Error::Domain(format!("level {k} marks are not strictly decreasing and positive")));
                }
            }
        }
        let mut gbar: Vec<Vec<f64>> = Vec::with_capacity(depth);
        for k in 1..=depth {
            let gb = if k == 1 {
                marks[0].clone()
            } else {
                marks[k - 1].iter().enumerate().map(|(i, g)| gbar[k - 2][i / breadth] * g).collect()
            };
            gbar.push(gb);
        }
        let constants = (1..=depth).map(|k| schedule.c(k)).collect();
        Ok(Self {
            schedule,
            depth,
            breadth,
            plan,
            replicate,
            marks,
            gbar,
            tail,
            constants,
        })
    }

    /// Replaces level-1 marks of a depth-1 environment (hand-built test fixtures).
    pub fn with_single_level(schedule: AlphaSchedule, marks: Vec<f64>) -> Result<Self> {
        let breadth = marks.len();
        Self::from_marks(
            schedule,
            breadth,
            RandomSeedPlan::new(0),
            0,
            vec![marks],
            vec![vec![0.0]],
        )
    }

    pub fn schedule(&self) -> &AlphaSchedule {
        &self.schedule
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn breadth(&self) -> usize {
        self.breadth
    }

    pub fn plan(&self) -> RandomSeedPlan {
        self.plan
    }

    pub fn replicate(&self) -> u64 {
        self.replicate
    }

    /// c_1, …, c_n.
    pub fn constants(&self) -> &[f64] {
        &self.constants
    }

    /// Number of nodes at level k (M^k; 1 for the root level).
    pub fn level_len(&self, k: usize) -> usize {
        self.breadth.pow(k as u32)
    }

    /// γ_k of every level-k node, flat.
    pub fn level_marks(&self, k: usize) -> &[f64] {
        &self.marks[k - 1]
    }

    /// γ̄_k of every level-k node, flat.
    pub fn level_gbar(&self, k: usize) -> &[f64] {
        &self.gbar[k - 1]
    }

    /// Tail mass of the discarded level-k marks below each level-(k−1) node.
    pub fn level_tail(&self, k: usize) -> &[f64] {
        &self.tail[k - 1]
    }

    pub fn gamma(&self, k: usize, index: usize) -> f64 {
        self.marks[k - 1][index]
    }

    pub fn gbar(&self, k: usize, index: usize) -> f64 {
        if k == 0 {
            1.0
        } else {
            self.gbar[k - 1][index]
        }
    }

    /// Σ_{x|_k} γ̄_k(x|_k) over retained nodes.
    pub fn sum_gbar(&self, k: usize) -> f64 {
        if k == 0 {
            1.0
        } else {
            self.gbar[k - 1].iter().sum()
        }
    }

    /// Flat index of a stored node.
    pub fn index_of(&self, path: &NodePath) -> Result<usize> {
        if path.depth() > self.depth {
            return Err(Error::PathNotFound(path.clone()));
        }
        let mut idx = 0usize;
        for &x in path.coords() {
            if x as usize > self.breadth {
                return Err(Error::PathNotFound(path.clone()));
            }
            idx = idx * self.breadth + (x as usize - 1);
        }
        Ok(idx)
    }

    /// Path of the node with flat index `index` at level k.
    pub fn path_of(&self, k: usize, index: usize) -> NodePath {
        let mut coords = vec![0u32; k];
        decode_path(index, self.breadth, k, &mut coords);
        NodePath(coords.iter().map(|c| c + 1).collect())
    }

    /// Ordered marks of the children of a node.
    pub fn marks_of(&self, parent: &NodePath) -> Result<&[f64]> {
        if parent.depth() >= self.depth {
            return Err(Error::PathNotFound(parent.clone()));
        }
        let p = self.index_of(parent)?;
        let m = self.breadth;
        Ok(&self.marks[parent.depth()][p * m..(p + 1) * m])
    }

    /// Flat index range at level k of the descendants of node `index` at level j.
    pub fn descendant_range(&self, j: usize, index: usize, k: usize) -> std::ops::Range<usize> {
        let w = self.breadth.pow((k - j) as u32);
        index * w..(index + 1) * w
    }

    /// Σ over descendants y|_k of the level-j node of γ̄_k(y|_k)/γ̄_j(x|_j).
    pub fn cylinder_sum(&self, base: &NodePath, k: usize) -> Result<f64> {
        Ok(self.relative_products(base, k, 1.0)?.iter().sum())
    }

    /// (γ̄_k(y|_k)/γ̄_j(x|_j))^β for every descendant y|_k of `base`.
    pub fn relative_products(&self, base: &NodePath, k: usize, beta: f64) -> Result<Vec<f64>> {
        let j = base.depth();
        if k < j || k > self.depth {
            return Err(Error::LevelMismatch(format!("cannot descend from level {j} to level {k}")));
        }
        let idx = self.index_of(base)?;
        let mut rel = vec![1.0];
        let mut start = idx;
        for level in j + 1..=k {
            let m = self.breadth;
            let marks = &self.marks[level - 1][start * m..(start + rel.len()) * m];
            rel = marks
                .iter()
                .enumerate()
                .map(|(i, g)| rel[i / m] * if beta == 1.0 { *g } else { g.powf(beta) })
                .collect();
            start *= m;
        }
        Ok(rel)
    }

    /// Bottom-up S(x|_j) = Σ_{y|_n ∈ [x|_j]} (γ̄_n(y)/γ̄_j(x))^β for every level-j node,
    /// returned for all j = 0..=n (index j).
    pub fn power_sums(&self, n: usize, beta: f64) -> Result<Vec<Vec<f64>>> {
        if n > self.depth {
            return Err(Error::LevelMismatch(format!("level {n} exceeds depth {}", self.depth)));
        }
        let m = self.breadth;
        let mut out = vec![Vec::new(); n + 1];
        out[n] = vec![1.0; self.level_len(n)];
        for j in (0..n).rev() {
            let child = &out[j + 1];
            let marks = &self.marks[j];
            out[j] = (0..self.level_len(j))
                .map(|p| {
                    (0..m)
                        .map(|x| {
                            let i = p * m + x;
                            marks[i].powf(beta) * child[i]
                        })
                        .sum()
                })
                .collect();
        }
        Ok(out)
    }
}

fn decode_path(mut index: usize, breadth: usize, k: usize, out: &mut [u32]) {
    for slot in out[..k].iter_mut().rev() {
        *slot = (index % breadth) as u32;
        index /= breadth;
    }
}

/// Environment for replicate 0 under the default node budget.
pub fn generate_environment(
    schedule: &AlphaSchedule,
    depth: usize,
    breadth: usize,
    plan: RandomSeedPlan,
) -> Result<Environment> {
    Environment::generate(schedule, depth, breadth, plan, 0, DEFAULT_NODE_BUDGET)
}

/// The partial sum Σ_{y|_n ∈ [x|_k]_n} (γ̄_n/γ̄_k)^{α_{n+1}} over retained marks.
pub fn estimate_w(env: &Environment, base: &NodePath, up_to_depth: usize) -> Result<f64> {
    let beta = env.schedule().alpha(up_to_depth + 1);
    Ok(env.relative_products(base, up_to_depth, beta)?.iter().sum())
}

/// [`estimate_w`] for every node at level `level`, flat-indexed.
pub fn estimate_w_level(env: &Environment, level: usize, up_to_depth: usize) -> Result<Vec<f64>> {
    if level > up_to_depth {
        return Err(Error::LevelMismatch(format!("level {level} is below depth {up_to_depth}")));
    }
    let beta = env.schedule().alpha(up_to_depth + 1);
    let mut sums = env.power_sums(up_to_depth, beta)?;
    Ok(std::mem::take(&mut sums[level]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sched() -> AlphaSchedule {
        AlphaSchedule::from_alphas(vec![0.4, 0.6, 0.8, 0.95]).unwrap()
    }

    #[test]
    fn path_parse_display() {
        let p: NodePath = "3.1.2".parse().unwrap();
        assert_eq!(p.coords(), &[3, 1, 2]);
        assert_eq!(p.to_string(), "3.1.2");
        assert_eq!("root".parse::<NodePath>().unwrap(), NodePath::root());
        assert!("1.0".parse::<NodePath>().is_err());
    }

    #[test]
    fn depth_one_single_node() {
        let env = generate_environment(&sched(), 1, 3, RandomSeedPlan::new(1)).unwrap();
        assert_eq!(env.level_marks(1).len(), 3);
        assert!(env.level_marks(1).windows(2).all(|w| w[0] > w[1]));
        assert_eq!(env.level_tail(1).len(), 1);
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let a = generate_environment(&sched(), 3, 4, RandomSeedPlan::new(7)).unwrap();
        let b = generate_environment(&sched(), 3, 4, RandomSeedPlan::new(7)).unwrap();
        let c = generate_environment(&sched(), 3, 4, RandomSeedPlan::new(8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.level_marks(3), c.level_marks(3));
    }

    #[test]
    fn budget_is_enforced() {
        let e = Environment::generate(&sched(), 3, 10, RandomSeedPlan::new(1), 0, 1000);
        assert!(matches!(e, Err(Error::BudgetExceeded(_))));
        assert!(Environment::generate(&sched(), 3, 10, RandomSeedPlan::new(1), 0, 1110).is_ok());
    }

    #[test]
    fn indexing_round_trip() {
        let env = generate_environment(&sched(), 3, 4, RandomSeedPlan::new(2)).unwrap();
        for k in 0..=3 {
            for i in 0..env.level_len(k) {
                let p = env.path_of(k, i);
                assert_eq!(env.index_of(&p).unwrap(), i);
            }
        }
        let p: NodePath = "2.3".parse().unwrap();
        let i = env.index_of(&p).unwrap();
        let expect = env.gamma(1, 1) * env.gamma(2, i);
        assert!((env.gbar(2, i) - expect).abs() < 1e-15 * expect);
        assert!(env.index_of(&"5".parse().unwrap()).is_err());
    }

    #[test]
    fn estimate_w_base_cases() {
        let env = generate_environment(&sched(), 3, 4, RandomSeedPlan::new(3)).unwrap();
        let p: NodePath = "1.2".parse().unwrap();
        assert_eq!(estimate_w(&env, &p, 2).unwrap(), 1.0);
        let levels = estimate_w_level(&env, 1, 3).unwrap();
        for (i, w) in levels.iter().enumerate() {
            let direct = estimate_w(&env, &env.path_of(1, i), 3).unwrap();
            assert!((w - direct).abs() < 1e-12 * direct);
        }
        // cylinder sums telescope
        let total = env.cylinder_sum(&NodePath::root(), 3).unwrap();
        assert!((total - env.sum_gbar(3)).abs() < 1e-12 * total);
    }
}
