use crate::env::{estimate_w_level, sample_stable_gap, Environment};
use crate::error::{Error, Result};
use crate::seed::Purpose;

/// Source of the W factors used by adjusted clocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WField {
    /// W ≡ 1.
    Unit,
    /// Retained partial sums Σ_{[x|_k]_m} (γ̄_m/γ̄_k)^{α_{m+1}} at depth m.
    PartialSum { depth: usize },
    /// Exact α_{m+1}-stable variables at the depth-m nodes, composed upward by
    /// W(x|_k) = Σ_{x_{k+1}} γ_{k+1}(x|_{k+1}) W(x|_{k+1}).
    StableLeaves { depth: usize },
}

impl WField {
    pub fn depth(&self) -> Option<usize> {
        match self {
            WField::Unit => None,
            WField::PartialSum { depth } | WField::StableLeaves { depth } => Some(*depth),
        }
    }
}

/// Stable leaf samples at level `depth`, drawn in flat order from one stream.
pub fn stable_leaves(env: &Environment, depth: usize, replicate: u64) -> Result<Vec<f64>> {
    if depth == 0 || depth > env.depth() {
        return Err(Error::LevelMismatch(format!(
            "W leaves must sit at a level in 1..={}, got {depth}",
            env.depth()
        )));
    }
    let gap = env.schedule().gap(depth + 1);
    let env_rep = env.replicate();
    let mut rng = env.plan().stream_parts(
        Purpose::WField,
        depth as u32,
        &[(env_rep & 0xffff_ffff) as u32, (env_rep >> 32) as u32],
        replicate,
    );
    Ok((0..env.level_len(depth)).map(|_| sample_stable_gap(gap, &mut rng)).collect())
}

/// W(x|_{level−1}) = Σ_x γ_level(x|_level) W(x|_level) for every parent.
pub fn compose_up(env: &Environment, level: usize, w: &[f64]) -> Vec<f64> {
    let m = env.breadth();
    let marks = env.level_marks(level);
    (0..env.level_len(level - 1))
        .map(|p| (0..m).map(|x| marks[p * m + x] * w[p * m + x]).sum())
        .collect()
}

/// W values at every node of `level`, flat-indexed.
pub fn w_values(env: &Environment, level: usize, field: WField, replicate: u64) -> Result<Vec<f64>> {
    if level > env.depth() {
        return Err(Error::LevelMismatch(format!("level {level} exceeds depth {}", env.depth())));
    }
    match field {
        WField::Unit => Ok(vec![1.0; env.level_len(level)]),
        WField::PartialSum { depth } => {
            if depth > env.depth() {
                return Err(Error::LevelMismatch(format!(
                    "partial-sum depth {depth} exceeds environment depth {}",
                    env.depth()
                )));
            }
            estimate_w_level(env, level, depth)
        }
        WField::StableLeaves { depth } => {
            if depth < level {
                return Err(Error::LevelMismatch(format!("W leaves at {depth} lie above level {level}")));
            }
            let mut w = stable_leaves(env, depth, replicate)?;
            for l in (level + 1..=depth).rev() {
                w = compose_up(env, l, &w);
            }
            Ok(w)
        }
    }
}

/// Σ_{x|_n} γ̄_n(x|_n) W(x|_n): the value of W(∅) implied by level-n factors.
pub fn composed_root(env: &Environment, level: usize, w: &[f64]) -> f64 {
    if level == 0 {
        return w[0];
    }
    env.level_gbar(level).iter().zip(w).map(|(g, w)| g * w).sum()
}
