//! Oracle comparisons. Replicas are simulated in parallel and collected in
//! replicate order, so every reduction below is a fixed sequential fold.

use rayon::prelude::*;

use super::stats::{bonferroni_threshold, median, ComparisonResult, StatEstimate, Verdict};
use crate::analytics::{cylinder_sum_laplace, cylinder_sum_scale, nested_h_exponent, stable_moment, LeafWeights, StableLaw};
use crate::clocks::{decompose_by_state, w_values, composed_root, Dynamics, WField};
use crate::env::{
    ordered_ppp_marks, sample_stable, sample_stable_gap, AlphaSchedule, Environment, NodePath, DEFAULT_NODE_BUDGET,
};
use crate::error::{Error, Result};
use crate::kprocess::{cycle_stats, local_time, occupation_fraction, pi_formula};
use crate::seed::{Purpose, RandomSeedPlan};

/// Default z threshold.
pub const DEFAULT_THRESHOLD: f64 = 3.0;

fn replicas<T: Send>(count: usize, f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..count as u64).into_par_iter().map(f).collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Campbell bound ∫_0^s (1 − e^{−μ^β t^β}) c t^{−1−α} dt ≤ μ^β c s^{β−α}/(β−α)
/// for the marks of a PPP with intensity c t^{−1−α} below the cutoff s,
/// with `mu_pow` = μ^β and `spread` = β − α.
fn campbell_deficit(mu_pow: f64, c: f64, s: f64, spread: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    mu_pow * c * (spread * s.ln()).exp() / spread
}

/// Exact Campbell exponent ∫_0^s (1 − e^{−a t^β}) c t^{−1−α} dt of the marks
/// below the cutoff s, with `spread` = β − α > 0. The substitution
/// t = s v^{1/spread} makes the integrand bounded: with p = β/spread and
/// A = a s^β it reads A (1 − e^{−A v^p})/(A v^p) / spread on [0, 1].
fn campbell_exponent(a: f64, beta: f64, c: f64, s: f64, spread: f64) -> f64 {
    if s <= 0.0 || a <= 0.0 {
        return 0.0;
    }
    let big_a = a * s.powf(beta);
    let p = beta / spread;
    let f = |v: f64| {
        let x = big_a * v.powf(p);
        if x < 1e-8 {
            big_a * (1.0 - 0.5 * x)
        } else {
            big_a * (-(-x).exp_m1()) / x
        }
    };
    const N: usize = 256;
    let h = 1.0 / N as f64;
    let mut acc = f(0.0) + f(1.0);
    for i in 1..N {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    let integral = acc * h / 3.0;
    c * s.powf(-(beta - spread)) * integral / spread
}

fn smallest_kept(env: &Environment, level: usize, parent: usize) -> f64 {
    let m = env.breadth();
    env.level_marks(level)[parent * m + m - 1]
}

/// exp{−λθ_k^n(t)} against the nested-h oracle, conditionally on the
/// environment. For k = 1 the oracle is exp{−tΦ(∅)}; for k > 1 it is
/// exp{−Σ_x L_{k−1}(x, t)Φ(x)} evaluated on the same replica, and the
/// standard error is that of the paired difference. The reported half-width
/// bounds the effect of the marks discarded by truncation on the oracle.
pub fn check_conditional_laplace(
    env: &Environment,
    k: usize,
    n: usize,
    t: f64,
    lambdas: &[f64],
    count: usize,
    threshold: f64,
) -> Result<Vec<ComparisonResult>> {
    if k == 0 || k > n || n > env.depth() {
        return Err(Error::LevelMismatch(format!(
            "conditional Laplace needs 1 <= k <= n <= {}, got k={k}, n={n}",
            env.depth()
        )));
    }
    let draws = replicas(count, |r| {
        let mut d = Dynamics::new(env, n, r)?;
        let local = if k == 1 {
            Vec::new()
        } else {
            let traj = d.trajectory(k - 1, t)?;
            let mut acc: Vec<(usize, f64)> = Vec::new();
            for s in traj.level_spans(k - 1) {
                if s.end > s.start {
                    acc.push((s.node, s.end - s.start));
                }
            }
            acc
        };
        let theta = d.theta_value(k, n, t, false)?;
        Ok((theta, local))
    })?;
    let mut out = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let phi = nested_h_exponent(env, k - 1, n, &LeafWeights::Constant(lambda))?;
        let sim: Vec<f64> = draws.iter().map(|(th, _)| (-lambda * th).exp()).collect();
        let (oracle, hw): (Vec<f64>, Vec<f64>) = draws
            .iter()
            .map(|(_, local)| {
                let (e, h) = if k == 1 {
                    (t * phi.values[0], t * phi.halfwidths[0])
                } else {
                    local.iter().fold((0.0, 0.0), |(e, h), &(node, l)| {
                        (e + l * phi.values[node], h + l * phi.halfwidths[node])
                    })
                };
                let o = (-e).exp();
                (o, o * (1.0 - (-h).exp()))
            })
            .unzip();
        let mut observed = if k == 1 {
            StatEstimate::from_samples(&sim)?
        } else {
            StatEstimate::paired_difference(&sim, &oracle)?
        };
        let expected = mean(&oracle);
        if k > 1 {
            observed.mean += expected;
        }
        out.push(ComparisonResult::new(
            format!("conditional_laplace k={k} n={n} t={t} lambda={lambda}"),
            observed,
            expected,
            mean(&hw),
            threshold,
        ));
    }
    Ok(out)
}

/// Relative weights γ̄_ℓ/γ̄_j of the descendants of `base` at every level ℓ = j..=k.
fn subtree_weights(env: &Environment, base: &NodePath, k: usize) -> Result<Vec<Vec<f64>>> {
    (base.depth()..=k).map(|l| env.relative_products(base, l, 1.0)).collect()
}

/// Effect of the discarded marks on E exp{−λ·(cylinder sum)} given the
/// retained ones: an upper bound on 1 − E[e^{−λ·discarded}] and the exact
/// exponent −ln E[e^{−λ·discarded}]. Below the M-th mark of a node the
/// discarded marks form a PPP on (0, s) independent of the retained ones; a
/// discarded level-ℓ mark γ under a node of relative weight w adds
/// wγ·(independent cylinder sum from level ℓ to k), whose Laplace transform
/// is exp{−C(·)^{α_{ℓ+1}}}.
fn cylinder_sum_deficit(
    env: &Environment,
    base: &NodePath,
    k: usize,
    weights: &[Vec<f64>],
    lambda: f64,
) -> Result<(f64, f64)> {
    let schedule = env.schedule();
    let j = base.depth();
    let base_idx = env.index_of(base)?;
    let m = env.breadth();
    let mut bound = 0.0;
    let mut exponent = 0.0;
    for l in j + 1..=k {
        let parents = &weights[l - 1 - j];
        let offset = base_idx * m.pow((l - 1 - j) as u32);
        let tails = env.level_tail(l);
        let c = schedule.c(l);
        let (beta, scale, spread) = if l == k {
            (1.0, 1.0, schedule.gap(l))
        } else {
            (
                schedule.alpha(l + 1),
                cylinder_sum_scale(schedule, l, k)?,
                schedule.gap(l) - schedule.gap(l + 1),
            )
        };
        for (p, &w) in parents.iter().enumerate() {
            let gp = offset + p;
            let s = smallest_kept(env, l, gp);
            if l == k {
                bound += lambda * w * tails[gp];
            } else {
                bound += scale * campbell_deficit((lambda * w).powf(beta), c, s, spread);
            }
            exponent += campbell_exponent(scale * (lambda * w).powf(beta), beta, c, s, spread);
        }
    }
    Ok((bound, exponent))
}

/// exp{−λΣ_{y|_k ∈ [x|_j]_k} γ̄_k/γ̄_j} over independent environments,
/// against its α_{j+1}-stable Laplace transform; x|_j = (1, …, 1).
///
/// The first row per λ uses the retained marks only and carries the
/// truncation half-width. The second multiplies each replica by the exact
/// conditional Laplace factor of the discarded marks, an unbiased estimator
/// of the untruncated transform, compared with no half-width.
#[allow(clippy::too_many_arguments)]
pub fn check_environment_laplace(
    schedule: &AlphaSchedule,
    j: usize,
    k: usize,
    lambdas: &[f64],
    count: usize,
    breadth: usize,
    plan: RandomSeedPlan,
    threshold: f64,
) -> Result<Vec<ComparisonResult>> {
    if j >= k || k > schedule.max_depth() {
        return Err(Error::LevelMismatch(format!("environment Laplace needs j < k, got j={j}, k={k}")));
    }
    let base = NodePath::new(vec![1; j])?;
    let draws = replicas(count, |r| {
        let env = Environment::generate(schedule, k, breadth, plan, r, DEFAULT_NODE_BUDGET)?;
        let weights = subtree_weights(&env, &base, k)?;
        let sum: f64 = weights[k - j].iter().sum();
        let deficits = lambdas
            .iter()
            .map(|&l| cylinder_sum_deficit(&env, &base, k, &weights, l))
            .collect::<Result<Vec<_>>>()?;
        Ok((sum, deficits))
    })?;
    let mut out = Vec::with_capacity(2 * lambdas.len());
    for (i, &lambda) in lambdas.iter().enumerate() {
        let oracle = cylinder_sum_laplace(schedule, j, k, lambda)?;
        let vals: Vec<f64> = draws.iter().map(|(s, _)| (-lambda * s).exp()).collect();
        let hw: Vec<f64> = draws
            .iter()
            .zip(&vals)
            .map(|((_, d), v)| v * d[i].0.min(1.0))
            .collect();
        let compensated: Vec<f64> = draws
            .iter()
            .zip(&vals)
            .map(|((_, d), v)| v * (-d[i].1).exp())
            .collect();
        out.push(ComparisonResult::new(
            format!("environment_laplace j={j} k={k} M={breadth} lambda={lambda}"),
            StatEstimate::from_samples(&vals)?,
            oracle,
            mean(&hw),
            threshold,
        ));
        out.push(ComparisonResult::new(
            format!("environment_laplace_compensated j={j} k={k} M={breadth} lambda={lambda}"),
            StatEstimate::from_samples(&compensated)?,
            oracle,
            0.0,
            threshold,
        ));
    }
    Ok(out)
}

/// E exp{−Σ_{x|_n} γ̄_n(x|_n)^{α_{n+1}}} = e^{−1} for every n.
pub fn check_z_martingale(
    schedule: &AlphaSchedule,
    depths: &[usize],
    count: usize,
    breadth: usize,
    plan: RandomSeedPlan,
    threshold: f64,
) -> Result<Vec<ComparisonResult>> {
    let expected = (-1.0f64).exp();
    depths
        .iter()
        .map(|&n| {
            if n == 0 || n > schedule.max_depth() {
                return Err(Error::LevelMismatch(format!("martingale depth {n} outside the schedule")));
            }
            let draws = replicas(count, |r| {
                let env = Environment::generate(schedule, n, breadth, plan, r, DEFAULT_NODE_BUDGET)?;
                let beta = schedule.alpha(n + 1);
                let sum: f64 = env.level_gbar(n).iter().map(|g| g.powf(beta)).sum();
                let mut deficit = 0.0;
                for l in 1..=n {
                    let exponent = schedule.alpha(l + 1);
                    let spread = schedule.gap(l) - schedule.gap(l + 1);
                    let c = schedule.c(l);
                    for p in 0..env.level_len(l - 1) {
                        let w = env.gbar(l - 1, p).powf(exponent);
                        deficit += campbell_deficit(w, c, smallest_kept(&env, l, p), spread);
                    }
                }
                let z = (-sum).exp();
                Ok((z, z * deficit.min(1.0)))
            })?;
            let (z, hw): (Vec<f64>, Vec<f64>) = draws.into_iter().unzip();
            Ok(ComparisonResult::new(
                format!("z_martingale n={n} M={breadth}"),
                StatEstimate::from_samples(&z)?,
                expected,
                mean(&hw),
                threshold,
            ))
        })
        .collect()
}

/// Empirical Laplace transform and a fractional moment of the stable sampler.
pub fn check_stable_sampler(
    alpha: f64,
    lambdas: &[f64],
    beta: f64,
    count: usize,
    plan: RandomSeedPlan,
    threshold: f64,
) -> Result<Vec<ComparisonResult>> {
    let law = StableLaw::new(1.0, alpha)?;
    let mut rng = plan.stream_parts(Purpose::Stable, 0, &[], 0);
    let xs: Vec<f64> = (0..count).map(|_| sample_stable(alpha, &mut rng)).collect();
    let mut out = Vec::with_capacity(lambdas.len() + 1);
    for &lambda in lambdas {
        let v: Vec<f64> = xs.iter().map(|x| (-lambda * x).exp()).collect();
        out.push(ComparisonResult::new(
            format!("stable_laplace alpha={alpha} lambda={lambda}"),
            StatEstimate::from_samples(&v)?,
            law.laplace(lambda),
            0.0,
            threshold,
        ));
    }
    let v: Vec<f64> = xs.iter().map(|x| x.powf(beta)).collect();
    out.push(ComparisonResult::new(
        format!("stable_moment alpha={alpha} beta={beta}"),
        StatEstimate::from_samples(&v)?,
        stable_moment(law, beta)?,
        0.0,
        threshold,
    ));
    Ok(out)
}

/// One draw of Σ_{x ≤ M} γ_{k+1}(x)W(x) with fresh marks and α_{k+2}-stable
/// W(x), returned with the smallest retained mark. Marks and W factors are
/// drawn in order from their own streams, so the draws for breadth M are a
/// prefix of those for any larger breadth.
pub fn w_composition_sample(schedule: &AlphaSchedule, k: usize, breadth: usize, plan: RandomSeedPlan, replicate: u64) -> Result<(f64, f64)> {
    if k + 2 > schedule.len() {
        return Err(Error::LevelMismatch(format!("W composition at level {k} needs {} exponents", k + 2)));
    }
    let c = schedule.c(k + 1);
    let mut mark_rng = plan.stream_parts(Purpose::Check(5), (k + 1) as u32, &[0], replicate);
    let mut w_rng = plan.stream_parts(Purpose::Check(5), (k + 2) as u32, &[1], replicate);
    let marks = ordered_ppp_marks(c, schedule.alpha(k + 1), breadth, &mut mark_rng)?;
    let gap = schedule.gap(k + 2);
    let sum = marks.iter().map(|g| g * sample_stable_gap(gap, &mut w_rng)).sum();
    Ok((sum, marks.last().copied().unwrap_or(0.0)))
}

/// Laplace-grid comparison of direct W(x|_k) samples with the truncated
/// composition Σ γ_{k+1}W(x|_{k+1}). Rows: direct vs the exact transform,
/// then composed minus direct (expected 0).
#[allow(clippy::too_many_arguments)]
pub fn check_w_composition(
    schedule: &AlphaSchedule,
    k: usize,
    lambdas: &[f64],
    count: usize,
    breadth: usize,
    plan: RandomSeedPlan,
    threshold: f64,
) -> Result<Vec<ComparisonResult>> {
    let composed = replicas(count, |r| w_composition_sample(schedule, k, breadth, plan, r))?;
    let mut rng = plan.stream_parts(Purpose::Check(5), k as u32, &[2], 0);
    let gap = schedule.gap(k + 1);
    let direct: Vec<f64> = (0..count).map(|_| sample_stable_gap(gap, &mut rng)).collect();
    let c = schedule.c(k + 1);
    let spread = schedule.gap(k + 1) - schedule.gap(k + 2);
    let beta = schedule.alpha(k + 2);
    let mut out = Vec::new();
    for &lambda in lambdas {
        let d: Vec<f64> = direct.iter().map(|w| (-lambda * w).exp()).collect();
        let direct_est = StatEstimate::from_samples(&d)?;
        out.push(ComparisonResult::new(
            format!("w_direct k={k} lambda={lambda}"),
            direct_est,
            (-lambda.powf(schedule.alpha(k + 1))).exp(),
            0.0,
            threshold,
        ));
        let v: Vec<f64> = composed.iter().map(|(s, _)| (-lambda * s).exp()).collect();
        let hw: Vec<f64> = composed
            .iter()
            .zip(&v)
            .map(|((_, s), e)| e * campbell_deficit(lambda.powf(beta), c, *s, spread).min(1.0))
            .collect();
        let diff = StatEstimate::from_samples(&v)?.minus(&direct_est);
        out.push(ComparisonResult::new(
            format!("w_composed_minus_direct k={k} M={breadth} lambda={lambda}"),
            diff,
            0.0,
            mean(&hw),
            threshold,
        ));
    }
    Ok(out)
}

/// Paired drop e^{−λS_M} − e^{−λS_{M'}} for M < M', where S_M is the
/// composition truncated at M marks of the same draw. The drop is positive
/// pathwise and equals the decrease of the truncation discrepancy
/// E e^{−λS_M} − E e^{−λW}. A second row per λ gives the ratio of the mean
/// half-widths at M' and M.
#[allow(clippy::too_many_arguments)]
pub fn check_w_truncation(
    schedule: &AlphaSchedule,
    k: usize,
    lambdas: &[f64],
    count: usize,
    breadth: usize,
    larger: usize,
    plan: RandomSeedPlan,
    threshold: f64,
) -> Result<Vec<ComparisonResult>> {
    if larger <= breadth {
        return Err(Error::Domain(format!("larger breadth {larger} must exceed {breadth}")));
    }
    let pairs = replicas(count, |r| {
        Ok((
            w_composition_sample(schedule, k, breadth, plan, r)?,
            w_composition_sample(schedule, k, larger, plan, r)?,
        ))
    })?;
    let c = schedule.c(k + 1);
    let spread = schedule.gap(k + 1) - schedule.gap(k + 2);
    let beta = schedule.alpha(k + 2);
    let mut out = Vec::new();
    for &lambda in lambdas {
        let small: Vec<f64> = pairs.iter().map(|((s, _), _)| (-lambda * s).exp()).collect();
        let large: Vec<f64> = pairs.iter().map(|(_, (s, _))| (-lambda * s).exp()).collect();
        let drop = StatEstimate::paired_difference(&small, &large)?;
        out.push(ComparisonResult {
            verdict: if drop.mean > threshold * drop.std_error {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            ..ComparisonResult::new(
                format!("w_truncation_drop k={k} M={breadth}->{larger} lambda={lambda}"),
                drop,
                0.0,
                0.0,
                threshold,
            )
        });
        let hw = |m: &dyn Fn(&((f64, f64), (f64, f64))) -> (f64, f64)| {
            mean(&pairs
                .iter()
                .map(|p| {
                    let (sum, s) = m(p);
                    (-lambda * sum).exp() * campbell_deficit(lambda.powf(beta), c, s, spread).min(1.0)
                })
                .collect::<Vec<_>>())
        };
        let (h_small, h_large) = (hw(&|p| p.0), hw(&|p| p.1));
        let ratio = StatEstimate {
            mean: h_large / h_small,
            std_error: 0.0,
            replicas: count,
        };
        out.push(ComparisonResult {
            verdict: if ratio.mean < 1.0 { Verdict::Pass } else { Verdict::Fail },
            ..ComparisonResult::new(
                format!("w_truncation_halfwidth_ratio k={k} M={breadth}->{larger} lambda={lambda}"),
                ratio,
                1.0,
                0.0,
                threshold,
            )
        });
    }
    Ok(out)
}

/// E θ_1^n(1) = Σγ̄_n, and equality in law of θ_1^n(1) and θ_1^n(2) − θ_1^n(1)
/// on a Laplace grid (λ relative to 1/Σγ̄_n) at family-wise level `level`.
pub fn check_subordinator(
    env: &Environment,
    n: usize,
    relative_lambdas: &[f64],
    count: usize,
    level: f64,
    threshold: f64,
) -> Result<Vec<ComparisonResult>> {
    let draws = replicas(count, |r| {
        let mut d = Dynamics::new(env, n, r)?;
        let a = d.theta_value(1, n, 1.0, false)?;
        let b = d.theta_value(1, n, 2.0, false)?;
        Ok((a, b - a))
    })?;
    let (first, second): (Vec<f64>, Vec<f64>) = draws.into_iter().unzip();
    let total = env.sum_gbar(n);
    let mut out = vec![ComparisonResult::new(
        format!("subordinator_mean n={n}"),
        StatEstimate::from_samples(&first)?,
        total,
        0.0,
        threshold,
    )];
    let z = bonferroni_threshold(level, relative_lambdas.len());
    for &rl in relative_lambdas {
        let lambda = rl / total;
        let x: Vec<f64> = first.iter().map(|v| (-lambda * v).exp()).collect();
        let y: Vec<f64> = second.iter().map(|v| (-lambda * v).exp()).collect();
        out.push(ComparisonResult::new(
            format!("subordinator_increment n={n} lambda={lambda:.6e}"),
            StatEstimate::paired_difference(&y, &x)?,
            0.0,
            0.0,
            z,
        ));
    }
    Ok(out)
}

/// E θ̃_1^n(t) against t·W(∅) for the same W field, and against the value
/// Σ_{x|_n} γ̄_n W(x|_n) implied by the level-n factors.
pub fn check_adjusted_mean(
    env: &Environment,
    n: usize,
    field: WField,
    t: f64,
    count: usize,
    threshold: f64,
) -> Result<Vec<ComparisonResult>> {
    let w = w_values(env, n, field, 0)?;
    let root = w_values(env, 0, field, 0)?[0];
    let implied = composed_root(env, n, &w);
    let samples = replicas(count, |r| {
        let mut d = Dynamics::new(env, n, r)?.with_top_weights(w.clone())?;
        d.theta_value(1, n, t, true)
    })?;
    let est = StatEstimate::from_samples(&samples)?;
    Ok(vec![
        ComparisonResult::new(format!("adjusted_mean n={n} t={t}"), est, t * root, 0.0, threshold),
        ComparisonResult::new(format!("adjusted_mean_implied n={n} t={t}"), est, t * implied, 0.0, threshold),
    ])
}

/// θ̃_1^{n+1}(t) − θ̃_1^n(t) on replicas sharing levels ≤ n has mean 0.
pub fn check_adjusted_martingale(
    env: &Environment,
    n: usize,
    field: WField,
    t: f64,
    count: usize,
    threshold: f64,
) -> Result<ComparisonResult> {
    let lower = w_values(env, n, field, 0)?;
    let upper = w_values(env, n + 1, field, 0)?;
    let diffs = replicas(count, |r| {
        let mut a = Dynamics::new(env, n, r)?.with_top_weights(lower.clone())?;
        let mut b = Dynamics::new(env, n + 1, r)?.with_top_weights(upper.clone())?;
        Ok(b.theta_value(1, n + 1, t, true)? - a.theta_value(1, n, t, true)?)
    })?;
    Ok(ComparisonResult::new(
        format!("adjusted_martingale n={n} t={t}"),
        StatEstimate::from_samples(&diffs)?,
        0.0,
        0.0,
        threshold,
    ))
}

/// Medians over coupled replicas of the clock-convergence diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub levels: Vec<usize>,
    /// Median of sup_t |θ̃_k^{n_i}(t) − θ̃_k^{n_{i+1}}(t)|, one per consecutive pair.
    pub sup_gap_medians: Vec<f64>,
    /// Median of sup_t |θ_k^n(t) − θ̃_k^n(t)|, one per level.
    pub adjustment_medians: Vec<f64>,
    /// Median of θ_k^n at the last grid time, one per level.
    pub plain_medians: Vec<f64>,
    /// Median of θ̃_k^n at the last grid time, one per level.
    pub adjusted_medians: Vec<f64>,
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

impl ConvergenceReport {
    pub fn sup_gap_decreasing(&self) -> bool {
        strictly_decreasing(&self.sup_gap_medians)
    }

    pub fn adjustment_decreasing(&self) -> bool {
        strictly_decreasing(&self.adjustment_medians)
    }

    pub fn plain_decreasing(&self) -> bool {
        strictly_decreasing(&self.plain_medians)
    }

    pub fn verdict(&self) -> Verdict {
        if self.sup_gap_decreasing() && self.adjustment_decreasing() {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// Coupled θ_k^n and θ̃_k^n for every n in `levels` on a time grid. All
/// levels of one replica share the level streams, so lower-level randomness
/// is common to every n.
pub fn check_clock_convergence(
    env: &Environment,
    k: usize,
    levels: &[usize],
    grid: &[f64],
    count: usize,
    field: WField,
) -> Result<ConvergenceReport> {
    if levels.is_empty() || levels.windows(2).any(|w| w[0] >= w[1]) || levels[0] < k {
        return Err(Error::Coupling("levels must be strictly increasing and at least k".into()));
    }
    if *levels.last().unwrap() > env.depth() {
        return Err(Error::Coupling(format!("level above environment depth {}", env.depth())));
    }
    if grid.is_empty() {
        return Err(Error::Domain("empty time grid".into()));
    }
    let weights = levels
        .iter()
        .map(|&n| w_values(env, n, field, 0))
        .collect::<Result<Vec<_>>>()?;
    let draws = replicas(count, |r| {
        let mut plain = Vec::with_capacity(levels.len());
        let mut adjusted = Vec::with_capacity(levels.len());
        for (i, &n) in levels.iter().enumerate() {
            let mut d = Dynamics::new(env, n, r)?.with_top_weights(weights[i].clone())?;
            let mut p = Vec::with_capacity(grid.len());
            let mut a = Vec::with_capacity(grid.len());
            for &t in grid {
                p.push(d.theta_value(k, n, t, false)?);
                a.push(d.theta_value(k, n, t, true)?);
            }
            plain.push(p);
            adjusted.push(a);
        }
        Ok((plain, adjusted))
    })?;
    let sup = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let last = grid.len() - 1;
    let sup_gap_medians = (0..levels.len() - 1)
        .map(|i| median(&draws.iter().map(|(_, a)| sup(&a[i], &a[i + 1])).collect::<Vec<_>>()))
        .collect();
    let adjustment_medians = (0..levels.len())
        .map(|i| median(&draws.iter().map(|(p, a)| sup(&p[i], &a[i])).collect::<Vec<_>>()))
        .collect();
    let plain_medians = (0..levels.len())
        .map(|i| median(&draws.iter().map(|(p, _)| p[i][last]).collect::<Vec<_>>()))
        .collect();
    let adjusted_medians = (0..levels.len())
        .map(|i| median(&draws.iter().map(|(_, a)| a[i][last]).collect::<Vec<_>>()))
        .collect();
    Ok(ConvergenceReport {
        levels: levels.to_vec(),
        sup_gap_medians,
        adjustment_medians,
        plain_medians,
        adjusted_medians,
    })
}

/// Occupation fractions averaged over replicas against the finite-depth π
/// formula, with a relative-error criterion. Also returns, per cylinder, the
/// smallest number of complete cycles seen in any replica.
pub fn check_occupation(
    env: &Environment,
    depth: usize,
    cylinders: &[NodePath],
    horizon: f64,
    count: usize,
    relative_tolerance: f64,
) -> Result<(Vec<ComparisonResult>, Vec<usize>)> {
    let draws = replicas(count, |r| {
        let mut d = Dynamics::new(env, depth, r)?;
        let traj = d.trajectory(depth, horizon)?;
        cylinders
            .iter()
            .map(|c| Ok((occupation_fraction(&traj, c)?, cycle_stats(&traj, c).len())))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut rows = Vec::with_capacity(cylinders.len());
    let mut cycles = Vec::with_capacity(cylinders.len());
    for (i, c) in cylinders.iter().enumerate() {
        let fr: Vec<f64> = draws.iter().map(|d| d[i].0).collect();
        cycles.push(draws.iter().map(|d| d[i].1).min().unwrap_or(0));
        let pi = pi_formula(env, c, depth)?;
        rows.push(ComparisonResult::relative(
            format!("occupation cylinder={c} n={depth} T={horizon}"),
            StatEstimate::from_samples(&fr)?,
            pi,
            relative_tolerance,
        ));
    }
    Ok((rows, cycles))
}

/// Sojourn and gap means for a cylinder x|_k against
/// Σ_{[x|_k]_n}γ̄_n/γ̄_{k−1} and (Σγ̄_n − Σ_{[x|_k]_n}γ̄_n)/γ̄_{k−1}.
pub fn check_cycles(
    env: &Environment,
    depth: usize,
    cylinder: &NodePath,
    horizon: f64,
    count: usize,
    threshold: f64,
) -> Result<Vec<ComparisonResult>> {
    let k = cylinder.depth();
    if k == 0 || k > depth {
        return Err(Error::LevelMismatch(format!("cycle cylinder depth {k} outside 1..={depth}")));
    }
    let idx = env.index_of(cylinder)?;
    let parent_gbar = env.gbar(k - 1, idx / env.breadth());
    let inside: f64 = env.level_gbar(depth)[env.descendant_range(k, idx, depth)].iter().sum();
    let sojourn_oracle = inside / parent_gbar;
    let gap_oracle = (env.sum_gbar(depth) - inside) / parent_gbar;
    let draws = replicas(count, |r| {
        let mut d = Dynamics::new(env, depth, r)?;
        let traj = d.trajectory(depth, horizon)?;
        let c = cycle_stats(&traj, cylinder);
        Ok((c.sojourns(), c.gaps()))
    })?;
    let sojourns: Vec<f64> = draws.iter().flat_map(|(s, _)| s.iter().copied()).collect();
    let gaps: Vec<f64> = draws.iter().flat_map(|(_, g)| g.iter().copied()).collect();
    Ok(vec![
        ComparisonResult::new(
            format!("cycle_sojourn cylinder={cylinder} n={depth}"),
            StatEstimate::from_samples(&sojourns)?,
            sojourn_oracle,
            0.0,
            threshold,
        ),
        ComparisonResult::new(
            format!("cycle_gap cylinder={cylinder} n={depth}"),
            StatEstimate::from_samples(&gaps)?,
            gap_oracle,
            0.0,
            threshold,
        ),
    ])
}

/// Laplace transform of θ_{x|_k}^n(u), the clock of one state re-timed by its
/// local time, against exp{−uΦ_k(x|_k)} of the shifted nested-h formula.
#[allow(clippy::too_many_arguments)]
pub fn check_state_clock_laplace(
    env: &Environment,
    state: &NodePath,
    n: usize,
    u: f64,
    lambdas: &[f64],
    count: usize,
    threshold: f64,
) -> Result<Vec<ComparisonResult>> {
    let k = state.depth();
    if k == 0 || k >= n || n > env.depth() {
        return Err(Error::LevelMismatch(format!("state clock needs 1 <= k < n <= {}", env.depth())));
    }
    let idx = env.index_of(state)?;
    let share = env.gbar(k, idx) / env.sum_gbar(k);
    let values = replicas(count, |r| {
        let mut d = Dynamics::new(env, n, r)?;
        let mut horizon = 1.5 * u / share;
        let traj = loop {
            let traj = d.trajectory(k, horizon)?;
            if local_time(&traj, state, horizon) > u {
                break traj;
            }
            horizon *= 2.0;
        };
        let upper = d.theta_path(k + 1, n, horizon, false)?;
        Ok(decompose_by_state(&upper, &traj, state).value(u))
    })?;
    lambdas
        .iter()
        .map(|&lambda| {
            let phi = nested_h_exponent(env, k, n, &LeafWeights::Constant(lambda))?;
            let v: Vec<f64> = values.iter().map(|x| (-lambda * x).exp()).collect();
            let oracle = (-u * phi.values[idx]).exp();
            Ok(ComparisonResult::new(
                format!("state_clock_laplace state={state} n={n} u={u} lambda={lambda}"),
                StatEstimate::from_samples(&v)?,
                oracle,
                oracle * (1.0 - (-u * phi.halfwidths[idx]).exp()),
                threshold,
            ))
        })
        .collect()
}
