//! The d_i, b_i sequences and the upper/lower recursions for a_k^n that
//! separate trivial from nontrivial limit clocks.

use super::gamma::gamma_one_plus;
use crate::env::AlphaSchedule;
use crate::error::{Error, Result};

/// d_i = α_iΓ(α_i)Γ(1−α_i)/Γ(1−α_i/α_{i+1}) given the gaps g_i, g_{i+1}
/// and ρ = g_{i+1}/g_i.
pub fn d_from_gaps(g: f64, g_next: f64, rho: f64) -> f64 {
    let alpha = 1.0 - g;
    // r = 1 − α_i/α_{i+1} = g(1 − ρ)/(1 − g_next);  Γ(g)/Γ(r) = Γ(1+g)/Γ(1+r) · r/g
    let r = g * (1.0 - rho) / (1.0 - g_next);
    gamma_one_plus(alpha) * gamma_one_plus(g) / gamma_one_plus(r) * (1.0 - rho) / (1.0 - g_next)
}

/// d_1, …, d_n for a schedule of length n + 1.
pub fn d_sequence(schedule: &AlphaSchedule) -> Result<Vec<f64>> {
    Ok((1..schedule.len())
        .map(|i| {
            let (g, gn) = (schedule.gap(i), schedule.gap(i + 1));
            d_from_gaps(g, gn, gn / g)
        })
        .collect())
}

/// b_i = d_i^{α_1⋯α_{i−1}}.
pub fn b_sequence(schedule: &AlphaSchedule) -> Result<Vec<f64>> {
    let d = d_sequence(schedule)?;
    let mut prod = 1.0;
    Ok(d.iter()
        .enumerate()
        .map(|(i, di)| {
            let b = di.powf(prod);
            prod *= schedule.alpha(i + 1);
            b
        })
        .collect())
}

fn check_n(schedule: &AlphaSchedule, n: usize, lambda: f64) -> Result<()> {
    if n == 0 || n > schedule.max_depth() {
        return Err(Error::Domain(format!(
            "recursion depth must lie in 1..={}, got {n}",
            schedule.max_depth()
        )));
    }
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
    }
    Ok(())
}

/// a_n^n = λ^{α_n}Γ(1−α_n/α_{n+1})/Γ(1−α_n), the exact E(Z_{x|_n}^n)^{α_n}.
pub fn a_base(schedule: &AlphaSchedule, n: usize, lambda: f64) -> f64 {
    lambda.powf(schedule.alpha(n)) * schedule.gamma_of_ratio_gap(n) / schedule.gamma_of_gap(n)
}

/// Upper-bound sequence, indexed by k = 0..=n: `a[n]` is the exact base,
/// `a[n−1] = λ^{α_n}Γ(1+α_n)` and `a[k−1] = a[k]^{α_k} d_k` below.
pub fn a_upper_recursion(schedule: &AlphaSchedule, n: usize, lambda: f64) -> Result<Vec<f64>> {
    check_n(schedule, n, lambda)?;
    let d = d_sequence(schedule)?;
    let mut a = vec![0.0; n + 1];
    a[n] = a_base(schedule, n, lambda);
    a[n - 1] = lambda.powf(schedule.alpha(n)) * gamma_one_plus(schedule.alpha(n));
    for k in (1..n).rev() {
        a[k - 1] = a[k].powf(schedule.alpha(k)) * d[k - 1];
    }
    Ok(a)
}

/// Lower bounds for k = 1..=n, stored at index k (index 0 is unused and 0).
/// For k < n: λ^{α_n}(1+δ)^{−Σ_{j=k}^{n−1}(1−α_j)} ∏_{j=k+1}^n d_j with
/// δ = max(λ, 1); at k = n the exact base value.
pub fn a_lower_recursion(schedule: &AlphaSchedule, n: usize, lambda: f64) -> Result<Vec<f64>> {
    check_n(schedule, n, lambda)?;
    let d = d_sequence(schedule)?;
    let delta = lambda.max(1.0);
    let lam = lambda.powf(schedule.alpha(n));
    let mut out = vec![0.0; n + 1];
    out[n] = a_base(schedule, n, lambda);
    let mut gap_sum = 0.0;
    let mut d_prod = 1.0;
    for k in (1..n).rev() {
        gap_sum += schedule.gap(k);
        d_prod *= d[k];
        out[k] = lam * (1.0 + delta).powf(-gap_sum) * d_prod;
    }
    Ok(out)
}

/// Pairs (k, lower_k, upper_k^{α_k}) for k = 1..=n. The lower bound
/// concerns E(Z^{α_k}) and the upper bound E(Z) (k < n), so the
/// comparable quantity is the Jensen bound upper^{α_k}; at k = n both are
/// E(Z^{α_n}).
pub fn bound_pairs(schedule: &AlphaSchedule, n: usize, lambda: f64) -> Result<Vec<(usize, f64, f64)>> {
    let up = a_upper_recursion(schedule, n, lambda)?;
    let lo = a_lower_recursion(schedule, n, lambda)?;
    Ok((1..=n)
        .map(|k| {
            let u = if k == n { up[n] } else { up[k].powf(schedule.alpha(k)) };
            (k, lo[k], u)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::gamma::gamma_fn;
    use crate::env::GapRule;

    #[test]
    fn d_example() {
        let s = AlphaSchedule::from_alphas(vec![0.5, 0.8]).unwrap();
        let d = d_sequence(&s).unwrap();
        // direct definition with the plain Gamma function
        let direct = 0.5 * gamma_fn(0.5).unwrap() * gamma_fn(0.5).unwrap() / gamma_fn(0.375).unwrap();
        assert!((d[0] - direct).abs() < 1e-12);
        assert!((d[0] - 0.662_661_301_376_266_6).abs() < 1e-12);
    }

    #[test]
    fn d_below_one_and_its_limit() {
        let s = AlphaSchedule::from_alphas(vec![0.1, 0.3, 0.6, 0.9, 0.99]).unwrap();
        assert!(d_sequence(&s).unwrap().iter().all(|&d| d > 0.0 && d < 1.0));
        // d_i tends to 1 − lim (1−α_{i+1})/(1−α_i), not to 1 in general
        let half = AlphaSchedule::from_alphas(vec![0.999, 0.9995]).unwrap();
        let d = d_sequence(&half).unwrap()[0];
        assert!((d - 0.5).abs() < 1e-3, "d={d}");
        let near = AlphaSchedule::from_alphas(vec![0.999, 0.999_999]).unwrap();
        let d = d_sequence(&near).unwrap()[0];
        assert!(d < 1.0 && d > 0.998, "d={d}");
    }

    #[test]
    fn upper_recursion_first_step() {
        let s = AlphaSchedule::from_alphas(vec![0.3, 0.6, 0.8, 0.9]).unwrap();
        let a = a_upper_recursion(&s, 3, 1.0).unwrap();
        assert!((a[2] - gamma_fn(1.8).unwrap()).abs() < 1e-12);
        assert!(a[2] < 1.0);
        // a_{n−1} = a_n d_n
        let d = d_sequence(&s).unwrap();
        assert!((a[2] - a[3] * d[2]).abs() < 1e-12);
    }

    #[test]
    fn trivial_family_upper_decreases() {
        let s = AlphaSchedule::from_rule(GapRule::Geometric { ratio: 0.5 }, 13).unwrap();
        let a0: Vec<f64> = (4..=12).map(|n| a_upper_recursion(&s, n, 1.0).unwrap()[0]).collect();
        assert!(a0.windows(2).all(|w| w[1] < w[0]));
        assert!(a0[8] < 0.9 * a0[0]);
    }

    #[test]
    fn lower_below_jensen_upper() {
        let schedules = [
            AlphaSchedule::from_rule(GapRule::DoubleExponential, 9).unwrap(),
            AlphaSchedule::from_rule(GapRule::Geometric { ratio: 0.5 }, 9).unwrap(),
            AlphaSchedule::from_alphas(vec![0.2, 0.45, 0.7, 0.85, 0.95]).unwrap(),
        ];
        for s in &schedules {
            for n in 1..s.len() {
                for lambda in [0.3, 1.0, 4.0] {
                    for (k, lo, up) in bound_pairs(s, n, lambda).unwrap() {
                        assert!(lo <= up * (1.0 + 1e-12), "k={k} n={n} lambda={lambda}: {lo} > {up}");
                    }
                }
            }
        }
    }
}
