use super::gamma::{gamma_fn, gamma_unchecked};
use crate::env::AlphaSchedule;
use crate::error::{Error, Result};

/// Positive stable law with E e^{−λX} = e^{−cλ^α}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableLaw {
    pub c: f64,
    pub alpha: f64,
}

impl StableLaw {
    pub fn new(c: f64, alpha: f64) -> Result<Self> {
        if !(c > 0.0) || !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Domain(format!("stable law needs c > 0, alpha in (0,1], got c={c}, alpha={alpha}")));
        }
        Ok(Self { c, alpha })
    }

    pub fn laplace(&self, lambda: f64) -> f64 {
        (-self.c * lambda.powf(self.alpha)).exp()
    }
}

/// E X^β = c^{β/α} Γ(1 − β/α)/Γ(1 − β) for 0 ≤ β < α.
pub fn stable_moment(law: StableLaw, beta: f64) -> Result<f64> {
    if !(beta >= 0.0) || beta >= law.alpha {
        return Err(Error::Domain(format!(
            "moment of order {beta} is infinite for a {}-stable law",
            law.alpha
        )));
    }
    let q = beta / law.alpha;
    Ok(law.c.powf(q) * gamma_fn(1.0 - q)? / gamma_fn(1.0 - beta)?)
}

/// [Γ(1−α_k)/Γ(1−α_k/α_{k+1})]^{α_{j+1}/α_k}: the scale of the
/// α_{j+1}-stable law of Σ_{y|_k ∈ [x|_j]_k} γ̄_k(y|_k)/γ̄_j(x|_j).
pub fn cylinder_sum_scale(schedule: &AlphaSchedule, j: usize, k: usize) -> Result<f64> {
    if j >= k || k > schedule.max_depth() {
        return Err(Error::Domain(format!(
            "cylinder sum needs 0 <= j < k <= {}, got j={j}, k={k}",
            schedule.max_depth()
        )));
    }
    let base = schedule.gamma_of_gap(k) / schedule.gamma_of_ratio_gap(k);
    Ok(base.powf(schedule.alpha(j + 1) / schedule.alpha(k)))
}

/// E exp{−λ Σ_{y|_k ∈ [x|_j]_k} γ̄_k/γ̄_j} for the untruncated environment.
pub fn cylinder_sum_laplace(schedule: &AlphaSchedule, j: usize, k: usize, lambda: f64) -> Result<f64> {
    if lambda < 0.0 {
        return Err(Error::Domain(format!("lambda must be nonnegative, got {lambda}")));
    }
    let scale = cylinder_sum_scale(schedule, j, k)?;
    Ok((-scale * lambda.powf(schedule.alpha(j + 1))).exp())
}

/// h(γ, z) = zγ/(1 + zγ).
pub fn h(gamma: f64, z: f64) -> f64 {
    let p = z * gamma;
    p / (1.0 + p)
}

/// Lower bound cΓ(α)Γ(1−α)/[1 + cΓ(α)Γ(1−α)]^{1−β} on E X^β for
/// X = Σ γ_i/(1+γ_i) over PPP marks with intensity c t^{−1−α}.
pub fn saturated_sum_moment_lower_bound(c: f64, alpha: f64, beta: f64) -> f64 {
    let a = c * gamma_unchecked(alpha) * gamma_unchecked(1.0 - alpha);
    a / (1.0 + a).powf(1.0 - beta)
}
