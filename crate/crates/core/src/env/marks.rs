use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};

/// The `count` largest marks of a PPP on (0,∞) with intensity c t^{−1−α},
/// in decreasing order.
pub fn ordered_ppp_marks<R: Rng + ?Sized>(c: f64, alpha: f64, count: usize, rng: &mut R) -> Result<Vec<f64>> {
    check_params(c, alpha)?;
    let mut marks = Vec::with_capacity(count);
    let mut arrival = 0.0;
    let scale = c / alpha;
    let inv = 1.0 / alpha;
    for _ in 0..count {
        let e: f64 = rng.sample(Exp1);
        arrival += e;
        marks.push((scale / arrival).powf(inv));
    }
    Ok(marks)
}

/// Marks for given unit-rate arrival times E_1 < E_2 < …
pub fn marks_from_arrivals(c: f64, alpha: f64, arrivals: &[f64]) -> Result<Vec<f64>> {
    check_params(c, alpha)?;
    if arrivals.windows(2).any(|w| !(w[0] < w[1])) || arrivals.first().is_some_and(|&e| !(e > 0.0)) {
        return Err(Error::Domain("arrival times must be positive and strictly increasing".into()));
    }
    let scale = c / alpha;
    Ok(arrivals.iter().map(|e| (scale / e).powf(1.0 / alpha)).collect())
}

fn check_params(c: f64, alpha: f64) -> Result<()> {
    if !(c > 0.0) || !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("PPP marks need c > 0 and alpha in (0,1), got c={c}, alpha={alpha}")));
    }
    Ok(())
}

/// Expected total of the marks below `smallest_kept`: c s^{1−α}/(1−α).
pub fn node_tail_mass(c: f64, alpha: f64, smallest_kept: f64) -> Result<f64> {
    if alpha >= 1.0 {
        return Err(Error::Divergence(format!("tail mass diverges for alpha = {alpha}")));
    }
    tail_mass_from_gap(c, 1.0 - alpha, smallest_kept)
}

/// [`node_tail_mass`] parametrised by the gap 1 − α.
pub fn tail_mass_from_gap(c: f64, gap: f64, smallest_kept: f64) -> Result<f64> {
    if !(gap > 0.0) {
        return Err(Error::Divergence(format!("tail mass diverges for gap = {gap}")));
    }
    if smallest_kept < 0.0 {
        return Err(Error::Domain(format!("cutoff must be nonnegative, got {smallest_kept}")));
    }
    if smallest_kept == 0.0 {
        return Ok(0.0);
    }
    Ok(c * (gap * smallest_kept.ln()).exp() / gap)
}
