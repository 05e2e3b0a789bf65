//! Gamma function via the Lanczos approximation (g = 7, nine terms) with
//! the reflection formula below 1/2.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

// 0.5 * ln(2 pi)
const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

fn lanczos_sum(z: f64) -> f64 {
    let mut a = LANCZOS_COEF[0];
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    a
}

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Γ(x). Fails with [`Error::Pole`] at zero and the negative integers.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Domain("gamma of NaN".into()));
    }
    if is_pole(x) {
        return Err(Error::Pole(x));
    }
    Ok(gamma_unchecked(x))
}

/// Γ(x) for arguments known to be away from the poles.
pub fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_unchecked(1.0 - x));
    }
    if x > 171.7 {
        return f64::INFINITY;
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z)
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("ln_gamma needs x > 0, got {x}")));
    }
    if x < 0.5 {
        // ln Γ(x) = ln π − ln sin(πx) − ln Γ(1−x)
        return Ok(PI.ln() - (PI * x).sin().ln() - ln_gamma(1.0 - x)?);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(HALF_LN_TWO_PI + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln())
}

/// Γ(1 + x) for small nonnegative x, accurate even when 1 + x rounds to 1.
pub fn gamma_one_plus(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        // Γ(1+x) = 1 − γx + O(x²)
        1.0 - 0.577_215_664_901_532_9 * x
    } else {
        gamma_unchecked(1.0 + x)
    }
}
