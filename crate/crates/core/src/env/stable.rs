use std::f64::consts::PI;

use rand::Rng;
use rand_distr::Exp1;

/// One draw of the positive α-stable law with E e^{−λX} = e^{−λ^α}.
/// Kanter's representation; α = 1 gives the constant 1.
pub fn sample_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    sample_stable_gap(1.0 - alpha, rng)
}

/// Same law parametrised by g = 1 − α, which stays accurate when α rounds
/// to 1 in double precision.
pub fn sample_stable_gap<R: Rng + ?Sized>(gap: f64, rng: &mut R) -> f64 {
    if gap <= 0.0 {
        return 1.0;
    }
    let alpha = 1.0 - gap;
    let u = loop {
        let v: f64 = rng.random();
        if v > 0.0 {
            break v * PI;
        }
    };
    let e: f64 = rng.sample(Exp1);
    let gu = gap * u;
    let au = u - gu;
    // X = sin(αU) sin(U)^{−1/α} (sin(gU)/E)^{g/α}
    let log_x = au.sin().ln() - u.sin().ln() / alpha + (gap / alpha) * (gu.sin().ln() - e.ln());
    log_x.exp()
}
