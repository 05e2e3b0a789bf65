use super::laws::h;
use crate::env::Environment;
use crate::error::{Error, Result};

/// Weights placed on the level-n nodes before the h recursion runs upward.
#[derive(Debug, Clone, PartialEq)]
pub enum LeafWeights {
    /// λ at every leaf (plain clocks).
    Constant(f64),
    /// One weight per level-n node, flat-indexed (λ·W for adjusted clocks).
    PerNode(Vec<f64>),
}

/// Conditional Laplace exponents per unit local time at the level-k nodes,
/// with a plug-in half-width for the marks discarded by truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedH {
    pub level: usize,
    pub values: Vec<f64>,
    pub halfwidths: Vec<f64>,
}

/// Evaluates Σ_{x_{k+1}} h(γ_{k+1}, Σ_{x_{k+2}} h(…, Σ_{x_n} h(γ_n, w(x|_n))))
/// for every retained node x|_k, bottom-up in one pass.
///
/// The half-width adds, at each level, the node's tail mass times the mean
/// retained child exponent (h(γ, z) ≤ γz for discarded marks) and carries
/// child half-widths up with the factor γ (h is γ-Lipschitz in z).
pub fn nested_h_exponent(env: &Environment, level: usize, to_level: usize, leaf: &LeafWeights) -> Result<NestedH> {
    if level >= to_level || to_level > env.depth() {
        return Err(Error::LevelMismatch(format!(
            "nested h needs level < to_level <= {}, got {level} and {to_level}",
            env.depth()
        )));
    }
    let m = env.breadth();
    let mut z: Vec<f64> = match leaf {
        LeafWeights::Constant(lambda) => {
            if *lambda < 0.0 {
                return Err(Error::Domain(format!("lambda must be nonnegative, got {lambda}")));
            }
            vec![*lambda; env.level_len(to_level)]
        }
        LeafWeights::PerNode(w) => {
            if w.len() != env.level_len(to_level) {
                return Err(Error::LevelMismatch(format!(
                    "expected {} leaf weights, got {}",
                    env.level_len(to_level),
                    w.len()
                )));
            }
            w.clone()
        }
    };
    let mut hw = vec![0.0; z.len()];
    for j in (level + 1..=to_level).rev() {
        let marks = env.level_marks(j);
        let tails = env.level_tail(j);
        let mean_z = z.iter().sum::<f64>() / z.len() as f64;
        let parents = env.level_len(j - 1);
        let mut nz = Vec::with_capacity(parents);
        let mut nhw = Vec::with_capacity(parents);
        for p in 0..parents {
            let mut s = 0.0;
            let mut e = tails[p] * mean_z;
            for x in 0..m {
                let i = p * m + x;
                s += h(marks[i], z[i]);
                e += marks[i] * hw[i];
            }
            nz.push(s);
            nhw.push(e);
        }
        z = nz;
        hw = nhw;
    }
    Ok(NestedH {
        level,
        values: z,
        halfwidths: hw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{generate_environment, AlphaSchedule};
    use crate::seed::RandomSeedPlan;

    #[test]
    fn single_mark_one_level() {
        let s = AlphaSchedule::from_alphas(vec![0.5, 0.8]).unwrap();
        let env = Environment::with_single_level(s, vec![1.0]).unwrap();
        let r = nested_h_exponent(&env, 0, 1, &LeafWeights::Constant(1.0)).unwrap();
        assert_eq!(r.values, vec![0.5]);
    }

    #[test]
    fn zero_lambda_is_zero() {
        let s = AlphaSchedule::from_alphas(vec![0.4, 0.7, 0.9]).unwrap();
        let env = generate_environment(&s, 2, 5, RandomSeedPlan::new(4)).unwrap();
        let r = nested_h_exponent(&env, 0, 2, &LeafWeights::Constant(0.0)).unwrap();
        assert_eq!(r.values, vec![0.0]);
        let r = nested_h_exponent(&env, 1, 2, &LeafWeights::Constant(0.0)).unwrap();
        assert!(r.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn two_level_by_hand() {
        let s = AlphaSchedule::from_alphas(vec![0.4, 0.7, 0.9]).unwrap();
        let env = generate_environment(&s, 2, 3, RandomSeedPlan::new(8)).unwrap();
        let lam = 1.7;
        let r = nested_h_exponent(&env, 0, 2, &LeafWeights::Constant(lam)).unwrap();
        let mut want = 0.0;
        for x in 0..3 {
            let g1 = env.gamma(1, x);
            let inner: f64 = (0..3)
                .map(|y| {
                    let g2 = env.gamma(2, x * 3 + y);
                    lam * g2 / (1.0 + lam * g2)
                })
                .sum();
            want += inner * g1 / (1.0 + inner * g1);
        }
        assert!((r.values[0] - want).abs() < 1e-14);
        assert!(r.halfwidths[0] > 0.0);
    }
}
