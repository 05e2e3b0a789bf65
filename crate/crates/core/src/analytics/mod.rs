//! Closed forms: Gamma function, stable laws, cylinder-sum Laplace
//! transforms, the nested h recursion and the triviality dichotomy.

pub mod gamma;
mod laws;
mod nested;
mod recursions;
mod regime;

pub use gamma::{gamma_fn, ln_gamma};
pub use laws::{
    cylinder_sum_laplace, cylinder_sum_scale, h, saturated_sum_moment_lower_bound, stable_moment, StableLaw,
};
pub use nested::{nested_h_exponent, LeafWeights, NestedH};
pub use recursions::{a_base, a_lower_recursion, a_upper_recursion, b_sequence, bound_pairs, d_from_gaps, d_sequence};
pub use regime::{classify_schedule, Regime, RegimeReport, SeriesVerdict, DIVERGENCE_THRESHOLD, TAIL_TOLERANCE};
