//! Step-path algebra and simulation of the clocks Ξ_k, θ_k^n, θ̃_k^n and
//! their per-state decompositions.

mod decompose;
mod dynamics;
mod path;
mod wfield;

pub use decompose::decompose_by_state;
pub use dynamics::{
    simulate_theta, simulate_theta_adjusted, simulate_xi, Dynamics, EventRecord, DEFAULT_EVENT_BUDGET,
};
pub use path::PiecewisePath;
pub use wfield::{composed_root, compose_up, stable_leaves, w_values, WField};
