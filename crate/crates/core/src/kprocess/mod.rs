//! K-process trajectories, local times, cycles and occupation measures.

mod measure;
mod state;
mod trajectory;

pub use measure::{
    cycle_stats, local_time, occupation_fraction, occupation_report, pi_formula, top_cylinders, w_control_diagnostic,
    CycleStats,
};
pub use state::{rho_distance, Coord, State};
pub use trajectory::{Segment, Span, Trajectory};

use crate::clocks::{Dynamics, PiecewisePath};
use crate::env::Environment;
use crate::error::Result;

/// Trajectory of X_n on [0, horizon] together with the realized clocks
/// Ξ_1, …, Ξ_n (each on the window generated for it).
pub fn simulate_k_process(
    env: &Environment,
    depth: usize,
    horizon: f64,
    replicate: u64,
) -> Result<(Trajectory, Vec<PiecewisePath>)> {
    let mut dynamics = Dynamics::new(env, depth, replicate)?;
    let traj = dynamics.trajectory(depth, horizon)?;
    let clocks = (1..=depth)
        .map(|k| dynamics.xi_path(k, false))
        .collect::<Result<Vec<_>>>()?;
    Ok((traj, clocks))
}
