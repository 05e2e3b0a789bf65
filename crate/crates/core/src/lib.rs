//! Simulation and closed-form oracles for GREM-like K processes on trees of
//! finite depth.
//!
//! * [`env`]: exponent schedules, the hierarchical Poisson environment and
//!   stable samplers.
//! * [`analytics`]: Gamma function, stable moments, cylinder-sum Laplace
//!   transforms, the nested h recursion and the triviality recursions.
//! * [`clocks`]: step-function paths, clock simulation and composition.
//! * [`kprocess`]: K-process trajectories, local times, cycles, occupation.
//! * [`verify`]: Monte Carlo estimators and oracle comparisons.

pub mod analytics;
pub mod clocks;
pub mod env;
pub mod error;
pub mod kprocess;
pub mod seed;
pub mod verify;

pub use error::{Error, Result};
