//! Random environment: exponent schedules, ordered Poisson marks on a
//! truncated tree, tail-mass bookkeeping and the stable/W samplers.

mod io;
mod marks;
mod schedule;
mod stable;
mod tree;

pub use io::{read_environment, write_environment, SCHEMA_VERSION};
pub use marks::{marks_from_arrivals, node_tail_mass, ordered_ppp_marks, tail_mass_from_gap};
pub use schedule::{constant_c, AlphaSchedule, GapRule};
pub use stable::{sample_stable, sample_stable_gap};
pub use tree::{
    estimate_w, estimate_w_level, generate_environment, Environment, NodePath, DEFAULT_NODE_BUDGET,
};
