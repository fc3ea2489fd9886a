//! Tiling selection for straight-line matrix programs.
//!
//! A [`model::Program`] is a sequence of expressions over matrices; each
//! expression lists the tiling tuples its implementation accepts. A solver
//! picks one tiling per matrix, minimizing the weighted number of positions
//! where the chosen tilings disagree with the closest accepted tuple.

pub mod bench;
pub mod cost;
pub mod gen;
pub mod instance;
pub mod memory;
pub mod model;
pub mod solvers;

pub use cost::{total_cost, CostBreakdown, TilingAssignment};
pub use instance::{build_instance, TilingInstance};
pub use model::{Program, Tile, TilingAlphabet};
pub use solvers::{GreedyParams, SolveReport};
