//! Instance generators: random ensembles, signed-graph encodings and the
//! fixed fixture suite.

mod fixtures;
mod random;
mod signed;

use thiserror::Error;

use crate::instance::InstanceError;
use crate::model::ModelError;

pub use fixtures::{fixture_programs, FIXTURE_NAMES};
pub use random::{
    gen_btp_forest, gen_random_chlp, gen_random_chlp_program, gen_random_program, RandomModelParams,
    RandomProgramParams,
};
pub use signed::{balanced_signed_graph, gen_btp_from_signed_graph, random_signed_graph, Sign, SignedGraph};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    Params(String),
    #[error("invalid signed graph: {0}")]
    Graph(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}
