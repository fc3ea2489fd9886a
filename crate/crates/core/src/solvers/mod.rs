//! Solvers for the tiling problem.
//!
//! * [`solve_local`] - single forward pass, locally optimal per expression.
//! * [`solve_exhaustive`] - exact, per connected component.
//! * [`solve_random`] - uniform independent labels.
//! * [`solve_greedy`] - component split, exhaustive fallback below a size
//!   threshold, otherwise bucketed greedy search ordered by cumulative
//!   downstream cost.
//! * [`solve_btp_forest`] - linear-time exact solver for two-type
//!   copy/transpose programs whose matrix graph is a forest.

mod btp;
mod greedy;
pub(crate) mod search;

use std::time::Instant;

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{best_tuple, total_cost, CostBreakdown, TilingAssignment};
use crate::instance::{component_partition, InstanceError, TilingInstance};
use crate::model::{Program, Tile};

pub use btp::solve_btp_forest;
pub use greedy::solve_greedy;

/// Default bound on the labelings one exhaustive enumeration may visit.
pub const DEFAULT_STATE_CAP: u64 = 1 << 24;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("component {vertices:?} has {states} labelings, above the cap of {cap}")]
    ComponentTooLarge {
        vertices: Vec<String>,
        states: u128,
        cap: u64,
    },
    #[error("bucket {edges:?} has {states} labelings, above the cap of {cap}")]
    BucketTooLarge {
        edges: Vec<String>,
        states: u128,
        cap: u64,
    },
    #[error("not a copy/transpose program: {0}")]
    NotBtp(String),
    #[error("matrix graph has a cycle through {0:?}; input is not in single-assignment form")]
    BtpCycle(Vec<String>),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// How the exhaustive-fallback threshold measures a component.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaMetric {
    /// Number of labelings, `tau^|V_c|`.
    #[default]
    SearchSpace,
    /// Matrices plus expressions, `|V_c| + |E_c|`.
    Size,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreedyParams {
    pub alpha: u64,
    pub beta: usize,
    pub eta: f64,
    pub seed: u64,
    #[serde(default)]
    pub alpha_metric: AlphaMetric,
}

impl Default for GreedyParams {
    fn default() -> Self {
        Self {
            alpha: 10,
            beta: 3,
            eta: 0.5,
            seed: 0,
            alpha_metric: AlphaMetric::SearchSpace,
        }
    }
}

impl GreedyParams {
    pub fn validate(&self) -> Result<(), SolveError> {
        if self.alpha < 1 {
            return Err(SolveError::InvalidParams("alpha must be at least 1".into()));
        }
        if self.beta < 1 {
            return Err(SolveError::InvalidParams("beta must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(SolveError::InvalidParams(format!("eta must lie in [0, 1], got {}", self.eta)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub solver: String,
    pub assignment: TilingAssignment,
    pub cost: CostBreakdown,
    pub elapsed_s: f64,
    pub states_examined: u64,
    pub params: Option<GreedyParams>,
}

impl SolveReport {
    pub fn total(&self) -> f64 {
        self.cost.total
    }

    pub fn labels(&self) -> Vec<Tile> {
        self.assignment.to_total().expect("solver assignments are total")
    }

    pub fn to_record(&self, p: &Program) -> SolveRecord {
        SolveRecord {
            solver: self.solver.clone(),
            cost: self.cost.clone(),
            assignment: self.assignment.to_names(p),
            elapsed_s: self.elapsed_s,
            states: self.states_examined,
            params: self.params,
        }
    }
}

/// Wire form of a [`SolveReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveRecord {
    pub solver: String,
    pub cost: CostBreakdown,
    pub assignment: IndexMap<String, String>,
    pub elapsed_s: f64,
    pub states: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<GreedyParams>,
}

pub(crate) fn finish(
    solver: &str,
    inst: &TilingInstance,
    labels: Vec<Tile>,
    start: Instant,
    states_examined: u64,
    params: Option<GreedyParams>,
) -> SolveReport {
    let cost = total_cost(labels.as_slice(), inst).expect("solver produced a total assignment");
    SolveReport {
        solver: solver.to_string(),
        assignment: TilingAssignment::total(&labels),
        cost,
        elapsed_s: start.elapsed().as_secs_f64(),
        states_examined,
        params,
    }
}

/// One forward pass in dependency order, choosing for each expression the
/// tuple that best agrees with what is already tiled.
pub fn solve_local(inst: &TilingInstance) -> SolveReport {
    let start = Instant::now();
    let p = &inst.program;
    let mut labels: Vec<Option<Tile>> = vec![None; inst.vertex_count()];
    let mut states = 0u64;
    for e in inst.topological_order() {
        let expr = &p.expressions[e];
        let (best, _) = best_tuple(labels.as_slice(), expr);
        states += expr.feasible.len() as u64;
        for (v, &t) in expr.participants().zip(&expr.feasible[best]) {
            if labels[v].is_none() {
                labels[v] = Some(t);
            }
        }
    }
    let labels = labels.into_iter().map(|t| t.unwrap_or(Tile(0))).collect();
    finish("local", inst, labels, start, states, None)
}

/// Exact minimum, enumerating each connected component separately.
pub fn solve_exhaustive(inst: &TilingInstance, cap: u64) -> Result<SolveReport, SolveError> {
    let start = Instant::now();
    let mut labels: Vec<Option<Tile>> = vec![None; inst.vertex_count()];
    let mut states = 0u64;
    for (vertices, edges) in component_partition(inst) {
        states += exhaust_component(inst, &vertices, &edges, &mut labels, cap)?;
    }
    let labels = labels.into_iter().map(|t| t.expect("every vertex is in a component")).collect();
    Ok(finish("exhaustive", inst, labels, start, states, None))
}

pub(crate) fn exhaust_component(
    inst: &TilingInstance,
    vertices: &[usize],
    edges: &[usize],
    labels: &mut [Option<Tile>],
    cap: u64,
) -> Result<u64, SolveError> {
    let p = &inst.program;
    let best = search::minimize(p, edges, vertices, labels, cap).map_err(|states| {
        SolveError::ComponentTooLarge {
            vertices: vertices.iter().map(|&v| p.matrix_id(v).to_string()).collect(),
            states,
            cap,
        }
    })?;
    for (&v, &t) in vertices.iter().zip(&best.labels) {
        labels[v] = Some(t);
    }
    Ok(best.states)
}

/// Uniform independent label per matrix, reproducible from `seed`.
pub fn solve_random(inst: &TilingInstance, seed: u64) -> SolveReport {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tau = inst.tau() as u8;
    let labels = (0..inst.vertex_count()).map(|_| Tile(rng.gen_range(0..tau))).collect();
    finish("random", inst, labels, start, 1, None)
}
