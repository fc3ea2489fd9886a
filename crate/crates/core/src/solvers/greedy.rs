//! Bucketed greedy solver.
//!
//! Each component is solved exhaustively when small enough. Otherwise the
//! open expressions are ranked by `gamma`, the weighted best-completion cost
//! of an expression given the tiles fixed so far plus the `gamma` of every
//! open expression reading its output. The top of the ranking forms a
//! bucket whose untiled matrices are chosen jointly by enumeration, then the
//! bucket is closed and the ranking recomputed.

use std::time::Instant;

use crate::cost::{best_tuple, COST_EPS};
use crate::instance::{component_partition, TilingInstance};
use crate::model::Tile;

use super::search::minimize;
use super::{exhaust_component, finish, AlphaMetric, GreedyParams, SolveError, SolveReport};

pub fn solve_greedy(inst: &TilingInstance, params: &GreedyParams, cap: u64) -> Result<SolveReport, SolveError> {
    params.validate()?;
    let start = Instant::now();
    let mut labels: Vec<Option<Tile>> = vec![None; inst.vertex_count()];
    let mut states = 0u64;
    let mut scratch = Scratch::new(inst.edge_count());
    for (vertices, edges) in component_partition(inst) {
        let small = match params.alpha_metric {
            AlphaMetric::SearchSpace => inst.search_space(vertices.len()) <= params.alpha as u128,
            AlphaMetric::Size => (vertices.len() + edges.len()) as u64 <= params.alpha,
        };
        if small {
            states += exhaust_component(inst, &vertices, &edges, &mut labels, cap)?;
        } else {
            states += inner_greedy(inst, &vertices, &edges, params, cap, &mut labels, &mut scratch)?;
        }
    }
    let labels = labels.into_iter().map(|t| t.expect("greedy tiles every vertex")).collect();
    Ok(finish("greedy", inst, labels, start, states, Some(*params)))
}

struct Scratch {
    open: Vec<bool>,
    gamma: Vec<f64>,
}

impl Scratch {
    fn new(m: usize) -> Self {
        Self {
            open: vec![false; m],
            gamma: vec![0.0; m],
        }
    }
}

fn inner_greedy(
    inst: &TilingInstance,
    vertices: &[usize],
    edges: &[usize],
    params: &GreedyParams,
    cap: u64,
    labels: &mut [Option<Tile>],
    scratch: &mut Scratch,
) -> Result<u64, SolveError> {
    let p = &inst.program;
    let mut states = 0u64;
    let mut untiled = vertices.iter().filter(|&&v| labels[v].is_none()).count();

    // Covers always sit in deeper layers, so a deepest-first sweep sees
    // every cover's gamma before the expression itself.
    let mut sweep = edges.to_vec();
    sweep.sort_by_key(|&e| std::cmp::Reverse(inst.layer_of[e]));

    let mut open: Vec<usize> = edges.to_vec();
    for &e in &open {
        scratch.open[e] = true;
    }

    while untiled > 0 {
        if open.is_empty() {
            for &v in vertices {
                labels[v].get_or_insert(Tile(0));
            }
            break;
        }

        for &e in &sweep {
            if !scratch.open[e] {
                continue;
            }
            let expr = &p.expressions[e];
            let own = expr.weight * best_tuple(&*labels, expr).1 as f64;
            let downstream: f64 = inst.expr_succ[e]
                .iter()
                .filter(|&&f| scratch.open[f])
                .map(|&f| scratch.gamma[f])
                .sum();
            scratch.gamma[e] = own + downstream;
        }

        let gamma = &scratch.gamma;
        let mut ranked = open.clone();
        // Stable: equal gamma keeps program order.
        ranked.sort_by(|&a, &b| gamma[b].total_cmp(&gamma[a]));
        let lead = gamma[ranked[0]];
        let take = if lead <= COST_EPS {
            params.beta.min(ranked.len())
        } else {
            ranked
                .iter()
                .take(params.beta)
                .take_while(|&&e| gamma[e] >= params.eta * lead - COST_EPS)
                .count()
        };
        let bucket = &ranked[..take];

        let mut free: Vec<usize> = bucket
            .iter()
            .flat_map(|&e| p.expressions[e].participants())
            .filter(|&v| labels[v].is_none())
            .collect();
        free.sort_unstable();
        free.dedup();

        if !free.is_empty() {
            let best = minimize(p, bucket, &free, labels, cap).map_err(|space| SolveError::BucketTooLarge {
                edges: bucket.iter().map(|&e| p.expressions[e].id.clone()).collect(),
                states: space,
                cap,
            })?;
            for (&v, &t) in free.iter().zip(&best.labels) {
                labels[v] = Some(t);
            }
            states += best.states;
            untiled -= free.len();
        }

        for &e in bucket {
            scratch.open[e] = false;
        }
        open.retain(|&e| scratch.open[e]);
    }
    for &e in &open {
        scratch.open[e] = false;
    }
    Ok(states)
}

