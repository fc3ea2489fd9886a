//! Exhaustive minimization over the labelings of a vertex subset.
//!
//! Labelings are visited in lexicographic order (first free vertex most
//! significant) with an odometer; only edges touching a changed digit are
//! re-evaluated. The first minimizer in that order is kept.

use crate::cost::{edge_cost, strictly_less};
use crate::instance::search_space;
use crate::model::{Program, Tile};

#[derive(Clone, Debug)]
pub(crate) struct Minimum {
    /// Chosen label of each free vertex, aligned with the `free` slice.
    pub labels: Vec<Tile>,
    pub cost: f64,
    pub states: u64,
}

/// Minimizes the summed weighted cost of `edges` over all labelings of
/// `free`, holding `base` fixed elsewhere. Vertices of `edges` outside `free`
/// must be assigned in `base`.
///
/// Fails with the search-space size when it exceeds `cap`.
pub(crate) fn minimize(
    program: &Program,
    edges: &[usize],
    free: &[usize],
    base: &[Option<Tile>],
    cap: u64,
) -> Result<Minimum, u128> {
    let tau = program.tau();
    let space = search_space(tau, free.len());
    if space > cap as u128 {
        return Err(space);
    }
    let states = space as u64;

    let mut labels = base.to_vec();
    for &v in free {
        labels[v] = Some(Tile(0));
    }
    let mut slot = vec![usize::MAX; labels.len()];
    for (i, &v) in free.iter().enumerate() {
        slot[v] = i;
    }
    let mut touched: Vec<Vec<usize>> = vec![Vec::new(); free.len()];
    for (j, &e) in edges.iter().enumerate() {
        for v in program.expressions[e].participants() {
            let s = slot[v];
            if s != usize::MAX && touched[s].last() != Some(&j) {
                touched[s].push(j);
            }
        }
    }

    let mut costs: Vec<f64> = edges
        .iter()
        .map(|&e| edge_cost(labels.as_slice(), &program.expressions[e]).1)
        .collect();
    let mut total: f64 = costs.iter().sum();
    let mut digits = vec![0u8; free.len()];
    let mut best = Minimum {
        labels: vec![Tile(0); free.len()],
        cost: total,
        states,
    };
    let mut stamp = vec![0u64; edges.len()];
    let top = (tau - 1) as u8;

    for step in 1..states {
        // Advance the odometer; every digit from `k` on changes.
        let mut k = free.len() - 1;
        while digits[k] == top {
            digits[k] = 0;
            k -= 1;
        }
        digits[k] += 1;
        for i in k..free.len() {
            labels[free[i]] = Some(Tile(digits[i]));
        }
        for touched_edges in &touched[k..] {
            for &j in touched_edges {
                if stamp[j] != step {
                    stamp[j] = step;
                    let c = edge_cost(labels.as_slice(), &program.expressions[edges[j]]).1;
                    total += c - costs[j];
                    costs[j] = c;
                }
            }
        }
        if strictly_less(total, best.cost) {
            // Resum to keep float drift out of the reported value.
            total = costs.iter().sum();
            if strictly_less(total, best.cost) {
                best.cost = total;
                best.labels = digits.iter().map(|&d| Tile(d)).collect();
            }
        }
    }
    Ok(best)
}
