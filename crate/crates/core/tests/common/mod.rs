//! Independent oracles. Nothing here calls into the solver or cost code.

#![allow(dead_code)]

use std::collections::BTreeSet;

use tilesolve::gen::SignedGraph;
use tilesolve::model::Program;

/// Weighted cost of a total labeling, straight from the definition.
pub fn labeling_cost(p: &Program, labels: &[u8]) -> f64 {
    p.expressions
        .iter()
        .map(|e| {
            let slots: Vec<usize> = std::iter::once(e.out).chain(e.inputs.iter().copied()).collect();
            let best = e
                .feasible
                .iter()
                .map(|tuple| slots.iter().zip(tuple).filter(|(&v, t)| labels[v] != t.0).count())
                .min()
                .expect("feasible sets are nonempty");
            e.weight * best as f64
        })
        .sum()
}

/// Minimum over all `tau^n` labelings in a single counting loop.
pub fn brute_force_cost(p: &Program) -> f64 {
    let n = p.matrices.len();
    let tau = p.alphabet.tau() as u8;
    let mut labels = vec![0u8; n];
    let mut best = labeling_cost(p, &labels);
    loop {
        let mut i = 0;
        while i < n && labels[i] + 1 == tau {
            labels[i] = 0;
            i += 1;
        }
        if i == n {
            return best;
        }
        labels[i] += 1;
        best = best.min(labeling_cost(p, &labels));
    }
}

/// Fewest unsatisfied edges over all two-colourings.
pub fn bsp_min(g: &SignedGraph) -> usize {
    let n = g.vertices().len();
    (0u32..1 << n)
        .map(|mask| {
            g.edges()
                .iter()
                .filter(|&&(a, b, s)| {
                    let same = (mask >> a) & 1 == (mask >> b) & 1;
                    same != (s == tilesolve::gen::Sign::Same)
                })
                .count()
        })
        .min()
        .unwrap()
}

/// Largest set of pairwise intersecting closed intervals, by subsets.
pub fn max_clique_of_intervals(intervals: &[[usize; 2]]) -> usize {
    let n = intervals.len();
    assert!(n <= 16);
    (0u32..1 << n)
        .filter(|mask| {
            let chosen: Vec<&[usize; 2]> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| &intervals[i]).collect();
            chosen
                .iter()
                .all(|a| chosen.iter().all(|b| a[0] <= b[1] && b[0] <= a[1]))
        })
        .map(|mask| mask.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// One representative per isomorphism class of simple graphs on `n`
/// vertices, as sorted 0-based edge lists.
pub fn graphs_up_to_isomorphism(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let perms = permutations(n);
    let mut seen = BTreeSet::new();
    let mut reps = Vec::new();
    for mask in 0u32..1 << pairs.len() {
        let edges: Vec<(usize, usize)> = (0..pairs.len()).filter(|i| mask >> i & 1 == 1).map(|i| pairs[i]).collect();
        let canonical = perms
            .iter()
            .map(|p| {
                let mut e: Vec<(usize, usize)> = edges
                    .iter()
                    .map(|&(a, b)| (p[a].min(p[b]), p[a].max(p[b])))
                    .collect();
                e.sort_unstable();
                e
            })
            .min()
            .unwrap();
        if seen.insert(canonical) {
            reps.push(edges);
        }
    }
    reps
}
