//! Exact linear-time solver for two-type programs made only of copies
//! (`A = B`, same tiling) and transposes (`A = B^T`, different tilings).
//!
//! In single-assignment form the matrix graph of such a program is a
//! forest, so fixing the root of each tree and propagating parity along the
//! edges satisfies every expression.

use std::collections::VecDeque;
use std::time::Instant;

use crate::instance::{build_instance, UnionFind};
use crate::model::{Program, Tile};

use super::{finish, SolveError, SolveReport};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Relation {
    Same,
    Flip,
}

fn classify(feasible: &[Vec<Tile>]) -> Option<Relation> {
    let mut pairs: Vec<(u8, u8)> = feasible.iter().map(|t| (t[0].0, t[1].0)).collect();
    pairs.sort_unstable();
    pairs.dedup();
    match pairs.as_slice() {
        [(0, 0), (1, 1)] => Some(Relation::Same),
        [(0, 1), (1, 0)] => Some(Relation::Flip),
        _ => None,
    }
}

pub fn solve_btp_forest(p: &Program) -> Result<SolveReport, SolveError> {
    let start = Instant::now();
    if p.tau() != 2 {
        return Err(SolveError::NotBtp(format!("needs exactly two tiling types, found {}", p.tau())));
    }
    let n = p.matrices.len();
    let mut adjacency: Vec<Vec<(usize, Relation)>> = vec![Vec::new(); n];
    let mut uf = UnionFind::new(n);
    for e in &p.expressions {
        if e.arity() != 2 {
            return Err(SolveError::NotBtp(format!(
                "expression `{}` has arity {}, expected 2",
                e.id,
                e.arity()
            )));
        }
        let rel = classify(&e.feasible).ok_or_else(|| {
            SolveError::NotBtp(format!("expression `{}` is neither a copy nor a transpose", e.id))
        })?;
        let (a, b) = (e.out, e.inputs[0]);
        if !uf.union(a, b) {
            return Err(SolveError::BtpCycle(vec![
                p.matrix_id(a).to_string(),
                p.matrix_id(b).to_string(),
            ]));
        }
        adjacency[a].push((b, rel));
        adjacency[b].push((a, rel));
    }
    let inst = build_instance(p)?;

    // Roots are the lexicographically smallest id of each tree.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| p.matrix_id(a).cmp(p.matrix_id(b)));
    let mut labels: Vec<Option<Tile>> = vec![None; n];
    let mut work = 0u64;
    let mut queue = VecDeque::new();
    for root in order {
        if labels[root].is_some() {
            continue;
        }
        labels[root] = Some(Tile(0));
        work += 1;
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            let t = labels[v].unwrap();
            for &(w, rel) in &adjacency[v] {
                if labels[w].is_none() {
                    labels[w] = Some(match rel {
                        Relation::Same => t,
                        Relation::Flip => Tile(1 - t.0),
                    });
                    work += 2;
                    queue.push_back(w);
                }
            }
        }
    }
    let labels = labels.into_iter().map(Option::unwrap).collect();
    Ok(finish("btp-forest", &inst, labels, start, work, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ProgramBuilder, TilingAlphabet};

    fn copy() -> Vec<Vec<Tile>> {
        vec![vec![Tile(0), Tile(0)], vec![Tile(1), Tile(1)]]
    }

    fn transpose() -> Vec<Vec<Tile>> {
        vec![vec![Tile(0), Tile(1)], vec![Tile(1), Tile(0)]]
    }

    fn builder() -> ProgramBuilder {
        ProgramBuilder::new(TilingAlphabet::new(["row", "col"]).unwrap())
    }

    #[test]
    fn parity_propagation() {
        let mut b = builder();
        b.matrix("A");
        b.expression("e1", "transpose", "B", &["A"], 1.0, transpose())
            .expression("e2", "copy", "C", &["B"], 1.0, copy())
            .expression("e3", "transpose", "D", &["C"], 1.0, transpose());
        let r = solve_btp_forest(&b.build().unwrap()).unwrap();
        assert_eq!(r.labels(), vec![Tile(0), Tile(1), Tile(1), Tile(0)]);
        assert_eq!(r.total(), 0.0);
        assert_eq!(r.states_examined, 4 + 3);
    }

    #[test]
    fn single_copy() {
        let mut b = builder();
        b.expression("e", "copy", "A", &["B"], 1.0, copy());
        let r = solve_btp_forest(&b.build().unwrap()).unwrap();
        assert_eq!(r.labels()[0], r.labels()[1]);
        assert_eq!(r.total(), 0.0);
    }

    #[test]
    fn rejects_other_programs() {
        let mut b = ProgramBuilder::new(TilingAlphabet::numbered(3).unwrap());
        b.expression("e", "copy", "A", &["B"], 1.0, copy());
        assert!(matches!(solve_btp_forest(&b.build().unwrap()), Err(SolveError::NotBtp(_))));

        let mut b = builder();
        b.expression("e", "sum", "A", &["B", "C"], 1.0, vec![vec![Tile(0); 3]]);
        assert!(matches!(solve_btp_forest(&b.build().unwrap()), Err(SolveError::NotBtp(_))));

        let mut b = builder();
        b.expression("e", "odd", "A", &["B"], 1.0, vec![vec![Tile(0), Tile(0)]]);
        assert!(matches!(solve_btp_forest(&b.build().unwrap()), Err(SolveError::NotBtp(_))));

        // B = A and C = B and A' = C written onto A closes a cycle.
        let mut b = builder();
        b.expression("e1", "copy", "B", &["A"], 1.0, copy())
            .expression("e2", "copy", "C", &["B"], 1.0, copy())
            .expression("e3", "transpose", "A", &["C"], 1.0, transpose());
        assert!(matches!(solve_btp_forest(&b.build().unwrap()), Err(SolveError::BtpCycle(_))));
    }
}
