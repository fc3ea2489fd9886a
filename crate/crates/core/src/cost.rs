//! Retiling cost: positional Hamming mismatch against the best feasible
//! tuple of each expression, scaled by the expression weight.
//!
//! Partial assignments count mismatches on assigned positions only, which is
//! the cost of the best completion when the expression is considered alone.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::TilingInstance;
use crate::model::{Expression, Program, Tile};

/// Absolute tolerance for comparing non-integer costs.
pub const COST_EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CostError {
    #[error("tuple has {found} positions but expression `{expr}` has arity {expected}")]
    Arity {
        expr: String,
        expected: usize,
        found: usize,
    },
    #[error("matrix `{0}` is unassigned")]
    Unassigned(String),
    #[error("assignment covers {found} matrices, instance has {expected}")]
    Length { expected: usize, found: usize },
}

/// Read access to a (possibly partial) labeling indexed by matrix.
pub trait Labels {
    fn label(&self, v: usize) -> Option<Tile>;
}

impl Labels for [Tile] {
    #[inline]
    fn label(&self, v: usize) -> Option<Tile> {
        Some(self[v])
    }
}

impl Labels for [Option<Tile>] {
    #[inline]
    fn label(&self, v: usize) -> Option<Tile> {
        self[v]
    }
}

impl Labels for Vec<Tile> {
    #[inline]
    fn label(&self, v: usize) -> Option<Tile> {
        Some(self[v])
    }
}

impl Labels for Vec<Option<Tile>> {
    #[inline]
    fn label(&self, v: usize) -> Option<Tile> {
        self[v]
    }
}

/// A total or partial map from matrices to tiling types.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TilingAssignment {
    labels: Vec<Option<Tile>>,
}

impl TilingAssignment {
    pub fn empty(n: usize) -> Self {
        Self {
            labels: vec![None; n],
        }
    }

    pub fn total(labels: &[Tile]) -> Self {
        Self {
            labels: labels.iter().copied().map(Some).collect(),
        }
    }

    pub fn from_partial(labels: Vec<Option<Tile>>) -> Self {
        Self { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, v: usize) -> Option<Tile> {
        self.labels[v]
    }

    pub fn set(&mut self, v: usize, t: Tile) {
        self.labels[v] = Some(t);
    }

    pub fn is_total(&self) -> bool {
        self.labels.iter().all(Option::is_some)
    }

    pub fn as_slice(&self) -> &[Option<Tile>] {
        &self.labels
    }

    /// The labels of a total assignment.
    pub fn to_total(&self) -> Option<Vec<Tile>> {
        self.labels.iter().copied().collect()
    }

    /// Assigned matrices by id, in declaration order.
    pub fn to_names(&self, p: &Program) -> IndexMap<String, String> {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(v, t)| {
                t.map(|t| (p.matrix_id(v).to_string(), p.alphabet.name(t).to_string()))
            })
            .collect()
    }
}

impl Labels for TilingAssignment {
    #[inline]
    fn label(&self, v: usize) -> Option<Tile> {
        self.labels[v]
    }
}

/// Mismatched positions of `tuple` against the assigned participants of
/// `edge`. Unassigned positions count zero.
pub fn hamming_mismatch<L: Labels + ?Sized>(
    labels: &L,
    edge: &Expression,
    tuple: &[Tile],
) -> Result<usize, CostError> {
    if tuple.len() != edge.arity() {
        return Err(CostError::Arity {
            expr: edge.id.clone(),
            expected: edge.arity(),
            found: tuple.len(),
        });
    }
    Ok(mismatch_unchecked(labels, edge, tuple))
}

#[inline]
pub(crate) fn mismatch_unchecked<L: Labels + ?Sized>(labels: &L, edge: &Expression, tuple: &[Tile]) -> usize {
    edge.participants()
        .zip(tuple)
        .filter(|&(v, &t)| matches!(labels.label(v), Some(x) if x != t))
        .count()
}

/// Best feasible tuple (lowest index among ties) and its mismatch count.
#[inline]
pub fn best_tuple<L: Labels + ?Sized>(labels: &L, edge: &Expression) -> (usize, usize) {
    let mut best = (0, usize::MAX);
    for (i, tuple) in edge.feasible.iter().enumerate() {
        let d = mismatch_unchecked(labels, edge, tuple);
        if d < best.1 {
            best = (i, d);
            if d == 0 {
                break;
            }
        }
    }
    best
}

/// `(best tuple index, weight × min mismatch)`.
pub fn edge_cost<L: Labels + ?Sized>(labels: &L, edge: &Expression) -> (usize, f64) {
    let (i, d) = best_tuple(labels, edge);
    (i, edge.weight * d as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeCost {
    pub tuple: usize,
    pub mismatch: usize,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub total: f64,
    #[serde(rename = "edges")]
    pub per_edge: IndexMap<String, EdgeCost>,
}

/// Total weighted cost of a total assignment.
pub fn total_cost<L: Labels + ?Sized>(labels: &L, inst: &TilingInstance) -> Result<CostBreakdown, CostError> {
    let p = &inst.program;
    for v in 0..inst.vertex_count() {
        if labels.label(v).is_none() {
            return Err(CostError::Unassigned(p.matrix_id(v).to_string()));
        }
    }
    let mut total = 0.0;
    let mut per_edge = IndexMap::with_capacity(p.expressions.len());
    for e in &p.expressions {
        let (tuple, mismatch) = best_tuple(labels, e);
        let cost = e.weight * mismatch as f64;
        total += cost;
        per_edge.insert(e.id.clone(), EdgeCost { tuple, mismatch, cost });
    }
    Ok(CostBreakdown { total, per_edge })
}

/// Checks that an assignment has one slot per matrix of the instance.
pub fn check_length(assignment: &TilingAssignment, inst: &TilingInstance) -> Result<(), CostError> {
    if assignment.len() != inst.vertex_count() {
        return Err(CostError::Length {
            expected: inst.vertex_count(),
            found: assignment.len(),
        });
    }
    Ok(())
}

/// `a < b` with tolerance.
#[inline]
pub fn strictly_less(a: f64, b: f64) -> bool {
    a < b - COST_EPS
}

/// `a == b` with tolerance.
#[inline]
pub fn cost_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= COST_EPS
}
