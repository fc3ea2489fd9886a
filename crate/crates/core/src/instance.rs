//! The tiling instance: expression hypergraph plus computation DAG.
//!
//! The DAG has an edge `M -> N` whenever an expression writes `N` and reads
//! `M`. Expressions inherit a partial order from it: `e'` precedes `e` when
//! `e` (transitively) consumes the output of `e'`. Layers are the level sets
//! of that order, computed as longest-path depth.

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

use crate::model::{Program, Tile};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("matrix `{matrix}` is written by both `{first}` and `{second}`; rename to single-assignment form first")]
    NotSingleAssignment {
        matrix: String,
        first: String,
        second: String,
    },
    #[error("expression `{expr}` reads its own output `{matrix}`")]
    SelfLoop { expr: String, matrix: String },
    #[error("dataflow cycle through matrices {}", .0.join(" -> "))]
    Cycle(Vec<String>),
}

#[derive(Clone, Debug)]
pub struct TilingInstance {
    pub program: Program,
    /// `dag_succ[M]` holds every `N` with an edge `M -> N`, ascending.
    pub dag_succ: Vec<Vec<usize>>,
    /// Expression writing each matrix, if any.
    pub producer: Vec<Option<usize>>,
    /// Direct expression dependencies: `expr_pred[e]` are the producers of
    /// `e`'s inputs.
    pub expr_pred: Vec<Vec<usize>>,
    /// Covers: expressions reading the output of `e`.
    pub expr_succ: Vec<Vec<usize>>,
    /// Layer index (0-based) of every expression.
    pub layer_of: Vec<usize>,
    pub layers: Vec<Vec<usize>>,
    /// Expressions each matrix participates in, ascending and deduplicated.
    pub incidence: Vec<Vec<usize>>,
}

impl TilingInstance {
    pub fn vertex_count(&self) -> usize {
        self.program.matrices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.program.expressions.len()
    }

    pub fn tau(&self) -> usize {
        self.program.tau()
    }

    /// Whether `a` strictly precedes `b` in the expression order.
    pub fn precedes(&self, a: usize, b: usize) -> bool {
        if a == b {
            return false;
        }
        let mut seen = vec![false; self.edge_count()];
        let mut stack = vec![a];
        while let Some(e) = stack.pop() {
            for &f in &self.expr_succ[e] {
                if f == b {
                    return true;
                }
                if !seen[f] {
                    seen[f] = true;
                    stack.push(f);
                }
            }
        }
        false
    }

    /// Topological order of expressions, program order among ready ones.
    pub fn topological_order(&self) -> Vec<usize> {
        use std::cmp::Reverse;
        use std::collections::BinaryHeap;
        let m = self.edge_count();
        let mut indeg: Vec<usize> = self.expr_pred.iter().map(Vec::len).collect();
        let mut ready: BinaryHeap<Reverse<usize>> =
            (0..m).filter(|&e| indeg[e] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(m);
        while let Some(Reverse(e)) = ready.pop() {
            order.push(e);
            for &f in &self.expr_succ[e] {
                indeg[f] -= 1;
                if indeg[f] == 0 {
                    ready.push(Reverse(f));
                }
            }
        }
        order
    }

    /// Number of labelings of `vertices` vertices, saturating.
    pub fn search_space(&self, vertices: usize) -> u128 {
        search_space(self.tau(), vertices)
    }

    pub fn all_tiles(&self) -> impl Iterator<Item = Tile> {
        self.program.alphabet.tiles()
    }
}

pub(crate) fn search_space(tau: usize, vertices: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..vertices {
        acc = acc.saturating_mul(tau as u128);
    }
    acc
}

/// Builds the DAG, the expression order and its layers.
///
/// Programs flagged as antichains (`meta.dependencies = "none"`) skip the
/// dataflow entirely: every expression lands in the first layer.
pub fn build_instance(p: &Program) -> Result<TilingInstance, InstanceError> {
    let n = p.matrices.len();
    let m = p.expressions.len();
    let mut incidence = vec![Vec::new(); n];
    for (ei, e) in p.expressions.iter().enumerate() {
        for v in e.participants() {
            if incidence[v].last() != Some(&ei) {
                incidence[v].push(ei);
            }
        }
    }

    if p.is_antichain() {
        return Ok(TilingInstance {
            program: p.clone(),
            dag_succ: vec![Vec::new(); n],
            producer: vec![None; n],
            expr_pred: vec![Vec::new(); m],
            expr_succ: vec![Vec::new(); m],
            layer_of: vec![0; m],
            layers: if m == 0 { Vec::new() } else { vec![(0..m).collect()] },
            incidence,
        });
    }

    let mut producer: Vec<Option<usize>> = vec![None; n];
    for (ei, e) in p.expressions.iter().enumerate() {
        if let Some(prev) = producer[e.out] {
            return Err(InstanceError::NotSingleAssignment {
                matrix: p.matrix_id(e.out).to_string(),
                first: p.expressions[prev].id.clone(),
                second: e.id.clone(),
            });
        }
        if e.inputs.contains(&e.out) {
            return Err(InstanceError::SelfLoop {
                expr: e.id.clone(),
                matrix: p.matrix_id(e.out).to_string(),
            });
        }
        producer[e.out] = Some(ei);
    }

    let mut dag: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for e in &p.expressions {
        for &v in &e.inputs {
            dag[v].insert(e.out);
        }
    }
    let dag_succ: Vec<Vec<usize>> = dag.into_iter().map(|s| s.into_iter().collect()).collect();
    if let Some(cycle) = find_cycle(&dag_succ) {
        return Err(InstanceError::Cycle(
            cycle.into_iter().map(|v| p.matrix_id(v).to_string()).collect(),
        ));
    }

    let mut expr_pred = vec![Vec::new(); m];
    let mut expr_succ = vec![Vec::new(); m];
    for (ei, e) in p.expressions.iter().enumerate() {
        let preds: BTreeSet<usize> = e.inputs.iter().filter_map(|&v| producer[v]).collect();
        for &f in &preds {
            expr_succ[f].push(ei);
        }
        expr_pred[ei] = preds.into_iter().collect();
    }
    for s in &mut expr_succ {
        s.sort_unstable();
    }

    // Longest-path depth via Kahn's algorithm.
    let mut indeg: Vec<usize> = expr_pred.iter().map(Vec::len).collect();
    let mut queue: VecDeque<usize> = (0..m).filter(|&e| indeg[e] == 0).collect();
    let mut layer_of = vec![0usize; m];
    while let Some(e) = queue.pop_front() {
        for &f in &expr_succ[e] {
            layer_of[f] = layer_of[f].max(layer_of[e] + 1);
            indeg[f] -= 1;
            if indeg[f] == 0 {
                queue.push_back(f);
            }
        }
    }
    let depth = layer_of.iter().map(|&l| l + 1).max().unwrap_or(0);
    let mut layers = vec![Vec::new(); depth];
    for (e, &l) in layer_of.iter().enumerate() {
        layers[l].push(e);
    }

    Ok(TilingInstance {
        program: p.clone(),
        dag_succ,
        producer,
        expr_pred,
        expr_succ,
        layer_of,
        layers,
        incidence,
    })
}

fn find_cycle(succ: &[Vec<usize>]) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let n = succ.len();
    let mut mark = vec![Mark::New; n];
    for root in 0..n {
        if mark[root] != Mark::New {
            continue;
        }
        // Iterative DFS; the stack is the active path with edge cursors.
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        mark[root] = Mark::Active;
        while let Some(&mut (v, ref mut cursor)) = stack.last_mut() {
            if *cursor < succ[v].len() {
                let w = succ[v][*cursor];
                *cursor += 1;
                match mark[w] {
                    Mark::New => {
                        mark[w] = Mark::Active;
                        stack.push((w, 0));
                    }
                    Mark::Active => {
                        let start = stack.iter().position(|&(x, _)| x == w).unwrap();
                        let mut cycle: Vec<usize> = stack[start..].iter().map(|&(x, _)| x).collect();
                        cycle.push(w);
                        return Some(cycle);
                    }
                    Mark::Done => {}
                }
            } else {
                mark[v] = Mark::Done;
                stack.pop();
            }
        }
    }
    None
}

/// A connected piece of an instance, with maps back to the parent.
#[derive(Clone, Debug)]
pub struct Component {
    pub instance: TilingInstance,
    /// Parent matrix index of each local matrix.
    pub vertices: Vec<usize>,
    /// Parent expression index of each local expression.
    pub edges: Vec<usize>,
}

/// Vertex and edge index sets of each connected component, ordered by
/// smallest vertex. Isolated matrices form singleton components.
pub fn component_partition(inst: &TilingInstance) -> Vec<(Vec<usize>, Vec<usize>)> {
    let n = inst.vertex_count();
    let mut uf = UnionFind::new(n);
    for e in &inst.program.expressions {
        for v in e.inputs.iter().copied() {
            uf.union(e.out, v);
        }
    }
    let mut slot = vec![usize::MAX; n];
    let mut parts: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for v in 0..n {
        let r = uf.find(v);
        if slot[r] == usize::MAX {
            slot[r] = parts.len();
            parts.push((Vec::new(), Vec::new()));
        }
        parts[slot[r]].0.push(v);
    }
    for (ei, e) in inst.program.expressions.iter().enumerate() {
        parts[slot[uf.find(e.out)]].1.push(ei);
    }
    parts
}

/// Splits the instance into independent sub-instances.
pub fn connected_components(inst: &TilingInstance) -> Vec<Component> {
    let p = &inst.program;
    component_partition(inst)
        .into_iter()
        .map(|(vertices, edges)| {
            let mut local = vec![usize::MAX; p.matrices.len()];
            for (i, &v) in vertices.iter().enumerate() {
                local[v] = i;
            }
            let matrices = vertices.iter().map(|&v| p.matrices[v].clone()).collect();
            let expressions = edges
                .iter()
                .map(|&ei| {
                    let mut e = p.expressions[ei].clone();
                    e.out = local[e.out];
                    for v in &mut e.inputs {
                        *v = local[*v];
                    }
                    e
                })
                .collect();
            let sub = Program::new(p.alphabet.clone(), matrices, expressions, p.meta.clone())
                .expect("induced sub-program is valid");
            let instance = build_instance(&sub).expect("induced sub-instance is acyclic");
            Component {
                instance,
                vertices,
                edges,
            }
        })
        .collect()
}

/// `cov(e)`: expressions that read a matrix written by `e`, keyed by id.
pub fn cover_sets(inst: &TilingInstance) -> Vec<(String, Vec<String>)> {
    let p = &inst.program;
    inst.expr_succ
        .iter()
        .enumerate()
        .map(|(e, succ)| {
            (
                p.expressions[e].id.clone(),
                succ.iter().map(|&f| p.expressions[f].id.clone()).collect(),
            )
        })
        .collect()
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}
