//! Peak memory occupancy of a program under an execution order, its exact
//! minimisation over linear extensions, and the cutwidth reduction.

use std::collections::{HashMap, HashSet};

use indexmap::IndexMap;
use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{build_instance, InstanceError, TilingInstance};
use crate::model::{Program, ProgramBuilder, Tile, TilingAlphabet};

/// Linear extensions `mop_exhaustive` may visit.
pub const MAX_EXTENSIONS: u64 = 10_000_000;
/// Largest graph `cutwidth_bruteforce` accepts.
pub const MAX_CUTWIDTH_VERTICES: usize = 10;

#[derive(Debug, Error)]
pub enum MemoryError {
    #[error("order is not a permutation of the program's expressions: {0}")]
    NotPermutation(String),
    #[error("order runs `{after}` before `{before}`, which it depends on")]
    Violation { before: String, after: String },
    #[error("more than {0} linear extensions")]
    TooManyExtensions(u64),
    #[error("graph has {vertices} vertices; brute force is limited to {limit}")]
    GraphTooLarge { vertices: usize, limit: usize },
    #[error("invalid graph: {0}")]
    Graph(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// When a matrix occupies memory relative to the expressions using it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Residency {
    /// Live at every position `i` with `s <= i <= t`: operands and result
    /// coexist while an expression runs.
    #[default]
    DuringExecution,
    /// Live between positions: after expression `i` a matrix is held iff
    /// `s <= i < t`, or `s <= i` for outputs.
    AfterExecution,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LifespanProfile {
    pub order: Vec<String>,
    pub kappa: usize,
    /// 1-based `[s, t]` per mentioned matrix.
    pub intervals: IndexMap<String, [usize; 2]>,
    pub residency: Residency,
}

fn check_order(p: &Program, inst: &TilingInstance, order: &[usize]) -> Result<(), MemoryError> {
    let m = p.expressions.len();
    let mut position = vec![usize::MAX; m];
    if order.len() != m {
        return Err(MemoryError::NotPermutation(format!("{} entries for {m} expressions", order.len())));
    }
    for (i, &e) in order.iter().enumerate() {
        if e >= m || position[e] != usize::MAX {
            return Err(MemoryError::NotPermutation(format!("entry {i} repeats or is out of range")));
        }
        position[e] = i;
    }
    for e in 0..m {
        for &d in &inst.expr_pred[e] {
            if position[d] > position[e] {
                return Err(MemoryError::Violation {
                    before: p.expressions[d].id.clone(),
                    after: p.expressions[e].id.clone(),
                });
            }
        }
    }
    Ok(())
}

/// Interval endpoints (1-based) of every mentioned matrix, in matrix order.
fn intervals(p: &Program, order: &[usize]) -> Vec<Option<(usize, usize)>> {
    let m = order.len();
    let mut span: Vec<Option<(usize, usize)>> = vec![None; p.matrices.len()];
    for (i, &e) in order.iter().enumerate() {
        for v in p.expressions[e].participants() {
            let s = span[v].get_or_insert((i + 1, i + 1));
            s.1 = i + 1;
        }
    }
    for (v, s) in span.iter_mut().enumerate() {
        if let Some(s) = s {
            if p.matrices[v].is_output {
                s.1 = m;
            }
        }
    }
    span
}

fn peak(p: &Program, span: &[Option<(usize, usize)>], m: usize, residency: Residency) -> usize {
    // delta[i] changes the live count from position i on.
    let mut delta = vec![0i64; m + 2];
    for (v, s) in span.iter().enumerate() {
        let Some((s, t)) = *s else { continue };
        let end = match residency {
            Residency::DuringExecution => t,
            Residency::AfterExecution if p.matrices[v].is_output => m,
            Residency::AfterExecution => t - 1,
        };
        if s <= end {
            delta[s] += 1;
            delta[end + 1] -= 1;
        }
    }
    let mut live = 0i64;
    let mut best = 0i64;
    for d in &delta[1..=m] {
        live += d;
        best = best.max(live);
    }
    best as usize
}

/// Lifespans and peak residency of `p` executed in `order` (expression
/// indices).
pub fn lifespan_profile(p: &Program, order: &[usize], residency: Residency) -> Result<LifespanProfile, MemoryError> {
    let inst = build_instance(p)?;
    check_order(p, &inst, order)?;
    let span = intervals(p, order);
    let kappa = peak(p, &span, order.len(), residency);
    let intervals = span
        .iter()
        .enumerate()
        .filter_map(|(v, s)| s.map(|(s, t)| (p.matrices[v].id.clone(), [s, t])))
        .collect();
    Ok(LifespanProfile {
        order: order.iter().map(|&e| p.expressions[e].id.clone()).collect(),
        kappa,
        intervals,
        residency,
    })
}

/// Resolves expression ids to indices.
pub fn order_from_ids(p: &Program, ids: &[String]) -> Result<Vec<usize>, MemoryError> {
    ids.iter()
        .map(|id| {
            p.expression_index(id)
                .ok_or_else(|| MemoryError::NotPermutation(format!("unknown expression `{id}`")))
        })
        .collect()
}

/// Minimum peak residency over all linear extensions. The first order (in
/// depth-first, program-order-first enumeration) reaching the minimum is
/// returned. With `cap`, stops at the first order whose peak is at most
/// `cap`.
pub fn mop_exhaustive(p: &Program, cap: Option<usize>, residency: Residency) -> Result<LifespanProfile, MemoryError> {
    let inst = build_instance(p)?;
    let m = p.expressions.len();
    let mut indegree: Vec<usize> = inst.expr_pred.iter().map(Vec::len).collect();
    let mut search = Extensions {
        p,
        inst: &inst,
        residency,
        cap,
        order: Vec::with_capacity(m),
        placed: vec![false; m],
        visited: 0,
        best: None,
    };
    search.run(&mut indegree)?;
    let (order, _) = search.best.expect("a finite poset has a linear extension");
    lifespan_profile(p, &order, residency)
}

struct Extensions<'a> {
    p: &'a Program,
    inst: &'a TilingInstance,
    residency: Residency,
    cap: Option<usize>,
    order: Vec<usize>,
    placed: Vec<bool>,
    visited: u64,
    best: Option<(Vec<usize>, usize)>,
}

impl Extensions<'_> {
    fn done(&self) -> bool {
        matches!((&self.best, self.cap), (Some((_, k)), Some(cap)) if *k <= cap)
    }

    fn run(&mut self, indegree: &mut [usize]) -> Result<(), MemoryError> {
        let m = self.placed.len();
        if self.order.len() == m {
            self.visited += 1;
            if self.visited > MAX_EXTENSIONS {
                return Err(MemoryError::TooManyExtensions(MAX_EXTENSIONS));
            }
            let span = intervals(self.p, &self.order);
            let kappa = peak(self.p, &span, m, self.residency);
            if self.best.as_ref().is_none_or(|(_, k)| kappa < *k) {
                self.best = Some((self.order.clone(), kappa));
            }
            return Ok(());
        }
        for e in 0..m {
            if self.placed[e] || indegree[e] > 0 {
                continue;
            }
            self.placed[e] = true;
            self.order.push(e);
            for &f in &self.inst.expr_succ[e] {
                indegree[f] -= 1;
            }
            let result = self.run(indegree);
            for &f in &self.inst.expr_succ[e] {
                indegree[f] += 1;
            }
            self.order.pop();
            self.placed[e] = false;
            result?;
            if self.done() {
                break;
            }
        }
        Ok(())
    }
}

/// Simple undirected graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PlainGraphDoc", into = "PlainGraphDoc")]
pub struct PlainGraph {
    vertices: Vec<String>,
    edges: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlainGraphDoc {
    vertices: Vec<String>,
    edges: Vec<(String, String)>,
}

impl TryFrom<PlainGraphDoc> for PlainGraph {
    type Error = MemoryError;

    fn try_from(doc: PlainGraphDoc) -> Result<Self, MemoryError> {
        let index: HashMap<&str, usize> = doc.vertices.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| MemoryError::Graph(format!("unknown vertex `{name}`")))
        };
        let edges = doc
            .edges
            .iter()
            .map(|(a, b)| Ok((lookup(a)?, lookup(b)?)))
            .collect::<Result<Vec<_>, MemoryError>>()?;
        PlainGraph::new(doc.vertices, edges)
    }
}

impl From<PlainGraph> for PlainGraphDoc {
    fn from(g: PlainGraph) -> Self {
        let edges = g
            .edges
            .iter()
            .map(|&(a, b)| (g.vertices[a].clone(), g.vertices[b].clone()))
            .collect();
        PlainGraphDoc {
            vertices: g.vertices,
            edges,
        }
    }
}

impl PlainGraph {
    pub fn new(vertices: Vec<String>, edges: Vec<(usize, usize)>) -> Result<Self, MemoryError> {
        let mut names = HashSet::new();
        if let Some(v) = vertices.iter().find(|v| !names.insert(v.as_str())) {
            return Err(MemoryError::Graph(format!("duplicate vertex `{v}`")));
        }
        let mut seen = HashSet::new();
        for &(a, b) in &edges {
            if a >= vertices.len() || b >= vertices.len() {
                return Err(MemoryError::Graph(format!("edge ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(MemoryError::Graph(format!("loop at `{}`", vertices[a])));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(MemoryError::Graph(format!(
                    "parallel edge between `{}` and `{}`",
                    vertices[a], vertices[b]
                )));
            }
        }
        Ok(Self { vertices, edges })
    }

    /// Vertices `1..=n` with the given 0-based edges.
    pub fn numbered(n: usize, edges: &[(usize, usize)]) -> Result<Self, MemoryError> {
        Self::new((1..=n).map(|i| i.to_string()).collect(), edges.to_vec())
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}

/// Program whose minimum peak residency (between expressions) is
/// `|V| + 1 + cutwidth(g)`.
///
/// `e_m1` combines one private matrix `C{i}` per vertex into `Am1`; `e{i}`
/// reads `C{i}`, `Am1` and the edge matrices `B{i}_{j}` of its vertex; the
/// final expression joins every `A{i}` and `Am1` into the only output.
pub fn mop_from_graph(g: &PlainGraph) -> Program {
    let n = g.vertices.len();
    let mut incident: Vec<Vec<String>> = vec![Vec::new(); n];
    let mut sorted: Vec<(usize, usize)> = g.edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    sorted.sort_unstable();
    for (a, b) in sorted {
        let id = format!("B{}_{}", a + 1, b + 1);
        incident[a].push(id.clone());
        incident[b].push(id);
    }
    let alphabet = TilingAlphabet::new(["row"]).expect("one name");
    let mut b = ProgramBuilder::new(alphabet);
    let unit = |arity: usize| vec![vec![Tile(0); arity]];

    let cs: Vec<String> = (1..=n).map(|i| format!("C{i}")).collect();
    let cs_ref: Vec<&str> = cs.iter().map(String::as_str).collect();
    b.expression("e_m1", "join", "Am1", &cs_ref, 1.0, unit(n + 1));
    for i in 0..n {
        let mut inputs: Vec<&str> = incident[i].iter().map(String::as_str).collect();
        inputs.push(&cs[i]);
        inputs.push("Am1");
        let arity = inputs.len() + 1;
        b.expression(&format!("e{}", i + 1), "join", &format!("A{}", i + 1), &inputs, 1.0, unit(arity));
    }
    let xs: Vec<String> = (1..=n).map(|i| format!("A{i}")).chain(["Am1".to_string()]).collect();
    let xs_ref: Vec<&str> = xs.iter().map(String::as_str).collect();
    let last = format!("A{}", n + 1);
    b.expression(&format!("e{}", n + 1), "join", &last, &xs_ref, 1.0, unit(n + 2));
    b.output(&last);
    b.meta("generator", "cutwidth_reduction")
        .meta("graph", serde_json::to_value(g).expect("graph serializes"));
    b.build().expect("reduction is a valid program")
}

/// Minimum over vertex orderings of the largest number of edges `[l, r]`
/// with `l <= i <= r - 1`.
pub fn cutwidth_bruteforce(g: &PlainGraph) -> Result<usize, MemoryError> {
    let n = g.vertices.len();
    if n > MAX_CUTWIDTH_VERTICES {
        return Err(MemoryError::GraphTooLarge {
            vertices: n,
            limit: MAX_CUTWIDTH_VERTICES,
        });
    }
    if g.edges.is_empty() {
        return Ok(0);
    }
    let mut best = usize::MAX;
    let mut position = vec![0usize; n];
    let mut crossing = vec![0i64; n + 1];
    for perm in (0..n).permutations(n) {
        for (i, &v) in perm.iter().enumerate() {
            position[v] = i;
        }
        crossing.iter_mut().for_each(|c| *c = 0);
        for &(a, b) in &g.edges {
            let (l, r) = (position[a].min(position[b]), position[a].max(position[b]));
            crossing[l] += 1;
            crossing[r] -= 1;
        }
        let mut live = 0i64;
        let mut width = 0i64;
        for c in &crossing[..n] {
            live += c;
            width = width.max(live);
        }
        best = best.min(width as usize);
    }
    Ok(best)
}
