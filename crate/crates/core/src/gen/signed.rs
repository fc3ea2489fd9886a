//! Signed graphs and their copy/transpose/sum program encoding.
//!
//! Every edge of the signed graph is first subdivided by a fresh vertex,
//! which makes the graph 2-degenerate. Vertices are then laid out so each
//! has at most two earlier neighbours, and each vertex with earlier
//! neighbours becomes one expression over them: a copy or transpose for one
//! neighbour, a signed sum for two.

use std::collections::{HashMap, HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{Program, ProgramBuilder, Tile, TilingAlphabet};

use super::GenError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "=")]
    Same,
    #[serde(rename = "!=")]
    Different,
}

impl Sign {
    fn apply(self, t: u8) -> u8 {
        match self {
            Sign::Same => t,
            Sign::Different => 1 - t,
        }
    }

    /// Whether a two-colouring `(a, b)` satisfies an edge with this sign.
    pub fn satisfied(self, a: u8, b: u8) -> bool {
        (a == b) == (self == Sign::Same)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SignedGraphDoc", into = "SignedGraphDoc")]
pub struct SignedGraph {
    vertices: Vec<String>,
    edges: Vec<(usize, usize, Sign)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SignedGraphDoc {
    vertices: Vec<String>,
    edges: Vec<(String, String, Sign)>,
}

impl TryFrom<SignedGraphDoc> for SignedGraph {
    type Error = GenError;

    fn try_from(doc: SignedGraphDoc) -> Result<Self, GenError> {
        let index: HashMap<&str, usize> = doc.vertices.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| GenError::Graph(format!("unknown vertex `{name}`")))
        };
        let edges = doc
            .edges
            .iter()
            .map(|(a, b, s)| Ok((lookup(a)?, lookup(b)?, *s)))
            .collect::<Result<Vec<_>, GenError>>()?;
        SignedGraph::new(doc.vertices, edges)
    }
}

impl From<SignedGraph> for SignedGraphDoc {
    fn from(g: SignedGraph) -> Self {
        let edges = g
            .edges
            .iter()
            .map(|&(a, b, s)| (g.vertices[a].clone(), g.vertices[b].clone(), s))
            .collect();
        SignedGraphDoc {
            vertices: g.vertices,
            edges,
        }
    }
}

impl SignedGraph {
    /// Validates a simple signed graph: distinct names, no loops, no
    /// parallel edges.
    pub fn new(vertices: Vec<String>, edges: Vec<(usize, usize, Sign)>) -> Result<Self, GenError> {
        let mut names = HashSet::new();
        for v in &vertices {
            if !names.insert(v.as_str()) {
                return Err(GenError::Graph(format!("duplicate vertex `{v}`")));
            }
        }
        let mut seen = HashSet::new();
        for &(a, b, _) in &edges {
            if a >= vertices.len() || b >= vertices.len() {
                return Err(GenError::Graph(format!("edge ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(GenError::Graph(format!("loop at `{}`", vertices[a])));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(GenError::Graph(format!(
                    "parallel edge between `{}` and `{}`",
                    vertices[a], vertices[b]
                )));
            }
        }
        Ok(Self { vertices, edges })
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize, Sign)] {
        &self.edges
    }

    /// Unsatisfied edges under a two-colouring.
    pub fn unsatisfied(&self, colouring: &[u8]) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b, s)| !s.satisfied(colouring[a], colouring[b]))
            .count()
    }
}

/// Vertex names `x0, x1, ...`, zero-padded so name order matches index order.
fn numbered(n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len();
    (0..n).map(|i| format!("x{i:0width$}")).collect()
}

/// G(n, p) with independent uniform signs.
pub fn random_signed_graph(n: usize, p: f64, seed: u64) -> SignedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(p) {
                let s = if rng.gen_bool(0.5) { Sign::Same } else { Sign::Different };
                edges.push((a, b, s));
            }
        }
    }
    SignedGraph::new(numbered(n), edges).expect("generated graph is simple")
}

/// G(n, p) with signs read off a hidden random two-colouring, so the graph
/// is balanced.
pub fn balanced_signed_graph(n: usize, p: f64, seed: u64) -> SignedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let colour: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(p) {
                let s = if colour[a] == colour[b] { Sign::Same } else { Sign::Different };
                edges.push((a, b, s));
            }
        }
    }
    SignedGraph::new(numbered(n), edges).expect("generated graph is simple")
}

/// Encodes a signed graph as a two-type tiling program whose optimum equals
/// the minimum number of unsatisfied edges.
pub fn gen_btp_from_signed_graph(g: &SignedGraph) -> Program {
    let n = g.vertices.len();
    let name = |v: usize| g.vertices[v].as_str();

    // Subdivision: vertex n + i splits edge i. The `!=` half (if any) sits on
    // the lexicographically smaller endpoint.
    let mut names: Vec<String> = g.vertices.clone();
    let mut taken: HashSet<String> = names.iter().cloned().collect();
    let mut halves: Vec<Vec<(usize, Sign)>> = vec![Vec::new(); n + g.edges.len()];
    let mut split_of: HashMap<(usize, usize), usize> = HashMap::new();
    for (i, &(a, b, s)) in g.edges.iter().enumerate() {
        let (lo, hi) = if name(a) <= name(b) { (a, b) } else { (b, a) };
        let mut w_name = format!("{}-{}", name(lo), name(hi));
        while !taken.insert(w_name.clone()) {
            w_name.push('\'');
        }
        names.push(w_name);
        let w = n + i;
        halves[lo].push((w, s));
        halves[w].push((lo, s));
        halves[hi].push((w, Sign::Same));
        halves[w].push((hi, Sign::Same));
        split_of.insert((lo.min(hi), lo.max(hi)), w);
    }

    // Layout: breadth-first spanning forest, each tree edge contributing
    // its subdivision vertex right before the child. Remaining subdivision
    // vertices go last; both their neighbours are then already placed.
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b, _) in &g.edges {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    for list in &mut adjacency {
        list.sort_by(|&x, &y| name(x).cmp(name(y)));
    }
    let mut roots: Vec<usize> = (0..n).collect();
    roots.sort_by(|&x, &y| name(x).cmp(name(y)));

    let total = names.len();
    let mut placed = vec![false; total];
    let mut layout = Vec::with_capacity(total);
    let mut queue = VecDeque::new();
    for r in roots {
        if placed[r] {
            continue;
        }
        placed[r] = true;
        layout.push(r);
        queue.push_back(r);
        while let Some(p) = queue.pop_front() {
            for &c in &adjacency[p] {
                if !placed[c] {
                    let w = split_of[&(p.min(c), p.max(c))];
                    placed[w] = true;
                    placed[c] = true;
                    layout.push(w);
                    layout.push(c);
                    queue.push_back(c);
                }
            }
        }
    }
    let mut rest: Vec<usize> = (n..total).filter(|&w| !placed[w]).collect();
    rest.sort_by(|&x, &y| names[x].cmp(&names[y]));
    layout.extend(rest);

    let mut position = vec![0usize; total];
    for (i, &v) in layout.iter().enumerate() {
        position[v] = i;
    }

    let mut b = ProgramBuilder::new(TilingAlphabet::new(["row", "col"]).expect("two names"));
    for v in &layout {
        b.matrix(&names[*v]);
    }
    let mut count = 0;
    for &x in &layout {
        let mut left: Vec<(usize, Sign)> = halves[x]
            .iter()
            .copied()
            .filter(|&(y, _)| position[y] < position[x])
            .collect();
        left.sort_by_key(|&(y, _)| position[y]);
        if left.is_empty() {
            continue;
        }
        debug_assert!(left.len() <= 2, "layout is 2-degenerate");
        count += 1;
        let id = format!("e{count}");
        let feasible: Vec<Vec<Tile>> = (0..2u8)
            .map(|t| {
                std::iter::once(Tile(t))
                    .chain(left.iter().map(|&(_, s)| Tile(s.apply(t))))
                    .collect()
            })
            .collect();
        let inputs: Vec<&str> = left.iter().map(|&(y, _)| names[y].as_str()).collect();
        let op = match left.as_slice() {
            [(_, Sign::Same)] => "copy".to_string(),
            [(_, Sign::Different)] => "transpose".to_string(),
            _ => {
                let flags: String = left
                    .iter()
                    .map(|&(_, s)| if s == Sign::Same { 'n' } else { 't' })
                    .collect();
                format!("sum_{flags}")
            }
        };
        b.expression(&id, &op, &names[x], &inputs, 1.0, feasible);
    }
    b.meta("generator", "signed_graph");
    b.build().expect("encoding is a valid program")
}
