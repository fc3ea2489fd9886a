//! Programs, matrices, expressions and tiling alphabets.
//!
//! A [`Program`] is an ordered list of matrix expressions. Every expression
//! names one output matrix, an ordered list of input matrices, a weight and
//! the set of tiling tuples its implementation accepts. Tuples are ordered
//! `(out, in[0], in[1], ...)`, so position `0` always binds to the output.
//!
//! Matrices are referenced internally by their index in [`Program::matrices`];
//! string ids only exist at the JSON boundary and for reporting.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

/// Index of a tiling type inside a [`TilingAlphabet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Tile(pub u8);

impl Tile {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Tile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Maximum number of distinct tiling types.
pub const MAX_TAU: usize = u8::MAX as usize;

/// Meta key marking a program whose expressions carry no dataflow order.
pub const DEPENDENCIES_KEY: &str = "dependencies";

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("schema violation: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("tiling alphabet is empty")]
    EmptyAlphabet,
    #[error("tiling alphabet has {0} types, at most {MAX_TAU} are supported")]
    AlphabetTooLarge(usize),
    #[error("duplicate tiling type `{0}`")]
    DuplicateTilingType(String),
    #[error("duplicate matrix id `{0}`")]
    DuplicateMatrix(String),
    #[error("matrix `{id}`: rows and cols must be positive")]
    BadDimensions { id: String },
    #[error("duplicate expression id `{0}`")]
    DuplicateExpression(String),
    #[error("expression `{expr}`: {path} references unknown matrix `{id}`")]
    UnknownMatrix { expr: String, path: String, id: String },
    #[error("expression `{expr}`: {path} has {found} entries, expected {expected}")]
    Arity {
        expr: String,
        path: String,
        expected: usize,
        found: usize,
    },
    #[error("expression `{expr}`: {path} names unknown tiling type `{name}`")]
    UnknownTilingType { expr: String, path: String, name: String },
    #[error("expression `{expr}`: {path} is out of range for an alphabet of {tau} types")]
    TileOutOfRange { expr: String, path: String, tau: usize },
    #[error("expression `{expr}`: feasible set is empty")]
    EmptyFeasible { expr: String },
    #[error("expression `{expr}`: weight must be finite and nonnegative, got {weight}")]
    BadWeight { expr: String, weight: f64 },
}

/// Ordered list of distinct tiling-type names (`row`, `col`, `block`, ...).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TilingAlphabet {
    types: Vec<String>,
}

impl TilingAlphabet {
    pub fn new<S: Into<String>>(types: impl IntoIterator<Item = S>) -> Result<Self, ModelError> {
        let types: Vec<String> = types.into_iter().map(Into::into).collect();
        if types.is_empty() {
            return Err(ModelError::EmptyAlphabet);
        }
        if types.len() > MAX_TAU {
            return Err(ModelError::AlphabetTooLarge(types.len()));
        }
        let mut seen = HashSet::new();
        for t in &types {
            if !seen.insert(t.as_str()) {
                return Err(ModelError::DuplicateTilingType(t.clone()));
            }
        }
        Ok(Self { types })
    }

    /// Alphabet `t0, t1, ...` of the given size.
    pub fn numbered(tau: usize) -> Result<Self, ModelError> {
        Self::new((0..tau).map(|i| format!("t{i}")))
    }

    pub fn tau(&self) -> usize {
        self.types.len()
    }

    pub fn names(&self) -> &[String] {
        &self.types
    }

    pub fn name(&self, tile: Tile) -> &str {
        &self.types[tile.index()]
    }

    pub fn lookup(&self, name: &str) -> Option<Tile> {
        self.types.iter().position(|t| t == name).map(|i| Tile(i as u8))
    }

    pub fn tiles(&self) -> impl Iterator<Item = Tile> {
        (0..self.types.len()).map(|i| Tile(i as u8))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    pub id: String,
    pub rows: u64,
    pub cols: u64,
    pub is_output: bool,
}

impl Matrix {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            rows: 1,
            cols: 1,
            is_output: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expression {
    pub id: String,
    pub op: String,
    pub out: usize,
    pub inputs: Vec<usize>,
    pub weight: f64,
    pub feasible: Vec<Vec<Tile>>,
}

impl Expression {
    /// Number of participating positions (`1 + inputs`).
    pub fn arity(&self) -> usize {
        1 + self.inputs.len()
    }

    /// Matrix at each tuple position: the output followed by the inputs.
    pub fn participants(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.out).chain(self.inputs.iter().copied())
    }

    /// Distinct participating matrices in first-occurrence order.
    pub fn distinct_participants(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.arity());
        for v in self.participants() {
            if !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub alphabet: TilingAlphabet,
    pub matrices: Vec<Matrix>,
    pub expressions: Vec<Expression>,
    /// Free-form metadata (generator name, seeds, ...). Serialized as `meta`.
    pub meta: Map<String, Value>,
    index: HashMap<String, usize>,
}

impl Program {
    /// Validates and assembles a program from already-indexed parts.
    pub fn new(
        alphabet: TilingAlphabet,
        matrices: Vec<Matrix>,
        expressions: Vec<Expression>,
        meta: Map<String, Value>,
    ) -> Result<Self, ModelError> {
        let mut index = HashMap::with_capacity(matrices.len());
        for (i, m) in matrices.iter().enumerate() {
            if m.rows == 0 || m.cols == 0 {
                return Err(ModelError::BadDimensions { id: m.id.clone() });
            }
            if index.insert(m.id.clone(), i).is_some() {
                return Err(ModelError::DuplicateMatrix(m.id.clone()));
            }
        }
        let tau = alphabet.tau();
        let mut expr_ids = HashSet::new();
        for (ei, e) in expressions.iter().enumerate() {
            if !expr_ids.insert(e.id.as_str()) {
                return Err(ModelError::DuplicateExpression(e.id.clone()));
            }
            for (pos, v) in e.participants().enumerate() {
                if v >= matrices.len() {
                    let path = if pos == 0 {
                        format!("expressions[{ei}].out")
                    } else {
                        format!("expressions[{ei}].in[{}]", pos - 1)
                    };
                    return Err(ModelError::UnknownMatrix {
                        expr: e.id.clone(),
                        path,
                        id: format!("#{v}"),
                    });
                }
            }
            if !(e.weight.is_finite() && e.weight >= 0.0) {
                return Err(ModelError::BadWeight {
                    expr: e.id.clone(),
                    weight: e.weight,
                });
            }
            if e.feasible.is_empty() {
                return Err(ModelError::EmptyFeasible { expr: e.id.clone() });
            }
            for (ti, tuple) in e.feasible.iter().enumerate() {
                if tuple.len() != e.arity() {
                    return Err(ModelError::Arity {
                        expr: e.id.clone(),
                        path: format!("expressions[{ei}].feasible[{ti}]"),
                        expected: e.arity(),
                        found: tuple.len(),
                    });
                }
                if let Some(pos) = tuple.iter().position(|t| t.index() >= tau) {
                    return Err(ModelError::TileOutOfRange {
                        expr: e.id.clone(),
                        path: format!("expressions[{ei}].feasible[{ti}][{pos}]"),
                        tau,
                    });
                }
            }
        }
        Ok(Self {
            alphabet,
            matrices,
            expressions,
            meta,
            index,
        })
    }

    pub fn tau(&self) -> usize {
        self.alphabet.tau()
    }

    pub fn matrix_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn expression_index(&self, id: &str) -> Option<usize> {
        self.expressions.iter().position(|e| e.id == id)
    }

    pub fn matrix_id(&self, v: usize) -> &str {
        &self.matrices[v].id
    }

    /// True when the program is a bare hypergraph: expressions are mutually
    /// unordered constraints and no dataflow is derived from them.
    pub fn is_antichain(&self) -> bool {
        self.meta.get(DEPENDENCIES_KEY).and_then(Value::as_str) == Some("none")
    }

    /// Parses the Program JSON document.
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let doc: ProgramDoc = serde_json::from_str(text)?;
        Self::from_doc(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("program serializes")
    }

    pub fn from_doc(doc: ProgramDoc) -> Result<Self, ModelError> {
        let alphabet = TilingAlphabet::new(doc.tiling_types)?;
        let matrices: Vec<Matrix> = doc
            .matrices
            .into_iter()
            .map(|m| Matrix {
                id: m.id,
                rows: m.rows,
                cols: m.cols,
                is_output: m.output,
            })
            .collect();
        let mut index = HashMap::with_capacity(matrices.len());
        for (i, m) in matrices.iter().enumerate() {
            if index.insert(m.id.as_str(), i).is_some() {
                return Err(ModelError::DuplicateMatrix(m.id.clone()));
            }
        }
        let resolve = |expr: &str, path: String, id: &str| {
            index.get(id).copied().ok_or_else(|| ModelError::UnknownMatrix {
                expr: expr.to_string(),
                path,
                id: id.to_string(),
            })
        };
        let mut expressions = Vec::with_capacity(doc.expressions.len());
        for (ei, e) in doc.expressions.into_iter().enumerate() {
            let out = resolve(&e.id, format!("expressions[{ei}].out"), &e.out)?;
            let inputs = e
                .inputs
                .iter()
                .enumerate()
                .map(|(i, id)| resolve(&e.id, format!("expressions[{ei}].in[{i}]"), id))
                .collect::<Result<Vec<_>, _>>()?;
            let arity = 1 + inputs.len();
            let mut feasible = Vec::with_capacity(e.feasible.len());
            for (ti, tuple) in e.feasible.iter().enumerate() {
                if tuple.len() != arity {
                    return Err(ModelError::Arity {
                        expr: e.id.clone(),
                        path: format!("expressions[{ei}].feasible[{ti}]"),
                        expected: arity,
                        found: tuple.len(),
                    });
                }
                let tiles = tuple
                    .iter()
                    .enumerate()
                    .map(|(pos, name)| {
                        alphabet
                            .lookup(name)
                            .ok_or_else(|| ModelError::UnknownTilingType {
                                expr: e.id.clone(),
                                path: format!("expressions[{ei}].feasible[{ti}][{pos}]"),
                                name: name.clone(),
                            })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                feasible.push(tiles);
            }
            expressions.push(Expression {
                id: e.id,
                op: e.op,
                out,
                inputs,
                weight: e.weight,
                feasible,
            });
        }
        Self::new(alphabet, matrices, expressions, doc.meta.unwrap_or_default())
    }

    pub fn to_doc(&self) -> ProgramDoc {
        ProgramDoc {
            tiling_types: self.alphabet.names().to_vec(),
            matrices: self
                .matrices
                .iter()
                .map(|m| MatrixDoc {
                    id: m.id.clone(),
                    rows: m.rows,
                    cols: m.cols,
                    output: m.is_output,
                })
                .collect(),
            expressions: self
                .expressions
                .iter()
                .map(|e| ExpressionDoc {
                    id: e.id.clone(),
                    op: e.op.clone(),
                    out: self.matrix_id(e.out).to_string(),
                    inputs: e.inputs.iter().map(|&v| self.matrix_id(v).to_string()).collect(),
                    weight: e.weight,
                    feasible: e
                        .feasible
                        .iter()
                        .map(|t| t.iter().map(|&x| self.alphabet.name(x).to_string()).collect())
                        .collect(),
                })
                .collect(),
            meta: if self.meta.is_empty() {
                None
            } else {
                Some(self.meta.clone())
            },
        }
    }
}

/// Wire form of a [`Program`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProgramDoc {
    pub tiling_types: Vec<String>,
    pub matrices: Vec<MatrixDoc>,
    pub expressions: Vec<ExpressionDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Map<String, Value>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDoc {
    pub id: String,
    #[serde(default = "one")]
    pub rows: u64,
    #[serde(default = "one")]
    pub cols: u64,
    #[serde(default)]
    pub output: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpressionDoc {
    pub id: String,
    pub op: String,
    pub out: String,
    #[serde(rename = "in")]
    pub inputs: Vec<String>,
    #[serde(default = "unit_weight")]
    pub weight: f64,
    pub feasible: Vec<Vec<String>>,
}

fn one() -> u64 {
    1
}

fn unit_weight() -> f64 {
    1.0
}

/// Incremental construction of a [`Program`] by string ids.
///
/// Matrices are created on first mention with unit dimensions.
#[derive(Clone, Debug)]
pub struct ProgramBuilder {
    alphabet: TilingAlphabet,
    matrices: Vec<Matrix>,
    index: HashMap<String, usize>,
    expressions: Vec<Expression>,
    meta: Map<String, Value>,
    dims: (u64, u64),
}

impl ProgramBuilder {
    pub fn new(alphabet: TilingAlphabet) -> Self {
        Self {
            alphabet,
            matrices: Vec::new(),
            index: HashMap::new(),
            expressions: Vec::new(),
            meta: Map::new(),
            dims: (1, 1),
        }
    }

    /// Dimensions given to matrices created after this call.
    pub fn dims(mut self, rows: u64, cols: u64) -> Self {
        self.dims = (rows, cols);
        self
    }

    pub fn alphabet(&self) -> &TilingAlphabet {
        &self.alphabet
    }

    pub fn matrix(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.matrices.len();
        self.matrices.push(Matrix {
            id: id.to_string(),
            rows: self.dims.0,
            cols: self.dims.1,
            is_output: false,
        });
        self.index.insert(id.to_string(), i);
        i
    }

    pub fn output(&mut self, id: &str) -> &mut Self {
        let i = self.matrix(id);
        self.matrices[i].is_output = true;
        self
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.meta.insert(key.to_string(), value.into());
        self
    }

    /// Appends an expression; tuples are indices into the alphabet.
    pub fn expression(
        &mut self,
        id: &str,
        op: &str,
        out: &str,
        inputs: &[&str],
        weight: f64,
        feasible: Vec<Vec<Tile>>,
    ) -> &mut Self {
        let out = self.matrix(out);
        let inputs = inputs.iter().map(|i| self.matrix(i)).collect();
        self.expressions.push(Expression {
            id: id.to_string(),
            op: op.to_string(),
            out,
            inputs,
            weight,
            feasible,
        });
        self
    }

    pub fn build(self) -> Result<Program, ModelError> {
        Program::new(self.alphabet, self.matrices, self.expressions, self.meta)
    }
}

/// Rewrites `p` so that every matrix is written at most once and never
/// written after it has been mentioned.
///
/// A write to a matrix that already appeared earlier (as input or output)
/// creates a fresh version; later reads refer to the newest version. Output
/// flags move to the final version of each original output matrix.
pub fn rename_single_assignment(p: &Program) -> Program {
    if p.is_antichain() {
        return p.clone();
    }
    let mut matrices = p.matrices.clone();
    for m in &mut matrices {
        m.is_output = false;
    }
    let mut taken: HashSet<String> = p.matrices.iter().map(|m| m.id.clone()).collect();
    let mut current: Vec<usize> = (0..p.matrices.len()).collect();
    let mut seen = vec![false; p.matrices.len()];
    let mut versions = vec![0usize; p.matrices.len()];
    let mut expressions = Vec::with_capacity(p.expressions.len());

    for e in &p.expressions {
        let inputs: Vec<usize> = e.inputs.iter().map(|&v| current[v]).collect();
        for &v in &e.inputs {
            seen[v] = true;
        }
        let orig = e.out;
        let out = if seen[orig] {
            let base = &p.matrices[orig];
            let fresh = loop {
                versions[orig] += 1;
                let candidate = format!("{}_{}", base.id, versions[orig]);
                if taken.insert(candidate.clone()) {
                    break candidate;
                }
            };
            matrices.push(Matrix {
                id: fresh,
                rows: base.rows,
                cols: base.cols,
                is_output: false,
            });
            let idx = matrices.len() - 1;
            current[orig] = idx;
            idx
        } else {
            orig
        };
        seen[orig] = true;
        expressions.push(Expression {
            id: e.id.clone(),
            op: e.op.clone(),
            out,
            inputs,
            weight: e.weight,
            feasible: e.feasible.clone(),
        });
    }
    for (orig, m) in p.matrices.iter().enumerate() {
        if m.is_output {
            matrices[current[orig]].is_output = true;
        }
    }
    Program::new(p.alphabet.clone(), matrices, expressions, p.meta.clone())
        .expect("renaming preserves validity")
}
