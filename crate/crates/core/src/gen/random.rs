//! Random instance ensembles.

use std::collections::HashSet;

use itertools::Itertools;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::instance::{build_instance, search_space, TilingInstance};
use crate::model::{Program, ProgramBuilder, Tile, TilingAlphabet, DEPENDENCIES_KEY};

use super::GenError;

/// Largest `tau^k` the tuple sampler accepts.
const MAX_TUPLE_SPACE: u128 = 1 << 32;
/// Up to this many k-subsets the edge sampler enumerates them all.
const ENUMERATE_LIMIT: u128 = 200_000;

/// Parameters of the `(H_{n,m,k}, L_{tau,s})` ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomModelParams {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub tau: usize,
    pub s: usize,
    pub seed: u64,
}

impl RandomModelParams {
    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |msg: String| Err(GenError::Params(msg));
        if self.k < 1 || self.k > self.n {
            return bad(format!("need 1 <= k <= n, got k={} n={}", self.k, self.n));
        }
        if self.tau < 1 || self.tau > crate::model::MAX_TAU {
            return bad(format!("tau={} out of range", self.tau));
        }
        if (self.m as u128) > binomial(self.n, self.k) {
            return bad(format!("m={} exceeds C({}, {})", self.m, self.n, self.k));
        }
        let tuples = search_space(self.tau, self.k);
        if tuples > MAX_TUPLE_SPACE {
            return bad(format!("tau^k = {tuples} is too large to sample from"));
        }
        if self.s < 1 || (self.s as u128) > tuples {
            return bad(format!("need 1 <= s <= tau^k = {tuples}, got s={}", self.s));
        }
        Ok(())
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// `s` distinct tuples of `[tau]^k`, sorted.
pub(crate) fn sample_tuples<R: Rng>(rng: &mut R, tau: usize, k: usize, s: usize) -> Vec<Vec<Tile>> {
    let space = search_space(tau, k) as usize;
    let mut codes = index::sample(rng, space, s).into_vec();
    codes.sort_unstable();
    codes
        .into_iter()
        .map(|mut c| {
            let mut t = vec![Tile(0); k];
            for slot in t.iter_mut().rev() {
                *slot = Tile((c % tau) as u8);
                c /= tau;
            }
            t
        })
        .collect()
}

/// `m` distinct k-subsets of `0..n`, each sorted ascending.
fn sample_edges<R: Rng>(rng: &mut R, n: usize, m: usize, k: usize) -> Vec<Vec<usize>> {
    let total = binomial(n, k);
    if total <= ENUMERATE_LIMIT {
        let all: Vec<Vec<usize>> = (0..n).combinations(k).collect();
        index::sample(rng, all.len(), m).into_iter().map(|i| all[i].clone()).collect()
    } else {
        let mut seen = HashSet::with_capacity(m);
        let mut edges = Vec::with_capacity(m);
        while edges.len() < m {
            let mut e = index::sample(rng, n, k).into_vec();
            e.sort_unstable();
            if seen.insert(e.clone()) {
                edges.push(e);
            }
        }
        edges
    }
}

/// Program form of a random CHLP instance. Expressions are unordered
/// constraints (`meta.dependencies = "none"`).
pub fn gen_random_chlp_program(params: &RandomModelParams) -> Result<Program, GenError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let alphabet = TilingAlphabet::numbered(params.tau)?;
    let mut b = ProgramBuilder::new(alphabet);
    let names: Vec<String> = (0..params.n).map(|i| format!("v{i}")).collect();
    for name in &names {
        b.matrix(name);
    }
    let edges = sample_edges(&mut rng, params.n, params.m, params.k);
    for (i, e) in edges.iter().enumerate() {
        let feasible = sample_tuples(&mut rng, params.tau, params.k, params.s);
        let inputs: Vec<&str> = e[1..].iter().map(|&v| names[v].as_str()).collect();
        b.expression(&format!("e{i}"), "rand", &names[e[0]], &inputs, 1.0, feasible);
    }
    b.meta(DEPENDENCIES_KEY, "none")
        .meta("generator", "random_chlp")
        .meta("params", serde_json::to_value(params).expect("params serialize"));
    Ok(b.build()?)
}

pub fn gen_random_chlp(params: &RandomModelParams) -> Result<TilingInstance, GenError> {
    Ok(build_instance(&gen_random_chlp_program(params)?)?)
}

/// Random straight-line program: `inputs` source matrices, then `exprs`
/// expressions each writing a fresh matrix from `k - 1` earlier ones. Every
/// expression after the first reads at least one computed matrix. Matrices
/// never read are outputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomProgramParams {
    pub inputs: usize,
    pub exprs: usize,
    pub k: usize,
    pub tau: usize,
    pub s: usize,
    pub seed: u64,
}

pub fn gen_random_program(params: &RandomProgramParams) -> Result<Program, GenError> {
    let RandomProgramParams { inputs, exprs, k, tau, s, seed } = *params;
    if k < 2 || k - 1 > inputs {
        return Err(GenError::Params(format!("need 2 <= k <= inputs + 1, got k={k}")));
    }
    if tau < 1 || s < 1 || (s as u128) > search_space(tau, k) || search_space(tau, k) > MAX_TUPLE_SPACE {
        return Err(GenError::Params(format!("bad tau={tau} / s={s} for k={k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = ProgramBuilder::new(TilingAlphabet::numbered(tau)?);
    let mut names: Vec<String> = (0..inputs).map(|i| format!("in{i}")).collect();
    for name in &names {
        b.matrix(name);
    }
    let mut read = vec![false; inputs + exprs];
    for i in 0..exprs {
        let pool = names.len();
        let mut chosen: Vec<usize> = Vec::with_capacity(k - 1);
        if i > 0 {
            chosen.push(rng.gen_range(inputs..pool));
        }
        while chosen.len() < k - 1 {
            let c = rng.gen_range(0..pool);
            if !chosen.contains(&c) {
                chosen.push(c);
            }
        }
        for &c in &chosen {
            read[c] = true;
        }
        let out = format!("t{i}");
        let ins: Vec<&str> = chosen.iter().map(|&c| names[c].as_str()).collect();
        let feasible = sample_tuples(&mut rng, tau, k, s);
        b.expression(&format!("e{}", i + 1), "rand", &out, &ins, 1.0, feasible);
        names.push(out);
    }
    for (i, name) in names.iter().enumerate().skip(inputs) {
        if !read[i] {
            b.output(name);
        }
    }
    b.meta("generator", "random_program")
        .meta("params", serde_json::to_value(params).expect("params serialize"));
    Ok(b.build()?)
}

/// Random copy/transpose forest over `n` matrices. Matrix `M{i}` is either a
/// new root or a copy/transpose of an earlier matrix.
pub fn gen_btp_forest(n: usize, seed: u64) -> Result<Program, GenError> {
    if n == 0 {
        return Err(GenError::Params("forest needs at least one matrix".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = ProgramBuilder::new(TilingAlphabet::new(["row", "col"])?);
    let width = n.to_string().len();
    let names: Vec<String> = (0..n).map(|i| format!("M{i:0width$}")).collect();
    for name in &names {
        b.matrix(name);
    }
    let copy = vec![vec![Tile(0), Tile(0)], vec![Tile(1), Tile(1)]];
    let transpose = vec![vec![Tile(0), Tile(1)], vec![Tile(1), Tile(0)]];
    let mut count = 0;
    for i in 1..n {
        if rng.gen_bool(0.15) {
            continue;
        }
        let parent = rng.gen_range(0..i);
        count += 1;
        let (op, feasible) = if rng.gen_bool(0.5) {
            ("copy", copy.clone())
        } else {
            ("transpose", transpose.clone())
        };
        b.expression(&format!("e{count}"), op, &names[i], &[&names[parent]], 1.0, feasible);
    }
    b.meta("generator", "btp_forest").meta("seed", seed);
    Ok(b.build()?)
}
