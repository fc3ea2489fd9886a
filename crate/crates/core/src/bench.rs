//! Experiment harness: solver comparison, the beta x eta grid and the cost
//! histogram of random labelings.

use std::collections::BTreeMap;
use std::io::Write;

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cost::total_cost;
use crate::gen::{gen_random_chlp, GenError, RandomModelParams};
use crate::instance::build_instance;
use crate::model::{Program, Tile};
use crate::solvers::{solve_exhaustive, solve_greedy, solve_local, GreedyParams, SolveError, SolveReport};

/// One solver run. `cost` and `states` are `None` when the solver refused
/// the instance (exhaustive over the state cap).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub program: String,
    pub solver: String,
    pub cost: Option<f64>,
    pub elapsed_s: f64,
    pub states: Option<u64>,
}

pub const COMPARISON_HEADER: [&str; 5] = ["program", "solver", "cost", "elapsed_s", "states"];

/// Runs local, exhaustive and greedy on every program.
pub fn run_solver_comparison(
    programs: &[(String, Program)],
    params: &GreedyParams,
    cap: u64,
) -> Result<Vec<ComparisonRow>, SolveError> {
    params.validate()?;
    let mut rows = Vec::with_capacity(3 * programs.len());
    for (name, p) in programs {
        let inst = build_instance(p)?;
        let row = |r: &SolveReport| ComparisonRow {
            program: name.clone(),
            solver: r.solver.clone(),
            cost: Some(r.total()),
            elapsed_s: r.elapsed_s,
            states: Some(r.states_examined),
        };
        rows.push(row(&solve_local(&inst)));
        match solve_exhaustive(&inst, cap) {
            Ok(r) => rows.push(row(&r)),
            Err(SolveError::ComponentTooLarge { .. }) => rows.push(ComparisonRow {
                program: name.clone(),
                solver: "exhaustive".into(),
                cost: None,
                elapsed_s: 0.0,
                states: None,
            }),
            Err(e) => return Err(e),
        }
        rows.push(row(&solve_greedy(&inst, params, cap)?));
    }
    Ok(rows)
}

/// CSV with a header row; refused runs read `skipped`.
pub fn write_comparison_csv<W: Write>(rows: &[ComparisonRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COMPARISON_HEADER)?;
    for r in rows {
        let cost = r.cost.map_or_else(|| "skipped".to_string(), |c| c.to_string());
        let states = r.states.map_or_else(|| "skipped".to_string(), |s| s.to_string());
        w.write_record([&r.program, &r.solver, &cost, &r.elapsed_s.to_string(), &states])?;
    }
    w.flush()?;
    Ok(())
}

/// Inverse of [`write_comparison_csv`].
pub fn read_comparison_csv<R: std::io::Read>(input: R) -> Result<Vec<ComparisonRow>, String> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers().map_err(|e| e.to_string())?.iter().map(String::from).collect();
    if header != COMPARISON_HEADER {
        return Err(format!("unexpected header {header:?}"));
    }
    let optional = |s: &str| if s == "skipped" { None } else { Some(s.to_string()) };
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| e.to_string())?;
            let cost = optional(&rec[2]).map(|c| c.parse::<f64>()).transpose().map_err(|e| e.to_string())?;
            let states = optional(&rec[4]).map(|s| s.parse::<u64>()).transpose().map_err(|e| e.to_string())?;
            Ok(ComparisonRow {
                program: rec[0].to_string(),
                solver: rec[1].to_string(),
                cost,
                elapsed_s: rec[3].parse().map_err(|e: std::num::ParseFloatError| e.to_string())?,
                states,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub program: String,
    pub beta: usize,
    pub eta: f64,
    pub cost: f64,
    pub elapsed_s: f64,
    pub states: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub betas: Vec<usize>,
    pub etas: Vec<f64>,
    pub alpha: u64,
    pub cells: Vec<GridCell>,
    /// Per program, `[beta][eta]` times divided by that program's maximum.
    pub normalized: IndexMap<String, Vec<Vec<f64>>>,
    /// Element-wise mean of the normalized grids.
    pub average: Vec<Vec<f64>>,
}

impl GridResult {
    pub fn cell(&self, program: &str, beta: usize, eta: f64) -> Option<&GridCell> {
        self.cells
            .iter()
            .find(|c| c.program == program && c.beta == beta && c.eta == eta)
    }
}

/// Greedy over every `(beta, eta)` cell for every program.
pub fn run_grid(
    programs: &[(String, Program)],
    betas: &[usize],
    etas: &[f64],
    alpha: u64,
    seed: u64,
    cap: u64,
) -> Result<GridResult, SolveError> {
    if betas.is_empty() || etas.is_empty() {
        return Err(SolveError::InvalidParams("grid axes must be nonempty".into()));
    }
    let mut cells = Vec::new();
    let mut normalized = IndexMap::new();
    let mut average = vec![vec![0.0; etas.len()]; betas.len()];
    for (name, p) in programs {
        let inst = build_instance(p)?;
        let mut times = vec![vec![0.0; etas.len()]; betas.len()];
        for (i, &beta) in betas.iter().enumerate() {
            for (j, &eta) in etas.iter().enumerate() {
                let params = GreedyParams {
                    alpha,
                    beta,
                    eta,
                    seed,
                    ..GreedyParams::default()
                };
                let r = solve_greedy(&inst, &params, cap)?;
                times[i][j] = r.elapsed_s;
                cells.push(GridCell {
                    program: name.clone(),
                    beta,
                    eta,
                    cost: r.total(),
                    elapsed_s: r.elapsed_s,
                    states: r.states_examined,
                });
            }
        }
        let max = times.iter().flatten().copied().fold(0.0, f64::max);
        for row in &mut times {
            for t in row.iter_mut() {
                *t = if max > 0.0 { *t / max } else { 1.0 };
            }
        }
        for (avg, row) in average.iter_mut().zip(&times) {
            for (a, t) in avg.iter_mut().zip(row) {
                *a += t / programs.len() as f64;
            }
        }
        normalized.insert(name.clone(), times);
    }
    Ok(GridResult {
        betas: betas.to_vec(),
        etas: etas.to_vec(),
        alpha,
        cells,
        normalized,
        average,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub params: RandomModelParams,
    pub trials: usize,
    /// Cost -> number of labelings with that cost.
    pub bins: BTreeMap<u64, usize>,
    pub mean: f64,
    /// Population standard deviation.
    pub stddev: f64,
}

impl Histogram {
    pub fn coefficient_of_variation(&self) -> f64 {
        if self.mean == 0.0 {
            0.0
        } else {
            self.stddev / self.mean
        }
    }
}

/// Total cost of `trials` uniform labelings of one random instance. The
/// instance is drawn from `params.seed`; labelings from stream 1 of the
/// same seed.
pub fn run_histogram(params: &RandomModelParams, trials: usize) -> Result<Histogram, GenError> {
    if trials == 0 {
        return Err(GenError::Params("trials must be at least 1".into()));
    }
    let inst = gen_random_chlp(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(1);
    let tau = params.tau as u8;
    let mut labels = vec![Tile(0); inst.vertex_count()];
    let mut costs = Vec::with_capacity(trials);
    for _ in 0..trials {
        for t in labels.iter_mut() {
            *t = Tile(rng.gen_range(0..tau));
        }
        let c = total_cost(labels.as_slice(), &inst).expect("labels are total").total;
        costs.push(c);
    }
    let mut bins = BTreeMap::new();
    for &c in &costs {
        *bins.entry(c.round() as u64).or_insert(0) += 1;
    }
    let mean = costs.iter().sum::<f64>() / trials as f64;
    let var = costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / trials as f64;
    Ok(Histogram {
        params: *params,
        trials,
        bins,
        mean,
        stddev: var.sqrt(),
    })
}
