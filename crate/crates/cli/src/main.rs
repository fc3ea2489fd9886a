//! `tilesolve` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use tilesolve::bench::{run_grid, run_histogram, run_solver_comparison, write_comparison_csv};
use tilesolve::gen::{
    balanced_signed_graph, fixture_programs, gen_btp_from_signed_graph, gen_random_chlp_program, random_signed_graph,
    RandomModelParams, SignedGraph,
};
use tilesolve::memory::{lifespan_profile, mop_exhaustive, mop_from_graph, order_from_ids, PlainGraph, Residency};
use tilesolve::model::{rename_single_assignment, Program};
use tilesolve::solvers::{
    solve_btp_forest, solve_exhaustive, solve_greedy, solve_local, solve_random, AlphaMetric, GreedyParams,
    DEFAULT_STATE_CAP,
};
use tilesolve::build_instance;

const CAP_ENV: &str = "TILESOLVE_STATE_CAP";

#[derive(Parser)]
#[command(name = "tilesolve", version, about = "Choose matrix tilings for straight-line matrix programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one program and print the report.
    Solve(SolveArgs),
    /// Generate programs.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Cost histogram of random labelings on a random instance.
    Hist(HistArgs),
    /// Compare local, exhaustive and greedy; CSV output.
    Bench(BenchArgs),
    /// Greedy over a beta x eta grid.
    Grid(GridArgs),
    /// Lifespans and peak memory of a program.
    Mop(MopArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverKind {
    Local,
    Exhaustive,
    Greedy,
    Random,
    Btp,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    SearchSpace,
    Size,
}

#[derive(Clone, Copy, ValueEnum)]
enum ResidencyArg {
    During,
    After,
}

#[derive(Args)]
struct GreedyArgs {
    #[arg(long, default_value_t = 10)]
    alpha: u64,
    #[arg(long, default_value_t = 3)]
    beta: usize,
    #[arg(long, default_value_t = 0.5)]
    eta: f64,
    /// How alpha measures a component.
    #[arg(long, value_enum, default_value = "search-space")]
    alpha_metric: MetricArg,
}

impl GreedyArgs {
    fn params(&self, seed: u64) -> GreedyParams {
        GreedyParams {
            alpha: self.alpha,
            beta: self.beta,
            eta: self.eta,
            seed,
            alpha_metric: match self.alpha_metric {
                MetricArg::SearchSpace => AlphaMetric::SearchSpace,
                MetricArg::Size => AlphaMetric::Size,
            },
        }
    }
}

#[derive(Args)]
struct Common {
    /// Output file; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Labelings one exhaustive enumeration may visit.
    #[arg(long)]
    state_cap: Option<u64>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "greedy")]
    solver: SolverKind,
    #[command(flatten)]
    greedy: GreedyArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    tau: usize,
    #[arg(long)]
    s: usize,
}

impl ModelArgs {
    fn params(&self, seed: u64) -> RandomModelParams {
        RandomModelParams {
            n: self.n,
            m: self.m,
            k: self.k,
            tau: self.tau,
            s: self.s,
            seed,
        }
    }
}

#[derive(Subcommand)]
enum GenCommand {
    /// Random k-uniform instance with random feasible sets.
    Random {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Two-type program encoding a signed graph (from --input, or random).
    Signed {
        /// Signed graph JSON: {"vertices": [...], "edges": [[u, v, "=" | "!="], ...]}.
        #[arg(long, conflicts_with_all = ["n", "p", "balanced"])]
        input: Option<PathBuf>,
        #[arg(long, required_unless_present = "input")]
        n: Option<usize>,
        /// Edge probability.
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        /// Take signs from a hidden two-colouring.
        #[arg(long)]
        balanced: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Memory program whose optimum encodes the graph's cutwidth.
    Mopgraph {
        /// Graph JSON: {"vertices": [...], "edges": [[u, v], ...]}.
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// The reference programs; one file per program when --output is a directory.
    Fixtures {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct HistArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct BenchArgs {
    /// Program files; the fixture suite when absent.
    #[arg(long, num_args = 1..)]
    input: Vec<PathBuf>,
    #[command(flatten)]
    greedy: GreedyArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, num_args = 1..)]
    input: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    betas: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.0,0.5,0.9")]
    etas: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    alpha: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct MopArgs {
    #[arg(long)]
    input: PathBuf,
    /// Minimise over all linear extensions.
    #[arg(long, conflicts_with = "order")]
    exhaustive: bool,
    /// Stop the search at the first order with peak at most this.
    #[arg(long, requires = "exhaustive")]
    cap: Option<usize>,
    /// Comma-separated expression ids; program order when absent.
    #[arg(long, value_delimiter = ',')]
    order: Option<Vec<String>>,
    #[arg(long, value_enum, default_value = "during")]
    residency: ResidencyArg,
    #[command(flatten)]
    common: Common,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

enum Failure {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

fn state_cap(common: &Common) -> Result<u64, Failure> {
    if let Some(cap) = common.state_cap {
        return Ok(cap);
    }
    match std::env::var(CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{CAP_ENV}={v:?} is not a non-negative integer"))),
        Err(_) => Ok(DEFAULT_STATE_CAP),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_program(path: &Path) -> Result<Program> {
    Program::from_json(&read_text(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn read_programs(paths: &[PathBuf]) -> Result<Vec<(String, Program)>> {
    if paths.is_empty() {
        return Ok(fixture_programs());
    }
    paths
        .iter()
        .map(|p| {
            let name = p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned());
            Ok((name, rename_single_assignment(&read_program(p)?)))
        })
        .collect()
}

fn emit(common: &Common, text: &str) -> Result<()> {
    match &common.output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(common: &Common, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(common, &text)
}

fn emit_program(common: &Common, p: &Program) -> Result<()> {
    let mut text = p.to_json();
    text.push('\n');
    emit(common, &text)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve(args) => solve(args),
        Command::Gen(cmd) => gen(cmd),
        Command::Hist(args) => {
            let h = run_histogram(&args.model.params(args.common.seed), args.trials).map_err(anyhow::Error::from)?;
            Ok(emit_json(&args.common, &h)?)
        }
        Command::Bench(args) => {
            let cap = state_cap(&args.common)?;
            let programs = read_programs(&args.input)?;
            let rows = run_solver_comparison(&programs, &args.greedy.params(args.common.seed), cap)
                .map_err(anyhow::Error::from)?;
            let mut buf = Vec::new();
            write_comparison_csv(&rows, &mut buf).map_err(anyhow::Error::from)?;
            Ok(emit(&args.common, &String::from_utf8(buf).expect("csv is utf-8"))?)
        }
        Command::Grid(args) => {
            let cap = state_cap(&args.common)?;
            let programs = read_programs(&args.input)?;
            let g = run_grid(&programs, &args.betas, &args.etas, args.alpha, args.common.seed, cap)
                .map_err(anyhow::Error::from)?;
            Ok(emit_json(&args.common, &g)?)
        }
        Command::Mop(args) => mop(args),
    }
}

fn solve(args: SolveArgs) -> Result<(), Failure> {
    let cap = state_cap(&args.common)?;
    let p = rename_single_assignment(&read_program(&args.input)?);
    let params = args.greedy.params(args.common.seed);
    params.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let report = match args.solver {
        SolverKind::Btp => solve_btp_forest(&p),
        kind => {
            let inst = build_instance(&p).map_err(anyhow::Error::from)?;
            match kind {
                SolverKind::Local => Ok(solve_local(&inst)),
                SolverKind::Exhaustive => solve_exhaustive(&inst, cap),
                SolverKind::Greedy => solve_greedy(&inst, &params, cap),
                SolverKind::Random => Ok(solve_random(&inst, args.common.seed)),
                SolverKind::Btp => unreachable!(),
            }
        }
    }
    .map_err(anyhow::Error::from)?;
    Ok(emit_json(&args.common, &report.to_record(&p))?)
}

fn gen(cmd: GenCommand) -> Result<(), Failure> {
    match cmd {
        GenCommand::Random { model, common } => {
            let p = gen_random_chlp_program(&model.params(common.seed)).map_err(|e| Failure::Usage(e.to_string()))?;
            Ok(emit_program(&common, &p)?)
        }
        GenCommand::Signed {
            input,
            n,
            p,
            balanced,
            common,
        } => {
            let g = match input {
                Some(path) => serde_json::from_str::<SignedGraph>(&read_text(&path)?)
                    .with_context(|| format!("parsing {}", path.display()))?,
                None => {
                    if !(0.0..=1.0).contains(&p) {
                        return Err(Failure::Usage(format!("--p {p} is not a probability")));
                    }
                    let n = n.expect("clap requires --n without --input");
                    if balanced {
                        balanced_signed_graph(n, p, common.seed)
                    } else {
                        random_signed_graph(n, p, common.seed)
                    }
                }
            };
            Ok(emit_program(&common, &gen_btp_from_signed_graph(&g))?)
        }
        GenCommand::Mopgraph { input, common } => {
            let g: PlainGraph = serde_json::from_str(&read_text(&input)?)
                .with_context(|| format!("parsing {}", input.display()))?;
            Ok(emit_program(&common, &mop_from_graph(&g))?)
        }
        GenCommand::Fixtures { common } => {
            let fixtures = fixture_programs();
            match &common.output {
                Some(dir) => {
                    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                    for (name, p) in &fixtures {
                        let path = dir.join(format!("{name}.json"));
                        fs::write(&path, p.to_json() + "\n")
                            .with_context(|| format!("writing {}", path.display()))?;
                    }
                    Ok(())
                }
                None => {
                    let all: serde_json::Map<String, serde_json::Value> = fixtures
                        .iter()
                        .map(|(name, p)| (name.clone(), serde_json::to_value(p.to_doc()).expect("doc serializes")))
                        .collect();
                    Ok(emit_json(&common, &all)?)
                }
            }
        }
    }
}

fn mop(args: MopArgs) -> Result<(), Failure> {
    let p = rename_single_assignment(&read_program(&args.input)?);
    let residency = match args.residency {
        ResidencyArg::During => Residency::DuringExecution,
        ResidencyArg::After => Residency::AfterExecution,
    };
    let profile = if args.exhaustive {
        mop_exhaustive(&p, args.cap, residency)
    } else {
        let order = match &args.order {
            Some(ids) => order_from_ids(&p, ids).map_err(anyhow::Error::from)?,
            None => (0..p.expressions.len()).collect(),
        };
        lifespan_profile(&p, &order, residency)
    }
    .map_err(anyhow::Error::from)?;
    Ok(emit_json(&args.common, &profile)?)
}
