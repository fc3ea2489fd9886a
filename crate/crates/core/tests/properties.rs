mod common;

use std::collections::HashMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tilesolve::cost::{best_tuple, hamming_mismatch, total_cost, COST_EPS};
use tilesolve::gen::{
    gen_btp_forest, gen_btp_from_signed_graph, gen_random_chlp_program, gen_random_program, random_signed_graph,
    RandomModelParams, RandomProgramParams,
};
use tilesolve::instance::{component_partition, connected_components};
use tilesolve::memory::{lifespan_profile, mop_exhaustive, Residency};
use tilesolve::model::{rename_single_assignment, Program, ProgramBuilder, Tile, TilingAlphabet, DEPENDENCIES_KEY};
use tilesolve::solvers::{
    solve_exhaustive, solve_greedy, solve_local, solve_random, GreedyParams, DEFAULT_STATE_CAP,
};
use tilesolve::build_instance;

use common::{brute_force_cost, bsp_min, labeling_cost, max_clique_of_intervals};

type RawEdge = (Vec<usize>, Vec<Vec<u8>>, f64);

fn constraint_program(n: usize, tau: usize, edges: &[RawEdge]) -> Program {
    let mut b = ProgramBuilder::new(TilingAlphabet::numbered(tau).unwrap());
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    for name in &names {
        b.matrix(name);
    }
    for (i, (parts, tuples, w)) in edges.iter().enumerate() {
        let inputs: Vec<&str> = parts[1..].iter().map(|&v| names[v].as_str()).collect();
        let feasible = tuples.iter().map(|t| t.iter().map(|&x| Tile(x)).collect()).collect();
        b.expression(&format!("e{i}"), "op", &names[parts[0]], &inputs, *w, feasible);
    }
    b.meta(DEPENDENCIES_KEY, "none");
    b.build().unwrap()
}

/// Unordered constraint sets with repeats allowed inside an expression.
fn arb_constraints() -> impl Strategy<Value = (usize, usize, Vec<RawEdge>)> {
    (2usize..=6, 1usize..=3).prop_flat_map(|(n, tau)| {
        let edge = (prop::collection::vec(0..n, 1..=3), 1usize..=3, prop::sample::select(vec![0.5, 1.0, 2.0]))
            .prop_flat_map(move |(parts, s, w)| {
                let k = parts.len();
                (
                    Just(parts),
                    prop::collection::vec(prop::collection::vec(0..tau as u8, k), s),
                    Just(w),
                )
            });
        (Just(n), Just(tau), prop::collection::vec(edge, 0..=6))
    })
}

fn arb_program() -> impl Strategy<Value = Program> {
    arb_constraints().prop_map(|(n, tau, edges)| constraint_program(n, tau, &edges))
}

fn arb_labeled() -> impl Strategy<Value = (Program, Vec<u8>)> {
    arb_program().prop_flat_map(|p| {
        let tau = p.tau() as u8;
        let n = p.matrices.len();
        (Just(p), prop::collection::vec(0..tau, n))
    })
}

fn tiles(labels: &[u8]) -> Vec<Tile> {
    labels.iter().map(|&x| Tile(x)).collect()
}

fn straight_line(seed: u64) -> Program {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs = rng.gen_range(2..=3);
    let exprs = rng.gen_range(1..=8);
    let k = rng.gen_range(2..=3);
    let tau = rng.gen_range(1..=3usize);
    let s = rng.gen_range(1..=tau.pow(k as u32).min(3));
    gen_random_program(&RandomProgramParams { inputs, exprs, k, tau, s, seed }).unwrap()
}

/// Programs that may reassign matrices, over a pool of four names.
fn arb_reassigning() -> impl Strategy<Value = Program> {
    prop::collection::vec((0usize..4, prop::collection::vec(0usize..4, 1..=2)), 1..=8).prop_map(|rows| {
        let names = ["A", "B", "C", "D"];
        let mut b = ProgramBuilder::new(TilingAlphabet::numbered(2).unwrap());
        for (i, (out, ins)) in rows.iter().enumerate() {
            let inputs: Vec<&str> = ins.iter().map(|&v| names[v]).collect();
            let arity = inputs.len() + 1;
            b.expression(&format!("e{i}"), &format!("op{i}"), names[*out], &inputs, 1.0, vec![vec![Tile(0); arity]]);
        }
        b.output("A");
        b.build().unwrap()
    })
}

/// Symbolic replay: each expression's result as a term over input names.
fn replay(p: &Program, renamed: bool) -> Vec<String> {
    let mut env: HashMap<usize, String> = HashMap::new();
    let mut terms = Vec::new();
    for e in &p.expressions {
        let args: Vec<String> = e
            .inputs
            .iter()
            .map(|&v| {
                env.get(&v).cloned().unwrap_or_else(|| {
                    let id = p.matrix_id(v);
                    // Fresh versions only ever appear as written matrices.
                    assert!(!renamed || env.contains_key(&v) || !id.contains('_'));
                    id.to_string()
                })
            })
            .collect();
        let term = format!("{}({})", e.op, args.join(","));
        env.insert(e.out, term.clone());
        terms.push(term);
    }
    terms
}

/// Transitive closure of "reads the output of", from raw program data.
fn dependency_closure(p: &Program) -> Vec<Vec<bool>> {
    let m = p.expressions.len();
    let mut before = vec![vec![false; m]; m];
    for (i, ei) in p.expressions.iter().enumerate() {
        for (j, ej) in p.expressions.iter().enumerate() {
            if i != j && ej.inputs.contains(&ei.out) {
                before[i][j] = true;
            }
        }
    }
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                if before[i][k] && before[k][j] {
                    before[i][j] = true;
                }
            }
        }
    }
    before
}

/// A random linear extension, choosing uniformly among ready expressions.
fn random_extension(p: &Program, seed: u64) -> Vec<usize> {
    let before = dependency_closure(p);
    let m = p.expressions.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut placed = vec![false; m];
    let mut order = Vec::with_capacity(m);
    while order.len() < m {
        let ready: Vec<usize> = (0..m)
            .filter(|&e| !placed[e] && (0..m).all(|d| !before[d][e] || placed[d]))
            .collect();
        let e = ready[rng.gen_range(0..ready.len())];
        placed[e] = true;
        order.push(e);
    }
    order
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn cost_bounds_and_oracle_agreement((p, labels) in arb_labeled()) {
        let inst = build_instance(&p).unwrap();
        let t = tiles(&labels);
        let c = total_cost(t.as_slice(), &inst).unwrap();
        let ceiling: f64 = p.expressions.iter().map(|e| e.weight * e.arity() as f64).sum();
        prop_assert!(c.total >= 0.0 && c.total <= ceiling + COST_EPS);
        for (e, ec) in p.expressions.iter().zip(c.per_edge.values()) {
            prop_assert!(ec.mismatch <= e.arity());
        }
        prop_assert!((c.total - labeling_cost(&p, &labels)).abs() < COST_EPS);
    }

    #[test]
    fn label_permutation_invariance(
        (p, labels) in arb_labeled(),
        perm in Just(vec![0u8, 1, 2]).prop_shuffle(),
    ) {
        let tau = p.tau() as u8;
        // Restrict the shuffle of {0,1,2} to a permutation of 0..tau.
        let perm: Vec<u8> = perm.into_iter().filter(|&x| x < tau).collect();
        let mut permuted = p.clone();
        for e in &mut permuted.expressions {
            for tuple in &mut e.feasible {
                for t in tuple.iter_mut() {
                    *t = Tile(perm[t.index()]);
                }
            }
        }
        let moved: Vec<u8> = labels.iter().map(|&x| perm[x as usize]).collect();
        let a = total_cost(tiles(&labels).as_slice(), &build_instance(&p).unwrap()).unwrap();
        let b = total_cost(tiles(&moved).as_slice(), &build_instance(&permuted).unwrap()).unwrap();
        prop_assert_eq!(&a, &b);
        let ea = solve_exhaustive(&build_instance(&p).unwrap(), DEFAULT_STATE_CAP).unwrap().total();
        let eb = solve_exhaustive(&build_instance(&permuted).unwrap(), DEFAULT_STATE_CAP).unwrap().total();
        prop_assert_eq!(ea, eb);
    }

    #[test]
    fn removing_edges_or_adding_tuples_never_costs_more(
        (n, tau, edges) in arb_constraints(),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels: Vec<u8> = (0..n).map(|_| rng.gen_range(0..tau as u8)).collect();
        let full = constraint_program(n, tau, &edges);
        let base = labeling_cost(&full, &labels);
        let t = tiles(&labels);
        prop_assert!((total_cost(t.as_slice(), &build_instance(&full).unwrap()).unwrap().total - base).abs() < COST_EPS);
        if !edges.is_empty() {
            let drop = rng.gen_range(0..edges.len());
            let mut fewer = edges.clone();
            fewer.remove(drop);
            let p = constraint_program(n, tau, &fewer);
            prop_assert!(total_cost(t.as_slice(), &build_instance(&p).unwrap()).unwrap().total <= base + COST_EPS);

            let mut more = edges.clone();
            let k = more[drop].0.len();
            more[drop].1.push((0..k).map(|_| rng.gen_range(0..tau as u8)).collect());
            let p = constraint_program(n, tau, &more);
            let inst = build_instance(&p).unwrap();
            let before = best_tuple(t.as_slice(), &full.expressions[drop]).1;
            let after = best_tuple(t.as_slice(), &inst.program.expressions[drop]).1;
            prop_assert!(after <= before);
        }
    }

    #[test]
    fn cost_decomposes_over_components((p, labels) in arb_labeled()) {
        let inst = build_instance(&p).unwrap();
        let total = total_cost(tiles(&labels).as_slice(), &inst).unwrap().total;
        let comps = connected_components(&inst);
        let mut sum = 0.0;
        let mut seen_vertices = vec![0usize; p.matrices.len()];
        let mut seen_edges = vec![0usize; p.expressions.len()];
        for c in &comps {
            let local: Vec<Tile> = c.vertices.iter().map(|&v| Tile(labels[v])).collect();
            sum += total_cost(local.as_slice(), &c.instance).unwrap().total;
            c.vertices.iter().for_each(|&v| seen_vertices[v] += 1);
            c.edges.iter().for_each(|&e| seen_edges[e] += 1);
        }
        prop_assert!((sum - total).abs() < COST_EPS);
        prop_assert!(seen_vertices.iter().all(|&x| x == 1));
        prop_assert!(seen_edges.iter().all(|&x| x == 1));
    }

    #[test]
    fn partial_cost_grows_with_the_assignment(
        (p, labels) in arb_labeled(),
        mask in any::<u32>(),
        extra in any::<u32>(),
    ) {
        let n = labels.len();
        let partial: Vec<Option<Tile>> = (0..n).map(|v| (mask >> v & 1 == 1).then_some(Tile(labels[v]))).collect();
        let extended: Vec<Option<Tile>> = (0..n)
            .map(|v| partial[v].or(((extra >> v) & 1 == 1).then_some(Tile(labels[v]))))
            .collect();
        let total = tiles(&labels);
        for e in &p.expressions {
            for tuple in &e.feasible {
                let a = hamming_mismatch(partial.as_slice(), e, tuple).unwrap();
                let b = hamming_mismatch(extended.as_slice(), e, tuple).unwrap();
                prop_assert!(a <= b);
                let full = hamming_mismatch(total.as_slice(), e, tuple).unwrap();
                let direct = e.participants().zip(tuple).filter(|(v, t)| labels[*v] != t.0).count();
                prop_assert_eq!(full, direct);
            }
        }
    }

    #[test]
    fn exhaustive_matches_brute_force_and_dominates(p in arb_program(), seed in any::<u64>()) {
        let inst = build_instance(&p).unwrap();
        let exhaustive = solve_exhaustive(&inst, DEFAULT_STATE_CAP).unwrap();
        prop_assert_eq!(exhaustive.total(), brute_force_cost(&p));
        let per_component: u64 = component_partition(&inst)
            .iter()
            .map(|(v, _)| (p.tau() as u64).pow(v.len() as u32))
            .sum();
        prop_assert_eq!(exhaustive.states_examined, per_component);
        let greedy = solve_greedy(&inst, &GreedyParams::default(), DEFAULT_STATE_CAP).unwrap();
        prop_assert!(exhaustive.total() <= greedy.total() + COST_EPS);
        prop_assert!(exhaustive.total() <= solve_local(&inst).total() + COST_EPS);
        prop_assert!(exhaustive.total() <= solve_random(&inst, seed).total() + COST_EPS);
    }

    #[test]
    fn greedy_below_alpha_is_exhaustive(p in arb_program()) {
        let inst = build_instance(&p).unwrap();
        let alpha = (p.tau() as u64).pow(p.matrices.len() as u32);
        let params = GreedyParams { alpha, ..GreedyParams::default() };
        let g = solve_greedy(&inst, &params, DEFAULT_STATE_CAP).unwrap();
        let e = solve_exhaustive(&inst, DEFAULT_STATE_CAP).unwrap();
        prop_assert_eq!(g.labels(), e.labels());
        prop_assert_eq!(g.states_examined, e.states_examined);
    }

    #[test]
    fn solvers_are_deterministic(seed in 0u64..10_000) {
        let p = straight_line(seed);
        let inst = build_instance(&p).unwrap();
        let params = GreedyParams { beta: 2, ..GreedyParams::default() };
        let a = solve_greedy(&inst, &params, DEFAULT_STATE_CAP).unwrap();
        let b = solve_greedy(&inst, &params, DEFAULT_STATE_CAP).unwrap();
        prop_assert_eq!(a.labels(), b.labels());
        prop_assert_eq!(solve_local(&inst).labels(), solve_local(&inst).labels());
        prop_assert_eq!(solve_random(&inst, seed).labels(), solve_random(&inst, seed).labels());
        prop_assert!(solve_exhaustive(&inst, DEFAULT_STATE_CAP).unwrap().total() <= a.total() + COST_EPS);
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn layers_respect_dependencies(seed in 0u64..10_000) {
        let p = straight_line(seed);
        let inst = build_instance(&p).unwrap();
        let before = dependency_closure(&p);
        let m = p.expressions.len();
        for a in 0..m {
            for b in 0..m {
                prop_assert_eq!(inst.precedes(a, b), before[a][b]);
                if before[a][b] {
                    prop_assert!(inst.layer_of[a] < inst.layer_of[b]);
                }
            }
            let depth = inst.expr_pred[a].iter().map(|&d| inst.layer_of[d] + 1).max().unwrap_or(0);
            prop_assert_eq!(inst.layer_of[a], depth);
        }
    }

    #[test]
    fn renaming_preserves_dataflow(p in arb_reassigning()) {
        let renamed = rename_single_assignment(&p);
        prop_assert_eq!(replay(&p, false), replay(&renamed, true));
        prop_assert!(build_instance(&renamed).is_ok());
        prop_assert_eq!(&rename_single_assignment(&renamed), &renamed);
        let outputs: Vec<&str> = renamed.matrices.iter().filter(|m| m.is_output).map(|m| m.id.as_str()).collect();
        prop_assert_eq!(outputs.len(), 1);
    }

    #[test]
    fn forest_programs_give_forests(n in 1usize..60, seed in any::<u64>()) {
        let p = gen_btp_forest(n, seed).unwrap();
        let inst = build_instance(&p).unwrap();
        let components = component_partition(&inst).len();
        prop_assert_eq!(p.expressions.len(), n - components);
    }

    #[test]
    fn peak_matches_interval_clique(seed in 0u64..10_000, order_seed in any::<u64>()) {
        let p = straight_line(seed);
        prop_assume!(p.matrices.len() <= 12);
        let order = random_extension(&p, order_seed);
        let prof = lifespan_profile(&p, &order, Residency::DuringExecution).unwrap();
        let intervals: Vec<[usize; 2]> = prof.intervals.values().copied().collect();
        prop_assert_eq!(prof.kappa, max_clique_of_intervals(&intervals));
    }

    #[test]
    fn peak_is_at_least_the_outputs(seed in 0u64..10_000) {
        let p = straight_line(seed);
        prop_assume!(p.expressions.len() <= 6);
        let outputs = p.matrices.iter().filter(|m| m.is_output).count();
        for residency in [Residency::DuringExecution, Residency::AfterExecution] {
            prop_assert!(mop_exhaustive(&p, None, residency).unwrap().kappa >= outputs);
        }
    }

    #[test]
    fn adjacent_swap_changes_peak_by_touched_matrices(seed in 0u64..10_000, order_seed in any::<u64>()) {
        let p = straight_line(seed);
        let order = random_extension(&p, order_seed);
        let before = dependency_closure(&p);
        let base = lifespan_profile(&p, &order, Residency::DuringExecution).unwrap().kappa as i64;
        for i in 0..order.len().saturating_sub(1) {
            let (e, f) = (order[i], order[i + 1]);
            if before[e][f] {
                continue;
            }
            let mut swapped = order.clone();
            swapped.swap(i, i + 1);
            let kappa = lifespan_profile(&p, &swapped, Residency::DuringExecution).unwrap().kappa as i64;
            let mut touched: Vec<usize> = p.expressions[e].participants().chain(p.expressions[f].participants()).collect();
            touched.sort_unstable();
            touched.dedup();
            prop_assert!((kappa - base).abs() <= touched.len() as i64);
        }
    }

    #[test]
    fn signed_encoding_preserves_optimum(n in 2usize..=8, p in 0.1f64..0.6, seed in any::<u64>()) {
        let g = random_signed_graph(n, p, seed);
        prop_assume!(n + g.edges().len() <= 22);
        let program = gen_btp_from_signed_graph(&g);
        let optimum = solve_exhaustive(&build_instance(&program).unwrap(), DEFAULT_STATE_CAP).unwrap().total();
        prop_assert_eq!(optimum, bsp_min(&g) as f64);
    }
}

/// Each of the 15 pairs of 6 vertices should be drawn equally often.
#[test]
fn random_edges_are_uniform_pairs() {
    const DRAWS: u64 = 10_000;
    // Upper 0.1% point of chi-square with 14 degrees of freedom.
    const CRITICAL: f64 = 36.123;
    let mut counts: HashMap<(usize, usize), u64> = HashMap::new();
    for seed in 0..DRAWS {
        let p = gen_random_chlp_program(&RandomModelParams { n: 6, m: 1, k: 2, tau: 2, s: 1, seed }).unwrap();
        let e = &p.expressions[0];
        let (a, b) = (e.out, e.inputs[0]);
        *counts.entry((a.min(b), a.max(b))).or_default() += 1;
    }
    assert_eq!(counts.len(), 15);
    let expected = DRAWS as f64 / 15.0;
    let chi2: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    assert!(chi2 < CRITICAL, "chi-square {chi2}");
}

#[test]
fn random_instance_matches_brute_force() {
    let p = gen_random_chlp_program(&RandomModelParams { n: 6, m: 5, k: 3, tau: 2, s: 1, seed: 42 }).unwrap();
    let inst = build_instance(&p).unwrap();
    assert_eq!(solve_exhaustive(&inst, DEFAULT_STATE_CAP).unwrap().total(), brute_force_cost(&p));
}
