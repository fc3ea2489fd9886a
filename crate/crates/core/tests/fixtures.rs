use tilesolve::build_instance;
use tilesolve::gen::{fixture_programs, FIXTURE_NAMES};
use tilesolve::solvers::{solve_exhaustive, solve_greedy, solve_local, GreedyParams, DEFAULT_STATE_CAP};

// (name, exhaustive, greedy, local) under default greedy parameters.
const FROZEN: [(&str, f64, f64, f64); 5] = [
    ("linreg", 2.0, 2.0, 7.0),
    ("pca3", 0.0, 0.0, 2.0),
    ("powerset", 0.0, 0.0, 0.0),
    ("rand1", 7.0, 9.0, 12.0),
    ("rand2", 6.0, 6.0, 8.0),
];

#[test]
fn fixture_costs_are_frozen() {
    let programs = fixture_programs();
    assert_eq!(programs.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>(), FIXTURE_NAMES);
    for ((name, p), (frozen, exhaustive, greedy, local)) in programs.iter().zip(FROZEN) {
        assert_eq!(name, frozen);
        let inst = build_instance(p).unwrap();
        assert_eq!(solve_exhaustive(&inst, DEFAULT_STATE_CAP).unwrap().total(), exhaustive, "{name}");
        assert_eq!(
            solve_greedy(&inst, &GreedyParams::default(), DEFAULT_STATE_CAP).unwrap().total(),
            greedy,
            "{name}"
        );
        assert_eq!(solve_local(&inst).total(), local, "{name}");
    }
}
