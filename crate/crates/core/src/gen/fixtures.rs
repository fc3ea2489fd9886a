//! The five reference programs.
//!
//! All use the alphabet `[row, col, block]`, 1000x1000 matrices and one
//! implementation per operator:
//!
//! | op          | tuples (out, in...)                |
//! |-------------|------------------------------------|
//! | `mul`       | `(b,b,b)`                          |
//! | `sum`/`sub` | `(t,t,t)` for every tiling `t`     |
//! | `scale`     | `(t,t)` for every tiling `t`       |
//! | `transpose` | `(r,c)`, `(c,r)`, `(b,b)`          |
//! | `inv`       | `(c,c)`                            |
//!
//! `rand1` and `rand2` are random straight-line programs over the same
//! alphabet with synthetic feasible sets.

use crate::model::{Matrix, Program, ProgramBuilder, Tile, TilingAlphabet};

use super::random::{gen_random_program, RandomProgramParams};

pub const FIXTURE_NAMES: [&str; 5] = ["linreg", "pca3", "powerset", "rand1", "rand2"];

const DIM: u64 = 1000;
const ROW: Tile = Tile(0);
const COL: Tile = Tile(1);
const BLK: Tile = Tile(2);

fn alphabet() -> TilingAlphabet {
    TilingAlphabet::new(["row", "col", "block"]).expect("three distinct names")
}

fn feasible(op: &str) -> Vec<Vec<Tile>> {
    let all_same = |arity: usize| [ROW, COL, BLK].iter().map(|&t| vec![t; arity]).collect();
    match op {
        "mul" => vec![vec![BLK, BLK, BLK]],
        "sum" | "sub" => all_same(3),
        "scale" => all_same(2),
        "transpose" => vec![vec![ROW, COL], vec![COL, ROW], vec![BLK, BLK]],
        "inv" => vec![vec![COL, COL]],
        _ => unreachable!("operator table has no `{op}`"),
    }
}

/// `(out, op, inputs)` rows become expressions `e1, e2, ...`.
fn program(name: &str, rows: &[(&str, &str, &[&str])], outputs: &[&str]) -> Program {
    let mut b = ProgramBuilder::new(alphabet()).dims(DIM, DIM);
    for (i, &(out, op, inputs)) in rows.iter().enumerate() {
        b.expression(&format!("e{}", i + 1), op, out, inputs, 1.0, feasible(op));
    }
    for o in outputs {
        b.output(o);
    }
    b.meta("fixture", name);
    b.build().expect("fixture is well formed")
}

fn linreg() -> Program {
    program(
        "linreg",
        &[
            ("Xt", "transpose", &["X"]),
            ("G", "mul", &["Xt", "X"]),
            ("Gi", "inv", &["G"]),
            ("b", "mul", &["Xt", "y"]),
            ("w", "mul", &["Gi", "b"]),
            ("p", "mul", &["X", "w"]),
            ("r", "sub", &["p", "y"]),
            ("g", "mul", &["Xt", "r"]),
        ],
        &["w", "g"],
    )
}

fn pca3() -> Program {
    program(
        "pca3",
        &[
            ("At", "transpose", &["A"]),
            ("C", "mul", &["At", "A"]),
            ("u1", "mul", &["C", "v0"]),
            ("v1", "scale", &["u1"]),
            ("u2", "mul", &["C", "v1"]),
            ("v2", "scale", &["u2"]),
            ("u3", "mul", &["C", "v2"]),
            ("v3", "scale", &["u3"]),
            ("vt", "transpose", &["v3"]),
            ("Cv", "mul", &["C", "v3"]),
            ("lam", "mul", &["vt", "Cv"]),
        ],
        &["v3", "lam"],
    )
}

fn powerset() -> Program {
    program(
        "powerset",
        &[
            ("A2", "mul", &["A", "A"]),
            ("A3", "mul", &["A2", "A"]),
            ("A4", "mul", &["A3", "A"]),
            ("B2", "mul", &["B", "B"]),
            ("B3", "mul", &["B", "B2"]),
            ("B4", "mul", &["B", "B3"]),
            ("M1", "mul", &["A", "B4"]),
            ("M2", "mul", &["A2", "B3"]),
            ("M3", "mul", &["A3", "B2"]),
            ("M4", "mul", &["A4", "B"]),
            ("S1", "sum", &["M1", "M2"]),
            ("S2", "sum", &["M3", "M4"]),
        ],
        &["S1", "S2"],
    )
}

fn random_fixture(name: &str, inputs: usize, exprs: usize, seed: u64) -> Program {
    let params = RandomProgramParams {
        inputs,
        exprs,
        k: 3,
        tau: 3,
        s: 2,
        seed,
    };
    let p = gen_random_program(&params).expect("fixture parameters are valid");
    let matrices = p
        .matrices
        .into_iter()
        .map(|m| Matrix {
            rows: DIM,
            cols: DIM,
            ..m
        })
        .collect();
    let mut meta = p.meta;
    meta.insert("fixture".into(), name.into());
    Program::new(alphabet(), matrices, p.expressions, meta).expect("fixture is well formed")
}

/// The reference suite, in a fixed order.
pub fn fixture_programs() -> Vec<(String, Program)> {
    vec![
        ("linreg".to_string(), linreg()),
        ("pca3".to_string(), pca3()),
        ("powerset".to_string(), powerset()),
        ("rand1".to_string(), random_fixture("rand1", 4, 10, 11)),
        ("rand2".to_string(), random_fixture("rand2", 3, 8, 12)),
    ]
}
