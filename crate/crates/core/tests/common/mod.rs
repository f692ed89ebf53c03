#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;

use tetris_count::benchgen::InputGraph;
use tetris_count::boxes::{BoxRep, Trit};
use tetris_count::cnfio::{Clause, CnfProblem, Lit};

/// Random CNF with `n` variables, `m` clauses, widths in `1..=max_width`
/// (capped at `n`). Tautologies cannot occur since variables are distinct.
pub fn random_cnf(rng: &mut impl Rng, n: usize, m: usize, max_width: usize) -> CnfProblem {
    let vars: Vec<u32> = (1..=n as u32).collect();
    let clauses = (0..m)
        .map(|_| {
            let w = rng.gen_range(1..=max_width.min(n));
            let lits = vars.choose_multiple(rng, w).map(|&v| Lit::new(v, rng.gen()));
            Clause::new(lits).expect("distinct variables")
        })
        .collect();
    CnfProblem::new(n, clauses)
}

/// Random box, λ with probability `lambda`.
pub fn random_box(rng: &mut impl Rng, n: usize, lambda: f64) -> BoxRep {
    BoxRep::new(
        (0..n)
            .map(|_| {
                if rng.gen_bool(lambda) {
                    Trit::Lambda
                } else if rng.gen() {
                    Trit::True
                } else {
                    Trit::False
                }
            })
            .collect(),
    )
}

pub fn random_point(rng: &mut impl Rng, n: usize) -> BoxRep {
    random_box(rng, n, 0.0)
}

pub fn random_graph(rng: &mut impl Rng, v: usize, p: f64) -> InputGraph {
    let mut g = InputGraph::new(v);
    for a in 0..v {
        for b in a + 1..v {
            if rng.gen_bool(p) {
                g.add_edge(a, b);
            }
        }
    }
    g
}

pub fn sorted(mut v: Vec<BoxRep>) -> Vec<BoxRep> {
    v.sort();
    v
}

/// All-interval series of length `s`: position variables `p(i, v)` (slot
/// `i` holds pitch `v`) then interval variables `d(i, j)` (step `i` has
/// size `j`), each with exactly-one constraints in both directions, and
/// clauses tying each pair of neighbouring pitches to their interval.
pub fn all_interval_series(s: usize) -> CnfProblem {
    let p = |i: usize, v: usize| (i * s + v + 1) as u32;
    let base = (s * s) as u32;
    let d = |i: usize, j: usize| base + (i * (s - 1) + (j - 1) + 1) as u32;
    let mut clauses = Vec::new();
    let exactly_one = |vars: Vec<u32>, clauses: &mut Vec<Clause>| {
        clauses.push(Clause::new(vars.iter().map(|&v| Lit::new(v, true))).unwrap());
        for a in 0..vars.len() {
            for b in a + 1..vars.len() {
                clauses.push(Clause::new([Lit::new(vars[a], false), Lit::new(vars[b], false)]).unwrap());
            }
        }
    };
    for i in 0..s {
        exactly_one((0..s).map(|v| p(i, v)).collect(), &mut clauses);
    }
    for v in 0..s {
        exactly_one((0..s).map(|i| p(i, v)).collect(), &mut clauses);
    }
    for i in 0..s - 1 {
        exactly_one((1..s).map(|j| d(i, j)).collect(), &mut clauses);
    }
    for j in 1..s {
        exactly_one((0..s - 1).map(|i| d(i, j)).collect(), &mut clauses);
    }
    for i in 0..s - 1 {
        for a in 0..s {
            for b in 0..s {
                if a != b {
                    let j = a.abs_diff(b);
                    clauses.push(Clause::new([Lit::new(p(i, a), false), Lit::new(p(i + 1, b), false), Lit::new(d(i, j), true)]).unwrap());
                }
            }
        }
    }
    CnfProblem::new(s * s + (s - 1) * (s - 1), clauses)
}

/// Permutations of `0..s` whose neighbour differences are all distinct.
pub fn count_all_interval_series(s: usize) -> u128 {
    fn go(seq: &mut Vec<usize>, used: &mut [bool], diffs: &mut [bool], s: usize) -> u128 {
        if seq.len() == s {
            return 1;
        }
        let mut total = 0;
        for v in 0..s {
            if used[v] {
                continue;
            }
            let diff = seq.last().map(|&l: &usize| l.abs_diff(v));
            if let Some(dv) = diff {
                if diffs[dv] {
                    continue;
                }
                diffs[dv] = true;
            }
            used[v] = true;
            seq.push(v);
            total += go(seq, used, diffs, s);
            seq.pop();
            used[v] = false;
            if let Some(dv) = diff {
                diffs[dv] = false;
            }
        }
        total
    }
    go(&mut Vec::new(), &mut vec![false; s], &mut vec![false; s], s)
}
