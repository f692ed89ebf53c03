//! Brute-force references.
//!
//! Everything here is deliberately naive and works from the raw data
//! (literals, trit slices, edge sets) instead of calling into the modules
//! it is used to check.

use thiserror::Error;

use crate::benchgen::{GraphQuerySpec, InputGraph, QueryKind};
use crate::boxes::{BoxRep, Trit};
use crate::cnfio::{Clause, CnfProblem, Lit};

pub const MAX_BRUTE_VARIABLES: usize = 24;
pub const MAX_GRAPH_VERTICES: usize = 64;
pub const MAX_QUERY_SIZE: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{n} variables exceeds the brute-force limit of {MAX_BRUTE_VARIABLES}")]
    TooManyVariables { n: usize },
    #[error("{v} vertices exceeds the oracle limit of {MAX_GRAPH_VERTICES}")]
    GraphTooLarge { v: usize },
    #[error("query size {k} outside the oracle range 2..={MAX_QUERY_SIZE}")]
    QueryUnsupported { k: usize },
}

/// Clause as bit masks over an assignment word (bit `v - 1` is variable `v`).
struct MaskClause {
    pos: u32,
    neg: u32,
}

fn masks(cnf: &CnfProblem) -> Result<Vec<MaskClause>, OracleError> {
    if cnf.variable_count > MAX_BRUTE_VARIABLES {
        return Err(OracleError::TooManyVariables { n: cnf.variable_count });
    }
    Ok(cnf
        .clauses
        .iter()
        .map(|cl| {
            let mut m = MaskClause { pos: 0, neg: 0 };
            for lit in cl.lits() {
                let bit = 1u32 << (lit.var - 1);
                if lit.positive {
                    m.pos |= bit;
                } else {
                    m.neg |= bit;
                }
            }
            m
        })
        .collect())
}

fn satisfies(a: u32, clauses: &[MaskClause]) -> bool {
    clauses.iter().all(|c| a & c.pos != 0 || !a & c.neg != 0)
}

/// Number of satisfying assignments, by truth table.
pub fn brute_count(cnf: &CnfProblem) -> Result<u128, OracleError> {
    let clauses = masks(cnf)?;
    let total = 1u64 << cnf.variable_count;
    Ok((0..total).filter(|&a| satisfies(a as u32, &clauses)).count() as u128)
}

/// All satisfying assignments (`model[v - 1]`), in truth-table order.
pub fn brute_models(cnf: &CnfProblem) -> Result<Vec<Vec<bool>>, OracleError> {
    let clauses = masks(cnf)?;
    let n = cnf.variable_count;
    Ok((0..1u64 << n).map(|a| a as u32).filter(|&a| satisfies(a, &clauses)).map(|a| (0..n).map(|i| a >> i & 1 == 1).collect()).collect())
}

fn covers(outer: &[Trit], inner: &[Trit]) -> bool {
    outer.len() == inner.len() && outer.iter().zip(inner).all(|(o, i)| *o == Trit::Lambda || o == i)
}

/// Boxes containing `q`, in input order.
pub fn linear_containing(boxes: &[BoxRep], q: &BoxRep) -> Vec<BoxRep> {
    boxes.iter().filter(|b| covers(b.trits(), q.trits())).cloned().collect()
}

/// What remains of `boxes` after inserting them one by one into a store
/// that ignores a box already contained by a kept one.
pub fn linear_store(boxes: &[BoxRep]) -> Vec<BoxRep> {
    let mut kept: Vec<BoxRep> = Vec::new();
    for b in boxes {
        if !kept.iter().any(|k| covers(k.trits(), b.trits())) {
            kept.push(b.clone());
        }
    }
    kept
}

fn last_pinned(b: &[Trit]) -> usize {
    b.iter().rposition(|t| *t != Trit::Lambda).map_or(0, |i| i + 1)
}

/// Depth of the four-trit layer holding the box's last pinned trit.
fn layer(b: &[Trit], width: usize) -> usize {
    last_pinned(b).saturating_sub(1) / width
}

/// Containing boxes as a layered store sees them when it stops descending
/// below the first layer that has a hit: a containing box is dropped when
/// another containing box ends in a shallower layer along the same prefix.
pub fn linear_containing_shallowest(stored: &[BoxRep], q: &BoxRep, width: usize) -> Vec<BoxRep> {
    let hits = linear_containing(stored, q);
    hits.iter()
        .filter(|s| {
            let d = layer(s.trits(), width);
            !hits.iter().any(|t| {
                let e = layer(t.trits(), width);
                e < d && t.trits()[..e * width] == s.trits()[..e * width]
            })
        })
        .cloned()
        .collect()
}

/// Resolvent of two clauses clashing on exactly one variable.
pub fn resolve_clauses(a: &Clause, b: &Clause) -> Option<Clause> {
    let clashes: Vec<&Lit> = a.lits().iter().filter(|l| b.lits().contains(&l.negated())).collect();
    if clashes.len() != 1 {
        return None;
    }
    let pivot = clashes[0].var;
    let mut lits: Vec<Lit> = a.lits().iter().chain(b.lits()).filter(|l| l.var != pivot).copied().collect();
    lits.sort();
    lits.dedup();
    Clause::new(lits)
}

/// Counts cliques or paths by checking every k-tuple of vertices. Cliques
/// are counted as increasing tuples; a path and its reversal count once.
pub fn count_subgraphs(g: &InputGraph, spec: &GraphQuerySpec) -> Result<u128, OracleError> {
    let v = g.vertex_count();
    if v > MAX_GRAPH_VERTICES {
        return Err(OracleError::GraphTooLarge { v });
    }
    let k = spec.k;
    if !(2..=MAX_QUERY_SIZE).contains(&k) {
        return Err(OracleError::QueryUnsupported { k });
    }
    let mut adj = vec![vec![false; v]; v];
    for (a, b) in g.edges() {
        adj[a][b] = true;
        adj[b][a] = true;
    }
    let mut count = 0u128;
    let mut tuple = vec![0usize; k];
    let total = v.pow(k as u32);
    for code in 0..total {
        let mut c = code;
        for slot in tuple.iter_mut().rev() {
            *slot = c % v;
            c /= v;
        }
        let ok = match spec.kind {
            QueryKind::Clique => (0..k).all(|i| (i + 1..k).all(|j| tuple[i] < tuple[j] && adj[tuple[i]][tuple[j]])),
            QueryKind::Path => {
                let distinct = (0..k).all(|i| (i + 1..k).all(|j| tuple[i] != tuple[j]));
                distinct && tuple.windows(2).all(|w| adj[w[0]][w[1]]) && tuple[0] < tuple[k - 1]
            }
        };
        if ok {
            count += 1;
        }
    }
    Ok(count)
}
