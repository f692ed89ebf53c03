//! Graph pattern counting encoded as #SAT.
//!
//! A query with `k` slots gets `b = ⌈log2 V⌉` variables per slot, holding a
//! vertex id in binary, most significant bit first. Every forbidden
//! combination of slot values becomes one clause that is false exactly on
//! that combination, so the models are exactly the admissible slot
//! assignments.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::cnfio::{merge_adjacent_clauses, Clause, CnfProblem, Lit};

pub const DEFAULT_VARIABLE_CAP: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("graph needs at least 2 vertices, has {0}")]
    TooFewVertices(usize),
    #[error("query size must be at least 2, got {0}")]
    QueryTooSmall(usize),
    #[error("encoding needs {needed} variables, cap is {cap}")]
    TooManyVariables { needed: usize, cap: usize },
}

/// Undirected simple graph on vertices `0..vertex_count`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InputGraph {
    vertex_count: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl InputGraph {
    pub fn new(vertex_count: usize) -> Self {
        InputGraph { vertex_count, edges: BTreeSet::new() }
    }

    /// Builds a graph from an edge iterator; self-loops are dropped.
    pub fn from_edges(vertex_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = InputGraph::new(vertex_count);
        for (u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    /// Adds `{u, v}`, growing the vertex set if needed. Returns false for
    /// self-loops and already present edges.
    pub fn add_edge(&mut self, u: usize, v: usize) -> bool {
        if u == v {
            return false;
        }
        self.vertex_count = self.vertex_count.max(u.max(v) + 1);
        self.edges.insert((u.min(v), u.max(v)))
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(low, high)` pairs in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn to_edge_list(&self) -> String {
        self.edges.iter().map(|(u, v)| format!("{u} {v}\n")).collect()
    }
}

/// Reads a whitespace separated edge list. Lines starting with `#` are
/// comments. Vertex ids are renumbered densely in order of first
/// appearance; a self-loop still registers its vertex.
pub fn read_edge_list(text: &str) -> Result<InputGraph, GraphError> {
    let mut ids: HashMap<u64, usize> = HashMap::new();
    let mut g = InputGraph::new(0);
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut endpoints = [0usize; 2];
        let mut tokens = line.split_whitespace();
        for slot in &mut endpoints {
            let tok = tokens.next().ok_or_else(|| GraphError::Parse { line: i + 1, message: "expected two vertex ids".into() })?;
            let id: u64 = tok.parse().map_err(|_| GraphError::Parse { line: i + 1, message: format!("invalid vertex id {tok:?}") })?;
            let next = ids.len();
            *slot = *ids.entry(id).or_insert(next);
        }
        if let Some(extra) = tokens.next() {
            return Err(GraphError::Parse { line: i + 1, message: format!("unexpected token {extra:?}") });
        }
        g.vertex_count = ids.len();
        g.add_edge(endpoints[0], endpoints[1]);
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryKind {
    Clique,
    Path,
}

impl QueryKind {
    pub fn name(self) -> &'static str {
        match self {
            QueryKind::Clique => "clique",
            QueryKind::Path => "path",
        }
    }
}

impl fmt::Display for QueryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QueryKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "clique" => Ok(QueryKind::Clique),
            "path" => Ok(QueryKind::Path),
            _ => Err(format!("unknown query kind {s:?} (expected clique or path)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphQuerySpec {
    pub kind: QueryKind,
    pub k: usize,
    pub bits_per_vertex: usize,
}

impl GraphQuerySpec {
    pub fn new(kind: QueryKind, k: usize, g: &InputGraph) -> Result<Self, GraphError> {
        if k < 2 {
            return Err(GraphError::QueryTooSmall(k));
        }
        if g.vertex_count() < 2 {
            return Err(GraphError::TooFewVertices(g.vertex_count()));
        }
        Ok(GraphQuerySpec { kind, k, bits_per_vertex: bits_for(g.vertex_count()) })
    }

    pub fn variable_count(&self) -> usize {
        self.k * self.bits_per_vertex
    }

    /// Slot pairs whose values must be adjacent vertices.
    pub fn slot_pairs(&self) -> Vec<(usize, usize)> {
        match self.kind {
            QueryKind::Clique => (0..self.k).flat_map(|i| (i + 1..self.k).map(move |j| (i, j))).collect(),
            QueryKind::Path => (0..self.k - 1).map(|i| (i, i + 1)).collect(),
        }
    }
}

/// `⌈log2 v⌉`, at least 1.
pub fn bits_for(v: usize) -> usize {
    (usize::BITS - v.saturating_sub(1).leading_zeros()).max(1) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenOptions {
    pub variable_cap: usize,
    /// Merge clause pairs differing in one literal's sign.
    pub merge: bool,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions { variable_cap: DEFAULT_VARIABLE_CAP, merge: false }
    }
}

struct Encoder {
    b: usize,
    seen: HashSet<Clause>,
    clauses: Vec<Clause>,
}

impl Encoder {
    /// Literals false exactly when `slot` holds `value`.
    fn slot_lits(&self, slot: usize, value: usize) -> impl Iterator<Item = Lit> + '_ {
        (0..self.b).map(move |t| {
            let bit = value >> (self.b - 1 - t) & 1;
            Lit::new((slot * self.b + t + 1) as u32, bit == 0)
        })
    }

    fn reject(&mut self, cond: &[(usize, usize)]) {
        let lits: Vec<Lit> = cond.iter().flat_map(|&(s, v)| self.slot_lits(s, v).collect::<Vec<_>>()).collect();
        if let Some(cl) = Clause::new(lits) {
            if self.seen.insert(cl.clone()) {
                self.clauses.push(cl);
            }
        }
    }
}

/// Encodes the query as CNF. The model count equals the number of
/// k-cliques, or of simple k-vertex paths with a path and its reversal
/// counted once.
pub fn generate_cnf(g: &InputGraph, spec: &GraphQuerySpec, opts: &GenOptions) -> Result<CnfProblem, GraphError> {
    let v = g.vertex_count();
    if v < 2 {
        return Err(GraphError::TooFewVertices(v));
    }
    if spec.k < 2 {
        return Err(GraphError::QueryTooSmall(spec.k));
    }
    let needed = spec.variable_count();
    if needed > opts.variable_cap {
        return Err(GraphError::TooManyVariables { needed, cap: opts.variable_cap });
    }
    let b = spec.bits_per_vertex;
    let mut enc = Encoder { b, seen: HashSet::new(), clauses: Vec::new() };
    let pairs = spec.slot_pairs();

    for &(i, j) in &pairs {
        for x in 0..v {
            for y in 0..v {
                if x == y || !g.has_edge(x, y) {
                    enc.reject(&[(i, x), (j, y)]);
                }
            }
        }
    }

    match spec.kind {
        QueryKind::Clique => {
            for &(i, j) in &pairs {
                for x in 0..v {
                    for y in 0..=x {
                        enc.reject(&[(i, x), (j, y)]);
                    }
                }
            }
        }
        QueryKind::Path => {
            let last = spec.k - 1;
            for x in 0..v {
                for y in 0..x {
                    enc.reject(&[(0, x), (last, y)]);
                }
            }
            // adjacency alone allows revisiting a vertex two steps later
            for i in 0..spec.k {
                for j in i + 2..spec.k {
                    for x in 0..v {
                        enc.reject(&[(i, x), (j, x)]);
                    }
                }
            }
        }
    }

    for slot in 0..spec.k {
        for w in v..1usize << b {
            enc.reject(&[(slot, w)]);
        }
    }

    let mut cnf = CnfProblem::new(needed, enc.clauses);
    if opts.merge {
        cnf = merge_adjacent_clauses(&cnf);
    }
    let convention = match spec.kind {
        QueryKind::Clique => "slot values strictly increasing",
        QueryKind::Path => "first endpoint below last, vertices distinct",
    };
    cnf.comments = vec![
        format!("query {} k={}", spec.kind, spec.k),
        format!("vertices {} edges {}", v, g.edge_count()),
        format!("bits per vertex {b}, slot i uses variables i*{b}+1..i*{b}+{b}, msb first"),
        format!("convention: {convention}"),
        format!("merged {}", opts.merge),
    ];
    Ok(cnf)
}

/// Reads slot values back out of a model (`assignment[v - 1]`).
pub fn decode_model(assignment: &[bool], spec: &GraphQuerySpec) -> Vec<usize> {
    let b = spec.bits_per_vertex;
    (0..spec.k).map(|slot| assignment[slot * b..slot * b + b].iter().fold(0usize, |acc, &bit| acc << 1 | usize::from(bit))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{run, SolverConfig};

    fn square_with_chord() -> InputGraph {
        read_edge_list("0 1\n1 2\n2 3\n3 0\n0 2\n").unwrap()
    }

    fn count(g: &InputGraph, kind: QueryKind, k: usize) -> u128 {
        let spec = GraphQuerySpec::new(kind, k, g).unwrap();
        let cnf = generate_cnf(g, &spec, &GenOptions::default()).unwrap();
        run(&cnf, &SolverConfig::default()).unwrap().model_count
    }

    #[test]
    fn reads_edge_lists() {
        let g = read_edge_list("# c\n0 1\n1 0\n").unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (2, 1));
        let g = square_with_chord();
        assert_eq!((g.vertex_count(), g.edge_count()), (4, 5));
        let g = read_edge_list("5 9\n").unwrap();
        assert_eq!((g.vertex_count(), g.edges().collect::<Vec<_>>()), (2, vec![(0, 1)]));
        let g = read_edge_list("3 3\n3 4\n").unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (2, 1));
        assert_eq!(read_edge_list("0 1\n0 x\n"), Err(GraphError::Parse { line: 2, message: "invalid vertex id \"x\"".into() }));
        assert!(matches!(read_edge_list("0\n"), Err(GraphError::Parse { line: 1, .. })));
    }

    #[test]
    fn bit_widths() {
        assert_eq!([2, 3, 4, 5, 8, 9, 64, 65].map(bits_for), [1, 2, 2, 3, 3, 4, 6, 7]);
    }

    #[test]
    fn missing_diagonal_clause() {
        let g = square_with_chord();
        let spec = GraphQuerySpec::new(QueryKind::Clique, 3, &g).unwrap();
        let cnf = generate_cnf(&g, &spec, &GenOptions::default()).unwrap();
        assert_eq!(cnf.variable_count, 6);
        let expected = Clause::from_dimacs(&[1, -2, -3, -4]).unwrap();
        assert!(cnf.clauses.contains(&expected));
    }

    #[test]
    fn small_counts() {
        assert_eq!(count(&square_with_chord(), QueryKind::Clique, 3), 2);
        assert_eq!(count(&InputGraph::from_edges(2, [(0, 1)]), QueryKind::Path, 2), 1);
        assert_eq!(count(&InputGraph::new(4), QueryKind::Clique, 3), 0);
        let k4 = InputGraph::from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert_eq!(count(&k4, QueryKind::Clique, 3), 4);
        assert_eq!(count(&k4, QueryKind::Clique, 4), 1);
        // a path on 4 vertices has two 3-vertex subpaths
        let p4 = InputGraph::from_edges(4, [(0, 1), (1, 2), (2, 3)]);
        assert_eq!(count(&p4, QueryKind::Path, 3), 2);
        assert_eq!(count(&p4, QueryKind::Path, 4), 1);
    }

    #[test]
    fn merging_keeps_counts() {
        let g = square_with_chord();
        let spec = GraphQuerySpec::new(QueryKind::Clique, 3, &g).unwrap();
        let plain = generate_cnf(&g, &spec, &GenOptions::default()).unwrap();
        let merged = generate_cnf(&g, &spec, &GenOptions { merge: true, ..GenOptions::default() }).unwrap();
        assert!(merged.clauses.len() < plain.clauses.len());
        let cfg = SolverConfig::default();
        assert_eq!(run(&merged, &cfg).unwrap().model_count, run(&plain, &cfg).unwrap().model_count);
    }

    #[test]
    fn variable_cap() {
        let g = square_with_chord();
        let spec = GraphQuerySpec::new(QueryKind::Clique, 3, &g).unwrap();
        let opts = GenOptions { variable_cap: 5, ..GenOptions::default() };
        assert_eq!(generate_cnf(&g, &spec, &opts), Err(GraphError::TooManyVariables { needed: 6, cap: 5 }));
        assert_eq!(GraphQuerySpec::new(QueryKind::Clique, 1, &g), Err(GraphError::QueryTooSmall(1)));
        assert_eq!(GraphQuerySpec::new(QueryKind::Clique, 3, &InputGraph::new(1)), Err(GraphError::TooFewVertices(1)));
    }

    #[test]
    fn domain_clauses_exclude_unused_codes() {
        let g = InputGraph::from_edges(3, [(0, 1), (1, 2), (0, 2)]);
        assert_eq!(count(&g, QueryKind::Clique, 3), 1);
        assert_eq!(count(&g, QueryKind::Clique, 2), 3);
        assert_eq!(count(&g, QueryKind::Path, 3), 3);
    }

    #[test]
    fn decodes_models() {
        let spec = GraphQuerySpec { kind: QueryKind::Clique, k: 2, bits_per_vertex: 2 };
        assert_eq!(decode_model(&[false, true, true, false], &spec), vec![1, 2]);
    }
}
