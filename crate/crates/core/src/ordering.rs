//! Global variable orderings.
//!
//! High-degree variables go first, and variables that share short clauses
//! are packed into the same four-variable cluster. Five strategies are
//! provided; all ties fall to the smaller variable id so orderings are
//! reproducible.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::cnfio::{CnfProblem, OrderingPermutation};

/// Per-variable degree and pairwise closeness of a formula.
///
/// Closeness of two variables is `1 / (s - 1)` where `s` is the size of the
/// smallest clause containing both. It is kept as the denominator `s - 1`;
/// sums are compared exactly through integer weights scaled by the least
/// common multiple of all denominators present.
#[derive(Debug, Clone)]
pub struct VariableStats {
    degree: Vec<u32>,
    denominators: HashMap<(u32, u32), u32>,
    neighbours: Vec<Vec<u32>>,
    scale: u128,
    exact: bool,
}

/// A sum of closeness values, kept as an exact fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interconnectedness {
    pub numerator: u128,
    pub denominator: u128,
}

impl Interconnectedness {
    pub fn as_f64(self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn key(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl VariableStats {
    pub fn variable_count(&self) -> usize {
        self.degree.len()
    }

    /// Number of clauses containing `var` (1-based).
    pub fn degree(&self, var: u32) -> u32 {
        self.degree[(var - 1) as usize]
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degree
    }

    /// `Some(d)` when the closeness of `a` and `b` is `1/d`.
    pub fn closeness_denominator(&self, a: u32, b: u32) -> Option<u32> {
        self.denominators.get(&key(a, b)).copied()
    }

    pub fn closeness(&self, a: u32, b: u32) -> Option<f64> {
        self.closeness_denominator(a, b).map(|d| 1.0 / f64::from(d))
    }

    /// Number of co-occurring pairs.
    pub fn pair_count(&self) -> usize {
        self.denominators.len()
    }

    /// Variables sharing at least one clause with `var`, ascending.
    pub fn neighbours(&self, var: u32) -> &[u32] {
        &self.neighbours[(var - 1) as usize]
    }

    /// Closeness scaled to an integer; zero for pairs that never co-occur.
    #[inline]
    fn weight(&self, a: u32, b: u32) -> u128 {
        self.closeness_denominator(a, b).map_or(0, |d| self.scale / u128::from(d))
    }

    /// False when the denominators' common multiple overflowed and weights
    /// were rounded down.
    pub fn weights_exact(&self) -> bool {
        self.exact
    }
}

/// Degrees and closeness of every variable in `cnf`.
pub fn compute_stats(cnf: &CnfProblem) -> VariableStats {
    let n = cnf.variable_count;
    let mut degree = vec![0u32; n];
    let mut denominators: HashMap<(u32, u32), u32> = HashMap::new();
    for cl in &cnf.clauses {
        let lits = cl.lits();
        for l in lits {
            degree[(l.var - 1) as usize] += 1;
        }
        if lits.len() < 2 {
            continue;
        }
        let d = (lits.len() - 1) as u32;
        for (i, a) in lits.iter().enumerate() {
            for b in &lits[i + 1..] {
                denominators.entry(key(a.var, b.var)).and_modify(|e| *e = (*e).min(d)).or_insert(d);
            }
        }
    }
    let mut neighbours = vec![Vec::new(); n];
    for &(a, b) in denominators.keys() {
        neighbours[(a - 1) as usize].push(b);
        neighbours[(b - 1) as usize].push(a);
    }
    for list in &mut neighbours {
        list.sort_unstable();
    }
    let distinct: BTreeSet<u32> = denominators.values().copied().collect();
    // weights of up to n terms are summed, so keep the scale within u64
    let mut scale: u128 = 1;
    let mut exact = true;
    for d in distinct {
        let d = u128::from(d);
        let next = scale / gcd(scale, d) * d;
        if next > u128::from(u64::MAX) {
            exact = false;
            break;
        }
        scale = next;
    }
    if !exact {
        scale = u128::from(u64::MAX);
    }
    VariableStats { degree, denominators, neighbours, scale, exact }
}

/// Sum of closeness over all pairs in `group`; absent pairs contribute 0.
pub fn interconnectedness(group: &[u32], stats: &VariableStats) -> Interconnectedness {
    let mut num: u128 = 0;
    let mut den: u128 = 1;
    for (i, &a) in group.iter().enumerate() {
        for &b in &group[i + 1..] {
            if let Some(d) = stats.closeness_denominator(a, b) {
                let d = u128::from(d);
                let l = den / gcd(den, d) * d;
                num = num * (l / den) + l / d;
                den = l;
                let g = gcd(num, den);
                num /= g;
                den /= g;
            }
        }
    }
    if num == 0 {
        den = 1;
    }
    Interconnectedness { numerator: num, denominator: den }
}

/// Ordering strategy names as accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrderingStrategy {
    NaiveDegree,
    GroupedOptimal,
    GroupedHeuristic,
    Treewidth,
    Minfill,
}

impl OrderingStrategy {
    pub const ALL: [OrderingStrategy; 5] = [
        OrderingStrategy::NaiveDegree,
        OrderingStrategy::GroupedOptimal,
        OrderingStrategy::GroupedHeuristic,
        OrderingStrategy::Treewidth,
        OrderingStrategy::Minfill,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OrderingStrategy::NaiveDegree => "naive-degree",
            OrderingStrategy::GroupedOptimal => "grouped-optimal",
            OrderingStrategy::GroupedHeuristic => "grouped-heuristic",
            OrderingStrategy::Treewidth => "treewidth",
            OrderingStrategy::Minfill => "minfill",
        }
    }
}

impl fmt::Display for OrderingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OrderingStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OrderingStrategy::ALL.into_iter().find(|o| o.name() == s).ok_or_else(|| {
            format!("unknown ordering {s:?}; expected one of naive-degree, grouped-optimal, grouped-heuristic, treewidth, minfill")
        })
    }
}

/// Computes the permutation chosen by `strategy`.
pub fn compute_ordering(cnf: &CnfProblem, strategy: OrderingStrategy) -> OrderingPermutation {
    match strategy {
        OrderingStrategy::NaiveDegree => order_naive_degree(cnf),
        OrderingStrategy::GroupedOptimal => order_grouped_optimal(cnf),
        OrderingStrategy::GroupedHeuristic => order_grouped_heuristic(cnf),
        OrderingStrategy::Treewidth => order_treewidth(cnf),
        OrderingStrategy::Minfill => order_minfill(cnf),
    }
}

fn permutation(order: &[u32]) -> OrderingPermutation {
    OrderingPermutation::from_order(order).expect("strategies emit each variable once")
}

fn by_degree_desc(vars: &mut [u32], stats: &VariableStats) {
    vars.sort_by(|a, b| stats.degree(*b).cmp(&stats.degree(*a)).then(a.cmp(b)));
}

pub fn order_naive_degree(cnf: &CnfProblem) -> OrderingPermutation {
    let stats = compute_stats(cnf);
    let mut vars: Vec<u32> = (1..=cnf.variable_count as u32).collect();
    by_degree_desc(&mut vars, &stats);
    permutation(&vars)
}

/// Repeatedly takes the 4-subset of remaining variables with the largest
/// interconnectedness (then largest degree sum, then smallest ids).
/// Θ(n⁴) per group; meant for small formulas.
pub fn order_grouped_optimal(cnf: &CnfProblem) -> OrderingPermutation {
    let stats = compute_stats(cnf);
    let mut remaining: Vec<u32> = (1..=cnf.variable_count as u32).collect();
    let mut order = Vec::with_capacity(remaining.len());
    while remaining.len() >= 4 {
        let m = remaining.len();
        // (weight, degree sum) maximised; lexicographic scan order settles
        // remaining ties on smallest ids
        let mut best: Option<((u128, u64), [u32; 4])> = None;
        for i in 0..m {
            for j in i + 1..m {
                let wij = stats.weight(remaining[i], remaining[j]);
                for k in j + 1..m {
                    let wijk = wij + stats.weight(remaining[i], remaining[k]) + stats.weight(remaining[j], remaining[k]);
                    for l in k + 1..m {
                        let g = [remaining[i], remaining[j], remaining[k], remaining[l]];
                        let w = wijk + stats.weight(g[0], g[3]) + stats.weight(g[1], g[3]) + stats.weight(g[2], g[3]);
                        let deg: u64 = g.iter().map(|v| u64::from(stats.degree(*v))).sum();
                        if best.as_ref().is_none_or(|(score, _)| (w, deg) > *score) {
                            best = Some(((w, deg), g));
                        }
                    }
                }
            }
        }
        let (_, mut group) = best.expect("at least one 4-subset");
        by_degree_desc(&mut group, &stats);
        order.extend_from_slice(&group);
        remaining.retain(|v| !group.contains(v));
    }
    by_degree_desc(&mut remaining, &stats);
    order.extend(remaining);
    permutation(&order)
}

/// Greedy groups of four: seed with the highest-degree remaining variable,
/// then add the variable closest to the group so far (ties on degree, then
/// id).
pub fn order_grouped_heuristic(cnf: &CnfProblem) -> OrderingPermutation {
    let stats = compute_stats(cnf);
    let n = cnf.variable_count;
    let mut placed = vec![false; n + 1];
    let mut score = vec![0u128; n + 1];
    let mut touched: Vec<u32> = Vec::new();
    let mut order = Vec::with_capacity(n);
    let mut in_group = 0;
    while order.len() < n {
        let pick = (1..=n as u32)
            .filter(|v| !placed[*v as usize])
            .max_by(|a, b| {
                let (sa, sb) = if in_group == 0 { (0, 0) } else { (score[*a as usize], score[*b as usize]) };
                sa.cmp(&sb).then(stats.degree(*a).cmp(&stats.degree(*b))).then(b.cmp(a))
            })
            .expect("a variable remains");
        placed[pick as usize] = true;
        order.push(pick);
        in_group += 1;
        if in_group == 4 {
            in_group = 0;
            for v in touched.drain(..) {
                score[v as usize] = 0;
            }
        } else {
            for &u in stats.neighbours(pick) {
                score[u as usize] += stats.weight(pick, u);
                touched.push(u);
            }
        }
    }
    permutation(&order)
}

/// Min-fill elimination on the primal graph (ties: fewer neighbours, then
/// smaller id). The elimination sequence is the ordering.
pub fn order_minfill(cnf: &CnfProblem) -> OrderingPermutation {
    let stats = compute_stats(cnf);
    permutation(&eliminate(&stats, |fill, degree, v| (fill, degree, v)))
}

/// Min-degree elimination on the primal graph (ties: smaller fill, then
/// smaller id), the usual greedy treewidth upper-bound ordering.
pub fn order_treewidth(cnf: &CnfProblem) -> OrderingPermutation {
    let stats = compute_stats(cnf);
    permutation(&eliminate(&stats, |fill, degree, v| (degree, fill, v)))
}

/// Primal graph as sorted adjacency sets, vertex ids 1-based.
struct EliminationGraph {
    adj: Vec<BTreeSet<u32>>,
    alive: Vec<bool>,
}

impl EliminationGraph {
    fn new(stats: &VariableStats) -> Self {
        let n = stats.variable_count();
        let mut adj = vec![BTreeSet::new(); n + 1];
        for v in 1..=n as u32 {
            adj[v as usize] = stats.neighbours(v).iter().copied().collect();
        }
        EliminationGraph { adj, alive: vec![true; n + 1] }
    }

    /// Edges missing among the neighbours of `v`.
    fn fill(&self, v: u32) -> usize {
        let nb: Vec<u32> = self.adj[v as usize].iter().copied().collect();
        let mut missing = 0;
        for (i, a) in nb.iter().enumerate() {
            let adj_a = &self.adj[*a as usize];
            missing += nb[i + 1..].iter().filter(|b| !adj_a.contains(b)).count();
        }
        missing
    }

    fn eliminate(&mut self, v: u32) -> Vec<u32> {
        let nb: Vec<u32> = std::mem::take(&mut self.adj[v as usize]).into_iter().collect();
        self.alive[v as usize] = false;
        for &a in &nb {
            self.adj[a as usize].remove(&v);
        }
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                self.adj[a as usize].insert(b);
                self.adj[b as usize].insert(a);
            }
        }
        nb
    }
}

fn eliminate<K: Ord>(stats: &VariableStats, rank: impl Fn(usize, usize, u32) -> K) -> Vec<u32> {
    let n = stats.variable_count();
    let mut g = EliminationGraph::new(stats);
    let mut fill: Vec<usize> = (0..=n as u32).map(|v| if v == 0 { 0 } else { g.fill(v) }).collect();
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (1..=n as u32)
            .filter(|v| g.alive[*v as usize])
            .min_by_key(|v| rank(fill[*v as usize], g.adj[*v as usize].len(), *v))
            .expect("a vertex remains");
        let nb = g.eliminate(v);
        order.push(v);
        // fill can change only within two hops of the eliminated vertex
        let mut dirty: BTreeSet<u32> = nb.iter().copied().collect();
        for &a in &nb {
            dirty.extend(g.adj[a as usize].iter().copied());
        }
        for d in dirty {
            fill[d as usize] = g.fill(d);
        }
    }
    order
}
