//! DIMACS CNF reading and writing, clause/box conversion, and variable
//! ordering permutations.

use std::collections::{BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::io::Read;

use thiserror::Error;

use crate::boxes::{BoxRep, Trit};

/// A literal: 1-based variable id with a polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit {
    pub var: u32,
    pub positive: bool,
}

impl Lit {
    pub fn new(var: u32, positive: bool) -> Self {
        Lit { var, positive }
    }

    pub fn from_dimacs(value: i64) -> Option<Self> {
        if value == 0 {
            return None;
        }
        let var = u32::try_from(value.unsigned_abs()).ok()?;
        Some(Lit { var, positive: value > 0 })
    }

    pub fn to_dimacs(self) -> i64 {
        if self.positive {
            i64::from(self.var)
        } else {
            -i64::from(self.var)
        }
    }

    pub fn negated(self) -> Self {
        Lit { var: self.var, positive: !self.positive }
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of literals, kept sorted by variable with no repeats.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Clause {
    lits: Vec<Lit>,
}

impl Clause {
    /// Builds a clause, dropping duplicate literals. Returns `None` for a
    /// tautology (both polarities of one variable).
    pub fn new(lits: impl IntoIterator<Item = Lit>) -> Option<Self> {
        let mut lits: Vec<Lit> = lits.into_iter().collect();
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0].var == w[1].var) {
            return None;
        }
        Some(Clause { lits })
    }

    pub fn from_dimacs(values: &[i64]) -> Option<Self> {
        Clause::new(values.iter().filter_map(|v| Lit::from_dimacs(*v)))
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn contains_var(&self, var: u32) -> bool {
        self.lits.binary_search_by_key(&var, |l| l.var).is_ok()
    }

    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.lits.iter().any(|l| assignment[(l.var - 1) as usize] == l.positive)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lits {
            write!(f, "{l} ")?;
        }
        write!(f, "0")
    }
}

/// A parsed CNF formula.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CnfProblem {
    pub variable_count: usize,
    pub clauses: Vec<Clause>,
    pub comments: Vec<String>,
}

impl CnfProblem {
    pub fn new(variable_count: usize, clauses: Vec<Clause>) -> Self {
        CnfProblem { variable_count, clauses, comments: Vec::new() }
    }

    /// Serializes to DIMACS, comments first.
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            if c.is_empty() {
                out.push_str("c\n");
            } else {
                let _ = writeln!(out, "c {c}");
            }
        }
        let _ = writeln!(out, "p cnf {} {}", self.variable_count, self.clauses.len());
        for cl in &self.clauses {
            let _ = writeln!(out, "{cl}");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("missing \"p cnf\" header")]
    MissingHeader,
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("duplicate header")]
    DuplicateHeader,
    #[error("invalid literal {0:?}")]
    InvalidLiteral(String),
    #[error("literal {lit} out of range for {vars} variables")]
    LiteralOutOfRange { lit: i64, vars: usize },
    #[error("header declares {declared} clauses but {found} were read")]
    ClauseCountMismatch { declared: usize, found: usize },
    #[error("input is not valid UTF-8")]
    Encoding,
    #[error("read failed: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn at(line: usize, kind: ParseErrorKind) -> Self {
        ParseError { line, kind }
    }
}

/// Reads DIMACS CNF from a byte stream.
pub fn parse_dimacs<R: Read>(mut reader: R) -> Result<CnfProblem, ParseError> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes).map_err(|e| ParseError::at(0, ParseErrorKind::Io(e.to_string())))?;
    let text = std::str::from_utf8(&bytes).map_err(|_| ParseError::at(0, ParseErrorKind::Encoding))?;
    parse_dimacs_str(text)
}

/// Reads DIMACS CNF from text.
///
/// Clauses may span lines. Content after a line starting with `%` (SATLIB
/// trailer) is ignored. Tautological clauses count toward the header total
/// but are not retained.
pub fn parse_dimacs_str(text: &str) -> Result<CnfProblem, ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut comments = Vec::new();
    let mut clauses = Vec::new();
    let mut raw_clauses = 0usize;
    let mut pending: Vec<i64> = Vec::new();
    let mut last_line = 0;

    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        last_line = lineno;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('%') {
            break;
        }
        if let Some(rest) = trimmed.strip_prefix('c') {
            if rest.is_empty() || rest.starts_with(char::is_whitespace) {
                comments.push(rest.trim_start().to_string());
                continue;
            }
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(ParseError::at(lineno, ParseErrorKind::DuplicateHeader));
            }
            header = Some(parse_header(trimmed).map_err(|k| ParseError::at(lineno, k))?);
            continue;
        }
        let Some((vars, _)) = header else {
            return Err(ParseError::at(lineno, ParseErrorKind::MissingHeader));
        };
        for tok in trimmed.split_whitespace() {
            let v: i64 = tok.parse().map_err(|_| ParseError::at(lineno, ParseErrorKind::InvalidLiteral(tok.to_string())))?;
            if v == 0 {
                raw_clauses += 1;
                if let Some(cl) = Clause::from_dimacs(&pending) {
                    clauses.push(cl);
                }
                pending.clear();
            } else {
                if v.unsigned_abs() as usize > vars {
                    return Err(ParseError::at(lineno, ParseErrorKind::LiteralOutOfRange { lit: v, vars }));
                }
                pending.push(v);
            }
        }
    }

    let Some((variable_count, declared)) = header else {
        return Err(ParseError::at(last_line.max(1), ParseErrorKind::MissingHeader));
    };
    // unterminated final clause
    if !pending.is_empty() {
        raw_clauses += 1;
        if let Some(cl) = Clause::from_dimacs(&pending) {
            clauses.push(cl);
        }
    }
    if raw_clauses != declared {
        return Err(ParseError::at(last_line, ParseErrorKind::ClauseCountMismatch { declared, found: raw_clauses }));
    }
    Ok(CnfProblem { variable_count, clauses, comments })
}

fn parse_header(line: &str) -> Result<(usize, usize), ParseErrorKind> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
        return Err(ParseErrorKind::MalformedHeader(line.to_string()));
    }
    let vars = parts[2].parse().map_err(|_| ParseErrorKind::MalformedHeader(line.to_string()))?;
    let clauses = parts[3].parse().map_err(|_| ParseErrorKind::MalformedHeader(line.to_string()))?;
    Ok((vars, clauses))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("not a permutation of 1..={n}: {reason}")]
pub struct PermutationError {
    pub n: usize,
    pub reason: String,
}

/// Maps original variable ids to positions in the box ordering and back.
/// Both sides are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderingPermutation {
    forward: Vec<usize>,
    inverse: Vec<u32>,
}

impl OrderingPermutation {
    pub fn identity(n: usize) -> Self {
        OrderingPermutation { forward: (0..=n).collect(), inverse: (0..=n as u32).collect() }
    }

    /// `order[i]` is the variable placed at position `i + 1`.
    pub fn from_order(order: &[u32]) -> Result<Self, PermutationError> {
        let n = order.len();
        let mut forward = vec![0usize; n + 1];
        let mut inverse = vec![0u32; n + 1];
        for (i, &v) in order.iter().enumerate() {
            let vi = v as usize;
            if vi == 0 || vi > n {
                return Err(PermutationError { n, reason: format!("variable {v} out of range") });
            }
            if forward[vi] != 0 {
                return Err(PermutationError { n, reason: format!("variable {v} repeated") });
            }
            forward[vi] = i + 1;
            inverse[i + 1] = v;
        }
        Ok(OrderingPermutation { forward, inverse })
    }

    pub fn len(&self) -> usize {
        self.forward.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Position of variable `var`.
    #[inline]
    pub fn position(&self, var: u32) -> usize {
        self.forward[var as usize]
    }

    /// Variable placed at `pos`.
    #[inline]
    pub fn variable_at(&self, pos: usize) -> u32 {
        self.inverse[pos]
    }

    /// Variables in position order.
    pub fn order(&self) -> &[u32] {
        &self.inverse[1..]
    }
}

/// Negates a clause into the box of assignments it forbids, placed under
/// `perm`: `F` where the variable occurs positively, `T` where negatively,
/// λ elsewhere.
pub fn clause_to_box(cl: &Clause, n: usize, perm: &OrderingPermutation) -> BoxRep {
    let mut b = BoxRep::all_lambda(n);
    for lit in cl.lits() {
        let t = if lit.positive { Trit::False } else { Trit::True };
        b.set(perm.position(lit.var), t);
    }
    b
}

/// Inverse of [`clause_to_box`].
pub fn box_to_clause(b: &BoxRep, perm: &OrderingPermutation) -> Clause {
    let lits = b.trits().iter().enumerate().filter_map(|(i, t)| {
        let var = perm.variable_at(i + 1);
        match t {
            Trit::False => Some(Lit::new(var, true)),
            Trit::True => Some(Lit::new(var, false)),
            Trit::Lambda => None,
        }
    });
    Clause::new(lits).expect("a box never yields a tautology")
}

/// Maps a full point in ordering positions back to an assignment indexed by
/// original variable (`result[v - 1]`).
pub fn unpermute_point(p: &BoxRep, perm: &OrderingPermutation) -> Vec<bool> {
    let mut out = vec![false; p.len()];
    for (i, t) in p.trits().iter().enumerate() {
        out[(perm.variable_at(i + 1) - 1) as usize] = *t == Trit::True;
    }
    out
}

/// Formats an assignment as a solution line body: signed literals in
/// original numbering followed by `0`.
pub fn format_model(assignment: &[bool]) -> String {
    let mut s = String::with_capacity(assignment.len() * 4);
    for (i, v) in assignment.iter().enumerate() {
        let id = i + 1;
        if *v {
            let _ = write!(s, "{id} ");
        } else {
            let _ = write!(s, "-{id} ");
        }
    }
    s.push('0');
    s
}

/// Repeatedly replaces clause pairs `(A ∨ x)`, `(A ∨ ¬x)` by `A` until no
/// such pair remains. Duplicate clauses collapse. The result is logically
/// equivalent to the input.
pub fn merge_adjacent_clauses(cnf: &CnfProblem) -> CnfProblem {
    let mut set: BTreeSet<Clause> = cnf.clauses.iter().cloned().collect();
    loop {
        // key: clause minus one literal, plus that literal's variable
        let mut seen: HashMap<(Vec<Lit>, u32), Clause> = HashMap::new();
        let mut merge = None;
        'scan: for cl in &set {
            for (i, lit) in cl.lits().iter().enumerate() {
                let mut rest = cl.lits().to_vec();
                rest.remove(i);
                let key = (rest, lit.var);
                if let Some(other) = seen.get(&key) {
                    merge = Some((other.clone(), cl.clone(), key.0));
                    break 'scan;
                }
                seen.insert(key, cl.clone());
            }
        }
        let Some((a, b, rest)) = merge else { break };
        set.remove(&a);
        set.remove(&b);
        set.insert(Clause::new(rest).expect("subset of a non-tautology"));
    }
    CnfProblem { variable_count: cnf.variable_count, clauses: set.into_iter().collect(), comments: cnf.comments.clone() }
}
