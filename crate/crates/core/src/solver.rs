//! The probe-point sweep.
//!
//! The probe starts at `⟨F, …, F⟩` and walks the hypercube in depth-first
//! order (F before T, position 1 most significant). At each probe the cache
//! `C` is asked for a containing box, then the clause database `D`. A probe
//! nobody covers is a model and is itself cached. Either way the probe jumps
//! past the covering box, and that box is fed to the resolution array `L`:
//! a box whose last pinned trit is F waits in `L[k]`; one ending in T is
//! resolved with `L[k]`, and the resolvent cascades downward. The run ends
//! once the all-λ box is produced.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::boxes::{contains, resolve, tetris_resolvable, BoxError, BoxRep, Trit};
use crate::clustertrie::{BoxDatabase, CLUSTER_WIDTH};
use crate::cnfio::{clause_to_box, merge_adjacent_clauses, unpermute_point, CnfProblem, OrderingPermutation};
use crate::ordering::{compute_ordering, OrderingStrategy};

/// Minimum λ share a resolvent needs to enter the cache, as an exact
/// fraction in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InsertionRatio {
    num: u64,
    den: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("insertion ratio must be a number in [0, 1], got {0:?}")]
pub struct RatioError(pub String);

impl InsertionRatio {
    pub const DEFAULT: InsertionRatio = InsertionRatio { num: 45, den: 100 };

    pub fn new(num: u64, den: u64) -> Result<Self, RatioError> {
        if den == 0 || num > den {
            return Err(RatioError(format!("{num}/{den}")));
        }
        Ok(InsertionRatio { num, den })
    }

    pub fn zero() -> Self {
        InsertionRatio { num: 0, den: 1 }
    }

    pub fn one() -> Self {
        InsertionRatio { num: 1, den: 1 }
    }

    /// `part / whole >= ratio`, compared exactly.
    pub fn admits(self, part: usize, whole: usize) -> bool {
        part as u128 * u128::from(self.den) >= whole as u128 * u128::from(self.num)
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Default for InsertionRatio {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl fmt::Display for InsertionRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_f64())
    }
}

/// Parses a plain decimal such as `0.45`, `1`, or `.25` without rounding.
impl FromStr for InsertionRatio {
    type Err = RatioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || RatioError(s.to_string());
        let t = s.trim();
        let (int, frac) = t.split_once('.').unwrap_or((t, ""));
        if int.is_empty() && frac.is_empty() {
            return Err(err());
        }
        if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || frac.len() > 18 {
            return Err(err());
        }
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| err())? };
        if int > 1 {
            return Err(err());
        }
        let den = 10u64.pow(frac.len() as u32);
        let frac_val: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| err())? };
        let num = int.checked_mul(den).and_then(|x| x.checked_add(frac_val)).ok_or_else(err)?;
        InsertionRatio::new(num, den).map_err(|_| err())
    }
}

/// How the insertion ratio is measured on a resolvent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InsertionGate {
    /// Share of λ trits among all `n` positions.
    #[default]
    LambdaTrits,
    /// Share of clusters whose four positions are all λ.
    LambdaClusters,
}

/// Which boxes fetched from `D` at a probe are copied into `C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FetchPolicy {
    /// Only the box the probe advances past.
    #[default]
    Chosen,
    /// Every box the database returned.
    All,
}

/// How a cache hit is chosen when several cached boxes contain the probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CacheLookup {
    /// The containing box of smallest index anywhere in the cache.
    #[default]
    Shortest,
    /// The first hit of the per-cluster greedy descent.
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Count,
    Enumerate,
}

/// Where the variable ordering comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderingChoice {
    /// Keep the input numbering.
    Identity,
    Strategy(OrderingStrategy),
    Explicit(OrderingPermutation),
}

impl Default for OrderingChoice {
    fn default() -> Self {
        OrderingChoice::Strategy(OrderingStrategy::GroupedHeuristic)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    pub insertion_ratio: InsertionRatio,
    pub insertion_gate: InsertionGate,
    pub ordering: OrderingChoice,
    pub mode: Mode,
    pub lambda_skip: bool,
    pub fetch_policy: FetchPolicy,
    pub cache_lookup: CacheLookup,
    /// Merge clause pairs `(A ∨ x)`, `(A ∨ ¬x)` into `A` before building `D`.
    pub merge_clauses: bool,
    /// Track where every cached box came from and fail on an unexplained one.
    pub audit: bool,
    pub deadline: Option<Instant>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            insertion_ratio: InsertionRatio::DEFAULT,
            insertion_gate: InsertionGate::default(),
            ordering: OrderingChoice::default(),
            mode: Mode::Count,
            lambda_skip: true,
            fetch_policy: FetchPolicy::default(),
            cache_lookup: CacheLookup::default(),
            merge_clauses: false,
            audit: false,
            deadline: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("timed out after {iterations} iterations with {partial_count} models found")]
    Timeout { partial_count: u128, iterations: u64 },
    #[error("cancelled after {iterations} iterations")]
    Cancelled { iterations: u64 },
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Box(#[from] BoxError),
}

/// Why a box entered the cache.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Database,
    Model,
    Resolution,
}

/// Hooks into a run. All methods default to no-ops.
pub trait Observer {
    /// A model, in original variable numbering (`assignment[v - 1]`).
    /// Called in enumerate mode only.
    fn on_model(&mut self, _assignment: &[bool]) {}
    /// A box was offered to the cache; `stored` is false when a cached box
    /// already contained it.
    fn on_cache_insert(&mut self, _b: &BoxRep, _origin: Origin, _stored: bool) {}
    fn on_resolution(&mut self, _right: &BoxRep, _left: &BoxRep, _result: &BoxRep) {}
    /// End of a loop iteration: the probe that was handled and the cache
    /// after its cascade.
    fn on_iteration(&mut self, _probe: &BoxRep, _cache: &BoxDatabase) {}
    /// Polled once per iteration; returning true cancels the run.
    fn should_stop(&mut self) -> bool {
        false
    }
}

impl Observer for () {}

/// Result of a completed run.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub model_count: u128,
    /// Ordering computation plus database construction.
    pub load_time: Duration,
    pub run_time: Duration,
    pub iterations: u64,
    pub resolutions: u64,
    pub cache_boxes: usize,
    pub database_boxes: usize,
    pub permutation: OrderingPermutation,
}

/// Advances the full point `p` to the next point in depth-first order that
/// `b` does not contain. Returns false when no such point exists.
pub fn advance(b: &BoxRep, p: &mut BoxRep) -> Result<bool, SolveError> {
    if !contains(b, p)? {
        return Err(SolveError::Invariant(format!("advance: {b} does not contain probe {p}")));
    }
    if !p.is_point() {
        return Err(SolveError::Invariant(format!("advance: probe {p} is not a full point")));
    }
    // every completion of p's first k trits is inside b, so only those
    // trits can usefully branch
    let k = b.index().get();
    let trits = p.trits().to_vec();
    let mut trits = trits;
    loop {
        let Some(j) = trits[..k].iter().rposition(|t| *t == Trit::False) else {
            return Ok(false);
        };
        trits[j] = Trit::True;
        trits[j + 1..].fill(Trit::False);
        let next = BoxRep::new(trits.clone());
        if !b.contains_unchecked(&next) {
            *p = next;
            return Ok(true);
        }
    }
}

/// Mutable state of one run: databases, resolution array, probe, count.
pub struct SolverState {
    n: usize,
    database: BoxDatabase,
    cache: BoxDatabase,
    slots: Vec<Option<BoxRep>>,
    probe: BoxRep,
    model_count: u128,
    covered: bool,
    ratio: InsertionRatio,
    gate: InsertionGate,
    lookup: CacheLookup,
    resolutions: u64,
    provenance: Option<HashSet<BoxRep>>,
}

impl SolverState {
    pub fn new(n: usize, config: &SolverConfig) -> Self {
        SolverState {
            n,
            database: BoxDatabase::with_lambda_skip(n, config.lambda_skip),
            cache: BoxDatabase::with_lambda_skip(n, config.lambda_skip),
            slots: vec![None; n + 1],
            probe: BoxRep::all_false(n),
            model_count: 0,
            covered: false,
            ratio: config.insertion_ratio,
            gate: config.insertion_gate,
            lookup: config.cache_lookup,
            resolutions: 0,
            provenance: config.audit.then(HashSet::new),
        }
    }

    pub fn cache(&self) -> &BoxDatabase {
        &self.cache
    }

    pub fn database(&self) -> &BoxDatabase {
        &self.database
    }

    pub fn probe(&self) -> &BoxRep {
        &self.probe
    }

    pub fn model_count(&self) -> u128 {
        self.model_count
    }

    /// True once the all-λ box is in the cache.
    pub fn is_covered(&self) -> bool {
        self.covered
    }

    pub fn slot(&self, k: usize) -> Option<&BoxRep> {
        self.slots[k].as_ref()
    }

    pub fn set_slot(&mut self, k: usize, b: Option<BoxRep>) {
        self.slots[k] = b;
    }

    pub fn resolutions(&self) -> u64 {
        self.resolutions
    }

    /// Adds a clause box to `D`.
    pub fn add_to_database(&mut self, b: &BoxRep) -> Result<(), SolveError> {
        self.database.insert(b).map_err(|e| SolveError::Invariant(e.to_string()))?;
        if let Some(known) = &mut self.provenance {
            known.insert(b.clone());
        }
        Ok(())
    }

    fn cache_insert(&mut self, b: &BoxRep, origin: Origin, obs: &mut impl Observer) -> Result<(), SolveError> {
        if let Some(known) = &self.provenance {
            if !known.contains(b) {
                return Err(SolveError::Invariant(format!("cached box {b} ({origin:?}) has no provenance")));
            }
        }
        let stored = self.cache.insert(b).map_err(|e| SolveError::Invariant(e.to_string()))?;
        if b.is_all_lambda() {
            self.covered = true;
        }
        obs.on_cache_insert(b, origin, stored);
        Ok(())
    }

    /// Whether a resolvent is λ-heavy enough to cache.
    pub fn passes_gate(&self, r: &BoxRep) -> bool {
        match self.gate {
            InsertionGate::LambdaTrits => self.ratio.admits(r.lambda_count(), self.n),
            InsertionGate::LambdaClusters => {
                let clusters: Vec<&[Trit]> = r.trits().chunks(CLUSTER_WIDTH).collect();
                let empty = clusters.iter().filter(|c| c.iter().all(|t| t.is_lambda())).count();
                self.ratio.admits(empty, clusters.len())
            }
        }
    }

    /// Caches a resolvent if it passes the insertion gate.
    pub fn selective_insert(&mut self, r: &BoxRep, obs: &mut impl Observer) -> Result<bool, SolveError> {
        if self.passes_gate(r) {
            self.cache_insert(r, Origin::Resolution, obs)?;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    /// Files `b` into the resolution array, resolving and cascading while
    /// the current box ends in T. Returns the slot the cascade stopped in,
    /// or `None` once the all-λ box is produced.
    pub fn resolve_cascade(&mut self, b: BoxRep, obs: &mut impl Observer) -> Result<Option<usize>, SolveError> {
        let mut current = b;
        loop {
            let k = current.index().get();
            if k == 0 {
                self.cache_insert(&current, Origin::Resolution, obs)?;
                return Ok(None);
            }
            if current.get(k) == Trit::False {
                self.slots[k] = Some(current);
                return Ok(Some(k));
            }
            let left = self.slots[k].take().ok_or_else(|| SolveError::Invariant(format!("no left sibling in L[{k}] for {current}")))?;
            if !tetris_resolvable(&current, &left) {
                return Err(SolveError::Invariant(format!("{current} and L[{k}] = {left} are not resolvable")));
            }
            let r = resolve(&current, &left)?;
            self.resolutions += 1;
            obs.on_resolution(&current, &left, &r);
            if let Some(known) = &mut self.provenance {
                if known.contains(&current) && known.contains(&left) {
                    known.insert(r.clone());
                }
            }
            if !r.is_all_lambda() {
                self.selective_insert(&r, obs)?;
            }
            current = r;
        }
    }

    /// One pass of the main loop. Returns false when the sweep is finished.
    pub fn step(
        &mut self,
        fetch: FetchPolicy,
        enumerate: Option<&OrderingPermutation>,
        obs: &mut impl Observer,
    ) -> Result<bool, SolveError> {
        if self.covered {
            return Ok(false);
        }
        let probe = self.probe.clone();
        let hit = match self.lookup {
            CacheLookup::Shortest => self.cache.contains_shortest(&probe),
            CacheLookup::Greedy => self.cache.contains_query(&probe),
        }
        .map_err(|e| SolveError::Invariant(e.to_string()))?;
        let b = match hit {
            Some(b) => b,
            None => {
                let found = self.database.get_all_containing_boxes(&probe).map_err(|e| SolveError::Invariant(e.to_string()))?;
                if let Some(chosen) = found.iter().min_by_key(|b| b.index()).cloned() {
                    match fetch {
                        FetchPolicy::Chosen => self.cache_insert(&chosen, Origin::Database, obs)?,
                        FetchPolicy::All => {
                            self.cache_insert(&chosen, Origin::Database, obs)?;
                            for b in found.iter().filter(|b| **b != chosen) {
                                self.cache_insert(b, Origin::Database, obs)?;
                            }
                        }
                    }
                    chosen
                } else {
                    self.model_count += 1;
                    if let Some(perm) = enumerate {
                        obs.on_model(&unpermute_point(&probe, perm));
                    }
                    if let Some(known) = &mut self.provenance {
                        known.insert(probe.clone());
                    }
                    self.cache_insert(&probe, Origin::Model, obs)?;
                    probe.clone()
                }
            }
        };
        let mut more = advance(&b, &mut self.probe)?;
        let last = self.resolve_cascade(b, obs)?;
        if let Some(k) = last.filter(|_| more) {
            // a resolvent ending above the branch point already covers the
            // new probe; step over it instead of probing inside it
            let f = self.slots[k].clone().expect("cascade just stored this slot");
            if f.contains_unchecked(&self.probe) {
                more = advance(&f, &mut self.probe)?;
            }
        }
        obs.on_iteration(&probe, &self.cache);
        if !more {
            // nothing left to probe; the cascade has closed the space
            self.covered = true;
        }
        Ok(!self.covered)
    }
}

/// Resolves the configured ordering for `cnf`.
pub fn choose_permutation(cnf: &CnfProblem, choice: &OrderingChoice) -> OrderingPermutation {
    match choice {
        OrderingChoice::Identity => OrderingPermutation::identity(cnf.variable_count),
        OrderingChoice::Strategy(s) => compute_ordering(cnf, *s),
        OrderingChoice::Explicit(p) => p.clone(),
    }
}

/// Counts (and in enumerate mode reports) the models of `cnf`.
pub fn run(cnf: &CnfProblem, config: &SolverConfig) -> Result<Outcome, SolveError> {
    run_with(cnf, config, &mut ())
}

pub fn run_with(cnf: &CnfProblem, config: &SolverConfig, obs: &mut impl Observer) -> Result<Outcome, SolveError> {
    let load_start = Instant::now();
    let merged;
    let cnf = if config.merge_clauses {
        merged = merge_adjacent_clauses(cnf);
        &merged
    } else {
        cnf
    };
    let n = cnf.variable_count;
    let perm = choose_permutation(cnf, &config.ordering);
    if perm.len() != n {
        return Err(SolveError::Invariant(format!("ordering covers {} of {n} variables", perm.len())));
    }

    if n == 0 {
        let model_count = u128::from(cnf.clauses.is_empty());
        if model_count == 1 && config.mode == Mode::Enumerate {
            obs.on_model(&[]);
        }
        return Ok(Outcome {
            model_count,
            load_time: load_start.elapsed(),
            run_time: Duration::ZERO,
            iterations: 0,
            resolutions: 0,
            cache_boxes: 0,
            database_boxes: cnf.clauses.len().min(1),
            permutation: perm,
        });
    }

    let mut state = SolverState::new(n, config);
    for cl in &cnf.clauses {
        state.add_to_database(&clause_to_box(cl, n, &perm))?;
    }
    let load_time = load_start.elapsed();

    let run_start = Instant::now();
    let enumerate = (config.mode == Mode::Enumerate).then_some(&perm);
    let mut iterations: u64 = 0;
    loop {
        if obs.should_stop() {
            return Err(SolveError::Cancelled { iterations });
        }
        if let Some(deadline) = config.deadline {
            if iterations.is_multiple_of(256) && Instant::now() >= deadline {
                return Err(SolveError::Timeout { partial_count: state.model_count, iterations });
            }
        }
        iterations += 1;
        if !state.step(config.fetch_policy, enumerate, obs)? {
            break;
        }
    }

    Ok(Outcome {
        model_count: state.model_count,
        load_time,
        run_time: run_start.elapsed(),
        iterations,
        resolutions: state.resolutions,
        cache_boxes: state.cache.len(),
        database_boxes: state.database.len(),
        permutation: perm,
    })
}

struct ChannelObserver {
    tx: mpsc::SyncSender<Vec<bool>>,
    closed: bool,
}

impl Observer for ChannelObserver {
    fn on_model(&mut self, assignment: &[bool]) {
        if self.tx.send(assignment.to_vec()).is_err() {
            self.closed = true;
        }
    }

    fn should_stop(&mut self) -> bool {
        self.closed
    }
}

/// Runs in enumerate mode on a worker thread, handing models over a
/// bounded queue of `capacity` entries. The solver blocks while the queue
/// is full and stops early if the receiver is dropped.
pub fn spawn_enumeration(
    cnf: CnfProblem,
    config: SolverConfig,
    capacity: usize,
) -> (mpsc::Receiver<Vec<bool>>, thread::JoinHandle<Result<Outcome, SolveError>>) {
    let (tx, rx) = mpsc::sync_channel(capacity);
    let handle = thread::spawn(move || {
        let config = SolverConfig { mode: Mode::Enumerate, ..config };
        let mut obs = ChannelObserver { tx, closed: false };
        run_with(&cnf, &config, &mut obs)
    });
    (rx, handle)
}
