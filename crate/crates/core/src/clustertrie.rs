//! Set-of-boxes index: a 121-ary trie whose nodes ("clusters") each cover
//! four trit positions.
//!
//! Every sub-box of length 0..=4 has a slot number given by
//! [`phi`](crate::boxes::phi). A cluster keeps one 128-bit mask of the boxes
//! that terminate in it and one of the length-4 prefixes that have a child.
//! A query computes the slot of its own sub-box, fetches the masks of every
//! slot that could contain it from [`LookupTables`], and intersects. One AND
//! per mask answers "which stored boxes here contain me" and "which children
//! can lead to one".
//!
//! Boxes are stored trimmed: a box whose last non-λ trit is at position `k`
//! terminates in cluster `(k - 1) / 4` with its trits up to `k` as the slot.
//! The all-λ box lives in slot 0 of the root.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::OnceLock;

use thiserror::Error;

use crate::boxes::{phi_inverse, phi_unchecked, BoxRep, Trit};

/// Trits per cluster.
pub const CLUSTER_WIDTH: usize = 4;
/// Number of sub-box slots (lengths 0 through 4).
pub const SLOT_COUNT: usize = 121;
/// First slot of a length-4 sub-box; child bits live in `FIRST_CHILD_SLOT..SLOT_COUNT`.
pub const FIRST_CHILD_SLOT: u8 = 40;
/// Slot of the all-λ length-4 prefix.
pub const ALL_LAMBDA_PREFIX: u8 = 40;

const VALID_MASK: u128 = (1u128 << SLOT_COUNT) - 1;
const CHILD_MASK: u128 = VALID_MASK & !((1u128 << FIRST_CHILD_SLOT) - 1);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrieError {
    #[error("box has {got} trits, database expects {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Precomputed containment masks indexed by the slot of a query sub-box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LookupTables {
    /// Bit `j` of entry `v`: slot `j` contains slot `v`.
    pub box_containers: [u128; SLOT_COUNT],
    /// Bit `j` of entry `v`: length-4 prefix `j` contains slot `v`.
    pub child_containers: [u128; SLOT_COUNT],
}

fn slot_len(slot: u8) -> usize {
    match slot {
        0 => 0,
        1..=3 => 1,
        4..=12 => 2,
        13..=39 => 3,
        _ => 4,
    }
}

/// Does the (possibly shorter) sub-box `outer` contain `inner`?
///
/// A stored sub-box stands for itself followed by λs, so it may be shorter
/// than the query but never longer.
fn sub_box_contains(outer: &[Trit], inner: &[Trit]) -> bool {
    outer.len() <= inner.len() && outer.iter().zip(inner).all(|(o, i)| o.covers(*i))
}

/// Builds both tables by testing every (container, query) slot pair.
pub fn build_lookup_tables() -> LookupTables {
    let subs: Vec<Vec<Trit>> = (0..SLOT_COUNT as u8).map(|s| phi_inverse(s).unwrap()).collect();
    let mut box_containers = [0u128; SLOT_COUNT];
    let mut child_containers = [0u128; SLOT_COUNT];
    for (v, query) in subs.iter().enumerate() {
        // children compare over the full four positions; a short query is
        // padded with λ
        let mut padded = query.clone();
        padded.resize(CLUSTER_WIDTH, Trit::Lambda);
        for (j, container) in subs.iter().enumerate() {
            if sub_box_contains(container, query) {
                box_containers[v] |= 1u128 << j;
            }
            if j >= FIRST_CHILD_SLOT as usize && sub_box_contains(container, &padded) {
                child_containers[v] |= 1u128 << j;
            }
        }
    }
    LookupTables { box_containers, child_containers }
}

/// Process-wide tables, built on first use.
pub fn lookup_tables() -> &'static LookupTables {
    static TABLES: OnceLock<LookupTables> = OnceLock::new();
    TABLES.get_or_init(build_lookup_tables)
}

/// A trie node covering trit positions `4·depth + 1 ..= 4·depth + 4`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    boxes_mask: u128,
    children_mask: u128,
    /// Sorted by bit index.
    children: Vec<(u8, u32)>,
    depth: u32,
}

impl Cluster {
    fn new(depth: u32) -> Self {
        Cluster { boxes_mask: 0, children_mask: 0, children: Vec::new(), depth }
    }

    pub fn boxes_mask(&self) -> u128 {
        self.boxes_mask
    }

    pub fn children_mask(&self) -> u128 {
        self.children_mask
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    fn child(&self, bit: u8) -> Option<u32> {
        self.children.binary_search_by_key(&bit, |(b, _)| *b).ok().map(|i| self.children[i].1)
    }

    /// No boxes and only the all-λ child: queries can pass straight through.
    fn is_skippable(&self) -> bool {
        self.boxes_mask == 0 && self.children_mask == 1u128 << ALL_LAMBDA_PREFIX
    }
}

/// Which containing boxes [`BoxDatabase::get_all_containing_boxes_with`]
/// reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GatherMode {
    /// Stop descending below a cluster that already produced a hit.
    StopAtHit,
    /// Visit every matching child regardless of hits.
    Exhaustive,
}

/// The trie of boxes over `n` variables.
#[derive(Debug)]
pub struct BoxDatabase {
    nodes: Vec<Cluster>,
    /// For each node, the first non-skippable node on its all-λ chain.
    shortcut: Vec<u32>,
    n: usize,
    lambda_skip: bool,
    stored: usize,
    intersections: AtomicU64,
}

impl Clone for BoxDatabase {
    fn clone(&self) -> Self {
        BoxDatabase {
            nodes: self.nodes.clone(),
            shortcut: self.shortcut.clone(),
            n: self.n,
            lambda_skip: self.lambda_skip,
            stored: self.stored,
            intersections: AtomicU64::new(self.intersections.load(Ordering::Relaxed)),
        }
    }
}

/// Structural equality; the query counter is ignored.
impl PartialEq for BoxDatabase {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.nodes == other.nodes
    }
}

impl Eq for BoxDatabase {}

struct Query<'a> {
    tables: &'static LookupTables,
    q: &'a BoxRep,
    path: Vec<Trit>,
}

impl BoxDatabase {
    pub fn new(n: usize) -> Self {
        Self::with_lambda_skip(n, true)
    }

    pub fn with_lambda_skip(n: usize, lambda_skip: bool) -> Self {
        BoxDatabase { nodes: vec![Cluster::new(0)], shortcut: vec![0], n, lambda_skip, stored: 0, intersections: AtomicU64::new(0) }
    }

    pub fn variable_count(&self) -> usize {
        self.n
    }

    /// Number of cluster layers a full-length box spans.
    pub fn cluster_layers(&self) -> usize {
        self.n.div_ceil(CLUSTER_WIDTH).max(1)
    }

    /// Clusters currently allocated.
    pub fn cluster_count(&self) -> usize {
        self.nodes.len()
    }

    /// Boxes currently stored.
    pub fn len(&self) -> usize {
        self.stored
    }

    pub fn is_empty(&self) -> bool {
        self.stored == 0
    }

    pub fn lambda_skip_enabled(&self) -> bool {
        self.lambda_skip
    }

    pub fn set_lambda_skip(&mut self, enabled: bool) {
        self.lambda_skip = enabled;
    }

    /// Mask intersections performed by queries so far (one per visited
    /// cluster; the box and child masks count as one fused operation).
    pub fn intersection_count(&self) -> u64 {
        self.intersections.load(Ordering::Relaxed)
    }

    pub fn reset_intersection_count(&self) {
        self.intersections.store(0, Ordering::Relaxed);
    }

    /// Total set bits across every mask of every cluster.
    pub fn set_bit_count(&self) -> u32 {
        self.nodes.iter().map(|c| c.boxes_mask.count_ones() + c.children_mask.count_ones()).sum()
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.nodes
    }

    fn check_len(&self, b: &BoxRep) -> Result<(), TrieError> {
        if b.len() != self.n {
            return Err(TrieError::LengthMismatch { expected: self.n, got: b.len() });
        }
        Ok(())
    }

    /// Inserts `b` unless a stored box already contains it. Returns whether
    /// anything changed.
    pub fn insert(&mut self, b: &BoxRep) -> Result<bool, TrieError> {
        self.check_len(b)?;
        if self.contains_query(b)?.is_some() {
            return Ok(false);
        }
        let k = b.index().get();
        let terminal = if k == 0 { 0 } else { (k - 1) / CLUSTER_WIDTH };
        let trits = b.trits();
        let mut path = Vec::with_capacity(terminal + 1);
        let mut node = 0u32;
        path.push(node);
        for depth in 0..terminal {
            let start = depth * CLUSTER_WIDTH;
            let bit = phi_unchecked(&trits[start..start + CLUSTER_WIDTH]);
            node = match self.nodes[node as usize].child(bit) {
                Some(child) => child,
                None => self.add_child(node, bit, depth as u32 + 1),
            };
            path.push(node);
        }
        let slot = phi_unchecked(&trits[terminal * CLUSTER_WIDTH..k.max(terminal * CLUSTER_WIDTH)]);
        self.nodes[node as usize].boxes_mask |= 1u128 << slot;
        self.stored += 1;
        for &id in path.iter().rev() {
            self.refresh_shortcut(id);
        }
        Ok(true)
    }

    fn add_child(&mut self, parent: u32, bit: u8, depth: u32) -> u32 {
        let id = self.nodes.len() as u32;
        self.nodes.push(Cluster::new(depth));
        self.shortcut.push(id);
        let p = &mut self.nodes[parent as usize];
        let pos = p.children.partition_point(|(b, _)| *b < bit);
        p.children.insert(pos, (bit, id));
        p.children_mask |= 1u128 << bit;
        id
    }

    fn refresh_shortcut(&mut self, id: u32) {
        let c = &self.nodes[id as usize];
        self.shortcut[id as usize] = if c.is_skippable() {
            let child = c.child(ALL_LAMBDA_PREFIX).expect("skippable cluster has the all-λ child");
            self.shortcut[child as usize]
        } else {
            id
        };
    }

    #[inline]
    fn enter(&self, node: u32) -> u32 {
        if self.lambda_skip {
            self.shortcut[node as usize]
        } else {
            node
        }
    }

    fn query_slot(&self, q: &BoxRep, depth: usize) -> usize {
        let start = depth * CLUSTER_WIDTH;
        let end = (start + CLUSTER_WIDTH).min(self.n);
        phi_unchecked(&q.trits()[start..end]) as usize
    }

    /// Intersects the cluster's masks with the query's lookup rows.
    #[inline]
    fn intersect(&self, c: &Cluster, tables: &LookupTables, slot: usize) -> (u128, u128) {
        self.intersections.fetch_add(1, Ordering::Relaxed);
        let boxes = c.boxes_mask & tables.box_containers[slot];
        // tail clusters never hold children
        let children = if c.children_mask == 0 { 0 } else { c.children_mask & tables.child_containers[slot] };
        (boxes, children)
    }

    fn materialize(path: &mut [Trit], depth: usize, slot: u8) -> BoxRep {
        let start = depth * CLUSTER_WIDTH;
        let sub = phi_inverse(slot).expect("valid slot");
        path[start..start + sub.len()].copy_from_slice(&sub);
        let b = BoxRep::new(path.to_vec());
        path[start..start + sub.len()].fill(Trit::Lambda);
        b
    }

    /// Finds a stored box containing `q`, if any.
    ///
    /// Within a cluster the hit with the fewest trailing non-λ trits wins;
    /// otherwise children are searched in increasing slot order and the
    /// first descendant hit is returned.
    pub fn contains_query(&self, q: &BoxRep) -> Result<Option<BoxRep>, TrieError> {
        self.check_len(q)?;
        let mut query = Query { tables: lookup_tables(), q, path: vec![Trit::Lambda; self.n] };
        Ok(self.contains_at(self.enter(0), &mut query))
    }

    fn contains_at(&self, node: u32, query: &mut Query<'_>) -> Option<BoxRep> {
        let c = &self.nodes[node as usize];
        let depth = c.depth as usize;
        let slot = self.query_slot(query.q, depth);
        let (boxes, mut children) = self.intersect(c, query.tables, slot);
        if boxes != 0 {
            let best = boxes.trailing_zeros() as u8;
            return Some(Self::materialize(&mut query.path, depth, best));
        }
        while children != 0 {
            let bit = children.trailing_zeros() as u8;
            children &= children - 1;
            let child = c.child(bit).expect("children mask and links agree");
            let start = depth * CLUSTER_WIDTH;
            query.path[start..start + CLUSTER_WIDTH].copy_from_slice(&phi_inverse(bit).unwrap());
            let found = self.contains_at(self.enter(child), query);
            query.path[start..start + CLUSTER_WIDTH].fill(Trit::Lambda);
            if found.is_some() {
                return found;
            }
        }
        None
    }

    /// Finds a containing box of smallest index across the whole trie.
    ///
    /// Clusters are visited shallowest first, and the search stops once no
    /// unvisited cluster can hold a box with a smaller index than the best
    /// hit so far. Ties go to the first hit found.
    pub fn contains_shortest(&self, q: &BoxRep) -> Result<Option<BoxRep>, TrieError> {
        self.check_len(q)?;
        let tables = lookup_tables();
        // (node, parent entry, child bit taken from the parent)
        let mut visited: Vec<(u32, u32, u8)> = vec![(self.enter(0), u32::MAX, 0)];
        let mut queue: BinaryHeap<Reverse<(u32, u32)>> = BinaryHeap::new();
        queue.push(Reverse((self.nodes[visited[0].0 as usize].depth, 0)));
        let mut best: Option<(usize, u32, u8)> = None;
        while let Some(Reverse((depth, entry))) = queue.pop() {
            let depth = depth as usize;
            if best.is_some_and(|(index, _, _)| index <= depth * CLUSTER_WIDTH) {
                break;
            }
            let node = visited[entry as usize].0;
            let c = &self.nodes[node as usize];
            let (boxes, mut children) = self.intersect(c, tables, self.query_slot(q, depth));
            if boxes != 0 {
                let slot = boxes.trailing_zeros() as u8;
                let index = if slot == 0 { 0 } else { depth * CLUSTER_WIDTH + slot_len(slot) };
                if best.is_none_or(|(b, _, _)| index < b) {
                    best = Some((index, entry, slot));
                }
            }
            if best.is_some_and(|(index, _, _)| index <= (depth + 1) * CLUSTER_WIDTH) {
                continue;
            }
            while children != 0 {
                let bit = children.trailing_zeros() as u8;
                children &= children - 1;
                let child = self.enter(c.child(bit).expect("children mask and links agree"));
                let id = visited.len() as u32;
                visited.push((child, entry, bit));
                queue.push(Reverse((self.nodes[child as usize].depth, id)));
            }
        }
        Ok(best.map(|(_, entry, slot)| {
            let mut path = vec![Trit::Lambda; self.n];
            let mut e = entry;
            while visited[e as usize].1 != u32::MAX {
                let (_, parent, bit) = visited[e as usize];
                let start = self.nodes[visited[parent as usize].0 as usize].depth as usize * CLUSTER_WIDTH;
                path[start..start + CLUSTER_WIDTH].copy_from_slice(&phi_inverse(bit).unwrap());
                e = parent;
            }
            let depth = self.nodes[visited[entry as usize].0 as usize].depth as usize;
            Self::materialize(&mut path, depth, slot)
        }))
    }

    /// All stored boxes containing `q`, in discovery order. Below a cluster
    /// that produced a hit the search does not descend.
    pub fn get_all_containing_boxes(&self, q: &BoxRep) -> Result<Vec<BoxRep>, TrieError> {
        self.get_all_containing_boxes_with(q, GatherMode::StopAtHit)
    }

    pub fn get_all_containing_boxes_with(&self, q: &BoxRep, mode: GatherMode) -> Result<Vec<BoxRep>, TrieError> {
        self.check_len(q)?;
        let mut query = Query { tables: lookup_tables(), q, path: vec![Trit::Lambda; self.n] };
        let mut out = Vec::new();
        self.gather_at(self.enter(0), &mut query, mode, &mut out);
        Ok(out)
    }

    fn gather_at(&self, node: u32, query: &mut Query<'_>, mode: GatherMode, out: &mut Vec<BoxRep>) {
        let c = &self.nodes[node as usize];
        let depth = c.depth as usize;
        let slot = self.query_slot(query.q, depth);
        let (mut boxes, mut children) = self.intersect(c, query.tables, slot);
        let hit = boxes != 0;
        while boxes != 0 {
            let bit = boxes.trailing_zeros() as u8;
            boxes &= boxes - 1;
            out.push(Self::materialize(&mut query.path, depth, bit));
        }
        if hit && mode == GatherMode::StopAtHit {
            return;
        }
        while children != 0 {
            let bit = children.trailing_zeros() as u8;
            children &= children - 1;
            let child = c.child(bit).expect("children mask and links agree");
            let start = depth * CLUSTER_WIDTH;
            query.path[start..start + CLUSTER_WIDTH].copy_from_slice(&phi_inverse(bit).unwrap());
            self.gather_at(self.enter(child), query, mode, out);
            query.path[start..start + CLUSTER_WIDTH].fill(Trit::Lambda);
        }
    }

    /// Every stored box, depth-first in increasing slot order.
    pub fn stored_boxes(&self) -> Vec<BoxRep> {
        let mut out = Vec::with_capacity(self.stored);
        let mut path = vec![Trit::Lambda; self.n];
        self.collect_at(0, &mut path, &mut out);
        out
    }

    fn collect_at(&self, node: u32, path: &mut Vec<Trit>, out: &mut Vec<BoxRep>) {
        let c = &self.nodes[node as usize];
        let depth = c.depth as usize;
        let mut boxes = c.boxes_mask;
        while boxes != 0 {
            let bit = boxes.trailing_zeros() as u8;
            boxes &= boxes - 1;
            out.push(Self::materialize(path, depth, bit));
        }
        for &(bit, child) in &c.children {
            let start = depth * CLUSTER_WIDTH;
            path[start..start + CLUSTER_WIDTH].copy_from_slice(&phi_inverse(bit).unwrap());
            self.collect_at(child, path, out);
            path[start..start + CLUSTER_WIDTH].fill(Trit::Lambda);
        }
    }

    /// Textual listing of every set bit as `depth:slot`, boxes as `B`,
    /// children as `C`, depth-first and indented by depth.
    pub fn debug_dump(&self) -> String {
        let mut out = String::new();
        self.dump_at(0, &mut out);
        out
    }

    fn dump_at(&self, node: u32, out: &mut String) {
        let c = &self.nodes[node as usize];
        let indent = "  ".repeat(c.depth as usize);
        let mut boxes = c.boxes_mask;
        while boxes != 0 {
            let bit = boxes.trailing_zeros();
            boxes &= boxes - 1;
            let _ = writeln!(out, "{indent}B {}:{}", c.depth, bit);
        }
        for &(bit, child) in &c.children {
            let _ = writeln!(out, "{indent}C {}:{}", c.depth, bit);
            self.dump_at(child, out);
        }
    }

    /// Checks the structural invariants; returns a description of the first
    /// violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        for (id, c) in self.nodes.iter().enumerate() {
            if c.boxes_mask & !VALID_MASK != 0 {
                return Err(format!("cluster {id}: box bits beyond slot 120"));
            }
            if c.children_mask & !CHILD_MASK != 0 {
                return Err(format!("cluster {id}: child bit outside 40..=120"));
            }
            let from_links = c.children.iter().fold(0u128, |m, (b, _)| m | 1u128 << b);
            if from_links != c.children_mask {
                return Err(format!("cluster {id}: child links disagree with mask"));
            }
            for &(_, child) in &c.children {
                if self.nodes[child as usize].depth != c.depth + 1 {
                    return Err(format!("cluster {id}: child {child} at wrong depth"));
                }
            }
            let max_slot_len = self.n.saturating_sub(c.depth as usize * CLUSTER_WIDTH).min(CLUSTER_WIDTH);
            let mut boxes = c.boxes_mask;
            while boxes != 0 {
                let bit = boxes.trailing_zeros() as u8;
                boxes &= boxes - 1;
                if slot_len(bit) > max_slot_len {
                    return Err(format!("cluster {id}: slot {bit} longer than the cluster"));
                }
            }
        }
        Ok(())
    }
}
