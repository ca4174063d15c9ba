//! Subsystems of (partial) Steiner triple systems.
//!
//! A subsystem is a point set `S` such that every pair inside `S` lies in a
//! block contained in `S`. Enumeration grows subsystems by closure: any
//! subsystem containing `S ∪ {x}` contains the closure of `S ∪ {x}`, so a
//! breadth-first search over closures starting from the blocks reaches every
//! subsystem. A closure that swallows an uncovered pair can never sit inside a
//! subsystem and is discarded on the spot.

mod canon;

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

pub use canon::{are_isomorphic, canonical_form, CanonicalForm, Fingerprint};

use crate::error::{Error, Result};
use crate::system::{Block, PartialSts, Point};

/// Node budget used by [`enumerate_subsystems`].
pub const DEFAULT_NODE_BUDGET: usize = 2_000_000;

/// A point set of the host on which the host's blocks form a complete system.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubsystemRecord {
    points: Vec<Point>,
    blocks: Vec<Block>,
}

impl SubsystemRecord {
    pub fn order(&self) -> usize {
        self.points.len()
    }

    /// Sorted point set.
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Host blocks inside the point set.
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Order strictly greater than 3.
    pub fn is_nontrivial(&self) -> bool {
        self.order() > 3
    }

    /// The subsystem as a stand-alone complete system on `0..order`, with
    /// points renumbered in increasing order.
    pub fn to_system(&self) -> PartialSts {
        let rank = |p: Point| self.points.binary_search(&p).expect("block inside record") as Point;
        PartialSts::new(
            self.order(),
            self.blocks.iter().map(|b| b.map(rank).expect("distinct").points()),
        )
        .expect("record blocks form a partial system")
    }
}

/// All subsystems of a host up to some order, sorted by `(order, points)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsystemLattice {
    host_order: usize,
    max_order: usize,
    records: Vec<SubsystemRecord>,
    truncated: bool,
    budget_exhausted: bool,
}

impl SubsystemLattice {
    pub fn host_order(&self) -> usize {
        self.host_order
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn records(&self) -> &[SubsystemRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Set when the search stopped short of the full lattice, either because
    /// `max_order` is below the host order or because the node budget ran out.
    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    /// Set only when the node budget ran out; the listing may then miss
    /// subsystems of order at most `max_order`.
    pub fn budget_exhausted(&self) -> bool {
        self.budget_exhausted
    }

    /// Records with `3 < order < host order`.
    pub fn nontrivial_proper(&self) -> impl Iterator<Item = &SubsystemRecord> {
        let host = self.host_order;
        self.records
            .iter()
            .filter(move |r| r.is_nontrivial() && r.order() < host)
    }

    pub fn of_order(&self, k: usize) -> impl Iterator<Item = &SubsystemRecord> {
        self.records.iter().filter(move |r| r.order() == k)
    }
}

/// Limits for [`enumerate_subsystems_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationLimits {
    pub max_order: usize,
    /// Maximum number of closure computations.
    pub node_budget: usize,
}

/// Scratch space for repeated closures on one host.
struct Closer<'a> {
    host: &'a PartialSts,
    member: Vec<bool>,
}

enum Grown {
    Closed(Vec<Point>),
    /// The closure contains a pair covered by no block.
    HitsLeave,
    TooLarge,
}

impl<'a> Closer<'a> {
    fn new(host: &'a PartialSts) -> Closer<'a> {
        Closer {
            host,
            member: vec![false; host.order()],
        }
    }

    /// Closure of `seed`; with `prune` set, stops as soon as an uncovered pair
    /// falls inside, and stops once more than `limit` points are collected.
    fn close(&mut self, seed: impl IntoIterator<Item = Point>, prune: bool, limit: usize) -> Grown {
        let mut members: Vec<Point> = Vec::new();
        let mut queue: Vec<Point> = Vec::new();
        for p in seed {
            if !self.member[p as usize] {
                self.member[p as usize] = true;
                queue.push(p);
            }
        }
        let mut outcome = None;
        'grow: while let Some(p) = queue.pop() {
            for &q in &members {
                match self.host.third(p, q) {
                    Some(z) => {
                        if !self.member[z as usize] {
                            self.member[z as usize] = true;
                            queue.push(z);
                        }
                    }
                    None if prune => {
                        outcome = Some(Grown::HitsLeave);
                        members.push(p);
                        break 'grow;
                    }
                    None => {}
                }
            }
            members.push(p);
            if members.len() + queue.len() > limit {
                outcome = Some(Grown::TooLarge);
                break;
            }
        }
        for &p in members.iter().chain(&queue) {
            self.member[p as usize] = false;
        }
        match outcome {
            Some(o) => o,
            None => {
                members.sort_unstable();
                Grown::Closed(members)
            }
        }
    }
}

/// Smallest superset of `seed` containing the third point of every block
/// that meets it in two points.
pub fn closure(ps: &PartialSts, seed: &[Point]) -> Vec<Point> {
    match Closer::new(ps).close(seed.iter().copied(), false, usize::MAX) {
        Grown::Closed(s) => s,
        _ => unreachable!("unbounded closure without pruning always finishes"),
    }
}

/// The subsystem on `points`, if every pair inside is covered by a block
/// lying inside.
pub fn subsystem_from_points(ps: &PartialSts, points: &[Point]) -> Option<SubsystemRecord> {
    let mut pts = points.to_vec();
    pts.sort_unstable();
    pts.dedup();
    let mut member = vec![false; ps.order()];
    for &p in &pts {
        member[p as usize] = true;
    }
    for (k, &x) in pts.iter().enumerate() {
        for &y in &pts[k + 1..] {
            match ps.third(x, y) {
                Some(z) if member[z as usize] => {}
                _ => return None,
            }
        }
    }
    Some(record_unchecked(ps, pts))
}

fn record_unchecked(ps: &PartialSts, points: Vec<Point>) -> SubsystemRecord {
    let mut blocks = Vec::with_capacity(points.len() * points.len().saturating_sub(1) / 6);
    for (k, &x) in points.iter().enumerate() {
        for &y in &points[k + 1..] {
            if let Some(z) = ps.third(x, y) {
                if z > y {
                    blocks.push(Block::new(x, y, z).expect("distinct"));
                }
            }
        }
    }
    blocks.sort_unstable();
    SubsystemRecord { points, blocks }
}

/// All subsystems of order at least 3 and at most `max_order`, the whole
/// system included when it is complete and `max_order` allows it.
pub fn enumerate_subsystems(ps: &PartialSts, max_order: usize) -> SubsystemLattice {
    enumerate_subsystems_with(
        ps,
        EnumerationLimits {
            max_order,
            node_budget: DEFAULT_NODE_BUDGET,
        },
    )
}

pub fn enumerate_subsystems_with(ps: &PartialSts, limits: EnumerationLimits) -> SubsystemLattice {
    let v = ps.order();
    let max_order = limits.max_order.min(v);
    // a proper subsystem of a complete system has order at most (v - 1) / 2
    let proper_cap = if ps.is_complete() {
        (v.saturating_sub(1) / 2).min(max_order)
    } else {
        max_order
    };

    let mut closer = Closer::new(ps);
    let mut seen: BTreeSet<Vec<Point>> = BTreeSet::new();
    let mut queue: VecDeque<Vec<Point>> = VecDeque::new();
    let mut budget = limits.node_budget;
    let mut budget_exhausted = false;

    if proper_cap >= 3 {
        for b in ps.blocks() {
            let pts = b.points().to_vec();
            if seen.insert(pts.clone()) {
                queue.push_back(pts);
            }
        }
    }
    'bfs: while let Some(s) = queue.pop_front() {
        let mut inside = vec![false; v];
        for &p in &s {
            inside[p as usize] = true;
        }
        for x in 0..v as Point {
            if inside[x as usize] {
                continue;
            }
            if budget == 0 {
                budget_exhausted = true;
                break 'bfs;
            }
            budget -= 1;
            let grown = closer.close(s.iter().copied().chain(core::iter::once(x)), true, proper_cap);
            if let Grown::Closed(t) = grown {
                if t.len() < v && !seen.contains(&t) {
                    seen.insert(t.clone());
                    queue.push_back(t);
                }
            }
        }
    }

    let mut records: Vec<SubsystemRecord> = seen.into_iter().map(|pts| record_unchecked(ps, pts)).collect();
    if ps.is_complete() && v >= 3 && max_order >= v {
        records.push(record_unchecked(ps, (0..v as Point).collect()));
    }
    records.sort_unstable_by(|a, b| (a.order(), &a.points).cmp(&(b.order(), &b.points)));
    SubsystemLattice {
        host_order: v,
        max_order,
        records,
        truncated: budget_exhausted || max_order < v,
        budget_exhausted,
    }
}

/// Nontrivial proper subsystems of `big` that are not subsystems of `base`,
/// where `injection[p]` is the image in `big` of point `p` of `base`.
pub fn new_subsystem_violations(
    big: &PartialSts,
    base: &PartialSts,
    injection: &[Point],
) -> Result<Vec<SubsystemRecord>> {
    const NONE: Point = Point::MAX;
    if injection.len() != base.order() {
        return Err(Error::NotEmbedded);
    }
    let mut preimage = vec![NONE; big.order()];
    for (p, &q) in injection.iter().enumerate() {
        if q as usize >= big.order() || preimage[q as usize] != NONE {
            return Err(Error::NotEmbedded);
        }
        preimage[q as usize] = p as Point;
    }
    for b in base.blocks() {
        let image = b.map(|p| injection[p as usize]).ok_or(Error::NotEmbedded)?;
        if !big.contains_block(&image) {
            return Err(Error::NotEmbedded);
        }
    }
    let cap = if big.is_complete() {
        big.order().saturating_sub(1) / 2
    } else {
        big.order()
    };
    let lattice = enumerate_subsystems(big, cap);
    let violations = lattice
        .nontrivial_proper()
        .filter(|r| {
            let in_base = r.points.iter().all(|&p| preimage[p as usize] != NONE)
                && r.blocks.iter().all(|b| {
                    b.map(|p| preimage[p as usize])
                        .is_some_and(|pre| base.contains_block(&pre))
                });
            !in_base
        })
        .cloned()
        .collect();
    Ok(violations)
}

/// The subsystem whose point set contains `r` and has order at most `2|r|`,
/// if there is one. There is never more than one.
pub fn unique_small_subsystem(ps: &PartialSts, r: &[Point]) -> Option<SubsystemRecord> {
    let mut seed = r.to_vec();
    seed.sort_unstable();
    seed.dedup();
    let limit = 2 * seed.len();
    // every subsystem containing r contains its closure, so the closure is
    // the only candidate
    match Closer::new(ps).close(seed.iter().copied(), true, limit) {
        Grown::Closed(s) => Some(record_unchecked(ps, s)),
        _ => None,
    }
}

/// True iff the complete system has no subsystem of order strictly between
/// 3 and its own order.
pub fn is_subsystem_free(sts: &PartialSts) -> Result<bool> {
    if !sts.is_complete() {
        return Err(Error::Incomplete);
    }
    let cap = sts.order().saturating_sub(1) / 2;
    Ok(enumerate_subsystems(sts, cap).nontrivial_proper().next().is_none())
}

/// True iff no subsystem of `sts` (itself included when complete) is
/// isomorphic to a member of `forbidden`.
pub fn is_class_free(sts: &PartialSts, forbidden: &[PartialSts]) -> Result<bool> {
    for f in forbidden {
        if f.order() <= 3 {
            return Err(Error::TrivialForbidden { order: f.order() });
        }
        if !f.is_complete() {
            return Err(Error::Incomplete);
        }
    }
    let Some(max) = forbidden.iter().map(PartialSts::order).max() else {
        return Ok(true);
    };
    let forms: Vec<CanonicalForm> = forbidden.iter().map(|f| canonical_form(f).expect("complete")).collect();
    let lattice = enumerate_subsystems(sts, max);
    for record in lattice.records() {
        let candidates: Vec<&CanonicalForm> = forms.iter().filter(|f| f.order() == record.order()).collect();
        if candidates.is_empty() {
            continue;
        }
        let form = canonical_form(&record.to_system()).expect("records are complete");
        if candidates.iter().any(|f| **f == form) {
            return Ok(false);
        }
    }
    Ok(true)
}
