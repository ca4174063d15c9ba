//! Canonical forms for complete Steiner triple systems.
//!
//! Points are labelled by closure: once some points carry labels, every pair
//! of labelled points (taken in label order) names its third point, which is
//! labelled next if it has no label yet. When the closure stops short of the
//! whole system a new generator is individualised, and the search branches
//! over every admissible choice. A leaf's certificate is the quasigroup table
//! read in label order; the canonical form is the smallest certificate.
//!
//! Generators are restricted to the points with the smallest invariant, where
//! a point's invariant is the multiset of cycle types of the pairs through it.
//! The cycle type of a pair `{x, y}` with third point `z` is the list of cycle
//! lengths of the graph on `V ∖ {x, y, z}` whose edges are `{a, x∘a}` and
//! `{a, y∘a}`. Automorphisms found at tied leaves prune sibling branches.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::system::{PartialSts, Point};

const UNLABELLED: u32 = u32::MAX;
const MAX_STORED_AUTOMORPHISMS: usize = 512;

/// Cheap isomorphism invariants.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fingerprint {
    pub order: usize,
    pub blocks: usize,
    /// Each distinct pair cycle type with the number of pairs having it.
    pub cycle_types: Vec<(Vec<u16>, u32)>,
}

/// Equal canonical forms if and only if the systems are isomorphic.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalForm {
    fingerprint: Fingerprint,
    blocks: Vec<[Point; 3]>,
}

impl CanonicalForm {
    pub fn order(&self) -> usize {
        self.fingerprint.order
    }

    pub fn fingerprint(&self) -> &Fingerprint {
        &self.fingerprint
    }

    /// Blocks of the canonically relabelled system, sorted.
    pub fn blocks(&self) -> &[[Point; 3]] {
        &self.blocks
    }
}

fn cycle_type(sts: &PartialSts, x: Point, y: Point, seen: &mut [bool]) -> Vec<u16> {
    let z = sts.third(x, y).expect("complete");
    seen.iter_mut().for_each(|s| *s = false);
    for p in [x, y, z] {
        seen[p as usize] = true;
    }
    let mut lengths = Vec::new();
    for a in 0..sts.order() as Point {
        if seen[a as usize] {
            continue;
        }
        let mut len = 0u16;
        let mut cur = a;
        loop {
            seen[cur as usize] = true;
            let b = sts.third(x, cur).expect("complete");
            seen[b as usize] = true;
            len += 2;
            cur = sts.third(y, b).expect("complete");
            if cur == a {
                break;
            }
        }
        lengths.push(len);
    }
    lengths.sort_unstable();
    lengths
}

/// Pair cycle types indexed by the triangular pair slot, plus per-point classes.
fn invariants(sts: &PartialSts) -> (Fingerprint, Vec<u32>) {
    let v = sts.order();
    let mut seen = vec![false; v];
    let mut pair_types: Vec<(Point, Point, Vec<u16>)> = Vec::with_capacity(v * v.saturating_sub(1) / 2);
    for y in 0..v as Point {
        for x in 0..y {
            pair_types.push((x, y, cycle_type(sts, x, y, &mut seen)));
        }
    }
    let mut distinct: Vec<Vec<u16>> = pair_types.iter().map(|(_, _, t)| t.clone()).collect();
    distinct.sort_unstable();
    let mut cycle_types: Vec<(Vec<u16>, u32)> = Vec::new();
    for t in distinct {
        match cycle_types.last_mut() {
            Some((last, count)) if *last == t => *count += 1,
            _ => cycle_types.push((t, 1)),
        }
    }
    let mut per_point: Vec<Vec<u32>> = vec![Vec::new(); v];
    for (x, y, t) in &pair_types {
        let id = cycle_types.binary_search_by(|(k, _)| k.cmp(t)).expect("present") as u32;
        per_point[*x as usize].push(id);
        per_point[*y as usize].push(id);
    }
    for keys in &mut per_point {
        keys.sort_unstable();
    }
    let mut keys = per_point.clone();
    keys.sort_unstable();
    keys.dedup();
    let class = per_point
        .iter()
        .map(|k| keys.binary_search(k).expect("present") as u32)
        .collect();
    let fp = Fingerprint {
        order: v,
        blocks: sts.num_blocks(),
        cycle_types,
    };
    (fp, class)
}

#[derive(Clone)]
struct Node {
    point_of: Vec<Point>,
    label_of: Vec<u32>,
    cert: Vec<u32>,
    generators: Vec<Point>,
    next_j: usize,
}

impl Node {
    fn label(&mut self, p: Point) {
        self.label_of[p as usize] = self.point_of.len() as u32;
        self.point_of.push(p);
    }
}

struct Leaf {
    cert: Vec<u32>,
    point_of: Vec<Point>,
}

struct Search<'a> {
    sts: &'a PartialSts,
    class: Vec<u32>,
    best: Option<Leaf>,
    automorphisms: Vec<Vec<Point>>,
}

impl Search<'_> {
    fn close(&self, node: &mut Node) {
        while node.next_j < node.point_of.len() {
            let j = node.next_j;
            let pj = node.point_of[j];
            for i in 0..j {
                let z = self.sts.third(node.point_of[i], pj).expect("complete");
                if node.label_of[z as usize] == UNLABELLED {
                    node.label(z);
                }
                node.cert.push(node.label_of[z as usize]);
            }
            node.next_j += 1;
        }
    }

    fn orbit_roots(&self, fixed: &[Point]) -> Vec<usize> {
        let v = self.sts.order();
        let mut parent: Vec<usize> = (0..v).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for sigma in &self.automorphisms {
            if fixed.iter().any(|&g| sigma[g as usize] != g) {
                continue;
            }
            for (x, &sx) in sigma.iter().enumerate() {
                let (a, b) = (find(&mut parent, x), find(&mut parent, sx as usize));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        (0..v).map(|x| find(&mut parent, x)).collect()
    }

    fn explore(&mut self, mut node: Node) {
        self.close(&mut node);
        if let Some(best) = &self.best {
            let len = node.cert.len();
            if node.cert[..] > best.cert[..len] {
                return;
            }
        }
        let v = self.sts.order();
        if node.point_of.len() == v {
            match self.best.as_ref().map(|b| node.cert.cmp(&b.cert)) {
                None | Some(Ordering::Less) => {
                    self.best = Some(Leaf {
                        cert: node.cert,
                        point_of: node.point_of,
                    });
                }
                Some(Ordering::Equal) => {
                    if self.automorphisms.len() < MAX_STORED_AUTOMORPHISMS {
                        let best = self.best.as_ref().expect("compared against best");
                        let mut sigma = vec![0; v];
                        for (k, &p) in best.point_of.iter().enumerate() {
                            sigma[p as usize] = node.point_of[k];
                        }
                        self.automorphisms.push(sigma);
                    }
                }
                Some(Ordering::Greater) => unreachable!("pruned above"),
            }
            return;
        }
        let min_class = (0..v)
            .filter(|&p| node.label_of[p] == UNLABELLED)
            .map(|p| self.class[p])
            .min()
            .expect("unlabelled point remains");
        let candidates: Vec<Point> = (0..v as Point)
            .filter(|&p| node.label_of[p as usize] == UNLABELLED && self.class[p as usize] == min_class)
            .collect();
        let mut explored: Vec<Point> = Vec::new();
        for c in candidates {
            if !explored.is_empty() {
                let roots = self.orbit_roots(&node.generators);
                if explored.iter().any(|&e| roots[e as usize] == roots[c as usize]) {
                    continue;
                }
            }
            let mut child = node.clone();
            child.generators.push(c);
            child.label(c);
            self.explore(child);
            explored.push(c);
        }
    }
}

/// Canonical form of a complete system.
pub fn canonical_form(sts: &PartialSts) -> Result<CanonicalForm> {
    if !sts.is_complete() {
        return Err(Error::Incomplete);
    }
    let v = sts.order();
    let (fingerprint, class) = invariants(sts);
    let mut search = Search {
        sts,
        class,
        best: None,
        automorphisms: Vec::new(),
    };
    let root = Node {
        point_of: Vec::with_capacity(v),
        label_of: vec![UNLABELLED; v],
        cert: Vec::with_capacity(v * v.saturating_sub(1) / 2),
        generators: Vec::new(),
        next_j: 0,
    };
    let label_of: Vec<u32> = if v == 0 {
        Vec::new()
    } else {
        search.explore(root);
        let best = search.best.expect("at least one leaf");
        let mut label_of = vec![0; v];
        for (k, &p) in best.point_of.iter().enumerate() {
            label_of[p as usize] = k as u32;
        }
        label_of
    };
    let mut blocks: Vec<[Point; 3]> = sts
        .blocks()
        .iter()
        .map(|b| {
            let mut t = b.points().map(|p| label_of[p as usize]);
            t.sort_unstable();
            t
        })
        .collect();
    blocks.sort_unstable();
    Ok(CanonicalForm { fingerprint, blocks })
}

/// Isomorphism test: fingerprints first, canonical forms when they agree.
pub fn are_isomorphic(a: &PartialSts, b: &PartialSts) -> Result<bool> {
    if !a.is_complete() || !b.is_complete() {
        return Err(Error::Incomplete);
    }
    if a.order() != b.order() || a.num_blocks() != b.num_blocks() {
        return Ok(false);
    }
    if invariants(a).0 != invariants(b).0 {
        return Ok(false);
    }
    Ok(canonical_form(a)? == canonical_form(b)?)
}
