//! Ground data model: blocks, partial Steiner triple systems, leaves and the
//! Steiner quasigroup.
//!
//! Points are dense indices `0..order`. Every pair of points is looked up in a
//! flat triangular table that stores the third point of the block covering the
//! pair, so both the "is this pair covered" query and the quasigroup product
//! are a single array read.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

pub type Point = u32;

const UNCOVERED: u32 = u32::MAX;

/// Number of unordered pairs on `n` points.
pub fn pairs(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

#[inline]
fn pair_slot(x: Point, y: Point) -> usize {
    let (lo, hi) = if x < y { (x, y) } else { (y, x) };
    let hi = hi as usize;
    hi * (hi - 1) / 2 + lo as usize
}

/// An unordered triple of distinct points, stored sorted.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Block([Point; 3]);

impl Block {
    /// Returns `None` unless the three points are distinct.
    pub fn new(a: Point, b: Point, c: Point) -> Option<Block> {
        let mut p = [a, b, c];
        p.sort_unstable();
        if p[0] == p[1] || p[1] == p[2] {
            return None;
        }
        Some(Block(p))
    }

    pub fn points(&self) -> [Point; 3] {
        self.0
    }

    pub fn contains(&self, p: Point) -> bool {
        self.0.contains(&p)
    }

    pub fn pairs(&self) -> [(Point, Point); 3] {
        let [a, b, c] = self.0;
        [(a, b), (a, c), (b, c)]
    }

    /// Maps every point through `f` and re-sorts.
    pub fn map(&self, mut f: impl FnMut(Point) -> Point) -> Option<Block> {
        Block::new(f(self.0[0]), f(self.0[1]), f(self.0[2]))
    }
}

impl fmt::Debug for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{},{}}}", self.0[0], self.0[1], self.0[2])
    }
}

/// A partial Steiner triple system: every pair of points lies in at most one
/// block. A complete system is the special case with an empty leave.
#[derive(Clone)]
pub struct PartialSts {
    order: usize,
    blocks: Vec<Block>,
    pair_index: Vec<u32>,
    complete: bool,
    labels: Option<Vec<String>>,
}

impl PartialEq for PartialSts {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.blocks == other.blocks
    }
}

impl Eq for PartialSts {}

impl fmt::Debug for PartialSts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PartialSts")
            .field("order", &self.order)
            .field("complete", &self.complete)
            .field("blocks", &self.blocks)
            .finish()
    }
}

impl PartialSts {
    /// Validates `blocks` and builds the pair index.
    pub fn new<I>(order: usize, blocks: I) -> Result<PartialSts>
    where
        I: IntoIterator<Item = [Point; 3]>,
    {
        let mut pair_index = vec![UNCOVERED; pairs(order)];
        let mut out = Vec::new();
        for raw in blocks {
            let block = Block::new(raw[0], raw[1], raw[2])
                .filter(|b| (b.0[2] as usize) < order)
                .ok_or(Error::BadBlock { block: raw, order })?;
            let [a, b, c] = block.0;
            for (x, y, z) in [(a, b, c), (a, c, b), (b, c, a)] {
                let slot = &mut pair_index[pair_slot(x, y)];
                if *slot != UNCOVERED {
                    return Err(Error::DuplicatePair { a: x, b: y });
                }
                *slot = z;
            }
            out.push(block);
        }
        out.sort_unstable();
        let complete = 3 * out.len() == pairs(order);
        Ok(PartialSts {
            order,
            blocks: out,
            pair_index,
            complete,
            labels: None,
        })
    }

    /// The system on `order` points with no blocks.
    pub fn empty(order: usize) -> PartialSts {
        PartialSts {
            order,
            blocks: Vec::new(),
            pair_index: vec![UNCOVERED; pairs(order)],
            complete: pairs(order) == 0,
            labels: None,
        }
    }

    pub fn from_blocks(order: usize, blocks: &[Block]) -> Result<PartialSts> {
        PartialSts::new(order, blocks.iter().map(|b| b.points()))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Blocks in lexicographic order.
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Attaches external point names. They never take part in any computation.
    pub fn with_labels(mut self, labels: Vec<String>) -> PartialSts {
        if labels.len() == self.order {
            self.labels = Some(labels);
        }
        self
    }

    /// The third point of the block through `x` and `y`, if the pair is covered.
    #[inline]
    pub fn third(&self, x: Point, y: Point) -> Option<Point> {
        if x == y {
            return None;
        }
        match self.pair_index[pair_slot(x, y)] {
            UNCOVERED => None,
            z => Some(z),
        }
    }

    #[inline]
    pub fn covers(&self, x: Point, y: Point) -> bool {
        self.third(x, y).is_some()
    }

    pub fn contains_block(&self, block: &Block) -> bool {
        let [a, b, c] = block.0;
        self.third(a, b) == Some(c)
    }

    /// Number of blocks through each point.
    pub fn replication(&self) -> Vec<usize> {
        let mut r = vec![0; self.order];
        for b in &self.blocks {
            for p in b.0 {
                r[p as usize] += 1;
            }
        }
        r
    }

    /// The graph of pairs covered by no block.
    pub fn leave_graph(&self) -> LeaveGraph {
        let mut edges = Vec::with_capacity(pairs(self.order) - 3 * self.blocks.len());
        for y in 0..self.order as Point {
            for x in 0..y {
                if self.pair_index[pair_slot(x, y)] == UNCOVERED {
                    edges.push((x, y));
                }
            }
        }
        edges.sort_unstable();
        LeaveGraph {
            order: self.order,
            edges,
        }
    }

    /// The Steiner quasigroup product: `x∘x = x`, otherwise the third point of
    /// the block through `x` and `y`.
    pub fn quasigroup_op(&self, x: Point, y: Point) -> Result<Point> {
        if !self.complete {
            return Err(Error::Incomplete);
        }
        if x == y {
            return Ok(x);
        }
        Ok(self.third(x, y).expect("complete system covers every pair"))
    }

    /// Image of the system under the bijection `perm` (point `p` goes to `perm[p]`).
    pub fn relabel(&self, perm: &[Point]) -> Result<PartialSts> {
        if perm.len() != self.order {
            return Err(Error::NotBijective);
        }
        let mut seen = vec![false; self.order];
        for &p in perm {
            let p = p as usize;
            if p >= self.order || seen[p] {
                return Err(Error::NotBijective);
            }
            seen[p] = true;
        }
        let blocks = self
            .blocks
            .iter()
            .map(|b| b.map(|p| perm[p as usize]).expect("bijection keeps points distinct").0);
        let mut out = PartialSts::new(self.order, blocks)?;
        if let Some(labels) = &self.labels {
            let mut moved = vec![String::new(); self.order];
            for (p, name) in labels.iter().enumerate() {
                moved[perm[p] as usize] = name.clone();
            }
            out.labels = Some(moved);
        }
        Ok(out)
    }

    /// The same blocks on a larger point set; the new points are isolated.
    pub fn pad(&self, order: usize) -> PartialSts {
        assert!(order >= self.order, "padding cannot shrink a system");
        PartialSts::from_blocks(order, &self.blocks).expect("padding keeps blocks valid")
    }

    /// Union of `a` and `b` with the points of `b` listed in `identification`
    /// merged into their partners in `a`.
    ///
    /// `identification` holds `(point of a, point of b)` pairs. Points of `a`
    /// keep their indices; the remaining points of `b` follow in increasing
    /// order. Blocks present in both systems are kept once.
    pub fn glued_union(a: &PartialSts, b: &PartialSts, identification: &[(Point, Point)]) -> Result<Glued> {
        const UNSET: Point = Point::MAX;
        let mut right_map = vec![UNSET; b.order];
        let mut used_left = vec![false; a.order];
        for &(pa, pb) in identification {
            if pa as usize >= a.order || pb as usize >= b.order {
                return Err(Error::BadIdentification(alloc::format!(
                    "pair ({pa}, {pb}) is out of range"
                )));
            }
            if used_left[pa as usize] || right_map[pb as usize] != UNSET {
                return Err(Error::BadIdentification(alloc::format!(
                    "pair ({pa}, {pb}) reuses a point"
                )));
            }
            used_left[pa as usize] = true;
            right_map[pb as usize] = pa;
        }
        let mut next = a.order as Point;
        for slot in right_map.iter_mut().filter(|s| **s == UNSET) {
            *slot = next;
            next += 1;
        }
        let mut blocks: Vec<Block> = a.blocks.clone();
        blocks.extend(
            b.blocks
                .iter()
                .map(|blk| blk.map(|p| right_map[p as usize]).expect("injective map")),
        );
        blocks.sort_unstable();
        blocks.dedup();
        let system = PartialSts::from_blocks(next as usize, &blocks)?;
        Ok(Glued { system, right_map })
    }
}

/// Result of [`PartialSts::glued_union`]: the merged system and where each point
/// of the right-hand input ended up. The left input keeps its indices.
#[derive(Clone, Debug)]
pub struct Glued {
    pub system: PartialSts,
    pub right_map: Vec<Point>,
}

/// The pairs left uncovered by a partial system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeaveGraph {
    order: usize,
    edges: Vec<(Point, Point)>,
}

impl LeaveGraph {
    /// Edges are normalised to `(low, high)` and sorted; self-loops and
    /// duplicates are dropped.
    pub fn new(order: usize, edges: impl IntoIterator<Item = (Point, Point)>) -> LeaveGraph {
        let mut edges: Vec<_> = edges
            .into_iter()
            .filter(|(x, y)| x != y)
            .map(|(x, y)| if x < y { (x, y) } else { (y, x) })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        LeaveGraph { order, edges }
    }

    pub fn complete_graph(order: usize) -> LeaveGraph {
        PartialSts::empty(order).leave_graph()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn edges(&self) -> &[(Point, Point)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, x: Point, y: Point) -> bool {
        let e = if x < y { (x, y) } else { (y, x) };
        self.edges.binary_search(&e).is_ok()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.order];
        for &(x, y) in &self.edges {
            d[x as usize] += 1;
            d[y as usize] += 1;
        }
        d
    }

    pub fn adjacency(&self) -> Vec<Vec<Point>> {
        let mut adj = vec![Vec::new(); self.order];
        for &(x, y) in &self.edges {
            adj[x as usize].push(y);
            adj[y as usize].push(x);
        }
        adj
    }
}
