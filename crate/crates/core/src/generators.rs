//! Test systems: projective and affine triple systems, the Bose and Skolem
//! constructions, and randomised partial systems with a prescribed leave.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::seeded;
use crate::system::{LeaveGraph, PartialSts, Point};

/// Which generator to run, with its parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorSpec {
    Projective(u32),
    Affine(u32),
    Bose(usize),
    Skolem(usize),
    HexagonLeave { order: usize, seed: u64 },
    RandomPartial { order: usize, seed: u64 },
}

impl GeneratorSpec {
    pub fn build(&self) -> Result<PartialSts> {
        match *self {
            GeneratorSpec::Projective(n) => projective(n),
            GeneratorSpec::Affine(n) => affine(n),
            GeneratorSpec::Bose(v) => bose(v),
            GeneratorSpec::Skolem(v) => skolem(v),
            GeneratorSpec::HexagonLeave { order, seed } => partial_with_hexagon_leave(order, seed),
            GeneratorSpec::RandomPartial { order, seed } => Ok(random_partial(order, seed)),
        }
    }
}

/// Points and lines of `PG(n, 2)`: nonzero vectors of `GF(2)^{n+1}`, with the
/// vector `x` stored as point `x - 1`; blocks are triples with zero sum.
pub fn projective(n: u32) -> Result<PartialSts> {
    if !(1..=12).contains(&n) {
        return Err(Error::BadDimension(n));
    }
    let v: u32 = (1 << (n + 1)) - 1;
    let mut blocks = Vec::new();
    for a in 1..=v {
        for b in a + 1..=v {
            let c = a ^ b;
            if c > b {
                blocks.push([a - 1, b - 1, c - 1]);
            }
        }
    }
    PartialSts::new(v as usize, blocks)
}

/// Points and lines of `AG(n, 3)`: vectors of `Z_3^n` in base-3 order; blocks
/// are triples with zero sum.
pub fn affine(n: u32) -> Result<PartialSts> {
    if !(1..=8).contains(&n) {
        return Err(Error::BadDimension(n));
    }
    let v = 3u32.pow(n);
    let digits = |mut x: u32| {
        let mut d = vec![0u32; n as usize];
        for slot in &mut d {
            *slot = x % 3;
            x /= 3;
        }
        d
    };
    let mut blocks = Vec::new();
    for a in 0..v {
        let da = digits(a);
        for b in a + 1..v {
            let db = digits(b);
            let c = da
                .iter()
                .zip(&db)
                .rev()
                .fold(0, |acc, (x, y)| acc * 3 + (6 - x - y) % 3);
            if c > b {
                blocks.push([a, b, c]);
            }
        }
    }
    PartialSts::new(v as usize, blocks)
}

/// Bose's construction for `v ≡ 3 (mod 6)`, from the idempotent commutative
/// quasigroup `x∘y = (x + y)/2` on `Z_{2n+1}`. Point `(x, i)` is `3x + i`.
pub fn bose(v: usize) -> Result<PartialSts> {
    if v % 6 != 3 {
        return Err(Error::BadCongruence { order: v });
    }
    let m = (v / 3) as u32;
    let half = m.div_ceil(2);
    let pt = |x: u32, i: u32| 3 * x + i % 3;
    let mut blocks = Vec::new();
    for x in 0..m {
        blocks.push([pt(x, 0), pt(x, 1), pt(x, 2)]);
        for y in x + 1..m {
            let mid = (x + y) * half % m;
            for i in 0..3 {
                blocks.push([pt(x, i), pt(y, i), pt(mid, i + 1)]);
            }
        }
    }
    PartialSts::new(v, blocks)
}

/// Skolem's construction for `v ≡ 1 (mod 6)`, from the half-idempotent
/// commutative quasigroup on `Z_{2n}`. Point `(x, i)` is `3x + i`, and `∞` is
/// the last point.
pub fn skolem(v: usize) -> Result<PartialSts> {
    if v % 6 != 1 {
        return Err(Error::BadCongruence { order: v });
    }
    let n = ((v - 1) / 6) as u32;
    let m = 2 * n;
    let inf = (v - 1) as u32;
    let pt = |x: u32, i: u32| 3 * x + i % 3;
    // renames the sum x + y mod 2n so that x∘x = x∘(x+n) = x mod n
    let op = |x: u32, y: u32| {
        let s = (x + y) % m;
        if s.is_multiple_of(2) {
            s / 2
        } else {
            n + s / 2
        }
    };
    let mut blocks = Vec::new();
    for x in 0..n {
        blocks.push([pt(x, 0), pt(x, 1), pt(x, 2)]);
        for i in 0..3 {
            blocks.push([inf, pt(x + n, i), pt(x, i + 1)]);
        }
    }
    for x in 0..m {
        for y in x + 1..m {
            for i in 0..3 {
                blocks.push([pt(x, i), pt(y, i), pt(op(x, y), i + 1)]);
            }
        }
    }
    PartialSts::new(v, blocks)
}

/// A maximal partial system built greedily from the triples of `0..order` in
/// a seeded random order.
pub fn random_partial(order: usize, seed: u64) -> PartialSts {
    let mut rng = seeded(seed);
    let n = order as Point;
    let mut triples: Vec<[Point; 3]> = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                triples.push([a, b, c]);
            }
        }
    }
    triples.shuffle(&mut rng);
    let mut covered = vec![false; order * order];
    let mut blocks = Vec::new();
    for t in triples {
        let [a, b, c] = t.map(|p| p as usize);
        if covered[a * order + b] || covered[a * order + c] || covered[b * order + c] {
            continue;
        }
        for (x, y) in [(a, b), (a, c), (b, c)] {
            covered[x * order + y] = true;
        }
        blocks.push(t);
    }
    PartialSts::new(order, blocks).expect("greedy packing")
}

/// Randomised hill-climbing towards a partial system whose leave is exactly
/// `leave`. Blocks in `fixed` are never removed; `start` seeds the search.
struct HillClimb {
    v: usize,
    third: Vec<u32>,
    forbidden: Vec<bool>,
    fixed: Vec<bool>,
    live_degree: Vec<usize>,
    live_pairs: usize,
}

const NONE: u32 = u32::MAX;

impl HillClimb {
    fn new(v: usize, leave: &LeaveGraph) -> HillClimb {
        let mut forbidden = vec![false; v * v];
        for &(x, y) in leave.edges() {
            forbidden[x as usize * v + y as usize] = true;
            forbidden[y as usize * v + x as usize] = true;
        }
        let mut live_degree = vec![v - 1; v];
        for (p, d) in leave.degrees().into_iter().enumerate() {
            live_degree[p] -= d;
        }
        let live_pairs = live_degree.iter().sum::<usize>() / 2;
        HillClimb {
            v,
            third: vec![NONE; v * v],
            forbidden,
            fixed: vec![false; v * v],
            live_degree,
            live_pairs,
        }
    }

    fn add(&mut self, [a, b, c]: [u32; 3], fixed: bool) {
        let v = self.v;
        for (x, y, z) in [(a, b, c), (a, c, b), (b, c, a)] {
            let (x, y) = (x as usize, y as usize);
            self.third[x * v + y] = z;
            self.third[y * v + x] = z;
            self.fixed[x * v + y] = fixed;
            self.fixed[y * v + x] = fixed;
            self.live_degree[x] -= 1;
            self.live_degree[y] -= 1;
            self.live_pairs -= 1;
        }
    }

    fn remove(&mut self, [a, b, c]: [u32; 3]) {
        let v = self.v;
        for (x, y) in [(a, b), (a, c), (b, c)] {
            let (x, y) = (x as usize, y as usize);
            self.third[x * v + y] = NONE;
            self.third[y * v + x] = NONE;
            self.live_degree[x] += 1;
            self.live_degree[y] += 1;
            self.live_pairs += 1;
        }
    }

    fn is_free(&self, x: u32, y: u32) -> bool {
        let i = x as usize * self.v + y as usize;
        !self.forbidden[i] && self.third[i] == NONE
    }

    /// Frees a random removable block through `x`; escapes states where every
    /// live move at `x` would hit a fixed block.
    fn kick(&mut self, x: u32, rng: &mut impl Rng) {
        let v = self.v;
        let through: Vec<(u32, u32)> = (0..v as u32)
            .filter(|&y| y != x && !self.fixed[x as usize * v + y as usize])
            .filter_map(|y| match self.third[x as usize * v + y as usize] {
                NONE => None,
                z if y < z => Some((y, z)),
                _ => None,
            })
            .collect();
        if !through.is_empty() {
            let (y, z) = through[rng.gen_range(0..through.len())];
            self.remove([x, y, z]);
        }
    }

    fn run(&mut self, rng: &mut impl Rng, max_steps: usize) -> bool {
        let v = self.v as u32;
        let mut steps = 0;
        while self.live_pairs > 0 {
            if steps == max_steps {
                return false;
            }
            steps += 1;
            let live: Vec<u32> = (0..v).filter(|&p| self.live_degree[p as usize] > 0).collect();
            let x = live[rng.gen_range(0..live.len())];
            let partners: Vec<u32> = (0..v).filter(|&y| y != x && self.is_free(x, y)).collect();
            if partners.len() < 2 {
                // odd live degree: the target leave was not admissible
                return false;
            }
            let i = rng.gen_range(0..partners.len());
            let mut j = rng.gen_range(0..partners.len() - 1);
            if j >= i {
                j += 1;
            }
            let (y, z) = (partners[i], partners[j]);
            let yz = y as usize * self.v + z as usize;
            if self.forbidden[yz] {
                self.kick(x, rng);
                continue;
            }
            match self.third[yz] {
                NONE => self.add([x, y, z], false),
                w => {
                    if self.fixed[yz] {
                        self.kick(x, rng);
                        continue;
                    }
                    self.remove([y, z, w]);
                    self.add([x, y, z], false);
                }
            }
        }
        true
    }

    fn blocks(&self) -> Vec<[Point; 3]> {
        let v = self.v as u32;
        let mut out = Vec::new();
        for a in 0..v {
            for b in a + 1..v {
                let c = self.third[a as usize * self.v + b as usize];
                if c != NONE && c > b {
                    out.push([a, b, c]);
                }
            }
        }
        out
    }
}

fn steps_budget(v: usize) -> usize {
    200 * v * v * v + 10_000
}

fn check_admissible_leave(v: usize, leave: &LeaveGraph) -> Result<()> {
    if v.is_multiple_of(2) {
        return Err(Error::BadCongruence { order: v });
    }
    if let Some((p, &d)) = leave.degrees().iter().enumerate().find(|(_, d)| *d % 2 == 1) {
        return Err(Error::BadDegrees {
            vertex: p as Point,
            degree: d,
        });
    }
    let remaining = v * (v - 1) / 2 - leave.num_edges();
    if !remaining.is_multiple_of(3) {
        return Err(Error::BadCongruence { order: v });
    }
    Ok(())
}

/// A seeded random complete system of admissible order `v`.
pub fn random_sts(v: usize, seed: u64) -> Result<PartialSts> {
    if v % 6 != 1 && v % 6 != 3 {
        return Err(Error::BadCongruence { order: v });
    }
    let mut rng = seeded(seed);
    let mut climb = HillClimb::new(v, &LeaveGraph::new(v, []));
    if !climb.run(&mut rng, steps_budget(v)) {
        return Err(Error::SearchExhausted);
    }
    PartialSts::new(v, climb.blocks())
}

/// Partial system of order `v` whose leave is a single 6-cycle.
///
/// Starts from the Bose or Skolem system, picks a seeded random hexagon,
/// deletes the blocks through its edges and re-covers the freed pairs by
/// hill-climbing.
pub fn partial_with_hexagon_leave(v: usize, seed: u64) -> Result<PartialSts> {
    if !(v % 6 == 1 || v % 6 == 3) || v < 13 {
        return Err(Error::BadCongruence { order: v });
    }
    let mut rng = seeded(seed);
    let base = if v % 6 == 1 { skolem(v)? } else { bose(v)? };
    let mut points: Vec<Point> = (0..v as Point).collect();
    points.shuffle(&mut rng);
    let hex = &points[..6];
    let leave = LeaveGraph::new(v, (0..6).map(|k| (hex[k], hex[(k + 1) % 6])));
    let mut climb = HillClimb::new(v, &leave);
    for b in base.blocks() {
        let [a, c, d] = b.points();
        if !(leave.contains(a, c) || leave.contains(a, d) || leave.contains(c, d)) {
            climb.add([a, c, d], false);
        }
    }
    if !climb.run(&mut rng, steps_budget(v)) {
        return Err(Error::SearchExhausted);
    }
    let out = PartialSts::new(v, climb.blocks())?;
    debug_assert_eq!(out.leave_graph(), leave);
    Ok(out)
}

/// Partial system of order `v` containing `sub` on the points
/// `0..sub.order()` and whose leave is a single 6-cycle avoiding the pairs of
/// `sub`. The rest of the system is random; other subsystems may occur.
pub fn hexagon_leave_around(v: usize, sub: &PartialSts, seed: u64) -> Result<PartialSts> {
    if !(v % 6 == 1 || v % 6 == 3) || v < 13 || sub.order() > v {
        return Err(Error::BadCongruence { order: v });
    }
    if !sub.is_complete() {
        return Err(Error::Incomplete);
    }
    let k = sub.order() as Point;
    let mut rng = seeded(seed);
    let leave = loop {
        let mut points: Vec<Point> = (0..v as Point).collect();
        points.shuffle(&mut rng);
        let hex = &points[..6];
        let edges: Vec<(Point, Point)> = (0..6).map(|i| (hex[i], hex[(i + 1) % 6])).collect();
        if edges.iter().all(|&(a, b)| a >= k || b >= k) && leave_fits_planted(v, k, &edges) {
            break LeaveGraph::new(v, edges);
        }
    };
    leave_around(v, sub, &leave, &mut rng)
}

/// Counting conditions for a leave around a planted subsystem on `0..k`.
/// Blocks meeting the subsystem in one point cover two mixed pairs and one
/// outside pair; the outside pairs left over must split into whole blocks.
fn leave_fits_planted(v: usize, k: Point, edges: &[(Point, Point)]) -> bool {
    let outside = v - k as usize;
    let mut mixed_at = vec![0usize; v];
    let mut out_at = vec![0usize; v];
    let (mut e_mixed, mut e_out) = (0usize, 0usize);
    for &(a, b) in edges {
        match (a < k, b < k) {
            (true, true) => return false,
            (false, false) => {
                out_at[a as usize] += 1;
                out_at[b as usize] += 1;
                e_out += 1;
            }
            _ => {
                mixed_at[a as usize] += 1;
                mixed_at[b as usize] += 1;
                e_mixed += 1;
            }
        }
    }
    if (0..k as usize).any(|f| (outside - mixed_at[f]) % 2 == 1) {
        return false;
    }
    // at an outside point, each mixed block uses one outside pair and the
    // rest pair up into outside blocks
    for w in k as usize..v {
        let mixed = k as usize - mixed_at[w];
        let out = outside - 1 - out_at[w];
        if out < mixed || (out - mixed) % 2 == 1 {
            return false;
        }
    }
    let mixed_blocks = (k as usize * outside - e_mixed) / 2;
    let outside_pairs = outside * (outside - 1) / 2 - e_out;
    outside_pairs >= mixed_blocks && (outside_pairs - mixed_blocks).is_multiple_of(3)
}

/// Partial system of order `v` containing `sub` on `0..sub.order()` with the
/// given leave.
pub fn with_planted_subsystem(v: usize, sub: &PartialSts, leave: &LeaveGraph, seed: u64) -> Result<PartialSts> {
    let mut rng = seeded(seed);
    leave_around(v, sub, leave, &mut rng)
}

fn leave_around(v: usize, sub: &PartialSts, leave: &LeaveGraph, rng: &mut impl Rng) -> Result<PartialSts> {
    check_admissible_leave(v, leave)?;
    let mut climb = HillClimb::new(v, leave);
    for b in sub.blocks() {
        let [a, c, d] = b.points();
        if leave.contains(a, c) || leave.contains(a, d) || leave.contains(c, d) {
            return Err(Error::BadCycle("leave meets the planted subsystem".into()));
        }
        climb.add([a, c, d], true);
    }
    if !climb.run(rng, steps_budget(v)) {
        return Err(Error::SearchExhausted);
    }
    PartialSts::new(v, climb.blocks())
}
