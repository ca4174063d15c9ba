#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sts_core::doubling::SixCycle;
use sts_core::{PartialSts, Point};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn pair_key(a: Point, b: Point) -> (Point, Point) {
    (a.min(b), a.max(b))
}

/// Greedy random packing on `v` points that keeps `avoid` uncovered and
/// starts from `seed_blocks`.
pub fn random_packing(
    v: usize,
    seed_blocks: &[[Point; 3]],
    avoid: &[(Point, Point)],
    rng: &mut impl Rng,
) -> PartialSts {
    let mut used = vec![false; v * v];
    let mark = |a: Point, b: Point, used: &mut [bool]| {
        used[a as usize * v + b as usize] = true;
        used[b as usize * v + a as usize] = true;
    };
    for &(a, b) in avoid {
        mark(a, b, &mut used);
    }
    let mut blocks: Vec<[Point; 3]> = Vec::new();
    for &[a, b, c] in seed_blocks {
        mark(a, b, &mut used);
        mark(a, c, &mut used);
        mark(b, c, &mut used);
        blocks.push([a, b, c]);
    }
    let v32 = v as Point;
    let mut triples = Vec::new();
    for a in 0..v32 {
        for b in a + 1..v32 {
            for c in b + 1..v32 {
                triples.push([a, b, c]);
            }
        }
    }
    triples.shuffle(rng);
    for [a, b, c] in triples {
        let free = |x: Point, y: Point| !used[x as usize * v + y as usize];
        if free(a, b) && free(a, c) && free(b, c) {
            mark(a, b, &mut used);
            mark(a, c, &mut used);
            mark(b, c, &mut used);
            blocks.push([a, b, c]);
        }
    }
    PartialSts::new(v, blocks).expect("packing is valid")
}

/// A random partial system of order `u` whose leave contains a random 6-cycle.
pub fn host_with_hexagon(u: usize, rng: &mut impl Rng) -> (PartialSts, SixCycle) {
    let mut pts: Vec<Point> = (0..u as Point).collect();
    pts.shuffle(rng);
    let hex: [Point; 6] = pts[..6].try_into().unwrap();
    let edges: Vec<(Point, Point)> = (0..6).map(|k| (hex[k], hex[(k + 1) % 6])).collect();
    let ps = random_packing(u, &[], &edges, rng);
    (ps, SixCycle::new(hex).unwrap())
}

/// A random partial system of order `u` containing a Fano plane on `points`.
pub fn host_with_fano(u: usize, points: &[Point; 7], rng: &mut impl Rng) -> PartialSts {
    let fano = sts_core::generators::projective(2).unwrap();
    let blocks: Vec<[Point; 3]> = fano
        .blocks()
        .iter()
        .map(|b| b.points().map(|p| points[p as usize]))
        .collect();
    random_packing(u, &blocks, &[], rng)
}

/// Brute-force test that `set` is the point set of a subsystem.
pub fn is_subsystem_set(ps: &PartialSts, set: &[Point]) -> bool {
    let mut member = vec![false; ps.order()];
    for &p in set {
        member[p as usize] = true;
    }
    for (k, &a) in set.iter().enumerate() {
        for &b in &set[k + 1..] {
            match ps.third(a, b) {
                Some(c) if member[c as usize] => {}
                _ => return false,
            }
        }
    }
    true
}

/// All point sets of size at least 3 that carry a subsystem, by testing
/// every subset.
pub fn brute_force_subsystems(ps: &PartialSts) -> Vec<Vec<Point>> {
    let v = ps.order();
    assert!(v <= 20);
    let mut out = Vec::new();
    for mask in 0u32..(1 << v) {
        if mask.count_ones() < 3 {
            continue;
        }
        let set: Vec<Point> = (0..v as Point).filter(|p| mask >> p & 1 == 1).collect();
        if is_subsystem_set(ps, &set) {
            out.push(set);
        }
    }
    out.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    out
}

pub fn random_perm(v: usize, rng: &mut impl Rng) -> Vec<Point> {
    let mut perm: Vec<Point> = (0..v as Point).collect();
    perm.shuffle(rng);
    perm
}
