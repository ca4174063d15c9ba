//! Arithmetic in `Z_n` for odd `n`: subsets, cosets and the standard
//! 1-factorisation on `Z_n ∪ {∞}`.
//!
//! Inside factorisation code `∞` is the sentinel index `n`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A subset of `Z_n`. Small moduli use a bitmask so exhaustive sweeps over all
/// subsets stay cheap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ZnSet {
    Mask { n: u32, bits: u64 },
    Sorted { n: u32, elems: Vec<u32> },
}

impl ZnSet {
    pub fn from_elements(n: u32, elems: impl IntoIterator<Item = u32>) -> ZnSet {
        if n <= 63 {
            let bits = elems.into_iter().fold(0u64, |acc, x| acc | 1 << (x % n));
            ZnSet::Mask { n, bits }
        } else {
            let mut v: Vec<u32> = elems.into_iter().map(|x| x % n).collect();
            v.sort_unstable();
            v.dedup();
            ZnSet::Sorted { n, elems: v }
        }
    }

    /// The subset of `Z_n` encoded by the low `n` bits of `bits`. Needs `n <= 63`.
    pub fn from_mask(n: u32, bits: u64) -> ZnSet {
        assert!(n <= 63);
        ZnSet::Mask {
            n,
            bits: bits & ((1u64 << n) - 1),
        }
    }

    pub fn modulus(&self) -> u32 {
        match self {
            ZnSet::Mask { n, .. } | ZnSet::Sorted { n, .. } => *n,
        }
    }

    pub fn contains(&self, x: u32) -> bool {
        match self {
            ZnSet::Mask { n, bits } => bits >> (x % n) & 1 == 1,
            ZnSet::Sorted { n, elems } => elems.binary_search(&(x % n)).is_ok(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ZnSet::Mask { bits, .. } => bits.count_ones() as usize,
            ZnSet::Sorted { elems, .. } => elems.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn elements(&self) -> Vec<u32> {
        match self {
            ZnSet::Mask { n, bits } => (0..*n).filter(|x| bits >> x & 1 == 1).collect(),
            ZnSet::Sorted { elems, .. } => elems.clone(),
        }
    }
}

/// True iff `a + b ∈ S` for all distinct `a, b ∈ S`.
pub fn closed_under_distinct_sums(s: &ZnSet) -> bool {
    let n = s.modulus();
    let elems = s.elements();
    elems
        .iter()
        .enumerate()
        .all(|(k, &a)| elems[k + 1..].iter().all(|&b| s.contains((a + b) % n)))
}

/// True iff `S` is a subgroup of `Z_n`: nonempty and closed under addition.
pub fn is_subgroup(s: &ZnSet) -> bool {
    let n = s.modulus();
    let elems = s.elements();
    !elems.is_empty() && elems.iter().all(|&a| elems.iter().all(|&b| s.contains((a + b) % n)))
}

pub fn proper_divisors(n: u32) -> Vec<u32> {
    (2..n).filter(|d| n.is_multiple_of(*d)).collect()
}

/// Divisors `d` of `u` with `1 < d < u` whose subgroup `⟨d⟩` has order
/// congruent to 1 or 3 modulo 6. These index the cosets a subsystem could
/// possibly occupy.
pub fn admissible_coset_divisors(u: u32) -> Vec<u32> {
    proper_divisors(u)
        .into_iter()
        .filter(|d| matches!((u / d) % 6, 1 | 3))
        .collect()
}

/// The coset `r + ⟨d⟩` of `Z_n`, with `d | n` and `0 <= r < d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coset {
    pub n: u32,
    pub d: u32,
    pub r: u32,
}

impl Coset {
    /// The coset of `⟨d⟩` containing `x`.
    pub fn containing(n: u32, d: u32, x: u32) -> Coset {
        debug_assert!(d > 0 && n.is_multiple_of(d));
        Coset { n, d, r: x % d }
    }

    pub fn len(&self) -> usize {
        (self.n / self.d) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, x: u32) -> bool {
        x < self.n && x % self.d == self.r
    }

    pub fn elements(&self) -> impl Iterator<Item = u32> + '_ {
        (self.r..self.n).step_by(self.d as usize)
    }

    /// All `d` cosets of `⟨d⟩`.
    pub fn all_of(n: u32, d: u32) -> impl Iterator<Item = Coset> {
        (0..d).map(move |r| Coset { n, d, r })
    }
}

/// The standard 1-factorisation `{F_0, …, F_{n-1}}` on `Z_n ∪ {∞}` with
/// `F_i = {{x, y} : x + y = 2i} ∪ {{∞, i}}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneFactorisation {
    n: u32,
    half: u32,
    factors: Vec<Vec<(u32, u32)>>,
}

impl OneFactorisation {
    pub fn standard(n: u32) -> Result<OneFactorisation> {
        if n < 3 || n.is_multiple_of(2) {
            return Err(Error::EvenModulus(n));
        }
        let factors = (0..n)
            .map(|i| {
                let mut f: Vec<(u32, u32)> = (0..n)
                    .filter_map(|x| {
                        let y = (2 * i + n - x) % n;
                        (x < y).then_some((x, y))
                    })
                    .collect();
                f.push((i, n));
                f.sort_unstable();
                f
            })
            .collect();
        Ok(OneFactorisation {
            n,
            half: n.div_ceil(2),
            factors,
        })
    }

    pub fn modulus(&self) -> u32 {
        self.n
    }

    /// The sentinel vertex standing for `∞`.
    pub fn infinity(&self) -> u32 {
        self.n
    }

    pub fn factors(&self) -> &[Vec<(u32, u32)>] {
        &self.factors
    }

    /// Edges of `F_i`, each as `(low, high)`; `∞` is the high end when present.
    pub fn factor(&self, i: u32) -> &[(u32, u32)] {
        &self.factors[i as usize]
    }

    /// Index of the factor containing the edge `{x, y}`.
    pub fn factor_of_edge(&self, x: u32, y: u32) -> u32 {
        debug_assert!(x != y);
        let n = self.n;
        if x == n {
            y
        } else if y == n {
            x
        } else {
            // 2i = x + y, and 2 has inverse (n + 1) / 2 modulo odd n
            ((x + y) as u64 * self.half as u64 % n as u64) as u32
        }
    }
}

/// If `S ⊆ Z_n ∪ {∞}` (with `∞ = n`) induces a sub-1-factorisation of `fac`,
/// returns the sorted indices `i` for which `F_i` has an edge inside `S`.
///
/// Sets of at most 12 points are decided by an exhaustive search for a
/// 1-factorisation of the complete graph on `S` whose factors each sit inside
/// a factor of `fac`. Larger sets use the direct test that every factor meets
/// `S` in either nothing or a perfect matching of `S`. Neither route assumes
/// the coset characterisation, so it can be tested against them.
pub fn induced_sub_factorisation(s: &[u32], fac: &OneFactorisation) -> Option<Vec<u32>> {
    let mut pts: Vec<u32> = s.to_vec();
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 2 || pts.len() % 2 == 1 || pts.iter().any(|&p| p > fac.n) {
        return None;
    }
    if pts.len() <= 12 {
        search_sub_factorisation(&pts, fac)
    } else {
        restriction_sub_factorisation(&pts, fac)
    }
}

fn restriction_sub_factorisation(pts: &[u32], fac: &OneFactorisation) -> Option<Vec<u32>> {
    let mut member = vec![false; fac.n as usize + 1];
    for &p in pts {
        member[p as usize] = true;
    }
    let mut used = Vec::new();
    for (i, f) in fac.factors.iter().enumerate() {
        let (mut inside, mut crossing) = (0, 0);
        for &(x, y) in f {
            match (member[x as usize], member[y as usize]) {
                (true, true) => inside += 1,
                (false, false) => {}
                _ => crossing += 1,
            }
        }
        // F_i is a perfect matching of the whole vertex set, so it restricts
        // to a perfect matching of S exactly when no edge leaves S
        if inside > 0 {
            if crossing > 0 {
                return None;
            }
            used.push(i as u32);
        }
    }
    Some(used)
}

/// Backtracking over partitions of the edges inside `pts` into perfect
/// matchings, each contained in one factor.
fn search_sub_factorisation(pts: &[u32], fac: &OneFactorisation) -> Option<Vec<u32>> {
    let k = pts.len();
    let mut covered = vec![vec![false; k]; k];
    let mut chosen = Vec::new();
    if search_rec(pts, fac, &mut covered, &mut chosen) {
        chosen.sort_unstable();
        Some(chosen)
    } else {
        None
    }
}

fn search_rec(pts: &[u32], fac: &OneFactorisation, covered: &mut [Vec<bool>], chosen: &mut Vec<u32>) -> bool {
    let k = pts.len();
    let first = (0..k)
        .flat_map(|a| (a + 1..k).map(move |b| (a, b)))
        .find(|&(a, b)| !covered[a][b]);
    let Some((a, b)) = first else {
        return true;
    };
    let index = fac.factor_of_edge(pts[a], pts[b]);
    // every perfect matching of pts inside F_index that avoids covered edges
    // and uses {a, b}
    let mut matching = vec![usize::MAX; k];
    matching[a] = b;
    matching[b] = a;
    let mut found = false;
    extend_matching(pts, fac, index, covered, &mut matching, &mut |m, covered| {
        for x in 0..k {
            let y = m[x];
            if x < y {
                covered[x][y] = true;
            }
        }
        chosen.push(index);
        if search_rec(pts, fac, covered, chosen) {
            found = true;
            return true;
        }
        chosen.pop();
        for x in 0..k {
            let y = m[x];
            if x < y {
                covered[x][y] = false;
            }
        }
        false
    });
    found
}

type OnComplete<'a> = dyn FnMut(&[usize], &mut [Vec<bool>]) -> bool + 'a;

fn extend_matching(
    pts: &[u32],
    fac: &OneFactorisation,
    index: u32,
    covered: &mut [Vec<bool>],
    matching: &mut Vec<usize>,
    on_complete: &mut OnComplete,
) -> bool {
    let k = pts.len();
    let Some(x) = (0..k).find(|&x| matching[x] == usize::MAX) else {
        let m = matching.clone();
        return on_complete(&m, covered);
    };
    for y in x + 1..k {
        if matching[y] != usize::MAX || covered[x][y] {
            continue;
        }
        if fac.factor_of_edge(pts[x], pts[y]) != index {
            continue;
        }
        matching[x] = y;
        matching[y] = x;
        if extend_matching(pts, fac, index, covered, matching, on_complete) {
            return true;
        }
        matching[x] = usize::MAX;
        matching[y] = usize::MAX;
    }
    false
}

/// `1/d' + 1/(d'+2) + … + 1/d''` together with the bound `½ ln((d''+1)/(d'-1))`.
pub fn harmonic_bound(low: u32, high: u32) -> Result<(f64, f64)> {
    if low.is_multiple_of(2) || high.is_multiple_of(2) {
        return Err(Error::BadParity { low, high });
    }
    if low < 3 || low > high {
        return Err(Error::BadRange { low, high });
    }
    let sum = (low..=high).step_by(2).map(|d| 1.0 / d as f64).sum();
    let bound = 0.5 * libm::log((high as f64 + 1.0) / (low as f64 - 1.0));
    Ok((sum, bound))
}
