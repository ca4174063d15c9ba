//! The doubling step: a partial system of odd order `u ≥ 11` whose leave
//! contains a 6-cycle `H` embeds in a partial system of order `2u + 1` whose
//! leave is the old leave minus `E(H)` and which has no new nontrivial proper
//! subsystems.
//!
//! Input points keep their indices, `z ∈ Z_u` becomes point `u + z` and `∞`
//! becomes point `2u`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::algebra::{admissible_coset_divisors, proper_divisors, Coset, OneFactorisation};
use crate::error::{Error, Result};
use crate::rng::seeded;
use crate::subsystems::{
    enumerate_subsystems_with, new_subsystem_violations, subsystem_from_points, EnumerationLimits, SubsystemRecord,
    DEFAULT_NODE_BUDGET,
};
use crate::system::{Block, PartialSts, Point};

/// A 6-cycle `x₁x₂…x₆x₁` of a leave.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SixCycle([Point; 6]);

impl SixCycle {
    pub fn new(points: [Point; 6]) -> Result<SixCycle> {
        for i in 0..6 {
            if points[i + 1..].contains(&points[i]) {
                return Err(Error::BadCycle(format!("point {} repeats", points[i])));
            }
        }
        Ok(SixCycle(points))
    }

    pub fn points(&self) -> [Point; 6] {
        self.0
    }

    /// `x₁x₂, x₂x₃, …, x₆x₁`.
    pub fn edges(&self) -> [(Point, Point); 6] {
        let x = self.0;
        core::array::from_fn(|k| (x[k], x[(k + 1) % 6]))
    }

    /// Checks that every edge lies in the leave of `ps`.
    pub fn check_in(&self, ps: &PartialSts) -> Result<()> {
        if let Some(&p) = self.0.iter().find(|&&p| p as usize >= ps.order()) {
            return Err(Error::BadCycle(format!("point {p} outside order {}", ps.order())));
        }
        if let Some((a, b)) = self.edges().into_iter().find(|&(a, b)| ps.covers(a, b)) {
            return Err(Error::BadCycle(format!("edge {a}-{b} is covered by a block")));
        }
        Ok(())
    }
}

/// How free slots and ties are resolved: lowest available point, or a seeded
/// shuffle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FillPolicy {
    #[default]
    Lowest,
    Shuffled(u64),
}

impl FillPolicy {
    /// Seed 0 means [`FillPolicy::Lowest`].
    pub fn from_seed(seed: u64) -> FillPolicy {
        if seed == 0 {
            FillPolicy::Lowest
        } else {
            FillPolicy::Shuffled(seed)
        }
    }

    pub fn seed(&self) -> u64 {
        match *self {
            FillPolicy::Lowest => 0,
            FillPolicy::Shuffled(s) => s,
        }
    }
}

fn check_order(ps: &PartialSts) -> Result<u32> {
    let u = ps.order();
    if u < 11 || u.is_multiple_of(2) {
        return Err(Error::OrderTooSmall(u));
    }
    Ok(u as u32)
}

/// The injection `φ′` on `{0, …, (u+1)/2}` with the six cycle points pinned
/// at indices 1, 0, 2, 4, 6, 5 and the remaining slots filled by `policy`.
pub fn initial_injection(ps: &PartialSts, cycle: &SixCycle, policy: FillPolicy) -> Result<Vec<Point>> {
    let u = check_order(ps)?;
    cycle.check_in(ps)?;
    let len = (u as usize + 3) / 2;
    let [x1, x2, x3, x4, x5, x6] = cycle.points();
    let mut phi = vec![Point::MAX; len];
    for (i, x) in [(1, x1), (0, x2), (2, x3), (4, x4), (6, x5), (5, x6)] {
        phi[i] = x;
    }
    let mut unused: Vec<Point> = (0..u).filter(|p| !cycle.points().contains(p)).collect();
    if let FillPolicy::Shuffled(seed) = policy {
        unused.shuffle(&mut seeded(seed));
    }
    let mut fill = unused.into_iter();
    for slot in phi.iter_mut().filter(|p| **p == Point::MAX) {
        *slot = fill.next().expect("u - 6 spare points");
    }
    Ok(phi)
}

/// Divisor set `D_i`, bound `r_i` and slack `u − i − 1` for one step of the
/// bijection builder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountingAudit {
    pub u: u32,
    pub i: u32,
    pub divisors: Vec<u32>,
    /// `r_i = ½ Σ (u/d − 1)`, always an integer since `u/d` is odd.
    pub r: u32,
    pub slack: u32,
}

impl CountingAudit {
    pub fn holds(&self) -> bool {
        self.r < self.slack
    }
}

pub fn counting_audit(u: u32, i: u32) -> Result<CountingAudit> {
    if u < 11 || u.is_multiple_of(2) || i < (u + 3) / 2 || i + 3 > u {
        return Err(Error::OutOfRange { u, i });
    }
    let top = 2 * i - u;
    let divisors: Vec<u32> = admissible_coset_divisors(u)
        .into_iter()
        .filter(|&d| 3 * d >= top + 2 && d <= top)
        .collect();
    let r = divisors.iter().map(|d| (u / d - 1) / 2).sum();
    Ok(CountingAudit {
        u,
        i,
        divisors,
        r,
        slack: u - i - 1,
    })
}

/// One extension step of the bijection builder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepRecord {
    pub index: u32,
    /// Divisors `d` whose coset through `index` just reached `(|C|+3)/2`
    /// defined elements.
    pub divisors: Vec<u32>,
    /// Points of `W` ruled out by coset safety or the special condition.
    pub forbidden: usize,
    /// `|W|` before the choice.
    pub available: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bijection {
    pub phi: Vec<Point>,
    pub steps: Vec<StepRecord>,
}

/// Point sets of the subsystems of the host whose orders are coset sizes.
struct SubsystemSets<'a> {
    host: &'a PartialSts,
    by_size: BTreeMap<usize, Vec<Vec<Point>>>,
    lookup: BTreeSet<Vec<Point>>,
}

impl<'a> SubsystemSets<'a> {
    fn new(host: &'a PartialSts) -> Result<SubsystemSets<'a>> {
        let u = host.order() as u32;
        let max_order = admissible_coset_divisors(u).into_iter().map(|d| (u / d) as usize).max();
        let mut by_size: BTreeMap<usize, Vec<Vec<Point>>> = BTreeMap::new();
        let mut lookup = BTreeSet::new();
        // order-3 sets are blocks and are looked up through the pair index
        if let Some(max_order) = max_order.filter(|&m| m > 3) {
            let lattice = enumerate_subsystems_with(
                host,
                EnumerationLimits {
                    max_order,
                    node_budget: DEFAULT_NODE_BUDGET,
                },
            );
            if lattice.budget_exhausted() {
                return Err(Error::BudgetExceeded {
                    order: host.order(),
                    cap: DEFAULT_NODE_BUDGET,
                });
            }
            for r in lattice.records().iter().filter(|r| r.order() > 3) {
                by_size.entry(r.order()).or_default().push(r.points().to_vec());
                lookup.insert(r.points().to_vec());
            }
        }
        Ok(SubsystemSets { host, by_size, lookup })
    }

    /// Members of `𝒮_size` containing every point of `image`.
    fn supersets(&self, size: usize, image: &[Point]) -> Vec<Vec<Point>> {
        if size == 3 {
            return match image {
                [a, b] => self.host.third(*a, *b).map(|c| vec![*a, *b, c]).into_iter().collect(),
                _ => Vec::new(),
            };
        }
        self.by_size
            .get(&size)
            .map(|sets| {
                sets.iter()
                    .filter(|s| image.iter().all(|p| s.binary_search(p).is_ok()))
                    .cloned()
                    .collect()
            })
            .unwrap_or_default()
    }

    fn is_point_set(&self, sorted: &[Point]) -> bool {
        match sorted {
            [a, b, c] => self.host.third(*a, *b) == Some(*c),
            _ => self.lookup.contains(sorted),
        }
    }
}

fn image_of(phi: &[Point], coset: &Coset, below: u32) -> Vec<Point> {
    let mut img: Vec<Point> = coset
        .elements()
        .filter(|&x| x < below)
        .map(|x| phi[x as usize])
        .collect();
    img.sort_unstable();
    img
}

/// Every coset of every admissible subgroup maps off the subsystem point sets.
fn all_cosets_safe(u: u32, phi: &[Point], sets: &SubsystemSets) -> bool {
    admissible_coset_divisors(u)
        .into_iter()
        .all(|d| Coset::all_of(u, d).all(|c| !sets.is_point_set(&image_of(phi, &c, u))))
}

/// Extends `prefix` (defined on `{0, …, (u+1)/2}`) to a bijection
/// `φ: Z_u → points` under which no coset of a nontrivial proper subgroup is
/// the point set of a subsystem.
pub fn extend_bijection(ps: &PartialSts, prefix: &[Point], policy: FillPolicy) -> Result<Bijection> {
    let u = check_order(ps)?;
    let start = (u + 3) / 2;
    if prefix.len() != start as usize {
        return Err(Error::InternalInconsistency(format!(
            "prefix has {} values, expected {start}",
            prefix.len()
        )));
    }
    let mut used = vec![false; u as usize];
    for &p in prefix {
        if p >= u || core::mem::replace(&mut used[p as usize], true) {
            return Err(Error::NotBijective);
        }
    }
    let sets = SubsystemSets::new(ps)?;
    let divisors = admissible_coset_divisors(u);
    let mut rng = seeded(policy.seed() ^ 0x9e37_79b9_7f4a_7c15);
    let mut phi = prefix.to_vec();
    let mut steps = Vec::new();

    for i in start..=u - 3 {
        let w: Vec<Point> = (0..u).filter(|&p| !used[p as usize]).collect();
        let mut forbidden: BTreeSet<Point> = BTreeSet::new();
        let mut step_divisors = Vec::new();
        for &d in &divisors {
            let coset = Coset::containing(u, d, i);
            let defined = coset.elements().filter(|&x| x <= i).count();
            if 2 * defined != coset.len() + 3 {
                continue;
            }
            step_divisors.push(d);
            let image = image_of(&phi, &coset, i);
            let supersets = sets.supersets(coset.len(), &image);
            if supersets.len() > 1 {
                return Err(Error::InternalInconsistency(format!(
                    "{} subsystems of order {} contain the image of a coset half",
                    supersets.len(),
                    coset.len()
                )));
            }
            for s in supersets {
                forbidden.extend(s.into_iter().filter(|p| !used[*p as usize]));
            }
        }
        if u % 6 == 3 && i == 2 * u / 3 - 1 {
            let (a, b, c) = (
                phi[(u / 3 - 2) as usize],
                phi[(2 * u / 3 - 2) as usize],
                phi[(u / 3 - 1) as usize],
            );
            if let Some(z) = ps.third(a, b) {
                if let Some(bad) = ps.third(c, z) {
                    forbidden.insert(bad);
                }
            }
        }
        let allowed: Vec<Point> = w.iter().copied().filter(|p| !forbidden.contains(p)).collect();
        if allowed.is_empty() {
            return Err(Error::NoSafeChoice { index: i });
        }
        let choice = match policy {
            FillPolicy::Lowest => allowed[0],
            FillPolicy::Shuffled(_) => allowed[rng.gen_range(0..allowed.len())],
        };
        steps.push(StepRecord {
            index: i,
            divisors: step_divisors,
            forbidden: w.iter().filter(|p| forbidden.contains(p)).count(),
            available: w.len(),
        });
        used[choice as usize] = true;
        phi.push(choice);
    }

    let last: Vec<Point> = (0..u).filter(|&p| !used[p as usize]).collect();
    let (lo, hi) = (last[0], last[1]);
    for (a, b) in [(lo, hi), (hi, lo)] {
        phi.extend([a, b]);
        if all_cosets_safe(u, &phi, &sets) {
            return Ok(Bijection { phi, steps });
        }
        phi.truncate(phi.len() - 2);
    }
    Err(Error::NoSafeChoice { index: u - 2 })
}

/// Output of [`double`], with the block families kept for audits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoublingResult {
    pub input_order: usize,
    pub output: PartialSts,
    pub cycle: SixCycle,
    pub seed: u64,
    pub phi: Vec<Point>,
    pub b_dagger: Vec<Block>,
    pub b_ddagger: Vec<Block>,
    pub b0: Vec<Block>,
    pub b1: Vec<Block>,
    pub b2: Vec<Block>,
    pub steps: Vec<StepRecord>,
}

impl DoublingResult {
    pub fn certificate(&self) -> Certificate {
        Certificate {
            u: self.input_order,
            seed: self.seed,
            phi: self.phi.clone(),
            cycle: self.cycle.points(),
        }
    }
}

/// Doubles `ps` along the 6-cycle `cycle` of its leave.
pub fn double(ps: &PartialSts, cycle: &SixCycle, policy: FillPolicy) -> Result<DoublingResult> {
    let prefix = initial_injection(ps, cycle, policy)?;
    let bijection = extend_bijection(ps, &prefix, policy)?;
    let mut result = assemble(ps, cycle, bijection.phi, policy.seed())?;
    result.steps = bijection.steps;
    Ok(result)
}

/// Builds the doubled system from a caller-supplied bijection. The bijection
/// must pin the cycle points, but is not checked for coset safety.
pub fn double_with_bijection(ps: &PartialSts, cycle: &SixCycle, phi: Vec<Point>, seed: u64) -> Result<DoublingResult> {
    let u = check_order(ps)?;
    cycle.check_in(ps)?;
    let mut seen = vec![false; u as usize];
    if phi.len() != u as usize
        || phi
            .iter()
            .any(|&p| p >= u || core::mem::replace(&mut seen[p as usize], true))
    {
        return Err(Error::NotBijective);
    }
    let [x1, x2, x3, x4, x5, x6] = cycle.points();
    if [phi[1], phi[0], phi[2], phi[4], phi[6], phi[5]] != [x1, x2, x3, x4, x5, x6] {
        return Err(Error::BadCycle("bijection does not pin the cycle points".into()));
    }
    assemble(ps, cycle, phi, seed)
}

fn block(a: Point, b: Point, c: Point) -> Result<Block> {
    Block::new(a, b, c).ok_or_else(|| Error::InternalInconsistency(format!("degenerate triple {a},{b},{c}")))
}

fn assemble(ps: &PartialSts, cycle: &SixCycle, phi: Vec<Point>, seed: u64) -> Result<DoublingResult> {
    let u = ps.order() as u32;
    let fac = OneFactorisation::standard(u)?;
    // vertex of the 1-factorisation (∞ = u) to output point
    let z = |x: u32| u + x;

    let mut b_dagger = Vec::with_capacity((u * (u + 1) / 2) as usize);
    for i in 0..u {
        for &(x, y) in fac.factor(i) {
            b_dagger.push(block(z(x), z(y), phi[i as usize])?);
        }
    }
    b_dagger.sort_unstable();

    let [x1, x2, x3, x4, x5, x6] = cycle.points();
    let m = u - 1;
    let b_ddagger = vec![
        block(z(3), z(m), x1)?,
        block(z(m), z(1), x2)?,
        block(z(1), z(3), x3)?,
        block(z(3), z(5), x4)?,
        block(z(5), z(7), x5)?,
        block(z(7), z(3), x6)?,
    ];
    if let Some(missing) = b_ddagger.iter().find(|b| b_dagger.binary_search(b).is_err()) {
        return Err(Error::InternalInconsistency(format!(
            "{missing:?} is not in the 1-factor blocks"
        )));
    }
    let b0 = vec![block(z(m), z(1), z(3))?, block(z(3), z(5), z(7))?];
    let b2 = vec![
        block(x1, x2, z(m))?,
        block(x2, x3, z(1))?,
        block(x3, x4, z(3))?,
        block(x4, x5, z(5))?,
        block(x5, x6, z(7))?,
        block(x1, x6, z(3))?,
    ];
    let b1: Vec<Block> = b_dagger.iter().filter(|b| !b_ddagger.contains(b)).copied().collect();

    let all = ps.blocks().iter().chain(&b0).chain(&b1).chain(&b2).map(|b| b.points());
    let output = PartialSts::new(2 * u as usize + 1, all)
        .map_err(|e| Error::InternalInconsistency(format!("doubled blocks clash: {e}")))?;
    Ok(DoublingResult {
        input_order: u as usize,
        output,
        cycle: *cycle,
        seed,
        phi,
        b_dagger,
        b_ddagger,
        b0,
        b1,
        b2,
        steps: Vec::new(),
    })
}

/// Outcome of [`verify_doubling`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    /// Output has order `2u + 1` and contains every input block.
    pub valid: bool,
    /// Output leave equals the input leave minus `E(H)`.
    pub leave_delta_exact: bool,
    /// Nontrivial proper subsystems of the output that are not input subsystems.
    pub violations: Vec<SubsystemRecord>,
    /// Cosets of nontrivial proper subgroups mapped onto a subsystem point set.
    pub unsafe_cosets: Vec<Coset>,
    /// Output blocks by number of input points they contain.
    pub type_census: [usize; 4],
    pub problems: Vec<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.valid && self.leave_delta_exact && self.violations.is_empty() && self.unsafe_cosets.is_empty()
    }
}

/// Re-checks a doubling result from scratch.
pub fn verify_doubling(input: &PartialSts, result: &DoublingResult, cycle: &SixCycle) -> VerificationReport {
    let u = input.order();
    let out = &result.output;
    let mut problems = Vec::new();

    let mut valid = out.order() == 2 * u + 1;
    if !valid {
        problems.push(format!("output order {} is not {}", out.order(), 2 * u + 1));
    }
    if let Some(b) = input.blocks().iter().find(|b| !out.contains_block(b)) {
        valid = false;
        problems.push(format!("input block {b:?} missing from output"));
    }

    let edges = cycle.edges().map(|(a, b)| (a.min(b), a.max(b)));
    let expected: Vec<(Point, Point)> = input
        .leave_graph()
        .edges()
        .iter()
        .copied()
        .filter(|e| !edges.contains(e))
        .collect();
    let leave_delta_exact = out.leave_graph().edges() == &expected[..];
    if !leave_delta_exact {
        problems.push("leave is not the input leave minus the cycle".into());
    }

    let injection: Vec<Point> = (0..u as Point).collect();
    let violations = if out.order() >= u {
        match new_subsystem_violations(out, input, &injection) {
            Ok(v) => v,
            Err(e) => {
                valid = false;
                problems.push(format!("{e}"));
                Vec::new()
            }
        }
    } else {
        Vec::new()
    };

    let mut unsafe_cosets = Vec::new();
    let phi = &result.phi;
    let mut seen = vec![false; u];
    let bijective = phi.len() == u
        && phi
            .iter()
            .all(|&p| (p as usize) < u && !core::mem::replace(&mut seen[p as usize], true));
    if bijective {
        for d in proper_divisors(u as u32) {
            for c in Coset::all_of(u as u32, d) {
                let image: Vec<Point> = c.elements().map(|x| phi[x as usize]).collect();
                if subsystem_from_points(input, &image).is_some() {
                    unsafe_cosets.push(c);
                }
            }
        }
    } else {
        problems.push("phi is not a bijection onto the input points".into());
    }

    let mut type_census = [0usize; 4];
    for b in out.blocks() {
        type_census[b.points().iter().filter(|&&p| (p as usize) < u).count()] += 1;
    }

    VerificationReport {
        valid: valid && bijective,
        leave_delta_exact,
        violations,
        unsafe_cosets,
        type_census,
        problems,
    }
}

/// `cert doubling u=<u> seed=<s> phi=<p0,p1,…> cycle=<x1,…,x6>`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub u: usize,
    pub seed: u64,
    pub phi: Vec<Point>,
    pub cycle: [Point; 6],
}

fn write_list(f: &mut fmt::Formatter<'_>, items: &[Point]) -> fmt::Result {
    for (k, p) in items.iter().enumerate() {
        if k > 0 {
            f.write_str(",")?;
        }
        write!(f, "{p}")?;
    }
    Ok(())
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cert doubling u={} seed={} phi=", self.u, self.seed)?;
        write_list(f, &self.phi)?;
        f.write_str(" cycle=")?;
        write_list(f, &self.cycle)
    }
}

/// Error from parsing a certificate line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseCertificateError(pub String);

impl fmt::Display for ParseCertificateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "malformed certificate: {}", self.0)
    }
}

impl core::error::Error for ParseCertificateError {}

impl FromStr for Certificate {
    type Err = ParseCertificateError;

    fn from_str(line: &str) -> core::result::Result<Certificate, ParseCertificateError> {
        let bad = |why: &str| ParseCertificateError(why.into());
        let mut words = line.split_whitespace();
        if words.next() != Some("cert") || words.next() != Some("doubling") {
            return Err(bad("expected 'cert doubling'"));
        }
        let (mut u, mut seed, mut phi, mut cycle) = (None, None, None, None);
        for word in words {
            let (key, value) = word.split_once('=').ok_or_else(|| bad(word))?;
            let list = || -> core::result::Result<Vec<Point>, ParseCertificateError> {
                value.split(',').map(|p| p.parse().map_err(|_| bad(value))).collect()
            };
            match key {
                "u" => u = Some(value.parse().map_err(|_| bad(value))?),
                "seed" => seed = Some(value.parse().map_err(|_| bad(value))?),
                "phi" => phi = Some(list()?),
                "cycle" => cycle = Some(list()?),
                _ => return Err(bad(key)),
            }
        }
        let cycle: [Point; 6] = cycle
            .ok_or_else(|| bad("missing cycle"))?
            .try_into()
            .map_err(|_| bad("cycle needs 6 points"))?;
        let cert = Certificate {
            u: u.ok_or_else(|| bad("missing u"))?,
            seed: seed.ok_or_else(|| bad("missing seed"))?,
            phi: phi.ok_or_else(|| bad("missing phi"))?,
            cycle,
        };
        if cert.phi.len() != cert.u {
            return Err(bad("phi length differs from u"));
        }
        Ok(cert)
    }
}
