//! Embedding a partial system in a complete one without new subsystems:
//! pad to a suitable order, split the leave into 6-cycles, and double once
//! per cycle. Amalgamation glues two systems and a witness before embedding.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::doubling::{double, verify_doubling, Certificate, DoublingResult, FillPolicy, SixCycle, VerificationReport};
use crate::error::{Error, Result};
use crate::generators::{bose, random_sts, skolem};
use crate::rng::seeded;
use crate::subsystems::{
    canonical_form, enumerate_subsystems, is_class_free, is_subsystem_free, new_subsystem_violations,
    subsystem_from_points, CanonicalForm,
};
use crate::system::{LeaveGraph, PartialSts, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: usize) -> Parity {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Smallest order `u′ ≥ max(lower, u, 13)` with `u′ ≡ 1, 9 (mod 12)` for an
/// even block count or `u′ ≡ 3, 7 (mod 12)` for an odd one.
pub fn padding_order(u: usize, blocks: Parity, lower: usize) -> usize {
    let residues: [usize; 2] = match blocks {
        Parity::Even => [1, 9],
        Parity::Odd => [3, 7],
    };
    (lower.max(u).max(13)..)
        .find(|v| residues.contains(&(v % 12)))
        .expect("unbounded range")
}

fn check_decomposable(leave: &LeaveGraph) -> Result<()> {
    if let Some((v, &d)) = leave.degrees().iter().enumerate().find(|(_, d)| *d % 2 == 1) {
        return Err(Error::BadDegrees {
            vertex: v as Point,
            degree: d,
        });
    }
    if !leave.num_edges().is_multiple_of(6) {
        return Err(Error::BadEdgeCount(leave.num_edges()));
    }
    Ok(())
}

/// Backtracking search for 6-cycles covering a graph, edge by edge.
struct Decomposer<'r, R: Rng> {
    n: usize,
    adj: Vec<bool>,
    degree: Vec<usize>,
    edges: usize,
    nodes_left: usize,
    cycles: Vec<[Point; 6]>,
    rng: &'r mut R,
}

enum Outcome {
    Found,
    Dead,
    OutOfBudget,
}

impl<R: Rng> Decomposer<'_, R> {
    fn has(&self, a: Point, b: Point) -> bool {
        self.adj[a as usize * self.n + b as usize]
    }

    fn set(&mut self, a: Point, b: Point, on: bool) {
        self.adj[a as usize * self.n + b as usize] = on;
        self.adj[b as usize * self.n + a as usize] = on;
        if on {
            self.degree[a as usize] += 1;
            self.degree[b as usize] += 1;
            self.edges += 1;
        } else {
            self.degree[a as usize] -= 1;
            self.degree[b as usize] -= 1;
            self.edges -= 1;
        }
    }

    fn neighbours(&mut self, a: Point, avoid: &[Point]) -> Vec<Point> {
        let mut out: Vec<Point> = (0..self.n as Point)
            .filter(|&b| self.has(a, b) && !avoid.contains(&b))
            .collect();
        out.shuffle(self.rng);
        out
    }

    fn toggle_cycle(&mut self, c: &[Point; 6], on: bool) {
        for k in 0..6 {
            self.set(c[k], c[(k + 1) % 6], on);
        }
    }

    /// Every connected component must carry a multiple of 6 edges.
    fn components_ok(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = Vec::new();
        for s in 0..self.n {
            if seen[s] || self.degree[s] == 0 {
                continue;
            }
            seen[s] = true;
            stack.push(s);
            let mut degree_sum = 0;
            while let Some(a) = stack.pop() {
                degree_sum += self.degree[a];
                for (b, flag) in seen.iter_mut().enumerate() {
                    if self.adj[a * self.n + b] && !*flag {
                        *flag = true;
                        stack.push(b);
                    }
                }
            }
            if (degree_sum / 2) % 6 != 0 {
                return false;
            }
        }
        true
    }

    fn solve(&mut self) -> Outcome {
        if self.edges == 0 {
            return Outcome::Found;
        }
        if self.nodes_left == 0 {
            return Outcome::OutOfBudget;
        }
        self.nodes_left -= 1;
        let x = (0..self.n)
            .filter(|&v| self.degree[v] > 0)
            .min_by_key(|&v| self.degree[v])
            .expect("edges remain") as Point;
        let y = self.neighbours(x, &[])[0];
        for a in self.neighbours(y, &[x]) {
            for b in self.neighbours(a, &[x, y]) {
                for c in self.neighbours(b, &[x, y, a]) {
                    for d in self.neighbours(c, &[x, y, a, b]) {
                        if !self.has(d, x) {
                            continue;
                        }
                        let cycle = [x, y, a, b, c, d];
                        self.toggle_cycle(&cycle, false);
                        if self.components_ok() {
                            self.cycles.push(cycle);
                            match self.solve() {
                                Outcome::Dead => {
                                    self.cycles.pop();
                                }
                                done => return done,
                            }
                        }
                        self.toggle_cycle(&cycle, true);
                    }
                }
            }
        }
        Outcome::Dead
    }
}

/// Start at the smallest vertex, then walk towards its smaller neighbour.
fn normalise(c: [Point; 6]) -> [Point; 6] {
    let k = (0..6).min_by_key(|&k| c[k]).expect("nonempty");
    let fwd: [Point; 6] = core::array::from_fn(|j| c[(k + j) % 6]);
    let back: [Point; 6] = core::array::from_fn(|j| c[(k + 6 - j) % 6]);
    if fwd[1] < back[1] {
        fwd
    } else {
        back
    }
}

/// Splits `leave` into edge-disjoint 6-cycles, ordered lexicographically by
/// sorted vertex tuple. `None` when `budget` search nodes do not suffice.
pub fn six_cycle_decomposition(leave: &LeaveGraph, budget: usize, seed: u64) -> Result<Option<Vec<SixCycle>>> {
    check_decomposable(leave)?;
    let n = leave.order();
    let mut rng = seeded(seed);
    let mut remaining = budget;
    let mut attempt_budget = 64 + leave.num_edges();
    while remaining > 0 {
        let nodes = attempt_budget.min(remaining);
        remaining -= nodes;
        attempt_budget = attempt_budget.saturating_mul(2);
        let mut dec = Decomposer {
            n,
            adj: vec![false; n * n],
            degree: vec![0; n],
            edges: 0,
            nodes_left: nodes,
            cycles: Vec::new(),
            rng: &mut rng,
        };
        for &(a, b) in leave.edges() {
            dec.set(a, b, true);
        }
        if !dec.components_ok() {
            return Ok(None);
        }
        match dec.solve() {
            Outcome::Found => {
                let mut cycles: Vec<[Point; 6]> = dec.cycles.into_iter().map(normalise).collect();
                cycles.sort_by_key(|c| {
                    let mut s = *c;
                    s.sort_unstable();
                    (s, *c)
                });
                return cycles
                    .into_iter()
                    .map(SixCycle::new)
                    .collect::<Result<Vec<_>>>()
                    .map(Some);
            }
            Outcome::Dead => return Ok(None),
            Outcome::OutOfBudget => {}
        }
    }
    Ok(None)
}

/// The lexicographically first 6-cycle of `leave` in normalised form.
pub fn find_six_cycle(leave: &LeaveGraph) -> Option<SixCycle> {
    let adj = leave.adjacency();
    let mut best: Option<[Point; 6]> = None;
    for x in 0..leave.order() as Point {
        for &y in adj[x as usize].iter().filter(|&&y| y > x) {
            for &a in adj[y as usize].iter().filter(|&&a| a > x) {
                for &b in adj[a as usize].iter().filter(|&&b| b > x && b != y) {
                    for &c in adj[b as usize].iter().filter(|&&c| c > x && c != y && c != a) {
                        for &d in adj[c as usize].iter().filter(|&&d| d > y && d != a && d != b) {
                            if leave.contains(d, x) {
                                let cycle = [x, y, a, b, c, d];
                                if best.is_none_or(|bst| cycle < bst) {
                                    best = Some(cycle);
                                }
                            }
                        }
                    }
                }
            }
        }
        if best.is_some() {
            break;
        }
    }
    best.map(|c| SixCycle::new(c).expect("distinct"))
}

/// Padded input and the 6-cycles its leave splits into.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddingPlan {
    pub input: PartialSts,
    pub padded: PartialSts,
    pub cycles: Vec<SixCycle>,
}

impl EmbeddingPlan {
    pub fn padded_order(&self) -> usize {
        self.padded.order()
    }

    pub fn t(&self) -> usize {
        self.cycles.len()
    }

    /// Order after `k` doublings: `u′·2^k + 2^k − 1`.
    pub fn order_after(&self, k: u32) -> u128 {
        let p = 1u128 << k;
        self.padded_order() as u128 * p + p - 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlanOptions {
    /// Lower bound on the padded order.
    pub lower: usize,
    /// Search nodes per candidate order.
    pub budget: usize,
    /// Further congruent orders tried after the first.
    pub escalations: usize,
    pub seed: u64,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions {
            lower: 0,
            budget: 200_000,
            escalations: 4,
            seed: 0,
        }
    }
}

pub fn plan_embedding(ps: &PartialSts, opts: PlanOptions) -> Result<EmbeddingPlan> {
    let parity = Parity::of(ps.num_blocks());
    let mut order = padding_order(ps.order(), parity, opts.lower);
    for _ in 0..=opts.escalations {
        let padded = ps.pad(order);
        let leave = padded.leave_graph();
        // a hard error: the congruence should make this impossible
        check_decomposable(&leave)?;
        if let Some(cycles) = six_cycle_decomposition(&leave, opts.budget, opts.seed)? {
            return Ok(EmbeddingPlan {
                input: ps.clone(),
                padded,
                cycles,
            });
        }
        order = padding_order(order + 1, parity, 0);
    }
    Err(Error::DecompositionNotFound { last_order: order })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum VerifyMode {
    /// Every step, plus a direct check of the final system against the input.
    #[default]
    Full,
    /// Every step against its predecessor.
    Steps,
    /// Leave invariant only.
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub step_limit: usize,
    pub verify: VerifyMode,
    pub seed: u64,
    /// Largest order that will be constructed.
    pub max_order: usize,
    /// Largest order that will be verified by subsystem enumeration.
    pub verify_cap: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            step_limit: 3,
            verify: VerifyMode::Full,
            seed: 0,
            max_order: 100_000,
            verify_cap: 500,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Complete,
    Truncated,
    Failed { step: usize, reason: String },
}

/// Per-step record of a run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepReport {
    pub step: usize,
    pub order: usize,
    pub certificate: Certificate,
    /// `None` when verification was off or the order exceeded the cap.
    pub verification: Option<VerificationReport>,
    pub leave_invariant: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddingRun {
    pub plan: EmbeddingPlan,
    pub current: PartialSts,
    pub steps: Vec<StepReport>,
    pub status: RunStatus,
    /// Final check against the padded input, in [`VerifyMode::Full`].
    pub final_violations: Option<usize>,
}

impl EmbeddingRun {
    pub fn steps_completed(&self) -> usize {
        self.steps.len()
    }

    /// Every step carries a passing verification report.
    pub fn certified(&self) -> bool {
        !matches!(self.status, RunStatus::Failed { .. })
            && self
                .steps
                .iter()
                .all(|s| s.leave_invariant && s.verification.as_ref().is_some_and(|r| r.passed()))
            && self.final_violations.unwrap_or(0) == 0
    }
}

fn leave_matches(ps: &PartialSts, remaining: &[SixCycle]) -> bool {
    let expected = LeaveGraph::new(ps.order(), remaining.iter().flat_map(|c| c.edges()));
    expected.num_edges() == 6 * remaining.len() && ps.leave_graph() == expected
}

/// Applies the planned doublings, up to `opts.step_limit` of them. `on_step`
/// sees each new system as soon as it is built.
pub fn run_embedding(
    plan: &EmbeddingPlan,
    opts: RunOptions,
    mut on_step: impl FnMut(&StepReport, &DoublingResult),
) -> Result<EmbeddingRun> {
    let steps = plan.t().min(opts.step_limit);
    let final_order = plan.order_after(steps as u32);
    if final_order > opts.max_order as u128 {
        return Err(Error::BudgetExceeded {
            order: final_order.min(usize::MAX as u128) as usize,
            cap: opts.max_order,
        });
    }
    let policy = FillPolicy::from_seed(opts.seed);
    let mut current = plan.padded.clone();
    let mut reports = Vec::new();
    let mut status = if steps == plan.t() {
        RunStatus::Complete
    } else {
        RunStatus::Truncated
    };
    for (k, cycle) in plan.cycles.iter().take(steps).enumerate() {
        let step = k + 1;
        let result = double(&current, cycle, policy).map_err(|e| Error::StepFailed {
            step,
            reason: format!("{e}"),
        })?;
        let leave_invariant = leave_matches(&result.output, &plan.cycles[step..]);
        let verification = match opts.verify {
            VerifyMode::Off => None,
            _ if result.output.order() > opts.verify_cap => None,
            _ => Some(verify_doubling(&current, &result, cycle)),
        };
        let report = StepReport {
            step,
            order: result.output.order(),
            certificate: result.certificate(),
            verification,
            leave_invariant,
        };
        on_step(&report, &result);
        let failure = if !leave_invariant {
            Some(String::from("leave is not the union of the remaining cycles"))
        } else {
            report
                .verification
                .as_ref()
                .filter(|r| !r.passed())
                .map(|r| format!("verification failed: {:?}", r.problems))
        };
        reports.push(report);
        current = result.output;
        if let Some(reason) = failure {
            status = RunStatus::Failed { step, reason };
            break;
        }
    }
    let final_violations = match (opts.verify, &status) {
        (VerifyMode::Full, RunStatus::Complete | RunStatus::Truncated)
            if steps > 0 && current.order() <= opts.verify_cap =>
        {
            let id: Vec<Point> = (0..plan.padded_order() as Point).collect();
            Some(new_subsystem_violations(&current, &plan.padded, &id)?.len())
        }
        _ => None,
    };
    if final_violations.is_some_and(|n| n > 0) {
        status = RunStatus::Failed {
            step: steps,
            reason: "final system has new subsystems".into(),
        };
    }
    Ok(EmbeddingRun {
        plan: plan.clone(),
        current,
        steps: reports,
        status,
        final_violations,
    })
}

/// Two systems to amalgamate over a common subsystem (possibly empty), a
/// forbidden class, and a subsystem-free witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmalgamationProblem {
    pub left: PartialSts,
    pub right: PartialSts,
    /// `(point of left, point of right)` pairs naming the shared subsystem.
    pub identification: Vec<(Point, Point)>,
    pub forbidden: Vec<PartialSts>,
    pub witness: PartialSts,
}

/// The system `V₁ ∪ V₂ ∪ V*` handed to the embedding pipeline.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Amalgam {
    pub union: PartialSts,
    /// Where each right point went; left points keep their indices.
    pub right_map: Vec<Point>,
    /// Witness points occupy `witness_offset..union.order()`.
    pub witness_offset: usize,
}

fn check_overlap(p: &AmalgamationProblem) -> Result<()> {
    let left: Vec<Point> = p.identification.iter().map(|&(a, _)| a).collect();
    let right: Vec<Point> = p.identification.iter().map(|&(_, b)| b).collect();
    if left.iter().any(|&a| a as usize >= p.left.order()) || right.iter().any(|&b| b as usize >= p.right.order()) {
        return Err(Error::BadIdentification("point out of range".into()));
    }
    let l = subsystem_from_points(&p.left, &left)
        .ok_or_else(|| Error::OverlapNotSubsystem(format!("{left:?} is not a subsystem of the left system")))?;
    let r = subsystem_from_points(&p.right, &right)
        .ok_or_else(|| Error::OverlapNotSubsystem(format!("{right:?} is not a subsystem of the right system")))?;
    if l.order() != p.identification.len() || l.blocks().len() != r.blocks().len() {
        return Err(Error::OverlapNotSubsystem("overlap sizes differ".into()));
    }
    for b in l.blocks() {
        let image = b.map(|x| {
            p.identification
                .iter()
                .find(|&&(a, _)| a == x)
                .map(|&(_, y)| y)
                .expect("in overlap")
        });
        if !image.is_some_and(|blk| p.right.contains_block(&blk)) {
            return Err(Error::OverlapNotSubsystem(format!(
                "{b:?} does not map to a right block"
            )));
        }
    }
    Ok(())
}

/// Checks that `witness` is complete, subsystem-free and not isomorphic to a
/// subsystem of any member of `forbidden`.
pub fn check_witness(witness: &PartialSts, forbidden: &[PartialSts]) -> Result<()> {
    if !witness.is_complete() || witness.order() <= 3 {
        return Err(Error::WitnessInvalid(
            "witness must be a complete system of order > 3".into(),
        ));
    }
    if !is_subsystem_free(witness)? {
        return Err(Error::WitnessInvalid(
            "witness has a nontrivial proper subsystem".into(),
        ));
    }
    let form = canonical_form(witness)?;
    if forbidden.iter().any(|f| contains_copy(f, &form)) {
        return Err(Error::WitnessInvalid(
            "witness is isomorphic to a subsystem of a forbidden system".into(),
        ));
    }
    Ok(())
}

fn contains_copy(host: &PartialSts, form: &CanonicalForm) -> bool {
    host.order() >= form.order()
        && enumerate_subsystems(host, form.order())
            .of_order(form.order())
            .any(|r| canonical_form(&r.to_system()).is_ok_and(|f| f == *form))
}

/// Glues left and right along the identification and appends the witness.
pub fn build_amalgam(p: &AmalgamationProblem) -> Result<Amalgam> {
    check_overlap(p)?;
    check_witness(&p.witness, &p.forbidden)?;
    let glued = PartialSts::glued_union(&p.left, &p.right, &p.identification)?;
    let with_witness = PartialSts::glued_union(&glued.system, &p.witness, &[])?;
    Ok(Amalgam {
        witness_offset: glued.system.order(),
        union: with_witness.system,
        right_map: glued.right_map,
    })
}

/// Per-step checks for an amalgamation run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmalgamCheck {
    pub step: usize,
    pub left_embedded: bool,
    pub right_embedded: bool,
    pub witness_embedded: bool,
    /// No subsystem of the step system is isomorphic to a forbidden member.
    pub class_free: bool,
}

impl AmalgamCheck {
    pub fn passed(&self) -> bool {
        self.left_embedded && self.right_embedded && self.witness_embedded && self.class_free
    }
}

fn embedded_as_subsystem(host: &PartialSts, sys: &PartialSts, map: impl Fn(Point) -> Point) -> bool {
    let points: Vec<Point> = (0..sys.order() as Point).map(&map).collect();
    subsystem_from_points(host, &points).is_some_and(|r| {
        r.blocks().len() == sys.num_blocks()
            && sys
                .blocks()
                .iter()
                .all(|b| b.map(&map).is_some_and(|m| host.contains_block(&m)))
    })
}

pub fn check_amalgam(
    step: usize,
    system: &PartialSts,
    problem: &AmalgamationProblem,
    amalgam: &Amalgam,
) -> Result<AmalgamCheck> {
    let off = amalgam.witness_offset as Point;
    Ok(AmalgamCheck {
        step,
        left_embedded: embedded_as_subsystem(system, &problem.left, |p| p),
        right_embedded: embedded_as_subsystem(system, &problem.right, |p| amalgam.right_map[p as usize]),
        witness_embedded: embedded_as_subsystem(system, &problem.witness, |p| p + off),
        class_free: is_class_free(system, &problem.forbidden)?,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmalgamationRun {
    pub amalgam: Amalgam,
    pub run: EmbeddingRun,
    /// One entry per verified system, the padded union first.
    pub checks: Vec<AmalgamCheck>,
}

impl AmalgamationRun {
    pub fn certified(&self) -> bool {
        self.run.certified() && self.checks.iter().all(AmalgamCheck::passed)
    }
}

/// Embeds left ∪ right ∪ witness, checking the inputs and the forbidden
/// class on every step up to the verification cap.
pub fn amalgamate(
    problem: &AmalgamationProblem,
    plan_opts: PlanOptions,
    run_opts: RunOptions,
) -> Result<AmalgamationRun> {
    let amalgam = build_amalgam(problem)?;
    let plan = plan_embedding(&amalgam.union, plan_opts)?;
    let mut checks = vec![check_amalgam(0, &plan.padded, problem, &amalgam)?];
    let mut deferred: Option<Error> = None;
    let run = run_embedding(&plan, run_opts, |report, result| {
        if deferred.is_some() || run_opts.verify == VerifyMode::Off || report.order > run_opts.verify_cap {
            return;
        }
        match check_amalgam(report.step, &result.output, problem, &amalgam) {
            Ok(c) => checks.push(c),
            Err(e) => deferred = Some(e),
        }
    })?;
    if let Some(e) = deferred {
        return Err(e);
    }
    Ok(AmalgamationRun { amalgam, run, checks })
}

fn witness_candidates(v: usize) -> impl Iterator<Item = PartialSts> {
    let classic = if v % 6 == 1 { skolem(v).ok() } else { bose(v).ok() };
    classic
        .into_iter()
        .chain((1..=20u64).filter_map(move |seed| random_sts(v, seed).ok()))
}

/// A complete subsystem-free system not isomorphic to any subsystem of a
/// member of `forbidden`, searched over orders 13, 15, 19, … up to 45.
pub fn find_good_witness(forbidden: &[PartialSts]) -> Result<PartialSts> {
    for f in forbidden {
        if f.order() <= 3 {
            return Err(Error::TrivialForbidden { order: f.order() });
        }
    }
    for v in (13..=45).filter(|v| v % 6 == 1 || v % 6 == 3) {
        let hosts: Vec<&PartialSts> = forbidden.iter().filter(|f| f.order() >= v).collect();
        let copies: Vec<CanonicalForm> = hosts
            .iter()
            .flat_map(|f| {
                enumerate_subsystems(f, v)
                    .of_order(v)
                    .filter_map(|r| canonical_form(&r.to_system()).ok())
                    .collect::<Vec<_>>()
            })
            .collect();
        for candidate in witness_candidates(v) {
            if !is_subsystem_free(&candidate)? {
                continue;
            }
            if copies.is_empty() || !copies.contains(&canonical_form(&candidate)?) {
                return Ok(candidate);
            }
        }
    }
    Err(Error::WitnessNotFound)
}
