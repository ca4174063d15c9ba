//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use common::*;
use sts_core::algebra::{
    closed_under_distinct_sums, harmonic_bound, induced_sub_factorisation, is_subgroup, OneFactorisation, ZnSet,
};
use sts_core::doubling::{counting_audit, double, extend_bijection, verify_doubling, FillPolicy};
use sts_core::embedding::{
    amalgamate, find_good_witness, find_six_cycle, plan_embedding, run_embedding, AmalgamationProblem, PlanOptions,
    RunOptions, RunStatus, VerifyMode,
};
use sts_core::generators::{
    affine, bose, hexagon_leave_around, partial_with_hexagon_leave, projective, random_partial, random_sts, skolem,
};
use sts_core::subsystems::{canonical_form, enumerate_subsystems, is_class_free, unique_small_subsystem};
use sts_core::{PartialSts, Point};

type Outcome = Result<String, String>;

fn check(ok: bool, pass: String, fail: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(pass)
    } else {
        Err(fail())
    }
}

fn divisors(n: u32) -> Vec<u32> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

fn criterion_1() -> Outcome {
    let (mut sets, mut closed_sets, mut counterexamples, mut disagreements) = (0u64, 0u64, 0u64, 0u64);
    let mut three_point = 0u64;
    for n in (3..=21u32).step_by(2) {
        for rest in 0u64..(1 << (n - 1)) {
            let mask = 1 | (rest << 1);
            if mask.count_ones() < 3 {
                continue;
            }
            sets += 1;
            let elems: Vec<u32> = (0..n).filter(|x| mask >> x & 1 == 1).collect();
            let closed = elems
                .iter()
                .enumerate()
                .all(|(k, &a)| elems[k + 1..].iter().all(|&b| mask >> ((a + b) % n) & 1 == 1));
            // a subgroup of a cyclic group is the set of multiples of a divisor
            let g = elems.iter().fold(n, |g, &x| gcd(g, x));
            let subgroup = elems.len() as u32 == n / g;
            let s = ZnSet::from_mask(n, mask);
            if closed_under_distinct_sums(&s) != closed || is_subgroup(&s) != subgroup {
                disagreements += 1;
            }
            if closed {
                closed_sets += 1;
                if !subgroup {
                    counterexamples += 1;
                    if elems.len() == 3 && (elems[1] + elems[2]).is_multiple_of(n) {
                        three_point += 1;
                    }
                }
            }
        }
    }
    check(
        counterexamples == 0 && disagreements == 0,
        format!("{sets} sets, {closed_sets} closed, 0 counterexamples"),
        || {
            format!(
                "{counterexamples} counterexamples, {three_point} of them {{0, a, -a}} with 3a != 0, \
                 {disagreements} oracle disagreements"
            )
        },
    )
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn criterion_2() -> Outcome {
    let (mut sets, mut inducing, mut mismatches) = (0u64, 0u64, Vec::new());
    for n in (3..=13u32).step_by(2) {
        let fac = OneFactorisation::standard(n).unwrap();
        let inf = n;
        let mut expected = std::collections::BTreeMap::new();
        for d in divisors(n).into_iter().filter(|&d| n / d >= 3) {
            for r in 0..d {
                let coset: Vec<u32> = (0..n / d).map(|k| r + k * d).collect();
                let mut s = coset.clone();
                s.push(inf);
                expected.insert(s, coset);
            }
        }
        for mask in 0u32..(1 << (n + 1)) {
            if mask.count_ones() <= 2 {
                continue;
            }
            sets += 1;
            let s: Vec<u32> = (0..=n).filter(|x| mask >> x & 1 == 1).collect();
            let got = induced_sub_factorisation(&s, &fac);
            if got.is_some() {
                inducing += 1;
            }
            if got.as_ref() != expected.get(&s) {
                mismatches.push((n, s));
            }
        }
    }
    check(
        mismatches.is_empty(),
        format!("{sets} sets, {inducing} induce sub-1-factorisations, all coset-shaped"),
        || format!("{} mismatches, first {:?}", mismatches.len(), mismatches[0]),
    )
}

/// ln via the atanh series, independent of the library's libm call.
fn ln_series(x: f64) -> f64 {
    let t = (x - 1.0) / (x + 1.0);
    let (mut term, mut sum, mut k) = (t, 0.0, 1.0);
    while term.abs() > 1e-18 {
        sum += term / k;
        term *= t * t;
        k += 2.0;
    }
    2.0 * sum
}

fn criterion_3() -> Outcome {
    let (mut pairs, mut violations, mut drift, mut tightest) = (0, 0, 0, f64::INFINITY);
    for lo in (3..=201u32).step_by(2) {
        let mut sum = 0.0;
        for hi in (lo..=201u32).step_by(2) {
            pairs += 1;
            sum += 1.0 / hi as f64;
            let bound = 0.5 * ln_series((hi as f64 + 1.0) / (lo as f64 - 1.0));
            if sum > bound {
                violations += 1;
            }
            tightest = tightest.min(bound - sum);
            let (s, b) = harmonic_bound(lo, hi).unwrap();
            if (s - sum).abs() > 1e-9 || (b - bound).abs() > 1e-9 {
                drift += 1;
            }
        }
    }
    check(
        violations == 0 && drift == 0,
        format!("{pairs} pairs, minimum slack {tightest:.3e}"),
        || format!("{violations} violations, {drift} disagreements with the series oracle"),
    )
}

fn uniqueness_hosts() -> Vec<(String, PartialSts)> {
    let mut hosts = vec![
        ("pg(3)".to_string(), projective(3).unwrap()),
        ("ag(2)".to_string(), affine(2).unwrap()),
    ];
    for v in [15, 21, 27] {
        hosts.push((format!("bose({v})"), bose(v).unwrap()));
    }
    for v in [13, 19, 25] {
        hosts.push((format!("skolem({v})"), skolem(v).unwrap()));
    }
    for seed in 0..100u64 {
        let v = 7 + (seed % 21) as usize;
        hosts.push((format!("random_partial({v},{seed})"), random_partial(v, seed)));
    }
    hosts
}

fn criterion_4() -> Outcome {
    let mut violations = Vec::new();
    let mut pairs = 0u64;
    for (name, ps) in uniqueness_hosts() {
        let lattice = enumerate_subsystems(&ps, 16);
        let recs = lattice.records();
        for (a, r1) in recs.iter().enumerate() {
            for r2 in &recs[a + 1..] {
                pairs += 1;
                let meet = r1.points().iter().filter(|p| r2.points().contains(p)).count();
                // the largest admissible R is min(8, |S1 ∩ S2|) points of the meet
                let need = r1.order().max(r2.order()).div_ceil(2);
                if meet >= 1 && meet.min(8) >= need {
                    violations.push(format!("{name}: {:?} {:?}", r1.points(), r2.points()));
                }
            }
        }
    }
    // literal sweep over every small R on the smaller hosts
    let mut literal = 0u64;
    let mut sweep: Vec<(PartialSts, usize)> = vec![
        (projective(2).unwrap(), 7),
        (affine(2).unwrap(), 8),
        (projective(3).unwrap(), 4),
        (bose(15).unwrap(), 4),
    ];
    sweep.extend((0..10u64).map(|s| (random_partial(7 + (s % 7) as usize, 1000 + s), 5)));
    for (ps, max_r) in &sweep {
        let lattice = enumerate_subsystems(ps, 16);
        let v = ps.order();
        for mask in 1u32..(1 << v) {
            let r: Vec<Point> = (0..v as Point).filter(|p| mask >> p & 1 == 1).collect();
            if r.len() > *max_r {
                continue;
            }
            literal += 1;
            // single points are order-1 subsystems the lattice does not store
            let singleton = [r.clone()].into_iter().filter(|r| r.len() == 1);
            let hits: Vec<Vec<Point>> = lattice
                .records()
                .iter()
                .filter(|s| s.order() <= 2 * r.len() && r.iter().all(|p| s.points().contains(p)))
                .map(|s| s.points().to_vec())
                .chain(singleton)
                .collect();
            let lib = unique_small_subsystem(ps, &r);
            if hits.len() > 1 || hits.first().map(Vec::as_slice) != lib.as_ref().map(|s| s.points()) {
                violations.push(format!("order {v}, R = {r:?}: {} subsystems", hits.len()));
            }
        }
    }
    check(
        violations.is_empty(),
        format!("{pairs} subsystem pairs, {literal} literal sets R, 0 violations"),
        || format!("{} violations, first {}", violations.len(), violations[0]),
    )
}

/// Every coset of every nontrivial proper subgroup maps off the subsystem
/// point sets of the host.
fn coset_safe(ps: &PartialSts, phi: &[Point]) -> Result<(), String> {
    let u = ps.order() as u32;
    let mut seen = vec![false; u as usize];
    if phi.len() != u as usize
        || phi
            .iter()
            .any(|&p| p >= u || std::mem::replace(&mut seen[p as usize], true))
    {
        return Err("not a bijection".into());
    }
    for d in divisors(u).into_iter().filter(|&d| d > 1 && d < u) {
        for r in 0..d {
            let mut image: Vec<Point> = (r..u).step_by(d as usize).map(|x| phi[x as usize]).collect();
            image.sort_unstable();
            if is_subsystem_set(ps, &image) {
                return Err(format!("coset {r} + <{d}> maps onto {image:?}"));
            }
        }
    }
    Ok(())
}

fn criterion_5() -> Outcome {
    let mut runs = 0u64;
    let mut failures = Vec::new();
    let mut attempt = |ps: &PartialSts, prefix: &[Point], seed: u64, label: &str| {
        runs += 1;
        match extend_bijection(ps, prefix, FillPolicy::from_seed(seed)) {
            Ok(b) => {
                if let Err(e) = coset_safe(ps, &b.phi) {
                    failures.push(format!("{label} seed {seed}: {e}"));
                }
            }
            Err(e) => failures.push(format!("{label} seed {seed}: {e}")),
        }
    };
    for u in [11usize, 13, 15, 21, 25, 27, 33] {
        let len = (u + 3) / 2;
        for seed in 0..100u64 {
            let mut r = rng(seed ^ (u as u64) << 32);
            let prefix: Vec<Point> = random_perm(u, &mut r)[..len].to_vec();
            if u % 6 == 1 || u % 6 == 3 {
                attempt(&random_sts(u, seed).unwrap(), &prefix, seed, &format!("complete u={u}"));
            }
            attempt(&random_partial(u, seed), &prefix, seed, &format!("partial u={u}"));
            if u >= 15 {
                let plant: [Point; 7] = random_perm(u, &mut r)[..7].try_into().unwrap();
                attempt(
                    &host_with_fano(u, &plant, &mut r),
                    &prefix,
                    seed,
                    &format!("planted u={u}"),
                );
            }
        }
    }
    // plants aligned with cosets, under the identity prefix
    let identity = |u: usize| (0..((u + 3) / 2) as Point).collect::<Vec<_>>();
    for seed in 0..100u64 {
        let mut r = rng(seed);
        for plant in [[0, 3, 6, 9, 12, 15, 18], [0, 3, 6, 9, 12, 13, 14]] {
            attempt(
                &host_with_fano(21, &plant, &mut r),
                &identity(21),
                seed,
                "coset plant u=21",
            );
        }
        let ag2 = affine(2).unwrap();
        let coset: Vec<[Point; 3]> = ag2.blocks().iter().map(|b| b.points().map(|p| 3 * p)).collect();
        attempt(
            &random_packing(27, &coset, &[], &mut r),
            &identity(27),
            seed,
            "coset plant u=27",
        );
    }
    let mut audits = 0u64;
    for u in (11..=99u32).step_by(2) {
        for i in (u + 3) / 2..=u - 3 {
            audits += 1;
            let a = counting_audit(u, i).unwrap();
            let oracle: Vec<u32> = divisors(u)
                .into_iter()
                .filter(|&d| d > 1 && d < u && matches!((u / d) % 6, 1 | 3))
                .filter(|&d| 2 * (0..=i).filter(|x| x % d == i % d).count() as u32 == u / d + 3)
                .collect();
            let r: u32 = oracle.iter().map(|d| (u / d - 1) / 2).sum();
            if a.divisors != oracle || a.r != r || r >= u - i - 1 {
                failures.push(format!(
                    "audit u={u} i={i}: lib {:?} oracle {oracle:?} r={r}",
                    a.divisors
                ));
            }
        }
    }
    check(
        failures.is_empty(),
        format!("{runs} bijections coset-safe, {audits} audits with r_i < u-i-1"),
        || format!("{} failures, first {}", failures.len(), failures[0]),
    )
}

fn criterion_6() -> Outcome {
    let mut failures = Vec::new();
    for seed in 0..20u64 {
        let input = partial_with_hexagon_leave(13, seed).unwrap();
        if input.num_blocks() != 24 || enumerate_subsystems(&input, 13).nontrivial_proper().next().is_some() {
            failures.push(format!("hexagon input seed {seed} is malformed"));
            continue;
        }
        let cycle = find_six_cycle(&input.leave_graph()).unwrap();
        let out = double(&input, &cycle, FillPolicy::from_seed(seed)).unwrap().output;
        let found: Vec<_> = enumerate_subsystems(&out, out.order())
            .nontrivial_proper()
            .map(|r| r.points().to_vec())
            .collect();
        if out.order() != 27 || !out.is_complete() || !found.is_empty() {
            failures.push(format!("u=13 seed {seed}: order {}, subsystems {found:?}", out.order()));
        }
    }
    let fano = projective(2).unwrap();
    let plant: Vec<Point> = (0..7).collect();
    let (mut accepted, mut seed) = (0, 0u64);
    while accepted < 20 && seed < 2000 {
        seed += 1;
        let Ok(input) = hexagon_leave_around(15, &fano, seed) else {
            continue;
        };
        let subs: Vec<_> = enumerate_subsystems(&input, 15)
            .nontrivial_proper()
            .map(|r| r.points().to_vec())
            .collect();
        if subs != [plant.clone()] {
            continue;
        }
        accepted += 1;
        let cycle = find_six_cycle(&input.leave_graph()).unwrap();
        let out = double(&input, &cycle, FillPolicy::from_seed(seed)).unwrap().output;
        let found: Vec<_> = enumerate_subsystems(&out, out.order())
            .nontrivial_proper()
            .map(|r| r.points().to_vec())
            .collect();
        if out.order() != 31 || !out.is_complete() || found != [plant.clone()] {
            failures.push(format!("u=15 seed {seed}: order {}, subsystems {found:?}", out.order()));
        }
    }
    if accepted < 20 {
        failures.push(format!("only {accepted} planted inputs at u=15"));
    }
    check(
        failures.is_empty(),
        "20 hexagon inputs give subsystem-free STS(27); 20 planted inputs keep exactly the Fano plane at 31".into(),
        || failures.join("; "),
    )
}

fn criterion_7() -> Outcome {
    let plan = plan_embedding(&PartialSts::empty(13), PlanOptions::default()).map_err(|e| e.to_string())?;
    let opts = RunOptions {
        step_limit: 2,
        verify: VerifyMode::Full,
        ..RunOptions::default()
    };
    let run = run_embedding(&plan, opts, |_, _| {}).map_err(|e| e.to_string())?;
    let orders: Vec<usize> = run.steps.iter().map(|s| s.order).collect();
    let full = plan.order_after(plan.t() as u32);
    check(
        plan.padded_order() == 13
            && plan.t() == 13
            && orders == [27, 55]
            && run.certified()
            && run.status == RunStatus::Truncated,
        format!("t=13, orders {orders:?} certified; full run would reach order {full}"),
        || {
            format!(
                "padded {} t {} orders {orders:?} status {:?}",
                plan.padded_order(),
                plan.t(),
                run.status
            )
        },
    )
}

fn criterion_8() -> Outcome {
    let fano = projective(2).unwrap();
    let pg3 = projective(3).unwrap();
    let forbidden = vec![pg3];
    let witness = find_good_witness(&forbidden).map_err(|e| e.to_string())?;
    let mut notes = vec![format!("witness order {}", witness.order())];
    let mut failures = Vec::new();
    for (label, identification) in [("disjoint", vec![]), ("over a block", vec![(0, 0), (1, 1), (2, 2)])] {
        let problem = AmalgamationProblem {
            left: fano.clone(),
            right: fano.clone(),
            identification,
            forbidden: forbidden.clone(),
            witness: witness.clone(),
        };
        let opts = RunOptions {
            step_limit: 2,
            ..RunOptions::default()
        };
        match amalgamate(&problem, PlanOptions::default(), opts) {
            Ok(run) => {
                let checked = run.checks.iter().filter(|c| c.step > 0).count();
                if !run.certified() || checked != run.run.steps_completed() || !run.checks.iter().all(|c| c.passed()) {
                    failures.push(format!("{label}: checks {:?}", run.checks));
                }
                notes.push(format!("{label}: {checked} steps to order {}", run.run.current.order()));
            }
            Err(e) => failures.push(format!("{label}: {e}")),
        }
    }
    let x = skolem(13).unwrap();
    if is_class_free(&x, std::slice::from_ref(&x)) != Ok(false) || is_class_free(&x, &[]) != Ok(true) {
        failures.push("class-freeness of STS(13) against {X} and {}".into());
    }
    check(failures.is_empty(), notes.join(", "), || failures.join("; "))
}

fn criterion_9() -> Outcome {
    let mut failures = Vec::new();
    let mut runs = 0;
    for seed in 0..1000u64 {
        let u = [11usize, 13, 15][(seed % 3) as usize];
        let (ps, cycle) = host_with_hexagon(u, &mut rng(seed));
        let res = match double(&ps, &cycle, FillPolicy::from_seed(seed)) {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("u={u} seed {seed}: {e}"));
                continue;
            }
        };
        runs += 1;
        let dagger: BTreeSet<_> = res.b_dagger.iter().collect();
        let hex: BTreeSet<_> = cycle.edges().iter().map(|&(a, b)| pair_key(a, b)).collect();
        let expected: BTreeSet<_> = ps
            .leave_graph()
            .edges()
            .iter()
            .map(|&(a, b)| pair_key(a, b))
            .filter(|e| !hex.contains(e))
            .collect();
        let mut covered = BTreeSet::new();
        for b in res.output.blocks() {
            covered.extend(b.pairs());
        }
        let n = 2 * u as Point + 1;
        let leave: BTreeSet<_> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|p| !covered.contains(p))
            .collect();
        let ok = res.b_ddagger.iter().all(|b| dagger.contains(b))
            && res.b_dagger.len() == u * (u + 1) / 2
            && res.output.num_blocks() == ps.num_blocks() + u * (u + 1) / 2 + 2
            && leave == expected
            && verify_doubling(&ps, &res, &cycle).leave_delta_exact;
        if !ok {
            failures.push(format!("u={u} seed {seed}"));
        }
    }
    check(
        failures.is_empty() && runs == 1000,
        format!("{runs} runs, all identities exact"),
        || format!("{} failures, first {}", failures.len(), failures[0]),
    )
}

fn criterion_10() -> Outcome {
    let mut corpus = vec![
        projective(2).unwrap(),
        affine(2).unwrap(),
        projective(3).unwrap(),
        bose(9).unwrap(),
        bose(15).unwrap(),
        skolem(13).unwrap(),
        random_sts(13, 1).unwrap(),
        random_sts(15, 2).unwrap(),
    ];
    for seed in 0..4 {
        corpus.push(partial_with_hexagon_leave(13, seed).unwrap());
        corpus.push(partial_with_hexagon_leave(15, seed).unwrap());
        corpus.push(hexagon_leave_around(15, &projective(2).unwrap(), seed).unwrap());
    }
    for v in 3..=15 {
        corpus.push(random_partial(v, v as u64));
    }
    let mut mismatches = Vec::new();
    for ps in &corpus {
        let lib: Vec<Vec<Point>> = enumerate_subsystems(ps, ps.order())
            .records()
            .iter()
            .filter(|r| r.order() >= 3)
            .map(|r| r.points().to_vec())
            .collect();
        if lib != brute_force_subsystems(ps) {
            mismatches.push(format!("order {} with {} blocks", ps.order(), ps.num_blocks()));
        }
    }
    let complete: Vec<&PartialSts> = corpus.iter().filter(|p| p.is_complete()).collect();
    let forms: Vec<_> = complete.iter().map(|p| canonical_form(p).unwrap()).collect();
    let mut r = rng(10);
    for k in 0..1000 {
        let j = k % complete.len();
        let perm = random_perm(complete[j].order(), &mut r);
        if canonical_form(&complete[j].relabel(&perm).unwrap()).unwrap() != forms[j] {
            mismatches.push(format!(
                "canonical form moved under a relabel of order {}",
                complete[j].order()
            ));
        }
    }
    check(
        mismatches.is_empty(),
        format!(
            "{} corpus systems match the subset oracle; 1000 relabels keep canonical forms",
            corpus.len()
        ),
        || format!("{} mismatches, first {}", mismatches.len(), mismatches[0]),
    )
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    // criterion 1 has genuine counterexamples {0, a, -a}; it is reported but
    // does not fail the target
    const KNOWN_FAILING: &[u32] = &[1];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, f) in criteria {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {n}: PASS ({msg}; {secs:.1}s)"),
            Err(msg) => {
                let known = KNOWN_FAILING.contains(&n);
                if !known {
                    failed += 1;
                }
                println!(
                    "criterion {n}: FAIL ({msg}; {secs:.1}s){}",
                    if known { " [known]" } else { "" }
                );
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
