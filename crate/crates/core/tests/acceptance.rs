//! Acceptance run: one line per criterion, non-zero exit if any criterion fails.
//!
//! Oracles that produce expected values are written here from the definitions,
//! independently of the library code they check.

use std::collections::{HashMap, HashSet};
use std::process::Command;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use condtrace::bits::BitSet;
use condtrace::cts::{
    build_alpha, direct_behaviour, direct_failure, direct_language, direct_ready, example_e1, example_e2,
    behaviour_equiv, fixpoint_traces, random_cts, refusal_downclosure_witness, RandomBounds,
    Cts, Mode, ObsKind,
};
use condtrace::dlaw::{
    check_beck_chevalley, check_closed_form, check_kl_law, check_lifting_preserves, is_weak_pullback,
    non_pullback_square, FiniteFunctor, Induced, Mutant, Mutation, StandardLifting, Universe,
};
use condtrace::kleisli::{check_kleisli_laws, check_relkleisli_laws, EXHAUSTIVE_BUDGET};
use condtrace::monad::Backend;
use condtrace::order::{FinPoset, FinSet};
use condtrace::report::{Coverage, LawReport};
use condtrace::suites::{carriers, dlaw_functors, lambda_squares, lifting_theorems, monad_suite, two_conditions};
use condtrace::transport::{
    optimal_coupling_value, pq_unit, random_instance, seeded_rng, Omega, QuantaleProbes,
};

const SEED: u64 = 2024;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn first_failure(r: &LawReport) -> String {
    r.failures()
        .next()
        .map(|e| format!("{}: {}", e.name, e.counterexample.clone().unwrap_or_default()))
        .unwrap_or_default()
}

fn is_exhaustive(c: &Coverage) -> bool {
    matches!(c, Coverage::Exhaustive(_))
}

/// Sampled entries of `r` that no exhaustive entry decides. A sampled law is
/// decided when the same prefix carries a passing exhaustive entry named by `companion`.
fn undecided(r: &LawReport, companion: impl Fn(&str) -> Option<String>) -> Vec<String> {
    let exhaustive: HashSet<&str> = r
        .entries
        .iter()
        .filter(|e| e.passed && is_exhaustive(&e.coverage))
        .map(|e| e.name.as_str())
        .collect();
    r.entries
        .iter()
        .filter(|e| !is_exhaustive(&e.coverage))
        .filter(|e| companion(&e.name).is_none_or(|c| !exhaustive.contains(c.as_str())))
        .map(|e| e.name.clone())
        .collect()
}

fn replace_last(name: &str, from: &str, to: &str) -> Option<String> {
    name.strip_suffix(from).map(|p| format!("{p}{to}"))
}

fn cases(r: &LawReport) -> u64 {
    r.entries.iter().map(|e| e.coverage.cases()).sum()
}

fn criterion_1() -> Outcome {
    let r = monad_suite(4).expect("monad suite");
    if !r.all_pass() {
        return outcome(false, first_failure(&r));
    }
    let open = undecided(&r, |n| replace_last(n, "/associativity/pairs", "/associativity/join-generators"));
    outcome(
        open.is_empty(),
        format!("{} laws, {} cases; undecided: {open:?}", r.entries.len(), cases(&r)),
    )
}

fn criterion_2() -> Outcome {
    let mut r = LawReport::new();
    let mut conds = vec![FinPoset::discrete(&FinSet::new(["k"]).unwrap())];
    conds.extend(two_conditions());
    for backend in [Backend::Set, Backend::Pos] {
        let cs = carriers(backend, 2);
        for x in &cs {
            for y in &cs {
                let kl = check_kleisli_laws(backend, x, y, EXHAUSTIVE_BUDGET, SEED).unwrap();
                r.absorb(&format!("{}/Kl/{x}->{y}", backend.name()), kl);
                for k in &conds {
                    let rel = check_relkleisli_laws(backend, k, x, y, EXHAUSTIVE_BUDGET, SEED).unwrap();
                    r.absorb(&format!("{}/KlG/K={k}/{x}->{y}", backend.name()), rel);
                }
            }
        }
    }
    if !r.all_pass() {
        return outcome(false, first_failure(&r));
    }
    let open = undecided(&r, |n| replace_last(n, "/associativity", "/associativity/join-generators"));
    let shown: Vec<&String> = open.iter().take(3).collect();
    outcome(
        open.is_empty(),
        format!(
            "{} laws hold on {} cases; {} entries only sampled, e.g. {shown:?}",
            r.entries.len(),
            cases(&r),
            open.len()
        ),
    )
}

fn criterion_3() -> Outcome {
    let r = lifting_theorems(2, SEED).expect("lifting theorems");
    if !r.all_pass() {
        return outcome(false, first_failure(&r));
    }
    // the laws asked for are identity, functoriality and agreement on pure arrows
    let required = |name: &str| {
        let last = name.rsplit('/').next().unwrap();
        ["-identity", "-composition", "-pure"].iter().any(|q| last.ends_with(q))
    };
    let open: Vec<String> = undecided(&r, |n| {
        replace_last(n, "/bhat-composition", "/composition/join-generators")
            .or_else(|| replace_last(n, "/atilde-composition", "/composition/join-generators"))
    })
    .into_iter()
    .filter(|n| required(n))
    .collect();
    outcome(
        open.is_empty(),
        format!("{} entries, {} cases; undecided: {open:?}", r.entries.len(), cases(&r)),
    )
}

fn criterion_4() -> Outcome {
    let mut r = LawReport::new();
    for backend in [Backend::Set, Backend::Pos] {
        let universe = Universe::up_to(backend, 3);
        for functor in dlaw_functors() {
            let prefix = format!("{}/{}", backend.name(), functor.name());
            r.absorb(&prefix, check_closed_form(&functor, &universe).unwrap());
            r.absorb(&prefix, check_kl_law(&Induced(StandardLifting(functor.clone())), &universe).unwrap());
        }
    }
    let all_exhaustive = r.entries.iter().all(|e| is_exhaustive(&e.coverage));
    let pass = r.all_pass() && all_exhaustive;
    let detail = if r.all_pass() {
        format!("{} laws, {} cases, exhaustive: {all_exhaustive}", r.entries.len(), cases(&r))
    } else {
        first_failure(&r)
    };
    outcome(pass, detail)
}

fn criterion_5() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let mut flipped = 0;
    let mut mutants = 0;
    for backend in [Backend::Set, Backend::Pos] {
        let universe = Universe::up_to(backend, 3);
        for functor in dlaw_functors() {
            let sigma = StandardLifting(functor.clone());
            let pres = check_lifting_preserves(&Induced(sigma.clone()), &universe, 2).unwrap();
            if !pres.all_pass() {
                ok = false;
                notes.push(first_failure(&pres));
            }
            for mutation in Mutation::ALL {
                if mutation == Mutation::DropObservations && !matches!(functor, FiniteFunctor::B(_)) {
                    continue;
                }
                mutants += 1;
                let r = check_kl_law(
                    &Mutant {
                        base: sigma.clone(),
                        mutation,
                    },
                    &universe,
                )
                .unwrap();
                if r.all_pass() {
                    ok = false;
                    notes.push(format!("{} {} mutant {} undetected", backend.name(), functor.name(), mutation.name()));
                } else {
                    flipped += 1;
                }
            }
        }
    }
    outcome(ok, format!("preservation holds; {flipped} of {mutants} mutants flip a verdict {notes:?}"))
}

fn criterion_6() -> Outcome {
    let mut squares = 0;
    for backend in [Backend::Set, Backend::Pos] {
        for functor in dlaw_functors() {
            let r = lambda_squares(backend, &functor, 3).unwrap();
            if !r.all_pass() {
                return outcome(false, first_failure(&r));
            }
            squares += r.entries[0].coverage.cases();
        }
    }
    let sq = non_pullback_square();
    let bc = check_beck_chevalley(&sq, 16).unwrap();
    let witness = bc.failures().next().and_then(|e| e.counterexample.clone());
    match witness {
        Some(w) if !is_weak_pullback(&sq) => {
            println!("    non-pullback witness: {w}");
            outcome(true, format!("{squares} lambda squares are weak pullbacks satisfying B-C"))
        }
        _ => outcome(false, "the non-pullback square passes B-C"),
    }
}

/// A word with its non-empty reach set.
type Reached = (Vec<usize>, BitSet);

/// Decorated traces by direct reachability, per `(k', x)` slice: every word of
/// length `< lens` with its non-empty reach set.
fn slice_words(cts: &Cts, k: usize, x: usize, lens: usize) -> Vec<Reached> {
    let n = cts.states().len();
    let mut out = Vec::new();
    let mut frontier = vec![(Vec::new(), BitSet::singleton(n, x))];
    for _ in 0..lens {
        let mut next = Vec::new();
        for (w, reach) in frontier {
            for a in 0..cts.alphabet().len() {
                let mut r = BitSet::new(n);
                for s in reach.iter() {
                    r.union_with(&cts.post(s, a, k));
                }
                if !r.is_empty() {
                    let mut w2 = w.clone();
                    w2.push(a);
                    next.push((w2, r));
                }
            }
            out.push((w, reach));
        }
        frontier = next;
    }
    out
}

/// Observations at the end of a word, as a bit mask over observation indices.
fn observed(cts: &Cts, kind: ObsKind, k: usize, reach: &BitSet) -> u64 {
    let full = (1u64 << cts.alphabet().len()) - 1;
    let mut mask = 0u64;
    for s in reach.iter() {
        let top = match kind {
            ObsKind::Acceptance => {
                if cts.is_accepting(s) {
                    mask |= 1;
                }
                continue;
            }
            ObsKind::Ready => cts.ready(s, k),
            ObsKind::Failure => full & !cts.ready(s, k),
        };
        for u in 0..=full {
            if u & !top == 0 {
                mask |= 1 << u;
            }
        }
    }
    mask
}

/// Compares the fixpoint iterate at `depth` with the closed form; the first mismatch, if any.
fn coincide(cts: &Cts, mode: Mode, depth: usize) -> Option<String> {
    let fix = fixpoint_traces(&build_alpha(cts, mode).unwrap(), depth).unwrap();
    let (nk, nx) = (cts.conditions().len(), cts.states().len());
    let mut slices: HashMap<(usize, usize), Vec<Reached>> = HashMap::new();
    for k in 0..nk {
        for x in 0..nx {
            slices.insert((k, x), slice_words(cts, k, x, depth));
        }
    }
    for k in 0..nk {
        for x in 0..nx {
            let cell = fix.behaviour.cell(k, x);
            let lower: Vec<usize> = if mode.upgrades() {
                (0..nk).filter(|&k2| cts.conditions().leq(k2, k)).collect()
            } else {
                vec![k]
            };
            let mut expected = 0;
            for k2 in lower {
                for (w, reach) in &slices[&(k2, x)] {
                    let mask = observed(cts, mode.kind(), k2, reach);
                    expected += mask.count_ones() as usize;
                    for o in (0..64).filter(|o| mask >> o & 1 == 1) {
                        if !cell.contains(k2, w, o) {
                            return Some(format!("({k}, {x}) lacks ({k2}, {w:?}, {o}) at depth {depth}"));
                        }
                    }
                }
            }
            if cell.count() != expected {
                return Some(format!("({k}, {x}) holds {} traces, expected {expected}", cell.count()));
            }
        }
    }
    None
}

fn modes(upgrades: bool) -> Vec<Mode> {
    let kinds: &[ObsKind] = if upgrades {
        &[ObsKind::Acceptance, ObsKind::Ready]
    } else {
        &[ObsKind::Acceptance, ObsKind::Ready, ObsKind::Failure]
    };
    kinds.iter().map(|&k| Mode::new(k, upgrades).unwrap()).collect()
}

fn random_instances() -> Vec<Cts> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    (0..200).map(|_| random_cts(&mut rng, RandomBounds::default())).collect()
}

fn criterion_7() -> Outcome {
    let mut checks = 0;
    let worked = [(example_e1(), modes(false)), (example_e2(), modes(true))];
    for (cts, ms) in &worked {
        for &mode in ms {
            for d in 0..=6 {
                checks += 1;
                if let Some(m) = coincide(cts, mode, d) {
                    return outcome(false, format!("{mode}: {m}"));
                }
            }
        }
    }
    for (i, cts) in random_instances().iter().enumerate() {
        let depth = cts.states().len() * cts.conditions().len() + 1;
        let mut ms = modes(false);
        ms.extend(modes(true));
        for mode in ms {
            checks += 1;
            if let Some(m) = coincide(cts, mode, depth) {
                return outcome(false, format!("instance {i}, {mode}: {m}"));
            }
        }
    }
    outcome(true, format!("{checks} comparisons, zero mismatches"))
}

fn criterion_8() -> Outcome {
    let e2 = example_e2();
    let Some(v) = refusal_downclosure_witness(&e2) else {
        return outcome(false, "no violation on E2");
    };
    let shown = v.describe(&e2);
    if shown != "(k1, x, k2, {a})" {
        return outcome(false, format!("unexpected violation {shown}"));
    }
    let rejected = Mode::new(ObsKind::Failure, true).and_then(|m| build_alpha(&e2, m)).is_err();
    let mut discrete = vec![example_e1()];
    discrete.extend(random_instances().into_iter().filter(|c| c.conditions().is_discrete()));
    let clean = discrete.iter().all(|c| refusal_downclosure_witness(c).is_none());
    outcome(
        rejected && clean,
        format!(
            "E2 violation {shown}; failure with upgrades rejected: {rejected}; {} discrete instances clean: {clean}",
            discrete.len()
        ),
    )
}

/// Length of the shortest word, at most `max_len`, after which the observations
/// of `x` and `y` under `k` satisfy `separates`. Pairs of reach sets already seen
/// at a shorter length are not expanded again; their continuations were explored
/// from there.
fn separation(
    cts: &Cts,
    kind: ObsKind,
    (x, y): (usize, usize),
    k: usize,
    max_len: usize,
    separates: impl Fn(u64, u64) -> bool,
) -> Option<usize> {
    let n = cts.states().len();
    let step = |r: &BitSet, a: usize| {
        let mut out = BitSet::new(n);
        for q in r.iter() {
            out.union_with(&cts.post(q, a, k));
        }
        out
    };
    let mut seen = HashSet::new();
    let mut frontier = vec![(BitSet::singleton(n, x), BitSet::singleton(n, y))];
    for len in 0..=max_len {
        let mut next = Vec::new();
        for (s, t) in frontier {
            if !seen.insert((s.clone(), t.clone())) {
                continue;
            }
            if separates(observed(cts, kind, k, &s), observed(cts, kind, k, &t)) {
                return Some(len);
            }
            next.extend((0..cts.alphabet().len()).map(|a| (step(&s, a), step(&t, a))));
        }
        frontier = next;
    }
    None
}

/// The first condition separating `x` and `y` within `max_len`, with the length.
fn truncated_difference(cts: &Cts, kind: ObsKind, x: usize, y: usize, max_len: usize) -> Option<(usize, usize)> {
    (0..cts.conditions().len()).find_map(|k| separation(cts, kind, (x, y), k, max_len, |a, b| a != b).map(|l| (k, l)))
}

/// An observation of `x` that `y` cannot make, after the shortest possible word.
fn one_sided(cts: &Cts, kind: ObsKind, x: usize, y: usize, k: usize, max_len: usize) -> Option<usize> {
    separation(cts, kind, (x, y), k, max_len, |a, b| a & !b != 0)
}

fn holds(cts: &Cts, kind: ObsKind, s: usize, (k, w, o): &(usize, Vec<usize>, usize)) -> bool {
    match kind {
        ObsKind::Acceptance => direct_language(cts, s, *k, w.len()).unwrap().contains(w),
        ObsKind::Ready => direct_ready(cts, s, *k, w.len()).unwrap().contains(&(w.clone(), *o as u64)),
        ObsKind::Failure => direct_failure(cts, s, *k, w.len()).unwrap().contains(&(w.clone(), *o as u64)),
    }
}

fn criterion_9() -> Outcome {
    let (mut verdicts, mut witnesses, mut full_direct) = (0, 0, 0);
    for (i, cts) in random_instances().iter().enumerate() {
        let nx = cts.states().len();
        for mode in modes(false) {
            let mut direct_cache = HashMap::new();
            for x in 0..nx {
                for y in x + 1..nx {
                    let eq = behaviour_equiv(cts, mode, x, y, None).unwrap();
                    let depth = 2 * eq.product_states + 1;
                    let oracle = truncated_difference(cts, mode.kind(), x, y, depth);
                    verdicts += 1;
                    if eq.equivalent != oracle.is_none() {
                        return outcome(false, format!("instance {i}, {mode}, {x} vs {y}: {eq:?} against {oracle:?}"));
                    }
                    // the literal truncation comparison where the trace sets stay small
                    if depth < 12 {
                        let beh = direct_cache
                            .entry(depth)
                            .or_insert_with(|| direct_behaviour(cts, mode, depth + 1).unwrap());
                        let same = (0..cts.conditions().len()).all(|k| beh.cell(k, x) == beh.cell(k, y));
                        full_direct += 1;
                        if same != eq.equivalent {
                            return outcome(false, format!("instance {i}, {mode}, {x} vs {y}: direct comparison differs"));
                        }
                    }
                    if let Some(t) = &eq.witness {
                        let (holder, other) = if eq.witness_in_first { (x, y) } else { (y, x) };
                        witnesses += 1;
                        if !holds(cts, mode.kind(), holder, t) || holds(cts, mode.kind(), other, t) {
                            return outcome(false, format!("instance {i}, {mode}: witness {t:?} does not separate"));
                        }
                        let k = oracle.expect("inequivalent").0;
                        let from_x = one_sided(cts, mode.kind(), x, y, k, depth);
                        let expected = if eq.witness_in_first {
                            from_x
                        } else {
                            from_x.is_none().then(|| one_sided(cts, mode.kind(), y, x, k, depth)).flatten()
                        };
                        if t.0 != k || expected != Some(t.1.len()) {
                            return outcome(false, format!("instance {i}, {mode}: witness {t:?} is not shortest"));
                        }
                    }
                }
            }
        }
    }
    outcome(
        true,
        format!("{verdicts} verdicts agree ({full_direct} against full truncated semantics), {witnesses} witnesses confirmed"),
    )
}

/// Minimum-cost vertex of the transportation polytope by solving every square
/// subsystem of the marginal equations exactly.
fn transport_by_bases(supply: &[BigRational], demand: &[BigRational], cost: &[Vec<BigRational>]) -> BigRational {
    let (r, c) = (supply.len(), demand.len());
    let cells: Vec<(usize, usize)> = (0..r).flat_map(|i| (0..c).map(move |j| (i, j))).collect();
    let rank = r + c - 1;
    let mut best: Option<BigRational> = None;
    for mask in 0u32..(1 << cells.len()) {
        if mask.count_ones() as usize != rank {
            continue;
        }
        let chosen: Vec<(usize, usize)> = (0..cells.len()).filter(|b| mask >> b & 1 == 1).map(|b| cells[b]).collect();
        // equations: row sums then column sums, the last column dropped as redundant
        let mut m: Vec<Vec<BigRational>> = Vec::new();
        for i in 0..r {
            let mut row: Vec<BigRational> = chosen.iter().map(|&(a, _)| if a == i { One::one() } else { Zero::zero() }).collect();
            row.push(supply[i].clone());
            m.push(row);
        }
        for j in 0..c - 1 {
            let mut row: Vec<BigRational> = chosen.iter().map(|&(_, b)| if b == j { One::one() } else { Zero::zero() }).collect();
            row.push(demand[j].clone());
            m.push(row);
        }
        let Some(sol) = solve(m, rank) else { continue };
        if sol.iter().any(|v| v.is_negative()) {
            continue;
        }
        let value: BigRational = chosen.iter().zip(&sol).map(|(&(i, j), v)| &cost[i][j] * v).sum();
        if best.as_ref().is_none_or(|b| &value < b) {
            best = Some(value);
        }
    }
    best.expect("the polytope is non-empty")
}

/// Unique solution of a square system given as augmented rows, if regular.
fn solve(mut m: Vec<Vec<BigRational>>, n: usize) -> Option<Vec<BigRational>> {
    for col in 0..n {
        let p = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, p);
        let pivot = m[col][col].clone();
        for v in m[col].iter_mut() {
            *v = &*v / &pivot;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                let pivot_row = m[col].clone();
                for (v, pv) in m[r].iter_mut().zip(pivot_row) {
                    *v = &*v - &f * pv;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

fn criterion_10() -> Outcome {
    let mut rng = seeded_rng(SEED);
    let mut oracle_ok = true;
    let mut marginals_ok = true;
    let mut unit_failure: Option<String> = None;
    let mut point_failures = 0;
    let mut fewest_probes = usize::MAX;
    let mut unit_cases = 0;
    for i in 0..100 {
        let (rows, cols) = (1 + i % 3, 1 + (i / 3) % 3);
        let (m, mu) = random_instance(&mut rng, rows, cols);
        let c = optimal_coupling_value(&m, &mu).unwrap();
        let supply: Vec<BigRational> = m.support().iter().map(|(_, w)| w.clone()).collect();
        let demand: Vec<BigRational> = mu.support().iter().map(|(_, w)| w.clone()).collect();
        let cost: Vec<Vec<BigRational>> = m
            .support()
            .iter()
            .map(|(p, _)| mu.support().iter().map(|(x, _)| p.at(*x).value().clone()).collect())
            .collect();
        if &transport_by_bases(&supply, &demand, &cost) != c.value.value() {
            oracle_ok = false;
        }
        let mut left: HashMap<_, BigRational> = HashMap::new();
        let mut right: HashMap<usize, BigRational> = HashMap::new();
        for ((p, x), w) in c.coupling.support() {
            *left.entry(p.clone()).or_insert_with(Zero::zero) += w;
            *right.entry(*x).or_insert_with(Zero::zero) += w;
        }
        let matches_m = m.support().iter().all(|(p, w)| left.get(p).is_some_and(|v| v == w))
            && left.values().filter(|v| !v.is_zero()).count() == m.support().len();
        let matches_mu = mu.support().iter().all(|(x, w)| right.get(x).is_some_and(|v| v == w))
            && right.values().filter(|v| !v.is_zero()).count() == mu.support().len();
        marginals_ok &= matches_m && matches_mu;

        // the unit triangle: vartheta(D eta (nu)) = eta_{D X}(nu) at every probe mu
        let mut probes = QuantaleProbes::seeded(cols, 20, SEED + i as u64).distributions;
        if !probes.contains(&mu) {
            probes.push(mu.clone());
        }
        fewest_probes = fewest_probes.min(probes.len());
        for nu in &probes {
            let mix = nu.map(|&x| pq_unit(cols, x));
            for p in &probes {
                let got = optimal_coupling_value(&mix, p).unwrap().value;
                let want = if p == nu { Omega::zero() } else { Omega::one() };
                unit_cases += 1;
                if got != want {
                    if nu.support().len() == 1 && p.support().len() == 1 {
                        point_failures += 1;
                    }
                    unit_failure.get_or_insert_with(|| format!("nu = {nu}, mu = {p}: {got} vs {want}"));
                }
            }
        }
    }
    let unit_ok = unit_failure.is_none() && fewest_probes >= 20;
    outcome(
        oracle_ok && marginals_ok && unit_ok,
        format!(
            "vertex oracle agrees: {oracle_ok}; marginals exact: {marginals_ok}; unit triangle at {unit_cases} probe pairs \
             (at least {fewest_probes} distributions per instance, point masses failing: {point_failures}); first failure: {}",
            unit_failure.as_deref().unwrap_or("none")
        ),
    )
}

fn criterion_11() -> Outcome {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let e1 = format!("{data}/e1.cts");
    let e2 = format!("{data}/e2.cts");
    let runs: Vec<Vec<String>> = vec![
        vec!["laws", "--suite", "monads", "--size-bound", "3", "--seed", "7"],
        vec!["laws", "--suite", "quantale", "--size-bound", "3", "--seed", "7", "--json"],
        vec!["equiv", &e1, "--mode", "lang", "--pair", "x", "z", "--condition", "p", "--json"],
        vec!["coincide", &e2, "--mode", "ready", "--upgrades", "--depth", "5"],
        vec!["semantics", &e1, "--mode", "fail", "--state", "x", "--depth", "4", "--json"],
        vec!["dlaw-show", "--carrier-size", "2", "--backend", "pos"],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    for args in &runs {
        let digests: Vec<String> = (0..3)
            .map(|_| {
                let out = Command::new(env!("CARGO_BIN_EXE_condtrace")).args(args).output().expect("runs");
                hex::encode(Sha256::digest(&out.stdout))
            })
            .collect();
        if digests.iter().any(|d| d != &digests[0]) {
            return outcome(false, format!("`{}` differs across runs", args.join(" ")));
        }
    }
    outcome(true, format!("{} commands byte-identical across 3 runs", runs.len()))
}

fn main() {
    let criteria: [(fn() -> Outcome, u64); 11] = [
        (criterion_1, 5),
        (criterion_2, 30),
        (criterion_3, 60),
        (criterion_4, 60),
        (criterion_5, 60),
        (criterion_6, 10),
        (criterion_7, 120),
        (criterion_8, 1),
        (criterion_9, 120),
        (criterion_10, 60),
        (criterion_11, 10),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (i, (run, limit)) in criteria.into_iter().enumerate() {
        let n = i + 1;
        if only.is_some_and(|o| o != n) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(limit);
        let pass = o.pass && in_time;
        failed += usize::from(!pass);
        println!(
            "criterion {n}: {} ({}; {:.2} s of {limit} s{})",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64(),
            if in_time { "" } else { ", over time" }
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
