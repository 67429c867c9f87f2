//! The registered law suites run by `condtrace laws`.
//!
//! Each suite walks a fixed universe determined by a size bound and returns one
//! report whose entry names say which instance they cover. Seeds only pick the
//! random instances and the sampled subsets; everything else is deterministic.

use crate::dlaw::{
    check_beck_chevalley, check_closed_form, check_kl_law, check_lifting_preserves,
    check_predicate_lifting, is_weak_pullback, lambda_square, non_pullback_square, FiniteFunctor,
    Induced, Mutant, Mutation, StandardLifting, Universe,
};
use crate::error::Result;
use crate::kleisli::{
    check_kleisli_laws, check_lifting_theorems, check_relkleisli_laws, MachineShape, EXHAUSTIVE_BUDGET,
};
use crate::monad::{check_monad_laws, Backend, Downset, MonadInstance, Powerset};
use crate::order::{posets_up_to_iso, FinPoset, FinSet};
use crate::report::{Coverage, LawEntry, LawReport};
use crate::transport::{
    check_quantale_laws, marginals, optimal_coupling_value, random_instance, seeded_rng,
    transport_vertex_oracle, QuantaleProbes,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Monads,
    Kleisli,
    Dlaw,
    Quantale,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Monads, Suite::Kleisli, Suite::Dlaw, Suite::Quantale];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Monads => "monads",
            Suite::Kleisli => "kleisli",
            Suite::Dlaw => "dlaw",
            Suite::Quantale => "quantale",
        }
    }

    pub fn run(self, size_bound: usize, seed: u64) -> Result<LawReport> {
        match self {
            Suite::Monads => monad_suite(size_bound),
            Suite::Kleisli => kleisli_suite(size_bound, seed),
            Suite::Dlaw => dlaw_suite(size_bound),
            Suite::Quantale => quantale_suite(size_bound, seed),
        }
    }
}

fn set(n: usize) -> FinPoset {
    FinPoset::discrete(&FinSet::range(n))
}

fn letters(n: usize) -> FinSet {
    FinSet::new((0..n).map(|i| ((b'a' + i as u8) as char).to_string())).expect("distinct letters")
}

/// Carriers of size `1..=n`: sets, or every poset up to isomorphism.
pub fn carriers(backend: Backend, n: usize) -> Vec<FinPoset> {
    match backend {
        Backend::Set => (1..=n).map(set).collect(),
        Backend::Pos => (1..=n).flat_map(posets_up_to_iso).collect(),
    }
}

/// The two condition posets of size two: discrete and a chain.
pub fn two_conditions() -> [FinPoset; 2] {
    [
        FinPoset::discrete(&FinSet::new(["k1", "k2"]).expect("labels")),
        FinPoset::chain(&["k2", "k1"]),
    ]
}

/// Unit and associativity laws of the powerset monad on sets of size `0..=n` and
/// of the downset monad on every poset of size `0..=n`.
pub fn monad_suite(n: usize) -> Result<LawReport> {
    let mut report = LawReport::new();
    let instances: [(&dyn MonadInstance, Backend); 2] = [(&Powerset, Backend::Set), (&Downset, Backend::Pos)];
    for (m, backend) in instances {
        let mut all = vec![FinPoset::discrete(&FinSet::range(0))];
        all.extend(carriers(backend, n));
        for x in all {
            report.absorb(&x.to_string(), check_monad_laws(m, &x)?);
        }
    }
    Ok(report)
}

/// Category laws, strictness and continuity for the Kleisli category on carriers of
/// size at most `n`, and for the relative Kleisli category and the lifting
/// theorems on carriers of size at most `min(n, 2)` with two conditions.
pub fn kleisli_suite(n: usize, seed: u64) -> Result<LawReport> {
    let mut report = LawReport::new();
    for backend in [Backend::Set, Backend::Pos] {
        let cs = carriers(backend, n);
        for x in &cs {
            for y in &cs {
                let r = check_kleisli_laws(backend, x, y, EXHAUSTIVE_BUDGET, seed)?;
                report.absorb(&format!("{}/Kl/{x}->{y}", backend.name()), r);
            }
        }
        let small = carriers(backend, n.min(2));
        for k in two_conditions() {
            for x in &small {
                for y in &small {
                    let r = check_relkleisli_laws(backend, &k, x, y, EXHAUSTIVE_BUDGET, seed)?;
                    report.absorb(&format!("{}/KlG/K={k}/{x}->{y}", backend.name()), r);
                }
            }
        }
    }
    report.entries.extend(lifting_theorems(n.min(2), seed)?.entries);
    Ok(report)
}

/// `B^(id) = id`, `B^(g . f) = B^g . B^f` and `B^ . L = L . B` (with `A~` and
/// `B-bar` alongside) for every configuration of carriers up to `n`, alphabets
/// and observation posets up to two elements, and both two-element condition posets.
pub fn lifting_theorems(n: usize, seed: u64) -> Result<LawReport> {
    let mut report = LawReport::new();
    for backend in [Backend::Set, Backend::Pos] {
        let cs = carriers(backend, n);
        let obs: Vec<FinPoset> = match backend {
            Backend::Set => (1..=2)
                .map(|i| FinPoset::discrete(&FinSet::new((0..i).map(|j| format!("o{j}"))).expect("labels")))
                .collect(),
            Backend::Pos => carriers(backend, 2),
        };
        for k in two_conditions() {
            for na in 1..=2 {
                for o in &obs {
                    let shape = MachineShape::new(letters(na), o.clone());
                    for x in &cs {
                        for y in &cs {
                            let r = check_lifting_theorems(backend, &shape, &k, x, y, 6_000, seed)?;
                            let name = format!("{}/lift/K={k}/A={}/O={o}/{x}->{y}", backend.name(), na);
                            report.absorb(&name, r);
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

/// The standard functors the distributive-law suite is registered for.
pub fn dlaw_functors() -> [FiniteFunctor; 2] {
    let o = FinSet::new(["o1", "o2"]).expect("labels");
    [FiniteFunctor::a(&letters(2)), FiniteFunctor::b(&letters(2), &o)]
}

/// Entry that passes exactly when `inner` records a failure: evidence that a
/// check can tell a corrupted construction apart.
fn detects(name: String, inner: &LawReport) -> LawEntry {
    let failed: Vec<&str> = inner.failures().map(|e| e.name.as_str()).collect();
    let cases = inner.entries.iter().map(|e| e.coverage.cases()).sum();
    LawEntry {
        name,
        passed: !failed.is_empty(),
        coverage: Coverage::Exhaustive(cases),
        counterexample: if failed.is_empty() {
            Some("every law still holds".into())
        } else {
            None
        },
    }
}

/// The distributive laws built from the standard relation liftings, on every
/// carrier of size at most `n` under both backends: closed form, the three
/// Kleisli-law diagrams, preservation of identities and composition, the
/// mutation harness, and Beck-Chevalley for the `lambda` squares.
pub fn dlaw_suite(n: usize) -> Result<LawReport> {
    let mut report = LawReport::new();
    for backend in [Backend::Set, Backend::Pos] {
        let universe = Universe::up_to(backend, n);
        for functor in dlaw_functors() {
            let prefix = format!("{}/{}", backend.name(), functor.name());
            let sigma = StandardLifting(functor.clone());
            let lifting = Induced(sigma.clone());
            report.absorb(&prefix, check_closed_form(&functor, &universe)?);
            report.absorb(&prefix, check_predicate_lifting(&sigma, &universe)?);
            report.absorb(&prefix, check_kl_law(&lifting, &universe)?);
            report.absorb(&prefix, check_lifting_preserves(&lifting, &universe, n.min(2))?);
            // A has no observation summand to drop
            let mutations = Mutation::ALL
                .into_iter()
                .filter(|m| *m != Mutation::DropObservations || matches!(functor, FiniteFunctor::B(_)));
            for mutation in mutations {
                let mutant = Mutant {
                    base: sigma.clone(),
                    mutation,
                };
                let r = check_kl_law(&mutant, &universe)?;
                report.push(detects(format!("{prefix}/mutant-{}-detected", mutation.name()), &r));
            }
            report.absorb(&prefix, lambda_squares(backend, &functor, n)?);
        }
    }
    let sq = non_pullback_square();
    let r = check_beck_chevalley(&sq, 16)?;
    let mut e = detects("non-pullback-square-fails-bc".into(), &r);
    if e.passed {
        e.counterexample = r.failures().next().and_then(|f| f.counterexample.clone());
    }
    report.push(e);
    Ok(report)
}

/// Every `lambda` square along a map `f: X -> X'` with `X, X', Y` in the universe
/// is a weak pullback and satisfies Beck-Chevalley.
pub fn lambda_squares(backend: Backend, functor: &FiniteFunctor, n: usize) -> Result<LawReport> {
    let universe = Universe::up_to(backend, n);
    let mut pullback = LawEntry {
        name: "lambda-weak-pullback".into(),
        passed: true,
        coverage: Coverage::Exhaustive(0),
        counterexample: None,
    };
    let mut bc = LawEntry {
        name: "lambda-beck-chevalley".into(),
        ..pullback.clone()
    };
    let mut cases = 0;
    for x in &universe.carriers {
        for x2 in &universe.carriers {
            for f in crate::kleisli::all_maps(x, x2, backend == Backend::Pos) {
                for y in &universe.carriers {
                    let sq = lambda_square(backend, functor, x, x2, y, &f)?;
                    cases += 1;
                    if pullback.passed && !is_weak_pullback(&sq) {
                        pullback.passed = false;
                        pullback.counterexample = Some(format!("X = {x}, X' = {x2}, Y = {y}, f = {f:?}"));
                    }
                    // principal predicates decide B-C, so full enumeration stays small
                    let r = check_beck_chevalley(&sq, 8)?;
                    if bc.passed && !r.all_pass() {
                        bc.passed = false;
                        let why = r.failures().next().and_then(|e| e.counterexample.clone()).unwrap_or_default();
                        bc.counterexample = Some(format!("X = {x}, X' = {x2}, Y = {y}, f = {f:?}: {why}"));
                    }
                }
            }
        }
    }
    pullback.coverage = Coverage::Exhaustive(cases);
    bc.coverage = Coverage::Exhaustive(cases);
    let mut report = LawReport::new();
    report.push(pullback);
    report.push(bc);
    Ok(report)
}

/// Exact agreement of the transport solver with the vertex oracle and marginal
/// checks on `count` random instances with supports up to `n x n`, then the
/// unit, multiplication and naturality probes of the quantitative law.
pub fn quantale_suite(n: usize, seed: u64) -> Result<LawReport> {
    let mut report = LawReport::new();
    report.entries.extend(transport_agreement(n, 100, seed)?.entries);
    let n = n.max(1);
    report.absorb(&format!("X={n}"), check_quantale_laws(&QuantaleProbes::seeded(n, 20, seed))?);
    Ok(report)
}

/// The solver against spanning-tree enumeration on random instances.
pub fn transport_agreement(n: usize, count: usize, seed: u64) -> Result<LawReport> {
    let n = n.max(1);
    let mut rng = seeded_rng(seed);
    let mut value = LawEntry {
        name: "transport-matches-vertex-oracle".into(),
        passed: true,
        coverage: Coverage::Sampled(count as u64),
        counterexample: None,
    };
    let mut margins = LawEntry {
        name: "coupling-marginals".into(),
        ..value.clone()
    };
    for i in 0..count {
        let rows = 1 + i % n;
        let cols = 1 + (i / n) % n;
        let (m, mu) = random_instance(&mut rng, rows, cols);
        let c = optimal_coupling_value(&m, &mu)?;
        let supply: Vec<_> = m.support().iter().map(|(_, w)| w.clone()).collect();
        let demand: Vec<_> = mu.support().iter().map(|(_, w)| w.clone()).collect();
        let cost: Vec<Vec<_>> = m
            .support()
            .iter()
            .map(|(p, _)| mu.support().iter().map(|(x, _)| p.at(*x).value().clone()).collect())
            .collect();
        let oracle = transport_vertex_oracle(&supply, &demand, &cost);
        if value.passed && oracle.as_ref() != Some(c.value.value()) {
            value.passed = false;
            value.counterexample = Some(format!("instance {i}: simplex {} against {oracle:?}", c.value));
        }
        let (left, right) = marginals(&c.coupling);
        if margins.passed && (left != m || right != mu) {
            margins.passed = false;
            margins.counterexample = Some(format!("instance {i}"));
        }
    }
    let mut report = LawReport::new();
    report.push(value);
    report.push(margins);
    Ok(report)
}
