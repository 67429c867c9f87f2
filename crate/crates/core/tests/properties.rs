use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use condtrace::cli::parse_cts;
use condtrace::cts::{build_alpha, fixpoint_traces, random_cts, Mode, ObsKind, RandomBounds};
use condtrace::dlaw::{theta, theta_inv};
use condtrace::kleisli::{
    all_arrows, all_rel_arrows, kl_compose, kl_join, kl_order, lift_a_tilde, lift_b_hat, KlArrow, MachineShape,
    RelKlArrow,
};
use condtrace::monad::Backend;
use condtrace::order::{posets_up_to_iso, FinPoset, FinSet};
use condtrace::suites::two_conditions;
use condtrace::transport::{
    oplus, optimal_coupling_value, pq_kl_compose, product_coupling, random_instance, Omega, OmegaMatrix,
};

fn omega() -> impl Strategy<Value = Omega> {
    (1i64..=12).prop_flat_map(|d| (0..=d).prop_map(move |n| Omega::ratio(n, d)))
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = OmegaMatrix> {
    proptest::collection::vec(omega(), rows * cols).prop_map(move |e| OmegaMatrix::new(rows, cols, e).unwrap())
}

fn carrier(backend: Backend, n: usize, pick: usize) -> FinPoset {
    match backend {
        Backend::Set => FinPoset::discrete(&FinSet::range(n)),
        Backend::Pos => {
            let all = posets_up_to_iso(n);
            all[pick % all.len()].clone()
        }
    }
}

fn backend() -> impl Strategy<Value = Backend> {
    prop_oneof![Just(Backend::Set), Just(Backend::Pos)]
}

/// Arrows `f, f2: X -> T Y` and `g, g2: Y -> T X` over small carriers.
fn arrows() -> impl Strategy<Value = (KlArrow, KlArrow, KlArrow, KlArrow)> {
    (backend(), 1usize..=3, 1usize..=2, any::<usize>(), any::<[usize; 4]>()).prop_map(|(b, nx, ny, pick, idx)| {
        let (x, y) = (carrier(b, nx, pick), carrier(b, ny, pick / 7));
        let fs = all_arrows(b, &x, &y, 1 << 16).unwrap();
        let gs = all_arrows(b, &y, &x, 1 << 16).unwrap();
        let (f, f2) = (fs[idx[0] % fs.len()].clone(), fs[idx[1] % fs.len()].clone());
        (f, f2, gs[idx[2] % gs.len()].clone(), gs[idx[3] % gs.len()].clone())
    })
}

fn join(a: &KlArrow, b: &KlArrow) -> KlArrow {
    kl_join(&[a.clone(), b.clone()]).unwrap()
}

fn rel_join(a: &RelKlArrow, b: &RelKlArrow) -> RelKlArrow {
    let table = a.as_kl().table().iter().zip(b.as_kl().table()).map(|(p, q)| p.union(q)).collect();
    RelKlArrow::new(a.backend(), a.cond(), a.dom(), a.cod(), table).unwrap()
}

fn rel_leq(a: &RelKlArrow, b: &RelKlArrow) -> bool {
    kl_order(a.as_kl(), b.as_kl()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oplus_is_a_commutative_monoid_and_monotone(a in omega(), b in omega(), c in omega(), d in omega()) {
        let zero = Omega::zero();
        prop_assert_eq!(oplus(&a, &zero), a.clone());
        prop_assert_eq!(oplus(&a, &b), oplus(&b, &a));
        prop_assert_eq!(oplus(&oplus(&a, &b), &c), oplus(&a, &oplus(&b, &c)));
        // the quantale order is >=, so monotone means larger inputs give larger sums
        if a.value() <= d.value() {
            prop_assert!(oplus(&a, &b).value() <= oplus(&d, &b).value());
        }
    }

    #[test]
    fn omega_matrices_form_a_category(f in matrix(2, 3), g in matrix(3, 2), h in matrix(2, 2)) {
        let gf = pq_kl_compose(&g, &f).unwrap();
        prop_assert_eq!(
            pq_kl_compose(&h, &gf).unwrap(),
            pq_kl_compose(&pq_kl_compose(&h, &g).unwrap(), &f).unwrap()
        );
        prop_assert_eq!(pq_kl_compose(&OmegaMatrix::identity(3), &f).unwrap(), f.clone());
        prop_assert_eq!(pq_kl_compose(&f, &OmegaMatrix::identity(2)).unwrap(), f);
    }

    #[test]
    fn optimum_is_below_the_product_coupling(seed in any::<u64>(), rows in 1usize..=3, cols in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (m, mu) = random_instance(&mut rng, rows, cols);
        let best = optimal_coupling_value(&m, &mu).unwrap();
        let independent: BigRational = product_coupling(&m, &mu)
            .support()
            .iter()
            .map(|((p, x), w)| p.at(*x).value() * w)
            .sum();
        prop_assert!(best.value.value() <= &independent);
        let own: BigRational = best.coupling.support().iter().map(|((p, x), w)| p.at(*x).value() * w).sum();
        prop_assert_eq!(&own, best.value.value());
    }

    #[test]
    fn composition_is_monotone_and_preserves_joins((f, f2, g, g2) in arrows()) {
        let top = join(&f, &f2);
        prop_assert!(kl_order(&kl_compose(&g, &f).unwrap(), &kl_compose(&g, &top).unwrap()).unwrap());
        prop_assert_eq!(
            kl_compose(&g, &top).unwrap(),
            join(&kl_compose(&g, &f).unwrap(), &kl_compose(&g, &f2).unwrap())
        );
        prop_assert_eq!(
            kl_compose(&join(&g, &g2), &f).unwrap(),
            join(&kl_compose(&g, &f).unwrap(), &kl_compose(&g2, &f).unwrap())
        );
    }

    #[test]
    fn theta_round_trips((f, _, _, _) in arrows()) {
        prop_assert_eq!(theta_inv(&theta(&f)).unwrap(), f);
    }

    #[test]
    fn lifts_preserve_order_and_joins(b in backend(), k in 0usize..2, pick in any::<usize>(), i in any::<usize>(), j in any::<usize>()) {
        let cond = two_conditions()[k].clone();
        let x = carrier(b, 2, pick);
        let y = carrier(b, 1 + pick % 2, pick / 3);
        let fs = all_rel_arrows(b, &cond, &x, &y, 1 << 17).unwrap();
        let (f, f2) = (&fs[i % fs.len()], &fs[j % fs.len()]);
        let top = rel_join(f, f2);
        let obs = match b {
            Backend::Set => FinPoset::discrete(&FinSet::new(["o"]).unwrap()),
            Backend::Pos => FinPoset::chain(&["o0", "o1"]),
        };
        let shape = MachineShape::new(FinSet::new(["a", "b"]).unwrap(), obs);
        prop_assert!(rel_leq(&lift_b_hat(&shape, f), &lift_b_hat(&shape, &top)));
        prop_assert_eq!(lift_b_hat(&shape, &top), rel_join(&lift_b_hat(&shape, f), &lift_b_hat(&shape, f2)));
        prop_assert!(rel_leq(&lift_a_tilde(&shape, f), &lift_a_tilde(&shape, &top)));
        prop_assert_eq!(lift_a_tilde(&shape, &top), rel_join(&lift_a_tilde(&shape, f), &lift_a_tilde(&shape, f2)));
    }

    #[test]
    fn upgrade_cells_grow_with_the_condition_and_are_down_closed(seed in any::<u64>(), ready in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cts = random_cts(&mut rng, RandomBounds::default());
        let kind = if ready { ObsKind::Ready } else { ObsKind::Acceptance };
        let alpha = build_alpha(&cts, Mode::new(kind, true).unwrap()).unwrap();
        let fix = fixpoint_traces(&alpha, 5).unwrap();
        let k = cts.conditions();
        for x in 0..cts.states().len() {
            for hi in 0..k.len() {
                let cell = fix.behaviour.cell(hi, x);
                prop_assert!(cell.is_down_closed(k, ready));
                for lo in (0..k.len()).filter(|&lo| k.leq(lo, hi)) {
                    prop_assert!(fix.behaviour.cell(lo, x).is_subset(cell));
                }
            }
        }
        prop_assert!(fix.ascending);
    }

    #[test]
    fn parsing_never_panics(text in "[a-z:<=# \\n]{0,80}") {
        let _ = parse_cts(&text);
    }

    #[test]
    fn parsing_keyword_soup_never_panics(
        lines in proptest::collection::vec(
            prop_oneof![
                Just("conditions: k1 k2".to_string()),
                Just("alphabet: a b".to_string()),
                Just("states: x y".to_string()),
                Just("accepting: y".to_string()),
                "order: k[0-3] <= k[0-3]",
                "trans: [xyz] [abc] k[0-3] [xyz]",
                "[a-z]{1,6}: [a-z ]{0,8}",
            ],
            0..10,
        )
    ) {
        let _ = parse_cts(&lines.join("\n"));
    }
}

#[test]
fn pos_arrow_enumeration_yields_valid_arrows() {
    for p in posets_up_to_iso(2) {
        for a in all_arrows(Backend::Pos, &p, &p, 1 << 16).unwrap() {
            a.validate().unwrap();
        }
    }
}
