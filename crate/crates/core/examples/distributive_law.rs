//! The distributive law induced by a predicate lifting, its closed form, and
//! what the law checks say about corrupted liftings.

use condtrace::dlaw::{
    build_dlaw, check_closed_form, check_kl_law, FiniteFunctor, Induced, Mutant, Mutation, StandardLifting,
    Universe,
};
use condtrace::monad::{labels_of, Backend};
use condtrace::order::{FinPoset, FinSet};

fn main() {
    let letters = FinSet::new(["a"]).unwrap();
    let functor = FiniteFunctor::b(&letters, &FinSet::new(["o"]).unwrap());
    let x = FinPoset::discrete(&FinSet::new(["u", "v"]).unwrap());
    let lifting = Induced(StandardLifting(functor.clone()));
    let law = build_dlaw(&lifting, Backend::Set, &x).unwrap();
    let cod = functor.obj(&x);
    for e in 0..law.arrow.dom().len() {
        println!("{:>10} |-> {}", law.arrow.dom().label(e), labels_of(cod.carrier(), law.apply(e)));
    }

    let universe = Universe::up_to(Backend::Set, 2);
    println!("\n{}", check_closed_form(&functor, &universe).unwrap());
    println!("{}", check_kl_law(&lifting, &universe).unwrap());
    for mutation in Mutation::ALL {
        let mutant = Mutant {
            base: StandardLifting(functor.clone()),
            mutation,
        };
        let r = check_kl_law(&mutant, &universe).unwrap();
        let broken: Vec<&str> = r.failures().map(|e| e.name.as_str()).collect();
        println!("mutant {:<18} breaks {broken:?}", mutation.name());
    }
}
