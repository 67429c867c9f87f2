//! Unit and associativity of the powerset and downset monads on small carriers.

use condtrace::monad::{check_monad_laws, Downset, Powerset};
use condtrace::order::{posets_up_to_iso, FinPoset, FinSet};

fn main() {
    let set = FinPoset::discrete(&FinSet::range(3));
    println!("powerset on {set}\n{}", check_monad_laws(&Powerset, &set).unwrap());
    for p in posets_up_to_iso(3) {
        println!("downset on {p}\n{}", check_monad_laws(&Downset, &p).unwrap());
    }
}
