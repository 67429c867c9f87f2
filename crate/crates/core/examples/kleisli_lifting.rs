//! The Kleisli category of the relative monad over two conditions, and the
//! liftings of the machine functor to it.

use condtrace::kleisli::{check_lifting_theorems, check_relkleisli_laws, MachineShape};
use condtrace::monad::Backend;
use condtrace::order::{FinPoset, FinSet};

fn main() {
    let k = FinPoset::chain(&["k2", "k1"]);
    let x = FinPoset::chain(&["0", "1"]);
    let y = FinPoset::discrete(&FinSet::range(1));
    println!("{}", check_relkleisli_laws(Backend::Pos, &k, &x, &y, 50_000, 1).unwrap());

    let shape = MachineShape::new(FinSet::new(["a", "b"]).unwrap(), FinPoset::chain(&["o0", "o1"]));
    println!("{}", check_lifting_theorems(Backend::Pos, &shape, &k, &x, &y, 6_000, 1).unwrap());
}
