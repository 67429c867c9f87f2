//! Beck-Chevalley for the squares formed by lambda, and a square where it fails.

use condtrace::dlaw::{check_beck_chevalley, is_weak_pullback, non_pullback_square, weak_pullback_witness};
use condtrace::monad::Backend;
use condtrace::suites::{dlaw_functors, lambda_squares};

fn main() {
    for backend in [Backend::Set, Backend::Pos] {
        for functor in dlaw_functors() {
            let r = lambda_squares(backend, &functor, 2).unwrap();
            println!("{} {}\n{r}", backend.name(), functor.name());
        }
    }
    let sq = non_pullback_square();
    println!("weak pullback: {} (uncovered pair {:?})", is_weak_pullback(&sq), weak_pullback_witness(&sq));
    println!("{}", check_beck_chevalley(&sq, 16).unwrap());
}
