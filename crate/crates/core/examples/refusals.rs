//! Why failure semantics cannot carry upgrades: refusal sets shrink as
//! conditions go down.

use condtrace::cts::{example_e2, refusal_downclosure_witness, Mode, ObsKind};

fn main() {
    let cts = example_e2();
    match refusal_downclosure_witness(&cts) {
        Some(v) => println!("refusal not down-closed at {}", v.describe(&cts)),
        None => println!("refusals are down-closed"),
    }
    match Mode::new(ObsKind::Failure, true) {
        Ok(_) => println!("failure with upgrades accepted"),
        Err(e) => println!("failure with upgrades: {e}"),
    }
}
