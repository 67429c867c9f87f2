//! Parsing a CTS file, repairing down-closure and checking the coincidence of
//! fixpoint and direct semantics.

use condtrace::cli::parse_cts;
use condtrace::cts::{coincidence_check, complete, validate, Mode, ObsKind};

fn main() {
    let text = "\
conditions: basic pro
order: pro <= basic
alphabet: open save
states: idle editing
accepting: idle
trans: idle open basic editing
trans: editing save pro idle
";
    let doc = parse_cts(text).unwrap();
    let v = validate(&doc.cts);
    println!("valid: {}, forced but missing: {}", v.is_valid(), v.missing.len());
    let cts = complete(&doc.cts);
    print!("{cts}");
    for (kind, upgrades) in [(ObsKind::Acceptance, true), (ObsKind::Ready, true), (ObsKind::Failure, false)] {
        let mode = Mode::new(kind, upgrades).unwrap();
        println!("\n{mode}\n{}", coincidence_check(&cts, mode, 5).unwrap());
    }
}
