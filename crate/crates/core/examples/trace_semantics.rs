//! Decorated traces of the two worked examples, computed as least fixpoints.

use condtrace::cts::{build_alpha, example_e1, example_e2, fixpoint_traces, Cts, Mode, ObsKind};

fn show(name: &str, cts: &Cts, mode: Mode, depth: usize) {
    let fix = fixpoint_traces(&build_alpha(cts, mode).unwrap(), depth).unwrap();
    println!("{name}, {mode}, depth {depth} (stabilized: {})", fix.stabilized);
    for k in 0..cts.conditions().len() {
        for x in 0..cts.states().len() {
            let traces: Vec<String> = fix
                .behaviour
                .cell(k, x)
                .traces()
                .into_iter()
                .map(|(k2, w, o)| {
                    format!(
                        "({}, {}, {})",
                        cts.conditions().label(k2),
                        cts.word_label(&w),
                        mode.format_obs(cts.alphabet(), o)
                    )
                })
                .collect();
            println!("  ({}, {}): {}", cts.conditions().label(k), cts.states().label(x), traces.join(" "));
        }
    }
}

fn main() {
    let e1 = example_e1();
    for kind in [ObsKind::Acceptance, ObsKind::Ready, ObsKind::Failure] {
        show("E1", &e1, Mode::new(kind, false).unwrap(), 3);
    }
    // under k1 the step from x needs an upgrade to k2 first
    let e2 = example_e2();
    show("E2", &e2, Mode::new(ObsKind::Acceptance, true).unwrap(), 2);
    show("E2", &e2, Mode::new(ObsKind::Ready, true).unwrap(), 2);
}
