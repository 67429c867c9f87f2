//! Deciding conditional equivalence exactly and printing a distinguishing trace.

use condtrace::cts::{behaviour_equiv, example_e1, Mode, ObsKind};

fn main() {
    let cts = example_e1();
    let (x, y, z) = (cts.state("x").unwrap(), cts.state("y").unwrap(), cts.state("z").unwrap());
    let p = cts.condition("p").unwrap();
    for kind in [ObsKind::Acceptance, ObsKind::Ready, ObsKind::Failure] {
        let mode = Mode::new(kind, false).unwrap();
        for (s, t, at) in [(x, z, Some(p)), (x, y, None), (y, y, None)] {
            let eq = behaviour_equiv(&cts, mode, s, t, at).unwrap();
            let pair = format!("{} vs {}", cts.states().label(s), cts.states().label(t));
            match eq.witness {
                None => println!("{mode:>5}  {pair}: equivalent"),
                Some((k, w, o)) => {
                    let holder = if eq.witness_in_first { s } else { t };
                    println!(
                        "{mode:>5}  {pair}: inequivalent, {} has ({}, {}, {})",
                        cts.states().label(holder),
                        cts.conditions().label(k),
                        cts.word_label(&w),
                        mode.format_obs(cts.alphabet(), o)
                    );
                }
            }
        }
    }
}
