use super::traces::{Behaviour, TraceSet};
use super::{build_alpha, direct_behaviour, format_word, Alpha, Cts, Mode};
use crate::error::{Error, Result};
use crate::kleisli::{embed_pure, lift_b_hat, relkl_compose, BElem, RelKlArrow};
use crate::monad::Backend;
use crate::order::{FinPoset, FinSet};
use crate::report::{LawReport, Tally};

#[derive(Clone, Debug)]
pub struct FixpointResult {
    /// `Phi^depth(bottom)`.
    pub behaviour: Behaviour,
    pub depth: usize,
    /// Some `Phi^(n+1) = Phi^n` with `n <= depth` was observed.
    pub stabilized: bool,
    /// Iterations actually computed.
    pub iterations: usize,
    /// Every computed iterate was contained in its successor.
    pub ascending: bool,
}

/// One element of `B^(f)(k'', b)` before `L(h)` is applied.
enum Lifted<'a> {
    /// `{(k', inl(a, t)) | (k', t) in f(k'', x')}`
    Prefixed(usize, &'a TraceSet),
    /// `unit(k'', inr(o))`
    Observed(usize, usize),
}

fn b_hat_stage<'a>(alpha: &Alpha, f: &'a Behaviour, k: usize, x: usize) -> Vec<Lifted<'a>> {
    let nx = alpha.arrow.dom().len();
    alpha
        .arrow
        .cell_pairs(k, x)
        .into_iter()
        .map(|(k2, b)| match alpha.shape.decode(b, nx) {
            BElem::Step(a, y) => Lifted::Prefixed(a, f.cell(k2, y)),
            BElem::Obs(o) => Lifted::Observed(k2, o),
        })
        .collect()
}

/// `L(h)` with `h(a, (w, o)) = (a w, o)` and `h(o) = (eps, o)`, followed by the union.
fn l_h_stage(alpha: &Alpha, lifted: &[Lifted<'_>], blank: &TraceSet) -> TraceSet {
    let pos = alpha.arrow.backend() == Backend::Pos;
    let cond = alpha.arrow.cond();
    let obs = alpha.shape.obs();
    let mut out = blank.clone();
    for l in lifted {
        match *l {
            Lifted::Prefixed(a, src) => out.prepend_from(a, src),
            Lifted::Observed(k2, o) if out.lens() > 0 => {
                if pos {
                    for k3 in cond.down_of(k2).iter() {
                        for o2 in obs.down_of(o).iter() {
                            out.insert(k3, &[], o2);
                        }
                    }
                } else {
                    out.insert(k2, &[], o);
                }
            }
            Lifted::Observed(..) => {}
        }
    }
    out
}

fn unfold(alpha: &Alpha, f: &Behaviour, blank: &TraceSet) -> Behaviour {
    let (nk, nx) = (alpha.arrow.cond().len(), alpha.arrow.dom().len());
    let cells = (0..nk)
        .flat_map(|k| (0..nx).map(move |x| (k, x)))
        .map(|(k, x)| l_h_stage(alpha, &b_hat_stage(alpha, f, k, x), blank))
        .collect();
    Behaviour { states: nx, cells }
}

/// Kleene iteration `Phi^depth(bottom)` of `Phi(f) = L(h) . B^(f) . alpha`.
pub fn fixpoint_traces(alpha: &Alpha, depth: usize) -> Result<FixpointResult> {
    let (nk, nx) = (alpha.arrow.cond().len(), alpha.arrow.dom().len());
    let letters = alpha.shape.letters();
    let nobs = alpha.shape.obs().len();
    // one spare length so that Phi^(depth+1) can be compared with Phi^depth
    let lens = depth + 1;
    TraceSet::check_size(letters, lens, nk, nobs)?;
    let blank = TraceSet::empty(letters, lens, nk, nobs);
    let mut f = Behaviour {
        states: nx,
        cells: vec![blank.clone(); nk * nx],
    };
    let mut ascending = true;
    for n in 0..=depth {
        let next = unfold(alpha, &f, &blank);
        ascending &= f.is_subset(&next);
        if next == f {
            return Ok(FixpointResult {
                behaviour: f.truncated(depth),
                depth,
                stabilized: true,
                iterations: n + 1,
                ascending,
            });
        }
        if n == depth {
            break;
        }
        f = next;
    }
    Ok(FixpointResult {
        behaviour: f.truncated(depth),
        depth,
        stabilized: false,
        iterations: depth + 1,
        ascending,
    })
}

/// `Phi^depth(bottom)` computed with explicit relative Kleisli arrows into the
/// finite carriers `A^{<n} x O`, composing `alpha`, `B^` and `L(h)` literally.
pub fn fixpoint_reference(alpha: &Alpha, depth: usize) -> Result<Behaviour> {
    let backend = alpha.arrow.backend();
    let cond = alpha.arrow.cond().clone();
    let states = alpha.arrow.dom().clone();
    let (nk, nx) = (cond.len(), states.len());
    let shape = &alpha.shape;
    let letters = shape.letters();
    let obs = shape.obs().clone();
    let nobs = obs.len();
    TraceSet::check_size(letters, depth + 1, nk, nobs)?;

    // words of length < n, by length then index
    let words_below = |n: usize| -> Vec<Vec<usize>> {
        let probe = TraceSet::empty(letters, n.max(1), 1, 1);
        (0..n)
            .flat_map(|len| (0..letters.pow(len as u32)).map(move |i| (len, i)))
            .map(|(len, i)| probe.word_of(i, len))
            .collect()
    };
    let carrier = |words: &[Vec<usize>]| -> Result<FinPoset> {
        let labels = words.iter().map(|w| format_word(shape.alphabet(), w)).collect();
        Ok(FinPoset::discrete(&FinSet::from_ordered(labels)?).product(&obs))
    };

    let mut words = words_below(0);
    let mut w_n = carrier(&words)?;
    let mut f = RelKlArrow::from_fn(backend, &cond, &states, &w_n, |_, _| Vec::new())?;
    for n in 0..depth {
        let next_words = words_below(n + 1);
        let w_next = carrier(&next_words)?;
        let position = |w: &[usize]| next_words.iter().position(|v| v == w).expect("word fits");
        let bw = shape.apply(&w_n);
        let h: Vec<usize> = (0..shape.size(w_n.len()))
            .map(|i| match shape.decode(i, w_n.len()) {
                BElem::Step(a, e) => {
                    let (w, o) = (e / nobs, e % nobs);
                    let mut aw = vec![a];
                    aw.extend(&words[w]);
                    position(&aw) * nobs + o
                }
                BElem::Obs(o) => position(&[]) * nobs + o,
            })
            .collect();
        let lh = embed_pure(backend, &cond, &bw, &w_next, &h)?;
        f = relkl_compose(&lh, &relkl_compose(&lift_b_hat(shape, &f), &alpha.arrow)?)?;
        words = next_words;
        w_n = w_next;
    }

    let blank = TraceSet::empty(letters, depth, nk, nobs);
    let mut cells = Vec::with_capacity(nk * nx);
    for k in 0..nk {
        for x in 0..nx {
            let mut t = blank.clone();
            for (k2, e) in f.cell_pairs(k, x) {
                t.insert(k2, &words[e / nobs], e % nobs);
            }
            cells.push(t);
        }
    }
    Ok(Behaviour { states: nx, cells })
}

/// Coincidence of the fixpoint iterate with the closed-form semantics truncated to
/// `|w| < depth`, for every cell, together with the structural invariants of the
/// iteration.
pub fn coincidence_check(cts: &Cts, mode: Mode, depth: usize) -> Result<LawReport> {
    if mode.is_exact_ready() {
        return Err(Error::ClosureViolation(
            "exact ready observations are a diagnostic and take no part in coincidence".into(),
        ));
    }
    let alpha = build_alpha(cts, mode)?;
    let fix = fixpoint_traces(&alpha, depth)?;
    let direct = direct_behaviour(cts, mode, depth)?;
    let (nk, nx) = (cts.conditions().len(), cts.states().len());
    let cell_name = |k: usize, x: usize| format!("({}, {})", cts.conditions().label(k), cts.states().label(x));
    let trace_name = |(k2, w, o): &(usize, Vec<usize>, usize)| {
        format!(
            "({}, {}, {})",
            cts.conditions().label(*k2),
            cts.word_label(w),
            mode.format_obs(cts.alphabet(), *o)
        )
    };

    let mut report = LawReport::new();
    let mut co = Tally::new("coincidence");
    for k in 0..nk {
        for x in 0..nx {
            let (a, b) = (fix.behaviour.cell(k, x), direct.cell(k, x));
            let diff = a.first_difference(b);
            co.case(diff.is_none(), || {
                let (t, in_fix) = diff.clone().expect("a difference");
                let side = if in_fix { "fixpoint only" } else { "direct only" };
                format!("cell {}: {} ({side})", cell_name(k, x), trace_name(&t))
            });
        }
    }
    report.push(co.finish());

    let mut asc = Tally::new("ascending-chain");
    asc.case(fix.ascending, || "some iterate is not below its successor".into());
    report.push(asc.finish());

    if mode.upgrades() {
        let mut mono = Tally::new("monotone-in-conditions");
        let mut closed = Tally::new("down-closed");
        let subset_closed = mode.kind() != super::ObsKind::Acceptance;
        for k in 0..nk {
            for x in 0..nx {
                let cell = fix.behaviour.cell(k, x);
                closed.case(cell.is_down_closed(cts.conditions(), subset_closed), || cell_name(k, x));
                for k2 in cts.conditions().down_of(k).iter() {
                    mono.case(fix.behaviour.cell(k2, x).is_subset(cell), || {
                        format!("{} not below {}", cell_name(k2, x), cell_name(k, x))
                    });
                }
            }
        }
        report.push(mono.finish());
        report.push(closed.finish());
    }
    Ok(report)
}
