use std::collections::BTreeSet;

use super::traces::{Behaviour, TraceSet};
use super::{subsets, Cts, Mode, ObsKind};
use crate::bits::BitSet;
use crate::error::{Error, Result};

/// Every word of length `n` that reaches some state of the `k`-slice from `x`,
/// with the set of states it reaches, for `n = 0..=max_len`.
fn reach_levels(cts: &Cts, x: usize, k: usize, max_len: usize) -> Vec<Vec<(Vec<usize>, BitSet)>> {
    let n = cts.states().len();
    let na = cts.alphabet().len();
    let post: Vec<Vec<BitSet>> = (0..n).map(|s| (0..na).map(|a| cts.post(s, a, k)).collect()).collect();
    let mut levels = vec![vec![(Vec::new(), BitSet::singleton(n, x))]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (w, reach) in levels.last().expect("level 0 exists") {
            for a in 0..na {
                let mut r = BitSet::new(n);
                for s in reach.iter() {
                    r.union_with(&post[s][a]);
                }
                if !r.is_empty() {
                    let mut w2 = w.clone();
                    w2.push(a);
                    next.push((w2, r));
                }
            }
        }
        levels.push(next);
    }
    levels
}

fn check_cell(cts: &Cts, x: usize, k: usize) -> Result<()> {
    if x >= cts.states().len() {
        return Err(Error::UnknownAtom(format!("state #{x}")));
    }
    if k >= cts.conditions().len() {
        return Err(Error::UnknownAtom(format!("condition #{k}")));
    }
    Ok(())
}

/// Observations at the end of a word reaching `reach`, under `k`.
fn observations(cts: &Cts, mode: Mode, k: usize, reach: &BitSet) -> BTreeSet<u64> {
    let full = (1u64 << cts.alphabet().len()) - 1;
    let mut out = BTreeSet::new();
    for s in reach.iter() {
        let ready = cts.ready(s, k);
        match mode.kind() {
            ObsKind::Acceptance => {
                if cts.is_accepting(s) {
                    out.insert(0);
                }
            }
            ObsKind::Ready if mode.is_exact_ready() => {
                out.insert(ready);
            }
            ObsKind::Ready => out.extend(subsets(ready)),
            ObsKind::Failure => out.extend(subsets(full & !ready)),
        }
    }
    out
}

/// The `k`-language of `x`, restricted to words of length at most `max_len`.
pub fn direct_language(cts: &Cts, x: usize, k: usize, max_len: usize) -> Result<BTreeSet<Vec<usize>>> {
    check_cell(cts, x, k)?;
    Ok(reach_levels(cts, x, k, max_len)
        .into_iter()
        .flatten()
        .filter(|(_, r)| r.iter().any(|s| cts.is_accepting(s)))
        .map(|(w, _)| w)
        .collect())
}

fn pairs(cts: &Cts, mode: Mode, x: usize, k: usize, max_len: usize) -> Result<BTreeSet<(Vec<usize>, u64)>> {
    check_cell(cts, x, k)?;
    let mut out = BTreeSet::new();
    for (w, r) in reach_levels(cts, x, k, max_len).into_iter().flatten() {
        for u in observations(cts, mode, k, &r) {
            out.insert((w.clone(), u));
        }
    }
    Ok(out)
}

/// Ready pairs `(w, U)`: some state reached by `w` enables every action of `U`.
pub fn direct_ready(cts: &Cts, x: usize, k: usize, max_len: usize) -> Result<BTreeSet<(Vec<usize>, u64)>> {
    pairs(cts, Mode::new(ObsKind::Ready, false)?, x, k, max_len)
}

/// Failure pairs `(w, U)`: some state reached by `w` enables no action of `U`.
pub fn direct_failure(cts: &Cts, x: usize, k: usize, max_len: usize) -> Result<BTreeSet<(Vec<usize>, u64)>> {
    pairs(cts, Mode::new(ObsKind::Failure, false)?, x, k, max_len)
}

/// The closed-form semantics of every cell, for words of length `< lens`:
/// `{k} x Sem(x, k)` without upgrades and `U_{k' <= k} {k'} x Sem(x, k')` with them.
pub fn direct_behaviour(cts: &Cts, mode: Mode, lens: usize) -> Result<Behaviour> {
    let (nk, nx, na) = (cts.conditions().len(), cts.states().len(), cts.alphabet().len());
    let nobs = mode.obs_count(cts.alphabet());
    TraceSet::check_size(na, lens, nk, nobs)?;
    let mut slices: Vec<TraceSet> = Vec::with_capacity(nk * nx);
    for k in 0..nk {
        for x in 0..nx {
            let mut t = TraceSet::empty(na, lens, nk, nobs);
            if lens > 0 {
                for (w, r) in reach_levels(cts, x, k, lens - 1).into_iter().flatten() {
                    for o in observations(cts, mode, k, &r) {
                        t.insert(k, &w, o as usize);
                    }
                }
            }
            slices.push(t);
        }
    }
    let cells = (0..nk)
        .flat_map(|k| (0..nx).map(move |x| (k, x)))
        .map(|(k, x)| {
            if mode.upgrades() {
                let mut t = TraceSet::empty(na, lens, nk, nobs);
                for k2 in cts.conditions().down_of(k).iter() {
                    t.union_with(&slices[k2 * nx + x]);
                }
                t
            } else {
                slices[k * nx + x].clone()
            }
        })
        .collect();
    Ok(Behaviour { states: nx, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cts::{example_e1, example_e2};

    /// Path enumeration: every run of length `<= n` from `x` in the `k`-slice.
    fn runs(cts: &Cts, x: usize, k: usize, n: usize) -> Vec<(Vec<usize>, usize)> {
        let mut out = vec![(vec![], x)];
        let mut frontier = out.clone();
        for _ in 0..n {
            let mut next = Vec::new();
            for (w, s) in &frontier {
                for &(s0, a, k0, t) in cts.transitions() {
                    if s0 == *s && k0 == k {
                        let mut w2 = w.clone();
                        w2.push(a);
                        next.push((w2, t));
                    }
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    #[test]
    fn e1_languages() {
        let c = example_e1();
        let (p, q) = (c.condition("p").unwrap(), c.condition("q").unwrap());
        let lp = direct_language(&c, 0, p, 2).unwrap();
        assert_eq!(lp.into_iter().collect::<Vec<_>>(), vec![vec![0, 1]]);
        let lq = direct_language(&c, 0, q, 2).unwrap();
        assert_eq!(lq.into_iter().collect::<Vec<_>>(), vec![vec![0]]);
        let oracle: BTreeSet<Vec<usize>> = runs(&c, 0, p, 2)
            .into_iter()
            .filter(|(_, s)| c.is_accepting(*s))
            .map(|(w, _)| w)
            .collect();
        assert_eq!(direct_language(&c, 0, p, 2).unwrap(), oracle);
    }

    #[test]
    fn e1_ready_and_failure() {
        let c = example_e1();
        let p = c.condition("p").unwrap();
        let (a, b) = (1u64, 2u64);
        assert!(direct_ready(&c, 0, p, 2).unwrap().contains(&(vec![0], b)));
        assert!(direct_failure(&c, 0, p, 2).unwrap().contains(&(vec![0], a)));
        assert!(!direct_ready(&c, 0, p, 2).unwrap().contains(&(vec![0], a)));
        // oracle: ready sets at run endpoints, all subsets
        let mut oracle = BTreeSet::new();
        for (w, s) in runs(&c, 0, p, 2) {
            for u in subsets(c.ready(s, p)) {
                oracle.insert((w.clone(), u));
            }
        }
        assert_eq!(direct_ready(&c, 0, p, 2).unwrap(), oracle);
    }

    #[test]
    fn empty_word() {
        for c in [example_e1(), example_e2()] {
            for k in 0..c.conditions().len() {
                for x in 0..c.states().len() {
                    let l = direct_language(&c, x, k, 0).unwrap();
                    assert_eq!(l.contains(&vec![]), c.is_accepting(x));
                    assert!(l.len() <= 1);
                }
            }
        }
        assert!(direct_language(&example_e1(), 7, 0, 1).is_err());
    }
}
