use super::Trace;
use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::order::FinPoset;

/// Bound on the bits of one trace set.
pub const TRACE_BITS_BOUND: u128 = 1 << 27;

/// A set of decorated traces `(k', w, o)` with `|w| < lens`.
///
/// Words of length `n` over `s` letters are numbered `0..s^n`, first letter most
/// significant, so prepending a letter `a` to every word of length `n` is a block
/// copy to offset `a * s^n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TraceSet {
    letters: usize,
    lens: usize,
    conds: usize,
    obs: usize,
    slots: Vec<BitSet>,
}

impl TraceSet {
    pub fn bits_needed(letters: usize, lens: usize, conds: usize, obs: usize) -> u128 {
        let per: u128 = (0..lens as u32)
            .map(|n| (letters as u128).saturating_pow(n))
            .fold(0u128, |a, b| a.saturating_add(b));
        per.saturating_mul(conds as u128).saturating_mul(obs as u128)
    }

    pub fn check_size(letters: usize, lens: usize, conds: usize, obs: usize) -> Result<()> {
        let size = Self::bits_needed(letters, lens, conds, obs);
        if size > TRACE_BITS_BOUND {
            return Err(Error::CarrierTooLarge {
                what: "decorated traces".into(),
                size,
                bound: TRACE_BITS_BOUND,
            });
        }
        Ok(())
    }

    pub fn empty(letters: usize, lens: usize, conds: usize, obs: usize) -> Self {
        let mut slots = Vec::with_capacity(conds * obs * lens);
        for _ in 0..conds * obs {
            for n in 0..lens {
                slots.push(BitSet::new(letters.pow(n as u32)));
            }
        }
        TraceSet {
            letters,
            lens,
            conds,
            obs,
            slots,
        }
    }

    /// Words of length `< lens` are representable.
    pub fn lens(&self) -> usize {
        self.lens
    }

    #[inline]
    fn at(&self, k: usize, o: usize, n: usize) -> usize {
        (k * self.obs + o) * self.lens + n
    }

    pub fn slot(&self, k: usize, o: usize, n: usize) -> &BitSet {
        &self.slots[self.at(k, o, n)]
    }

    pub fn slot_mut(&mut self, k: usize, o: usize, n: usize) -> &mut BitSet {
        let i = self.at(k, o, n);
        &mut self.slots[i]
    }

    pub fn word_index(&self, word: &[usize]) -> usize {
        word.iter().fold(0, |w, &a| w * self.letters + a)
    }

    pub fn word_of(&self, mut index: usize, n: usize) -> Vec<usize> {
        let mut w = vec![0; n];
        for i in (0..n).rev() {
            w[i] = index % self.letters;
            index /= self.letters;
        }
        w
    }

    pub fn insert(&mut self, k: usize, word: &[usize], o: usize) {
        let i = self.word_index(word);
        self.slot_mut(k, o, word.len()).insert(i);
    }

    pub fn contains(&self, k: usize, word: &[usize], o: usize) -> bool {
        word.len() < self.lens && self.slot(k, o, word.len()).contains(self.word_index(word))
    }

    pub fn is_empty(&self) -> bool {
        self.slots.iter().all(|s| s.is_empty())
    }

    pub fn count(&self) -> usize {
        self.slots.iter().map(|s| s.count()).sum()
    }

    pub fn union_with(&mut self, other: &TraceSet) {
        for (a, b) in self.slots.iter_mut().zip(&other.slots) {
            a.union_with(b);
        }
    }

    pub fn is_subset(&self, other: &TraceSet) -> bool {
        self.slots.iter().zip(&other.slots).all(|(a, b)| a.is_subset(b))
    }

    /// `self |= a . src` for every trace of `src` that still fits.
    pub fn prepend_from(&mut self, a: usize, src: &TraceSet) {
        for k in 0..self.conds {
            for o in 0..self.obs {
                for n in 0..self.lens.saturating_sub(1) {
                    let block = self.letters.pow(n as u32);
                    let from = src.slot(k, o, n);
                    if !from.is_empty() {
                        self.slot_mut(k, o, n + 1).or_shifted(from, a * block);
                    }
                }
            }
        }
    }

    /// Closes downwards in the conditions and, if `subset_closed`, in the observations
    /// ordered as action masks under inclusion.
    pub fn close_down(&mut self, cond: &FinPoset, subset_closed: bool) {
        let src = self.clone();
        for k in 0..self.conds {
            for o in 0..self.obs {
                for n in 0..self.lens {
                    if src.slot(k, o, n).is_empty() {
                        continue;
                    }
                    let from = src.slot(k, o, n).clone();
                    for k2 in cond.down_of(k).iter() {
                        if subset_closed {
                            for o2 in super::subsets(o as u64) {
                                self.slot_mut(k2, o2 as usize, n).union_with(&from);
                            }
                        } else {
                            self.slot_mut(k2, o, n).union_with(&from);
                        }
                    }
                }
            }
        }
    }

    pub fn is_down_closed(&self, cond: &FinPoset, subset_closed: bool) -> bool {
        let mut c = self.clone();
        c.close_down(cond, subset_closed);
        c == *self
    }

    /// The traces with `|w| < lens`.
    pub fn truncated(&self, lens: usize) -> TraceSet {
        let lens = lens.min(self.lens);
        let mut out = TraceSet::empty(self.letters, lens, self.conds, self.obs);
        for k in 0..self.conds {
            for o in 0..self.obs {
                for n in 0..lens {
                    *out.slot_mut(k, o, n) = self.slot(k, o, n).clone();
                }
            }
        }
        out
    }

    /// Traces in canonical order: condition, word length, word, observation.
    pub fn traces(&self) -> Vec<Trace> {
        let mut keyed = Vec::new();
        for k in 0..self.conds {
            for o in 0..self.obs {
                for n in 0..self.lens {
                    for w in self.slot(k, o, n).iter() {
                        keyed.push((k, n, w, o));
                    }
                }
            }
        }
        keyed.sort_unstable();
        keyed.into_iter().map(|(k, n, w, o)| (k, self.word_of(w, n), o)).collect()
    }

    /// The canonically first trace in exactly one of the two sets, and whether it is in `self`.
    pub fn first_difference(&self, other: &TraceSet) -> Option<(Trace, bool)> {
        let mut best: Option<(usize, usize, usize, usize, bool)> = None;
        for k in 0..self.conds {
            for o in 0..self.obs {
                for n in 0..self.lens {
                    let (a, b) = (self.slot(k, o, n), other.slot(k, o, n));
                    if a == b {
                        continue;
                    }
                    let mut d = a.clone();
                    d.difference_with(b);
                    let mut e = b.clone();
                    e.difference_with(a);
                    for (set, mine) in [(d, true), (e, false)] {
                        if let Some(w) = set.first() {
                            let cand = (k, n, w, o, mine);
                            if best.is_none_or(|b| (cand.0, cand.1, cand.2, cand.3) < (b.0, b.1, b.2, b.3)) {
                                best = Some(cand);
                            }
                        }
                    }
                }
            }
        }
        best.map(|(k, n, w, o, mine)| ((k, self.word_of(w, n), o), mine))
    }
}

/// A decorated-trace set for every cell `(k, x)`, stored at `k * |X| + x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Behaviour {
    pub states: usize,
    pub cells: Vec<TraceSet>,
}

impl Behaviour {
    pub fn cell(&self, k: usize, x: usize) -> &TraceSet {
        &self.cells[k * self.states + x]
    }

    pub fn cell_mut(&mut self, k: usize, x: usize) -> &mut TraceSet {
        &mut self.cells[k * self.states + x]
    }

    pub fn conditions(&self) -> usize {
        self.cells.len() / self.states.max(1)
    }

    pub fn is_subset(&self, other: &Behaviour) -> bool {
        self.cells.iter().zip(&other.cells).all(|(a, b)| a.is_subset(b))
    }

    pub fn truncated(&self, lens: usize) -> Behaviour {
        Behaviour {
            states: self.states,
            cells: self.cells.iter().map(|c| c.truncated(lens)).collect(),
        }
    }
}
