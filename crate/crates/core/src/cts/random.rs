use rand::Rng;

use super::{complete, Cts};
use crate::bits::BitSet;
use crate::order::{posets_up_to_iso, FinPoset, FinSet};

#[derive(Clone, Copy, Debug)]
pub struct RandomBounds {
    pub max_states: usize,
    pub max_conditions: usize,
    pub max_letters: usize,
    /// Probability of each candidate transition before down-closure.
    pub density: f64,
}

impl Default for RandomBounds {
    fn default() -> Self {
        RandomBounds {
            max_states: 5,
            max_conditions: 3,
            max_letters: 2,
            density: 0.2,
        }
    }
}

impl RandomBounds {
    pub fn small() -> Self {
        RandomBounds {
            max_states: 3,
            max_conditions: 2,
            max_letters: 2,
            density: 0.3,
        }
    }
}

/// A random valid CTS: the condition poset is drawn from all posets of its size up
/// to isomorphism, and the transitions are closed downwards.
pub fn random_cts(rng: &mut impl Rng, b: RandomBounds) -> Cts {
    let nk = rng.gen_range(1..=b.max_conditions);
    let nx = rng.gen_range(1..=b.max_states);
    let na = rng.gen_range(1..=b.max_letters);
    let shapes = posets_up_to_iso(nk);
    let shape = &shapes[rng.gen_range(0..shapes.len())];
    let conds = FinSet::from_ordered((0..nk).map(|i| format!("k{i}")).collect()).expect("distinct");
    let conditions = FinPoset::from_leq_fn(conds, |a, c| shape.leq(a, c));
    let letters = FinSet::from_ordered((0..na).map(|i| ((b'a' + i as u8) as char).to_string()).collect())
        .expect("distinct");
    let states = FinSet::from_ordered((0..nx).map(|i| format!("s{i}")).collect()).expect("distinct");
    let accepting = BitSet::from_iter_len(nx, (0..nx).filter(|_| rng.gen_bool(0.5)));
    let mut trans = Vec::new();
    for x in 0..nx {
        for a in 0..na {
            for k in 0..nk {
                for y in 0..nx {
                    if rng.gen_bool(b.density) {
                        trans.push((x, a, k, y));
                    }
                }
            }
        }
    }
    let raw = Cts::from_indices(conditions, letters, states, accepting, trans).expect("indices in range");
    complete(&raw)
}
