//! Conditional transition systems: the model, observation modes, the local
//! behaviour `alpha`, and the two routes to decorated-trace semantics.

mod direct;
mod equiv;
mod fixpoint;
mod random;
mod traces;

use std::collections::BTreeSet;
use std::fmt;

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::kleisli::{MachineShape, RelKlArrow};
use crate::monad::Backend;
use crate::order::{FinPoset, FinSet};

pub use direct::{direct_behaviour, direct_failure, direct_language, direct_ready};
pub use equiv::{behaviour_equiv, Equivalence};
pub use fixpoint::{coincidence_check, fixpoint_reference, fixpoint_traces, FixpointResult};
pub use random::{random_cts, RandomBounds};
pub use traces::{Behaviour, TraceSet};

/// A transition `x --a, k--> y`, stored by index.
pub type Transition = (usize, usize, usize, usize);

/// A decorated trace `(condition, word, observation)`, stored by index.
pub type Trace = (usize, Vec<usize>, usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cts {
    conditions: FinPoset,
    alphabet: FinSet,
    states: FinSet,
    accepting: BitSet,
    transitions: BTreeSet<Transition>,
}

impl Cts {
    /// Builds a CTS from names; every reference must resolve.
    pub fn new(
        conditions: FinPoset,
        alphabet: FinSet,
        states: FinSet,
        accepting: &[&str],
        transitions: &[(&str, &str, &str, &str)],
    ) -> Result<Self> {
        let resolve = |set: &FinSet, kind: &'static str, name: &str| {
            set.index_of(name).ok_or_else(|| Error::DanglingReference {
                kind,
                name: name.to_string(),
            })
        };
        let mut acc = BitSet::new(states.len());
        for s in accepting {
            acc.insert(resolve(&states, "state", s)?);
        }
        let mut ts = BTreeSet::new();
        for (x, a, k, y) in transitions {
            ts.insert((
                resolve(&states, "state", x)?,
                resolve(&alphabet, "action", a)?,
                resolve(conditions.carrier(), "condition", k)?,
                resolve(&states, "state", y)?,
            ));
        }
        Ok(Cts {
            conditions,
            alphabet,
            states,
            accepting: acc,
            transitions: ts,
        })
    }

    pub fn from_indices(
        conditions: FinPoset,
        alphabet: FinSet,
        states: FinSet,
        accepting: BitSet,
        transitions: impl IntoIterator<Item = Transition>,
    ) -> Result<Self> {
        let transitions: BTreeSet<Transition> = transitions.into_iter().collect();
        if accepting.len() != states.len() {
            return Err(Error::CarrierMismatch("accepting set over a different state set".into()));
        }
        for &(x, a, k, y) in &transitions {
            if x >= states.len() || y >= states.len() {
                return Err(Error::DanglingReference {
                    kind: "state",
                    name: x.max(y).to_string(),
                });
            }
            if a >= alphabet.len() {
                return Err(Error::DanglingReference {
                    kind: "action",
                    name: a.to_string(),
                });
            }
            if k >= conditions.len() {
                return Err(Error::DanglingReference {
                    kind: "condition",
                    name: k.to_string(),
                });
            }
        }
        Ok(Cts {
            conditions,
            alphabet,
            states,
            accepting,
            transitions,
        })
    }

    pub fn conditions(&self) -> &FinPoset {
        &self.conditions
    }

    pub fn alphabet(&self) -> &FinSet {
        &self.alphabet
    }

    pub fn states(&self) -> &FinSet {
        &self.states
    }

    pub fn accepting(&self) -> &BitSet {
        &self.accepting
    }

    pub fn is_accepting(&self, x: usize) -> bool {
        self.accepting.contains(x)
    }

    pub fn transitions(&self) -> &BTreeSet<Transition> {
        &self.transitions
    }

    pub fn state(&self, name: &str) -> Result<usize> {
        self.states.index_of(name).ok_or_else(|| Error::UnknownAtom(format!("state {name}")))
    }

    pub fn condition(&self, name: &str) -> Result<usize> {
        self.conditions
            .carrier()
            .index_of(name)
            .ok_or_else(|| Error::UnknownAtom(format!("condition {name}")))
    }

    /// Successors of `x` under `a` in the `k`-slice.
    pub fn post(&self, x: usize, a: usize, k: usize) -> BitSet {
        BitSet::from_iter_len(
            self.states.len(),
            self.transitions
                .range((x, a, k, 0)..=(x, a, k, usize::MAX))
                .map(|t| t.3),
        )
    }

    /// Actions enabled at `x` in the `k`-slice, as a mask over the alphabet.
    pub fn ready(&self, x: usize, k: usize) -> u64 {
        (0..self.alphabet.len())
            .filter(|&a| {
                self.transitions
                    .range((x, a, k, 0)..=(x, a, k, usize::MAX))
                    .next()
                    .is_some()
            })
            .fold(0, |m, a| m | 1 << a)
    }

    pub fn word_label(&self, word: &[usize]) -> String {
        format_word(&self.alphabet, word)
    }
}

/// Letters are concatenated when all action names are single characters and
/// joined with `.` otherwise; the empty word prints as `eps`.
pub fn format_word(alphabet: &FinSet, word: &[usize]) -> String {
    if word.is_empty() {
        return "eps".into();
    }
    let sep = if alphabet.labels().iter().all(|l| l.chars().count() == 1) {
        ""
    } else {
        "."
    };
    word.iter().map(|&a| alphabet.label(a)).collect::<Vec<_>>().join(sep)
}

/// `{a,b}` for an action mask.
pub fn format_actions(alphabet: &FinSet, mask: u64) -> String {
    let names: Vec<&str> = (0..alphabet.len())
        .filter(|a| mask >> a & 1 == 1)
        .map(|a| alphabet.label(a))
        .collect();
    format!("{{{}}}", names.join(","))
}

/// Down-closure instances missing from the transition relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Validation {
    pub missing: Vec<Transition>,
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        self.missing.is_empty()
    }
}

pub fn validate(cts: &Cts) -> Validation {
    let mut missing = BTreeSet::new();
    for &(x, a, k, y) in &cts.transitions {
        for k2 in cts.conditions.down_of(k).iter() {
            if !cts.transitions.contains(&(x, a, k2, y)) {
                missing.insert((x, a, k2, y));
            }
        }
    }
    Validation {
        missing: missing.into_iter().collect(),
    }
}

pub fn complete(cts: &Cts) -> Cts {
    let mut out = cts.clone();
    out.transitions.extend(validate(cts).missing);
    out
}

impl fmt::Display for Cts {
    /// The canonical document form read by the parser.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "conditions: {}", self.conditions.carrier().labels().join(" "))?;
        for (a, b) in self.conditions.strict_pairs() {
            writeln!(f, "order: {} <= {}", self.conditions.label(a), self.conditions.label(b))?;
        }
        writeln!(f, "alphabet: {}", self.alphabet.labels().join(" "))?;
        writeln!(f, "states: {}", self.states.labels().join(" "))?;
        let acc: Vec<&str> = self.accepting.iter().map(|x| self.states.label(x)).collect();
        if acc.is_empty() {
            writeln!(f, "accepting:")?;
        } else {
            writeln!(f, "accepting: {}", acc.join(" "))?;
        }
        for &(x, a, k, y) in &self.transitions {
            writeln!(
                f,
                "trans: {} {} {} {}",
                self.states.label(x),
                self.alphabet.label(a),
                self.conditions.label(k),
                self.states.label(y)
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObsKind {
    Acceptance,
    Ready,
    Failure,
}

impl ObsKind {
    pub fn name(self) -> &'static str {
        match self {
            ObsKind::Acceptance => "lang",
            ObsKind::Ready => "ready",
            ObsKind::Failure => "fail",
        }
    }
}

/// An observation mode of the table: what is observed, and whether upgrades are allowed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Mode {
    kind: ObsKind,
    upgrades: bool,
    exact_ready: bool,
}

impl Mode {
    /// Failure observations with upgrades are rejected: refusal sets are order
    /// reversing in the conditions, so they need not form a downward closed set.
    pub fn new(kind: ObsKind, upgrades: bool) -> Result<Self> {
        if kind == ObsKind::Failure && upgrades {
            return Err(Error::FailureWithUpgrades);
        }
        Ok(Mode {
            kind,
            upgrades,
            exact_ready: false,
        })
    }

    /// Diagnostic variant of `Ready` without upgrades that observes exactly the
    /// enabled set instead of all of its subsets.
    pub fn exact_ready() -> Self {
        Mode {
            kind: ObsKind::Ready,
            upgrades: false,
            exact_ready: true,
        }
    }

    pub fn kind(self) -> ObsKind {
        self.kind
    }

    pub fn upgrades(self) -> bool {
        self.upgrades
    }

    pub fn is_exact_ready(self) -> bool {
        self.exact_ready
    }

    pub fn backend(self) -> Backend {
        if self.upgrades {
            Backend::Pos
        } else {
            Backend::Set
        }
    }

    /// The observation poset `O`: one point, or subsets of the alphabet under inclusion.
    pub fn observations(self, alphabet: &FinSet) -> FinPoset {
        match self.kind {
            ObsKind::Acceptance => FinPoset::discrete(&FinSet::new(["accept"]).expect("one label")),
            ObsKind::Ready | ObsKind::Failure => {
                let n = alphabet.len();
                let labels: Vec<String> = (0..1u64 << n).map(|m| format_actions(alphabet, m)).collect();
                let set = FinSet::from_ordered(labels).expect("distinct action sets");
                FinPoset::from_leq_fn(set, |u, v| u & !v == 0)
            }
        }
    }

    pub fn obs_count(self, alphabet: &FinSet) -> usize {
        match self.kind {
            ObsKind::Acceptance => 1,
            _ => 1 << alphabet.len(),
        }
    }

    pub fn shape(self, alphabet: &FinSet) -> MachineShape {
        MachineShape::new(alphabet.clone(), self.observations(alphabet))
    }

    pub fn format_obs(self, alphabet: &FinSet, o: usize) -> String {
        match self.kind {
            ObsKind::Acceptance => "accept".into(),
            _ => format_actions(alphabet, o as u64),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.name())?;
        if self.upgrades {
            f.write_str("+upgrades")?;
        }
        if self.exact_ready {
            f.write_str("(exact)")?;
        }
        Ok(())
    }
}

/// Every subset of `mask`, as masks.
pub(crate) fn subsets(mask: u64) -> impl Iterator<Item = u64> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & mask) };
        Some(cur)
    })
}

/// The local behaviour `alpha: K x X -> T(K x (A x X + O))`.
#[derive(Clone, Debug)]
pub struct Alpha {
    pub mode: Mode,
    pub shape: MachineShape,
    pub arrow: RelKlArrow,
}

/// Raw cell contents of `alpha`, before they are packed into a Kleisli arrow.
pub(crate) fn alpha_cell(cts: &Cts, mode: Mode, k: usize, x: usize) -> Vec<(usize, AlphaElem)> {
    let conds: Vec<usize> = if mode.upgrades {
        cts.conditions.down_of(k).iter().collect()
    } else {
        vec![k]
    };
    let full = (1u64 << cts.alphabet.len()) - 1;
    let mut out = Vec::new();
    for &k2 in &conds {
        for &(_, a, _, y) in cts
            .transitions
            .range((x, 0, 0, 0)..=(x, usize::MAX, usize::MAX, usize::MAX))
            .filter(|t| t.2 == k2)
        {
            out.push((k2, AlphaElem::Step(a, y)));
        }
        let ready = cts.ready(x, k2);
        match mode.kind {
            ObsKind::Acceptance => {
                if cts.is_accepting(x) {
                    out.push((k2, AlphaElem::Obs(0)));
                }
            }
            ObsKind::Ready if mode.exact_ready => out.push((k2, AlphaElem::Obs(ready as usize))),
            ObsKind::Ready => out.extend(subsets(ready).map(|u| (k2, AlphaElem::Obs(u as usize)))),
            ObsKind::Failure => out.extend(subsets(full & !ready).map(|u| (k2, AlphaElem::Obs(u as usize)))),
        }
    }
    out.sort();
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum AlphaElem {
    Step(usize, usize),
    Obs(usize),
}

pub fn build_alpha(cts: &Cts, mode: Mode) -> Result<Alpha> {
    if mode.exact_ready && mode.upgrades {
        return Err(Error::ClosureViolation(
            "exact ready sets are not subset-closed, so they cannot carry upgrades".into(),
        ));
    }
    let v = validate(cts);
    if let Some(&(x, a, k, y)) = v.missing.first() {
        return Err(Error::ClosureViolation(format!(
            "transition {} {} {} {} is forced by down-closure but missing",
            cts.states.label(x),
            cts.alphabet.label(a),
            cts.conditions.label(k),
            cts.states.label(y)
        )));
    }
    let shape = mode.shape(&cts.alphabet);
    let states = FinPoset::discrete(&cts.states);
    let nx = states.len();
    let cod = shape.apply(&states);
    let arrow = RelKlArrow::from_fn(mode.backend(), &cts.conditions, &states, &cod, |k, x| {
        alpha_cell(cts, mode, k, x)
            .into_iter()
            .map(|(k2, e)| match e {
                AlphaElem::Step(a, y) => (k2, shape.inl(a, y, nx)),
                AlphaElem::Obs(o) => (k2, shape.inr(o, nx)),
            })
            .collect::<Vec<_>>()
    })?;
    Ok(Alpha { mode, shape, arrow })
}

/// A violation of down-closure for refusal observations: `U` is refused at `x`
/// under `k` but some action of `U` is enabled under the smaller `k'`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefusalViolation {
    pub k: usize,
    pub x: usize,
    pub k_lower: usize,
    pub refused: u64,
}

impl RefusalViolation {
    pub fn describe(&self, cts: &Cts) -> String {
        format!(
            "({}, {}, {}, {})",
            cts.conditions.label(self.k),
            cts.states.label(self.x),
            cts.conditions.label(self.k_lower),
            format_actions(&cts.alphabet, self.refused)
        )
    }
}

pub fn refusal_downclosure_witness(cts: &Cts) -> Option<RefusalViolation> {
    let full = (1u64 << cts.alphabet.len()) - 1;
    for k in 0..cts.conditions.len() {
        for x in 0..cts.states.len() {
            let refusable = full & !cts.ready(x, k);
            for k_lower in cts.conditions.down_of(k).iter().filter(|&k2| k2 != k) {
                let lower_ready = cts.ready(x, k_lower);
                if let Some(refused) = (1..=full).find(|u| u & !refusable == 0 && u & lower_ready != 0) {
                    return Some(RefusalViolation {
                        k,
                        x,
                        k_lower,
                        refused,
                    });
                }
            }
        }
    }
    None
}

/// The first worked example: discrete conditions `{p, q}`, no upgrades.
pub fn example_e1() -> Cts {
    Cts::new(
        FinPoset::discrete(&FinSet::new(["p", "q"]).expect("labels")),
        FinSet::new(["a", "b"]).expect("labels"),
        FinSet::new(["x", "y", "z"]).expect("labels"),
        &["z"],
        &[("x", "a", "p", "y"), ("y", "b", "p", "z"), ("x", "a", "q", "z")],
    )
    .expect("well-formed")
}

/// The second worked example: the chain `k2 <= k1`, a step available only after upgrading.
pub fn example_e2() -> Cts {
    let k = FinPoset::closure_named(&FinSet::new(["k1", "k2"]).expect("labels"), &[("k2", "k1")])
        .expect("a chain");
    Cts::new(
        k,
        FinSet::new(["a"]).expect("labels"),
        FinSet::new(["x", "y"]).expect("labels"),
        &["y"],
        &[("x", "a", "k2", "y")],
    )
    .expect("well-formed")
}
