//! Finite sets and finite posets.
//!
//! Every carrier in the crate is a [`FinPoset`]; plain sets are discrete posets.
//! Elements are addressed by index into a fixed canonical order, so every derived
//! structure (products, coproducts, T-value carriers) enumerates deterministically.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::bits::BitSet;
use crate::error::{Error, Result};

/// A finite set of distinct atoms in a fixed order.
#[derive(Clone)]
pub struct FinSet {
    labels: Arc<[String]>,
    index: Arc<HashMap<String, usize>>,
}

impl FinSet {
    /// Builds a set from atoms, sorted into canonical (lexicographic) order.
    pub fn new<S: Into<String>>(atoms: impl IntoIterator<Item = S>) -> Result<Self> {
        let mut labels: Vec<String> = atoms.into_iter().map(Into::into).collect();
        labels.sort();
        Self::from_ordered(labels)
    }

    /// Builds a set that keeps the given element order.
    pub fn from_ordered(labels: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::DuplicateAtom(l.clone()));
            }
        }
        Ok(FinSet {
            labels: labels.into(),
            index: Arc::new(index),
        })
    }

    /// `{0, 1, .., n-1}` labelled by decimal numerals.
    pub fn range(n: usize) -> Self {
        Self::from_ordered((0..n).map(|i| i.to_string()).collect()).expect("numerals are distinct")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, atom: &str) -> Option<usize> {
        self.index.get(atom).copied()
    }

    pub fn require(&self, atom: &str) -> Result<usize> {
        self.index_of(atom)
            .ok_or_else(|| Error::UnknownAtom(atom.to_string()))
    }
}

impl PartialEq for FinSet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.labels, &other.labels) || self.labels == other.labels
    }
}

impl Eq for FinSet {}

impl fmt::Debug for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.labels.iter()).finish()
    }
}

struct PosetData {
    set: FinSet,
    // up[i] = { j | i <= j }, down[i] = { j | j <= i }
    up: Vec<BitSet>,
    down: Vec<BitSet>,
    discrete: bool,
}

/// A finite partial order stored as its full closure matrix.
#[derive(Clone)]
pub struct FinPoset(Arc<PosetData>);

impl FinPoset {
    /// The reflexive-transitive closure of `pairs` (each `(x, y)` meaning `x <= y`).
    pub fn closure(carrier: &FinSet, pairs: &[(usize, usize)]) -> Result<Self> {
        let n = carrier.len();
        let mut up: Vec<BitSet> = (0..n).map(|i| BitSet::singleton(n, i)).collect();
        for &(x, y) in pairs {
            assert!(x < n && y < n, "pair ({x}, {y}) outside carrier of size {n}");
            up[x].insert(y);
        }
        // Warshall: if i <= k then everything above k is above i.
        for k in 0..n {
            let above_k = up[k].clone();
            for row in up.iter_mut() {
                if row.contains(k) {
                    row.union_with(&above_k);
                }
            }
        }
        for i in 0..n {
            for j in up[i].iter() {
                if j != i && up[j].contains(i) {
                    let (a, b) = if i < j { (i, j) } else { (j, i) };
                    return Err(Error::AntisymmetryViolation(
                        carrier.label(a).to_string(),
                        carrier.label(b).to_string(),
                    ));
                }
            }
        }
        Ok(Self::from_up_rows(carrier.clone(), up))
    }

    /// Closure built from atom names.
    pub fn closure_named(carrier: &FinSet, pairs: &[(&str, &str)]) -> Result<Self> {
        let idx = pairs
            .iter()
            .map(|(a, b)| Ok((carrier.require(a)?, carrier.require(b)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::closure(carrier, &idx)
    }

    pub fn discrete(carrier: &FinSet) -> Self {
        let n = carrier.len();
        Self::from_up_rows(
            carrier.clone(),
            (0..n).map(|i| BitSet::singleton(n, i)).collect(),
        )
    }

    /// The chain `labels[0] <= labels[1] <= ..` with labels kept in the given order.
    pub fn chain(labels: &[&str]) -> Self {
        let set = FinSet::from_ordered(labels.iter().map(|s| s.to_string()).collect())
            .expect("distinct chain labels");
        let pairs: Vec<_> = (1..labels.len()).map(|i| (i - 1, i)).collect();
        Self::closure(&set, &pairs).expect("a chain is antisymmetric")
    }

    /// Builds a poset from an order predicate that is already reflexive, transitive
    /// and antisymmetric. Checked in debug builds only; used for derived carriers.
    pub fn from_leq_fn(carrier: FinSet, leq: impl Fn(usize, usize) -> bool) -> Self {
        let n = carrier.len();
        let up = (0..n)
            .map(|i| BitSet::from_iter_len(n, (0..n).filter(|&j| leq(i, j))))
            .collect();
        let p = Self::from_up_rows(carrier, up);
        debug_assert!(p.is_partial_order());
        p
    }

    fn from_up_rows(set: FinSet, up: Vec<BitSet>) -> Self {
        let n = set.len();
        let mut down: Vec<BitSet> = (0..n).map(|_| BitSet::new(n)).collect();
        let mut discrete = true;
        for (i, row) in up.iter().enumerate() {
            for j in row.iter() {
                down[j].insert(i);
                if j != i {
                    discrete = false;
                }
            }
        }
        FinPoset(Arc::new(PosetData {
            set,
            up,
            down,
            discrete,
        }))
    }

    fn is_partial_order(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| self.leq(i, i))
            && (0..n).all(|i| {
                self.0.up[i]
                    .iter()
                    .all(|j| j == i || !self.leq(j, i))
            })
            && (0..n).all(|i| {
                self.0.up[i]
                    .iter()
                    .all(|j| self.0.up[j].is_subset(&self.0.up[i]))
            })
    }

    pub fn carrier(&self) -> &FinSet {
        &self.0.set
    }

    pub fn len(&self) -> usize {
        self.0.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn label(&self, i: usize) -> &str {
        self.0.set.label(i)
    }

    pub fn is_discrete(&self) -> bool {
        self.0.discrete
    }

    #[inline]
    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.0.up[x].contains(y)
    }

    /// `{ y | x <= y }`
    pub fn up_of(&self, x: usize) -> &BitSet {
        &self.0.up[x]
    }

    /// `{ y | y <= x }`
    pub fn down_of(&self, x: usize) -> &BitSet {
        &self.0.down[x]
    }

    /// All comparable pairs `(x, y)` with `x <= y`, reflexive ones included.
    pub fn comparabilities(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .flat_map(|i| self.0.up[i].iter().map(move |j| (i, j)))
            .collect()
    }

    /// Strict pairs `x < y`, in canonical order.
    pub fn strict_pairs(&self) -> Vec<(usize, usize)> {
        self.comparabilities()
            .into_iter()
            .filter(|(a, b)| a != b)
            .collect()
    }

    pub fn down_close(&self, s: &BitSet) -> BitSet {
        if self.is_discrete() {
            return s.clone();
        }
        let mut out = BitSet::new(self.len());
        for x in s.iter() {
            out.union_with(&self.0.down[x]);
        }
        out
    }

    pub fn up_close(&self, s: &BitSet) -> BitSet {
        if self.is_discrete() {
            return s.clone();
        }
        let mut out = BitSet::new(self.len());
        for x in s.iter() {
            out.union_with(&self.0.up[x]);
        }
        out
    }

    pub fn is_down_closed(&self, s: &BitSet) -> bool {
        self.is_discrete() || s.iter().all(|x| self.0.down[x].is_subset(s))
    }

    pub fn is_up_closed(&self, s: &BitSet) -> bool {
        self.is_discrete() || s.iter().all(|x| self.0.up[x].is_subset(s))
    }

    /// Same carrier, reversed order.
    pub fn dual(&self) -> FinPoset {
        FinPoset(Arc::new(PosetData {
            set: self.0.set.clone(),
            up: self.0.down.clone(),
            down: self.0.up.clone(),
            discrete: self.0.discrete,
        }))
    }

    /// Componentwise order on pairs; element `(a, b)` has index `a * |other| + b`.
    pub fn product(&self, other: &FinPoset) -> FinPoset {
        let (n, m) = (self.len(), other.len());
        let labels = (0..n)
            .flat_map(|a| (0..m).map(move |b| (a, b)))
            .map(|(a, b)| format!("({},{})", self.label(a), other.label(b)))
            .collect();
        let set = FinSet::from_ordered(labels).unwrap_or_else(|_| {
            FinSet::from_ordered((0..n * m).map(|i| format!("#{i}")).collect()).unwrap()
        });
        let mut up = Vec::with_capacity(n * m);
        for a in 0..n {
            for b in 0..m {
                let mut row = BitSet::new(n * m);
                for a2 in self.0.up[a].iter() {
                    for b2 in other.0.up[b].iter() {
                        row.insert(a2 * m + b2);
                    }
                }
                up.push(row);
            }
        }
        Self::from_up_rows(set, up)
    }

    /// Disjoint union; left summand first, cross-summand pairs incomparable.
    pub fn coproduct(&self, other: &FinPoset) -> FinPoset {
        let (n, m) = (self.len(), other.len());
        let labels = (0..n)
            .map(|i| format!("inl({})", self.label(i)))
            .chain((0..m).map(|j| format!("inr({})", other.label(j))))
            .collect();
        let set = FinSet::from_ordered(labels).expect("tags keep summands apart");
        let mut up = Vec::with_capacity(n + m);
        for a in 0..n {
            up.push(BitSet::from_iter_len(n + m, self.0.up[a].iter()));
        }
        for b in 0..m {
            up.push(BitSet::from_iter_len(n + m, other.0.up[b].iter().map(|j| n + j)));
        }
        Self::from_up_rows(set, up)
    }

    /// Whether `f` (total on this carrier, valued in `target`) preserves order.
    pub fn is_monotone(&self, f: &[usize], target: &FinPoset) -> bool {
        assert_eq!(f.len(), self.len(), "mapping must be total");
        self.first_monotonicity_violation(f, target).is_none()
    }

    pub fn first_monotonicity_violation(
        &self,
        f: &[usize],
        target: &FinPoset,
    ) -> Option<(usize, usize)> {
        (0..self.len()).find_map(|x| {
            self.0.up[x]
                .iter()
                .find(|&y| !target.leq(f[x], f[y]))
                .map(|y| (x, y))
        })
    }

    /// Whether both handles point at the same stored poset.
    pub fn ptr_eq(&self, other: &FinPoset) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// [`product`](Self::product), memoized per thread on the identity of the factors
    /// so that repeated derivations share one stored poset.
    pub fn product_cached(&self, other: &FinPoset) -> FinPoset {
        memo(Op::Product, self, other, || self.product(other))
    }

    pub fn coproduct_cached(&self, other: &FinPoset) -> FinPoset {
        memo(Op::Coproduct, self, other, || self.coproduct(other))
    }

    /// The discrete poset on the same carrier, memoized like the products.
    pub fn discrete_cached(&self) -> FinPoset {
        if self.is_discrete() {
            return self.clone();
        }
        memo(Op::Discrete, self, self, || FinPoset::discrete(self.carrier()))
    }

    /// Same carrier and same order.
    pub fn same_as(&self, other: &FinPoset) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.set == other.0.set && self.0.up == other.0.up)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Op {
    Product,
    Coproduct,
    Discrete,
}

thread_local! {
    // Entries hold their inputs alive, so pointer identity cannot be reused.
    static MEMO: std::cell::RefCell<std::collections::VecDeque<(Op, FinPoset, FinPoset, FinPoset)>> =
        const { std::cell::RefCell::new(std::collections::VecDeque::new()) };
}

fn memo(op: Op, a: &FinPoset, b: &FinPoset, build: impl FnOnce() -> FinPoset) -> FinPoset {
    const SLOTS: usize = 256;
    if let Some(hit) = MEMO.with(|m| {
        m.borrow()
            .iter()
            .find(|(o, x, y, _)| *o == op && x.ptr_eq(a) && y.ptr_eq(b))
            .map(|e| e.3.clone())
    }) {
        return hit;
    }
    let out = build();
    MEMO.with(|m| {
        let mut m = m.borrow_mut();
        if m.len() == SLOTS {
            m.pop_back();
        }
        m.push_front((op, a.clone(), b.clone(), out.clone()));
    });
    out
}

impl PartialEq for FinPoset {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl Eq for FinPoset {}

impl fmt::Debug for FinPoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pairs: Vec<String> = self
            .strict_pairs()
            .into_iter()
            .map(|(a, b)| format!("{}<={}", self.label(a), self.label(b)))
            .collect();
        write!(f, "FinPoset{:?} [{}]", self.0.set, pairs.join(", "))
    }
}

/// `{a,b,c}`, or `{a,b,c; a<b,a<c}` when the order is not discrete.
impl fmt::Display for FinPoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let order: Vec<String> = self
            .strict_pairs()
            .into_iter()
            .map(|(a, b)| format!("{}<{}", self.label(a), self.label(b)))
            .collect();
        let labels = self.carrier().labels().join(",");
        if order.is_empty() {
            write!(f, "{{{labels}}}")
        } else {
            write!(f, "{{{labels}; {}}}", order.join(","))
        }
    }
}

/// Which closure property a [`SubsetOf`] has been verified to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosureTag {
    DownClosed,
    UpClosed,
}

/// A subset of a poset's carrier, optionally carrying a verified closure tag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetOf {
    parent: FinPoset,
    members: BitSet,
    tag: Option<ClosureTag>,
}

impl SubsetOf {
    pub fn new(parent: &FinPoset, members: BitSet) -> Self {
        assert_eq!(members.len(), parent.len());
        SubsetOf {
            parent: parent.clone(),
            members,
            tag: None,
        }
    }

    pub fn named(parent: &FinPoset, atoms: &[&str]) -> Result<Self> {
        let mut members = BitSet::new(parent.len());
        for a in atoms {
            members.insert(parent.carrier().require(a)?);
        }
        Ok(Self::new(parent, members))
    }

    /// Attaches a closure tag after checking it holds.
    pub fn tagged(mut self, tag: ClosureTag) -> Result<Self> {
        let ok = match tag {
            ClosureTag::DownClosed => self.parent.is_down_closed(&self.members),
            ClosureTag::UpClosed => self.parent.is_up_closed(&self.members),
        };
        if !ok {
            return Err(Error::NotDownClosed(format!("{:?} as {tag:?}", self.members)));
        }
        self.tag = Some(tag);
        Ok(self)
    }

    pub fn parent(&self) -> &FinPoset {
        &self.parent
    }

    pub fn members(&self) -> &BitSet {
        &self.members
    }

    pub fn tag(&self) -> Option<ClosureTag> {
        self.tag
    }

    pub fn labels(&self) -> Vec<&str> {
        self.members.iter().map(|i| self.parent.label(i)).collect()
    }
}

/// `{ x' | exists x in s. x' <= x }`, tagged down-closed.
pub fn down_close(p: &FinPoset, s: &SubsetOf) -> SubsetOf {
    assert!(s.parent().same_as(p), "subset over a different carrier");
    SubsetOf {
        parent: p.clone(),
        members: p.down_close(s.members()),
        tag: Some(ClosureTag::DownClosed),
    }
}

/// `{ x' | exists x in s. x <= x' }`, tagged up-closed.
pub fn up_close(p: &FinPoset, s: &SubsetOf) -> SubsetOf {
    assert!(s.parent().same_as(p), "subset over a different carrier");
    SubsetOf {
        parent: p.clone(),
        members: p.up_close(s.members()),
        tag: Some(ClosureTag::UpClosed),
    }
}

/// All partial orders on `{0..n}` up to isomorphism, one canonical representative each.
/// Feasible for `n <= 5`.
pub fn posets_up_to_iso(n: usize) -> Vec<FinPoset> {
    assert!(n <= 5, "poset enumeration is only meant for tiny carriers");
    let carrier = FinSet::range(n);
    let strict: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let perms = permutations(n);
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << strict.len()) {
        let rel: Vec<(usize, usize)> = strict
            .iter()
            .enumerate()
            .filter(|(b, _)| mask >> b & 1 == 1)
            .map(|(_, &p)| p)
            .collect();
        // keep only relations that are already transitive and antisymmetric
        let holds = |a: usize, b: usize| a == b || rel.contains(&(a, b));
        let transitive = rel
            .iter()
            .all(|&(a, b)| (0..n).all(|c| !holds(b, c) || holds(a, c)));
        let antisym = rel.iter().all(|&(a, b)| !rel.contains(&(b, a)));
        if !(transitive && antisym) {
            continue;
        }
        let canon = perms
            .iter()
            .map(|p| {
                let mut m: Vec<(usize, usize)> = rel.iter().map(|&(a, b)| (p[a], p[b])).collect();
                m.sort();
                m
            })
            .min()
            .unwrap_or_default();
        if seen.insert(canon.clone()) {
            out.push(FinPoset::closure(&carrier, &canon).expect("canonical form is a partial order"));
        }
    }
    out
}

pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        let n = used.len();
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}
