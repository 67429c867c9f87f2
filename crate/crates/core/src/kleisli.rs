//! Kleisli arrows for the powerset and downset monads, arrows `K x X -> T(K x Y)`
//! of the relative monad over `G = K x _`, and liftings of the machine functor
//! `B = A x _ + O` to both Kleisli categories.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::monad::{labels_of, Backend, TCarrier, ENUM_BOUND};
use crate::order::{FinPoset, FinSet};
use crate::report::{LawReport, Tally};

/// An extensional Kleisli arrow `dom -> T cod`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KlArrow {
    backend: Backend,
    dom: FinPoset,
    cod: FinPoset,
    table: Vec<BitSet>,
}

impl KlArrow {
    /// Validating constructor. Under `Pos` every value must be down-closed and
    /// the table monotone from the domain order into inclusion.
    pub fn new(backend: Backend, dom: &FinPoset, cod: &FinPoset, table: Vec<BitSet>) -> Result<Self> {
        let a = Self::raw(backend, backend.view(dom), backend.view(cod), table);
        a.validate()?;
        Ok(a)
    }

    fn raw(backend: Backend, dom: FinPoset, cod: FinPoset, table: Vec<BitSet>) -> Self {
        KlArrow {
            backend,
            dom,
            cod,
            table,
        }
    }

    /// Builds and then asserts the backend invariants on a derived arrow.
    fn derived(backend: Backend, dom: FinPoset, cod: FinPoset, table: Vec<BitSet>) -> Self {
        let a = Self::raw(backend, dom, cod, table);
        if let Err(e) = a.validate() {
            panic!("derived Kleisli arrow violates its invariants: {e}");
        }
        a
    }

    pub fn validate(&self) -> Result<()> {
        if self.table.len() != self.dom.len() {
            return Err(Error::CarrierMismatch(format!(
                "table has {} rows for a domain of {}",
                self.table.len(),
                self.dom.len()
            )));
        }
        for v in &self.table {
            if v.len() != self.cod.len() {
                return Err(Error::CarrierMismatch("value over the wrong codomain".into()));
            }
        }
        if self.backend == Backend::Pos {
            for (x, v) in self.table.iter().enumerate() {
                if !self.cod.is_down_closed(v) {
                    return Err(Error::NotDownClosed(format!(
                        "value at {}: {}",
                        self.dom.label(x),
                        labels_of(self.cod.carrier(), v)
                    )));
                }
            }
            for (x, y) in self.dom.strict_pairs() {
                if !self.table[x].is_subset(&self.table[y]) {
                    return Err(Error::NotMonotone(format!(
                        "{} <= {} but f({}) is not contained in f({})",
                        self.dom.label(x),
                        self.dom.label(y),
                        self.dom.label(x),
                        self.dom.label(y)
                    )));
                }
            }
        }
        Ok(())
    }

    /// The Kleisli identity `eta`.
    pub fn identity(backend: Backend, x: &FinPoset) -> Self {
        let x = backend.view(x);
        let table = (0..x.len()).map(|i| backend.unit(&x, i)).collect();
        Self::derived(backend, x.clone(), x, table)
    }

    /// `eta . f` for a plain mapping `f`.
    pub fn pure(backend: Backend, dom: &FinPoset, cod: &FinPoset, f: &[usize]) -> Result<Self> {
        let (dom, cod) = (backend.view(dom), backend.view(cod));
        if f.len() != dom.len() {
            return Err(Error::CarrierMismatch("mapping is not total".into()));
        }
        if let Some((x, y)) = dom.first_monotonicity_violation(f, &cod) {
            return Err(Error::NotMonotone(format!(
                "{} <= {} but {} is not below {}",
                dom.label(x),
                dom.label(y),
                cod.label(f[x]),
                cod.label(f[y])
            )));
        }
        let table = f.iter().map(|&y| backend.unit(&cod, y)).collect();
        Ok(Self::derived(backend, dom, cod, table))
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn dom(&self) -> &FinPoset {
        &self.dom
    }

    pub fn cod(&self) -> &FinPoset {
        &self.cod
    }

    pub fn table(&self) -> &[BitSet] {
        &self.table
    }

    pub fn apply(&self, x: usize) -> &BitSet {
        &self.table[x]
    }

    /// Kleisli extension `mu . T f` applied to one T-value.
    pub fn extend(&self, s: &BitSet) -> BitSet {
        let mut out = BitSet::new(self.cod.len());
        for x in s.iter() {
            out.union_with(&self.table[x]);
        }
        out
    }
}

impl std::fmt::Display for KlArrow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let rows: Vec<String> = self
            .table
            .iter()
            .enumerate()
            .map(|(x, v)| format!("{} -> {}", self.dom.label(x), labels_of(self.cod.carrier(), v)))
            .collect();
        write!(f, "[{}]", rows.join("; "))
    }
}

fn same_backend(a: Backend, b: Backend) -> Result<()> {
    if a != b {
        return Err(Error::BackendMismatch(format!("{} vs {}", a.name(), b.name())));
    }
    Ok(())
}

fn same_carrier(a: &FinPoset, b: &FinPoset, what: &str) -> Result<()> {
    if !a.same_as(b) {
        return Err(Error::CarrierMismatch(what.to_string()));
    }
    Ok(())
}

/// `g . f` in the Kleisli category: `x |-> union { g(y) | y in f(x) }`.
pub fn kl_compose(g: &KlArrow, f: &KlArrow) -> Result<KlArrow> {
    same_backend(g.backend, f.backend)?;
    same_carrier(&f.cod, &g.dom, "codomain of f differs from domain of g")?;
    let table = f.table.iter().map(|v| g.extend(v)).collect();
    Ok(KlArrow::derived(f.backend, f.dom.clone(), g.cod.clone(), table))
}

fn same_hom(f: &KlArrow, g: &KlArrow) -> Result<()> {
    same_backend(f.backend, g.backend)?;
    same_carrier(&f.dom, &g.dom, "domains differ")?;
    same_carrier(&f.cod, &g.cod, "codomains differ")
}

/// Pointwise inclusion, the order of the enriched homsets.
pub fn kl_order(f: &KlArrow, g: &KlArrow) -> Result<bool> {
    same_hom(f, g)?;
    Ok(f.table.iter().zip(&g.table).all(|(a, b)| a.is_subset(b)))
}

/// Pointwise union of a non-empty family of parallel arrows.
pub fn kl_join(chain: &[KlArrow]) -> Result<KlArrow> {
    let first = chain
        .first()
        .ok_or_else(|| Error::CarrierMismatch("join of an empty family".into()))?;
    let mut table = first.table.clone();
    for f in &chain[1..] {
        same_hom(first, f)?;
        for (a, b) in table.iter_mut().zip(&f.table) {
            a.union_with(b);
        }
    }
    Ok(KlArrow::derived(first.backend, first.dom.clone(), first.cod.clone(), table))
}

/// The constantly empty arrow, least in the homset order.
pub fn kl_bottom(backend: Backend, dom: &FinPoset, cod: &FinPoset) -> KlArrow {
    let (dom, cod) = (backend.view(dom), backend.view(cod));
    let table = vec![BitSet::new(cod.len()); dom.len()];
    KlArrow::derived(backend, dom, cod, table)
}

/// Copairing `[f, g]: X + Y -> T Z`.
pub fn kl_copair(f: &KlArrow, g: &KlArrow) -> Result<KlArrow> {
    same_backend(f.backend, g.backend)?;
    same_carrier(&f.cod, &g.cod, "copairing needs a common codomain")?;
    let dom = f.dom.coproduct_cached(&g.dom);
    let table = f.table.iter().chain(&g.table).cloned().collect();
    Ok(KlArrow::derived(f.backend, dom, f.cod.clone(), table))
}

/// An arrow `K x X -> T(K x Y)` of the Kleisli category of the relative monad
/// `T^G` with `G = K x _`. Pairs `(k, x)` are indexed `k * |X| + x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelKlArrow {
    cond: FinPoset,
    dom: FinPoset,
    cod: FinPoset,
    inner: KlArrow,
}

/// `K x X` as a poset, with `K` discretized for the `Set` backend.
pub fn g_carrier(backend: Backend, cond: &FinPoset, x: &FinPoset) -> FinPoset {
    backend.view(cond).product_cached(&backend.view(x))
}

impl RelKlArrow {
    pub fn new(
        backend: Backend,
        cond: &FinPoset,
        dom: &FinPoset,
        cod: &FinPoset,
        table: Vec<BitSet>,
    ) -> Result<Self> {
        let inner = KlArrow::new(
            backend,
            &g_carrier(backend, cond, dom),
            &g_carrier(backend, cond, cod),
            table,
        )?;
        Ok(Self::wrap(cond, dom, cod, inner))
    }

    /// Builds the table from `(k, x) |-> {(k', y)}` pairs and validates it.
    pub fn from_fn<I>(
        backend: Backend,
        cond: &FinPoset,
        dom: &FinPoset,
        cod: &FinPoset,
        mut cell: impl FnMut(usize, usize) -> I,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let (nk, nx, ny) = (cond.len(), dom.len(), cod.len());
        let mut table = Vec::with_capacity(nk * nx);
        for k in 0..nk {
            for x in 0..nx {
                table.push(BitSet::from_iter_len(
                    nk * ny,
                    cell(k, x).into_iter().map(|(k2, y)| k2 * ny + y),
                ));
            }
        }
        Self::new(backend, cond, dom, cod, table)
    }

    fn wrap(cond: &FinPoset, dom: &FinPoset, cod: &FinPoset, inner: KlArrow) -> Self {
        let b = inner.backend;
        RelKlArrow {
            cond: b.view(cond),
            dom: b.view(dom),
            cod: b.view(cod),
            inner,
        }
    }

    pub fn backend(&self) -> Backend {
        self.inner.backend
    }

    pub fn cond(&self) -> &FinPoset {
        &self.cond
    }

    pub fn dom(&self) -> &FinPoset {
        &self.dom
    }

    pub fn cod(&self) -> &FinPoset {
        &self.cod
    }

    /// The underlying arrow `G X -> T G Y`.
    pub fn as_kl(&self) -> &KlArrow {
        &self.inner
    }

    pub fn cell(&self, k: usize, x: usize) -> &BitSet {
        &self.inner.table[k * self.dom.len() + x]
    }

    /// The pairs `(k', y)` of one cell, in canonical order.
    pub fn cell_pairs(&self, k: usize, x: usize) -> Vec<(usize, usize)> {
        let ny = self.cod.len();
        self.cell(k, x).iter().map(|i| (i / ny, i % ny)).collect()
    }

    /// `f# = mu_{GY} . T f` applied to a value of `T G X`.
    pub fn extend(&self, s: &BitSet) -> BitSet {
        let mut family: Vec<&BitSet> = Vec::with_capacity(s.count());
        for c in s.iter() {
            family.push(&self.inner.table[c]);
        }
        let mut out = BitSet::new(self.inner.cod.len());
        for v in family {
            out.union_with(v);
        }
        out
    }
}

impl std::fmt::Display for RelKlArrow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.inner.fmt(f)
    }
}

fn same_rel(g: &RelKlArrow, f: &RelKlArrow) -> Result<()> {
    same_backend(g.backend(), f.backend())?;
    same_carrier(&g.cond, &f.cond, "condition posets differ")
}

/// `g . f = g# . f`, computed cellwise through the extension.
pub fn relkl_compose(g: &RelKlArrow, f: &RelKlArrow) -> Result<RelKlArrow> {
    same_rel(g, f)?;
    same_carrier(&f.cod, &g.dom, "codomain of f differs from domain of g")?;
    let table = f.inner.table.iter().map(|v| g.extend(v)).collect();
    let inner = KlArrow::derived(
        f.backend(),
        f.inner.dom.clone(),
        g.inner.cod.clone(),
        table,
    );
    Ok(RelKlArrow::wrap(&f.cond, &f.dom, &g.cod, inner))
}

/// The identity `eta_G`: `(k, x) |-> unit(k, x)`.
pub fn relkl_id(backend: Backend, cond: &FinPoset, x: &FinPoset) -> RelKlArrow {
    let ids: Vec<usize> = (0..x.len()).collect();
    embed_pure(backend, cond, x, x, &ids).expect("identity is monotone")
}

/// `L f = eta_{GY} . G f`.
pub fn embed_pure(
    backend: Backend,
    cond: &FinPoset,
    dom: &FinPoset,
    cod: &FinPoset,
    f: &[usize],
) -> Result<RelKlArrow> {
    let (nk, nx, ny) = (cond.len(), dom.len(), cod.len());
    if f.len() != nx {
        return Err(Error::CarrierMismatch("mapping is not total".into()));
    }
    let gf: Vec<usize> = (0..nk * nx).map(|c| (c / nx) * ny + f[c % nx]).collect();
    let inner = KlArrow::pure(
        backend,
        &g_carrier(backend, cond, dom),
        &g_carrier(backend, cond, cod),
        &gf,
    )?;
    Ok(RelKlArrow::wrap(cond, dom, cod, inner))
}

/// The machine functor `B X = A x X + O` on a given alphabet and observation poset.
/// `inl(a, x)` has index `a * |X| + x`; `inr(o)` has index `|A| * |X| + o`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineShape {
    alphabet: FinSet,
    letters: FinPoset,
    obs: FinPoset,
}

/// One element of `A x X + O`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BElem {
    Step(usize, usize),
    Obs(usize),
}

impl MachineShape {
    pub fn new(alphabet: FinSet, obs: FinPoset) -> Self {
        let letters = FinPoset::discrete(&alphabet);
        MachineShape {
            alphabet,
            letters,
            obs,
        }
    }

    pub fn alphabet(&self) -> &FinSet {
        &self.alphabet
    }

    pub fn obs(&self) -> &FinPoset {
        &self.obs
    }

    pub fn letters(&self) -> usize {
        self.alphabet.len()
    }

    /// `A x X`, the alphabet discretely ordered.
    pub fn a_apply(&self, x: &FinPoset) -> FinPoset {
        self.letters.product_cached(x)
    }

    /// `A x X + O`.
    pub fn apply(&self, x: &FinPoset) -> FinPoset {
        self.a_apply(x).coproduct_cached(&self.obs)
    }

    pub fn size(&self, nx: usize) -> usize {
        self.letters() * nx + self.obs.len()
    }

    pub fn inl(&self, a: usize, x: usize, nx: usize) -> usize {
        a * nx + x
    }

    pub fn inr(&self, o: usize, nx: usize) -> usize {
        self.letters() * nx + o
    }

    pub fn decode(&self, i: usize, nx: usize) -> BElem {
        let steps = self.letters() * nx;
        if i < steps {
            BElem::Step(i / nx, i % nx)
        } else {
            BElem::Obs(i - steps)
        }
    }

    /// `A f` on plain mappings.
    pub fn a_map(&self, f: &[usize], ny: usize) -> Vec<usize> {
        let nx = f.len();
        (0..self.letters() * nx)
            .map(|i| (i / nx) * ny + f[i % nx])
            .collect()
    }

    /// `B f` on plain mappings.
    pub fn map(&self, f: &[usize], ny: usize) -> Vec<usize> {
        let nx = f.len();
        (0..self.size(nx))
            .map(|i| match self.decode(i, nx) {
                BElem::Step(a, x) => self.inl(a, f[x], ny),
                BElem::Obs(o) => self.inr(o, ny),
            })
            .collect()
    }
}

/// The canonical lifting of `B` to the Kleisli category of `T`:
/// `(a, x) |-> {(a, y) | y in f(x)}` and `o |-> unit(o)`.
pub fn machine_lift_bar(shape: &MachineShape, f: &KlArrow) -> KlArrow {
    let b = f.backend;
    let (nx, ny) = (f.dom.len(), f.cod.len());
    let dom = b.view(&shape.apply(&f.dom));
    let cod = b.view(&shape.apply(&f.cod));
    let table = (0..shape.size(nx))
        .map(|i| match shape.decode(i, nx) {
            BElem::Step(a, x) => {
                let raw = BitSet::from_iter_len(
                    cod.len(),
                    f.table[x].iter().map(|y| shape.inl(a, y, ny)),
                );
                b.close(&cod, &raw)
            }
            BElem::Obs(o) => b.unit(&cod, shape.inr(o, ny)),
        })
        .collect();
    KlArrow::derived(b, dom, cod, table)
}

/// `A~ f (k, (a, x)) = {(k', (a, y)) | (k', y) in f(k, x)}`.
/// Only the alphabet of `shape` is used.
pub fn lift_a_tilde(shape: &MachineShape, f: &RelKlArrow) -> RelKlArrow {
    let b = f.backend();
    let (nk, nx, ny) = (f.cond.len(), f.dom.len(), f.cod.len());
    let na = shape.letters();
    let ax = shape.a_apply(&f.dom);
    let ay = shape.a_apply(&f.cod);
    let width = na * ny;
    let mut table = Vec::with_capacity(nk * na * nx);
    for k in 0..nk {
        for a in 0..na {
            for x in 0..nx {
                table.push(BitSet::from_iter_len(
                    nk * width,
                    f.cell_pairs(k, x)
                        .into_iter()
                        .map(|(k2, y)| k2 * width + a * ny + y),
                ));
            }
        }
    }
    let inner = KlArrow::derived(
        b,
        g_carrier(b, &f.cond, &ax),
        g_carrier(b, &f.cond, &ay),
        table,
    );
    RelKlArrow::wrap(&f.cond, &ax, &ay, inner)
}

/// `B^ f (k, inl(a, x)) = {(k', inl(a, y)) | (k', y) in f(k, x)}` and
/// `B^ f (k, inr(o)) = unit(k, inr(o))`.
pub fn lift_b_hat(shape: &MachineShape, f: &RelKlArrow) -> RelKlArrow {
    let b = f.backend();
    let (nk, nx, ny) = (f.cond.len(), f.dom.len(), f.cod.len());
    let bx = shape.apply(&f.dom);
    let by = shape.apply(&f.cod);
    let gby = g_carrier(b, &f.cond, &by);
    let width = shape.size(ny);
    let mut table = Vec::with_capacity(nk * shape.size(nx));
    for k in 0..nk {
        for i in 0..shape.size(nx) {
            table.push(match shape.decode(i, nx) {
                BElem::Step(a, x) => BitSet::from_iter_len(
                    nk * width,
                    f.cell_pairs(k, x)
                        .into_iter()
                        .map(|(k2, y)| k2 * width + shape.inl(a, y, ny)),
                ),
                BElem::Obs(o) => b.unit(&gby, k * width + shape.inr(o, ny)),
            });
        }
    }
    let inner = KlArrow::derived(b, g_carrier(b, &f.cond, &bx), gby, table);
    RelKlArrow::wrap(&f.cond, &bx, &by, inner)
}

/// Every Kleisli arrow `dom -> T cod` (monotone ones only under `Pos`).
pub fn all_arrows(backend: Backend, dom: &FinPoset, cod: &FinPoset, bound: usize) -> Result<Vec<KlArrow>> {
    let (dom, cod) = (backend.view(dom), backend.view(cod));
    let values = TCarrier::enumerate(backend, &cod, ENUM_BOUND)?;
    let n = dom.len();
    let estimate = (values.len() as f64).powi(n as i32);
    if backend == Backend::Set && estimate > bound as f64 {
        return Err(Error::CarrierTooLarge {
            what: format!("arrows {} -> T {}", n, cod.len()),
            size: estimate as u128,
            bound: bound as u128,
        });
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = Vec::with_capacity(n);
    fn go(
        dom: &FinPoset,
        values: &TCarrier,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        bound: usize,
    ) -> bool {
        if out.len() > bound {
            return false;
        }
        let i = cur.len();
        if i == dom.len() {
            out.push(cur.clone());
            return true;
        }
        for v in 0..values.len() {
            let ok = (0..i).all(|j| {
                (!dom.leq(j, i) || values.value(cur[j]).is_subset(values.value(v)))
                    && (!dom.leq(i, j) || values.value(v).is_subset(values.value(cur[j])))
            });
            if ok {
                cur.push(v);
                let fine = go(dom, values, cur, out, bound);
                cur.pop();
                if !fine {
                    return false;
                }
            }
        }
        true
    }
    let mut rows = Vec::new();
    if !go(&dom, &values, &mut cur, &mut rows, bound) {
        return Err(Error::CarrierTooLarge {
            what: format!("arrows {} -> T {}", n, cod.len()),
            size: bound as u128 + 1,
            bound: bound as u128,
        });
    }
    for r in rows {
        let table = r.into_iter().map(|v| values.value(v).clone()).collect();
        out.push(KlArrow::raw(backend, dom.clone(), cod.clone(), table));
    }
    Ok(out)
}

/// Every arrow `K x dom -> T(K x cod)` of the relative Kleisli category.
pub fn all_rel_arrows(
    backend: Backend,
    cond: &FinPoset,
    dom: &FinPoset,
    cod: &FinPoset,
    bound: usize,
) -> Result<Vec<RelKlArrow>> {
    let gx = g_carrier(backend, cond, dom);
    let gy = g_carrier(backend, cond, cod);
    Ok(all_arrows(backend, &gx, &gy, bound)?
        .into_iter()
        .map(|a| RelKlArrow::wrap(cond, dom, cod, a))
        .collect())
}

/// Every plain mapping `dom -> cod`, monotone ones only if `monotone`.
pub fn all_maps(dom: &FinPoset, cod: &FinPoset, monotone: bool) -> Vec<Vec<usize>> {
    let (n, m) = (dom.len(), cod.len());
    let mut out = Vec::new();
    if m == 0 && n > 0 {
        return out;
    }
    let total = m.pow(n as u32);
    for mut code in 0..total {
        let mut f = vec![0; n];
        for slot in f.iter_mut().rev() {
            *slot = code % m;
            code /= m;
        }
        if !monotone || dom.is_monotone(&f, cod) {
            out.push(f);
        }
    }
    out
}

/// How many instances a law may evaluate before switching to seeded sampling.
pub const EXHAUSTIVE_BUDGET: usize = 250_000;

/// Index pairs to test: all of them if within budget, otherwise every left index
/// with some right partners and vice versa, chosen by a seeded generator. When
/// even that exceeds the budget, `budget` uniformly drawn pairs.
pub(crate) fn pair_plan(n: usize, m: usize, budget: usize, seed: u64) -> (Vec<(usize, usize)>, bool) {
    if n * m <= budget {
        return ((0..n).flat_map(|i| (0..m).map(move |j| (i, j))).collect(), false);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if n + m > budget {
        return ((0..budget).map(|_| (rng.gen_range(0..n), rng.gen_range(0..m))).collect(), true);
    }
    let per = (budget / (n + m)).max(1);
    let mut out = Vec::with_capacity(per * (n + m));
    for i in 0..n {
        for _ in 0..per {
            out.push((i, rng.gen_range(0..m)));
        }
    }
    for j in 0..m {
        for _ in 0..per {
            out.push((rng.gen_range(0..n), j));
        }
    }
    (out, true)
}

/// Index triples: exhaustive within budget, else a seeded sample in which every
/// index of each position occurs at least once.
pub(crate) fn triple_plan(
    n: usize,
    m: usize,
    l: usize,
    budget: usize,
    seed: u64,
) -> (Vec<(usize, usize, usize)>, bool) {
    if n * m * l <= budget {
        let all = (0..n)
            .flat_map(|i| (0..m).flat_map(move |j| (0..l).map(move |k| (i, j, k))))
            .collect();
        return (all, false);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(budget);
    let covering = n.max(m).max(l);
    let mut perm_n: Vec<usize> = (0..n).collect();
    let mut perm_m: Vec<usize> = (0..m).collect();
    let mut perm_l: Vec<usize> = (0..l).collect();
    perm_n.shuffle(&mut rng);
    perm_m.shuffle(&mut rng);
    perm_l.shuffle(&mut rng);
    for t in 0..covering {
        out.push((perm_n[t % n], perm_m[t % m], perm_l[t % l]));
    }
    while out.len() < budget.max(covering) {
        out.push((rng.gen_range(0..n), rng.gen_range(0..m), rng.gen_range(0..l)));
    }
    (out, true)
}

/// Category laws and the enriched structure of one homset universe.
///
/// Arrows range over every `X -> T Y`, `Y -> T Z`, `Z -> T W` for the given
/// carriers; composition continuity is checked on all 3-chains `bot <= f <= f v g`.
pub fn check_kleisli_laws(
    backend: Backend,
    x: &FinPoset,
    y: &FinPoset,
    budget: usize,
    seed: u64,
) -> Result<LawReport> {
    let fs = all_arrows(backend, x, y, 1 << 20)?;
    let gs = all_arrows(backend, y, x, 1 << 20)?;
    let hs = all_arrows(backend, x, y, 1 << 20)?;
    let id_x = KlArrow::identity(backend, x);
    let id_y = KlArrow::identity(backend, y);
    generic_category_laws(
        &fs,
        &gs,
        &hs,
        &id_x,
        &id_y,
        |g, f| kl_compose(g, f).expect("composable"),
        |a| kl_bottom(a.backend, &a.dom, &a.cod),
        |a, b| kl_join(&[a.clone(), b.clone()]).expect("parallel"),
        |a, b| kl_order(a, b).expect("parallel"),
        budget,
        seed,
    )
}

/// The same laws for the relative Kleisli category over `K`.
pub fn check_relkleisli_laws(
    backend: Backend,
    cond: &FinPoset,
    x: &FinPoset,
    y: &FinPoset,
    budget: usize,
    seed: u64,
) -> Result<LawReport> {
    let fs = all_rel_arrows(backend, cond, x, y, 1 << 20)?;
    let gs = all_rel_arrows(backend, cond, y, x, 1 << 20)?;
    let id_x = relkl_id(backend, cond, x);
    let id_y = relkl_id(backend, cond, y);
    let wrap = |a: &RelKlArrow, inner: KlArrow| RelKlArrow::wrap(&a.cond, &a.dom, &a.cod, inner);
    let mut report = generic_category_laws(
        &fs,
        &gs,
        &fs,
        &id_x,
        &id_y,
        |g, f| relkl_compose(g, f).expect("composable"),
        |a| wrap(a, kl_bottom(a.backend(), &a.inner.dom, &a.inner.cod)),
        |a, b| wrap(a, kl_join(&[a.inner.clone(), b.inner.clone()]).expect("parallel")),
        |a, b| kl_order(&a.inner, &b.inner).expect("parallel"),
        budget,
        seed,
    )?;
    // Composition preserves joins in each argument and every arrow is a join of
    // generators, so associativity on all generator triples covers every triple.
    let fg = rel_generators(backend, cond, x, y)?;
    let gg = rel_generators(backend, cond, y, x)?;
    let mut t = Tally::new("associativity/join-generators");
    for f in &fg {
        for g in &gg {
            let gf = relkl_compose(g, f)?;
            for h in &fg {
                let lhs = relkl_compose(h, &gf)?;
                let rhs = relkl_compose(&relkl_compose(h, g)?, f)?;
                t.case(lhs == rhs, || format!("f = {f}, g = {g}, h = {h}"));
            }
        }
    }
    report.push(t.finish());
    Ok(report)
}

/// The bottom arrow and, for each cell and each point, the least arrow whose value
/// at that cell contains the point: the join-generators of the homset.
pub fn rel_generators(backend: Backend, cond: &FinPoset, x: &FinPoset, y: &FinPoset) -> Result<Vec<RelKlArrow>> {
    let gx = g_carrier(backend, cond, x);
    let gy = g_carrier(backend, cond, y);
    let mut out = vec![RelKlArrow::wrap(cond, x, y, kl_bottom(backend, &gx, &gy))];
    for cell in 0..gx.len() {
        for e in 0..gy.len() {
            // least monotone arrow sending `cell` to a value containing `e`
            let table = (0..gx.len())
                .map(|c| {
                    if gx.leq(cell, c) {
                        backend.unit(&gy, e)
                    } else {
                        BitSet::new(gy.len())
                    }
                })
                .collect();
            out.push(RelKlArrow::new(backend, cond, x, y, table)?);
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn generic_category_laws<A: Clone + PartialEq + std::fmt::Display>(
    fs: &[A],
    gs: &[A],
    hs: &[A],
    id_x: &A,
    id_y: &A,
    compose: impl Fn(&A, &A) -> A,
    bottom: impl Fn(&A) -> A,
    join: impl Fn(&A, &A) -> A,
    leq: impl Fn(&A, &A) -> bool,
    budget: usize,
    seed: u64,
) -> Result<LawReport> {
    let mut report = LawReport::new();

    let mut left = Tally::new("left-identity");
    let mut right = Tally::new("right-identity");
    for f in fs {
        let l = compose(id_y, f);
        left.case(&l == f, || format!("f = {f}: id . f = {l}"));
        let r = compose(f, id_x);
        right.case(&r == f, || format!("f = {f}: f . id = {r}"));
    }
    report.push(left.finish());
    report.push(right.finish());

    // h . (g . f) = (h . g) . f with f: X->Y, g: Y->X, h: X->Y
    let (plan, sampled) = triple_plan(fs.len(), gs.len(), hs.len(), budget, seed);
    let mut assoc = Tally::new("associativity").sampled(sampled);
    for (i, j, k) in plan {
        let (f, g, h) = (&fs[i], &gs[j], &hs[k]);
        let a = compose(h, &compose(g, f));
        let b = compose(&compose(h, g), f);
        assoc.case(a == b, || format!("f = {f}, g = {g}, h = {h}"));
    }
    report.push(assoc.finish());

    let mut strict = Tally::new("left-strictness");
    for f in fs {
        let bot_g = bottom(&gs[0]);
        let c = compose(&bot_g, f);
        strict.case(c == bottom(&c), || format!("f = {f}: bot . f = {c}"));
    }
    report.push(strict.finish());

    // bottom <= f <= f v f' ; composition must preserve the join on either side
    let (plan, sampled) = pair_plan(fs.len(), fs.len(), budget / 4, seed ^ 0x5eed);
    let mut mono = Tally::new("composition-monotone").sampled(sampled);
    let mut cont = Tally::new("composition-continuous").sampled(sampled);
    let (gplan, _) = pair_plan(plan.len(), gs.len(), plan.len(), seed ^ 0xc0de);
    for (pi, j) in gplan.into_iter().take(plan.len()) {
        let (i1, i2) = plan[pi];
        let (f, f2) = (&fs[i1], &fs[i2]);
        let g = &gs[j];
        let chain = [bottom(f), f.clone(), join(f, f2)];
        let top = &chain[2];
        // right argument: g . (join chain) = join (g . chain)
        let lhs = compose(g, top);
        let rhs = chain
            .iter()
            .map(|c| compose(g, c))
            .reduce(|a, b| join(&a, &b))
            .unwrap();
        let images: Vec<A> = chain.iter().map(|c| compose(g, c)).collect();
        let ascending = leq(&images[0], &images[1]) && leq(&images[1], &images[2]);
        mono.case(ascending, || format!("g = {g} on chain bot <= {f} <= {top}"));
        // left argument: (join chain') . g for the chain bot <= g <= g v g'
        let g2 = &gs[(j + 1) % gs.len()];
        let gchain = [bottom(g), join(g, g2)];
        let lhs2 = compose(&gchain[1], f);
        let rhs2 = join(&compose(&gchain[0], f), &compose(&gchain[1], f));
        cont.case(lhs == rhs && lhs2 == rhs2, || {
            format!("f = {f}, f' = {f2}, g = {g}")
        });
    }
    report.push(mono.finish());
    report.push(cont.finish());
    Ok(report)
}

/// The lifting theorems for `B^`, `A~` and `B-bar` on one configuration.
///
/// Domain arrows are every `X -> Y`, second arrows every `Y -> X`; pure arrows
/// are every plain (monotone, under `Pos`) mapping `X -> Y`.
pub fn check_lifting_theorems(
    backend: Backend,
    shape: &MachineShape,
    cond: &FinPoset,
    x: &FinPoset,
    y: &FinPoset,
    budget: usize,
    seed: u64,
) -> Result<LawReport> {
    let mut report = LawReport::new();
    let fs = all_rel_arrows(backend, cond, x, y, 1 << 20)?;
    let gs = all_rel_arrows(backend, cond, y, x, 1 << 20)?;
    let maps = all_maps(&backend.view(x), &backend.view(y), backend == Backend::Pos);
    let bx = shape.apply(x);
    let ax = shape.a_apply(x);

    let mut t = Tally::new("bhat-identity");
    for z in [x, y] {
        let lifted = lift_b_hat(shape, &relkl_id(backend, cond, z));
        let expect = relkl_id(backend, cond, &shape.apply(z));
        t.case(lifted == expect, || format!("B^(id) = {lifted}"));
    }
    report.push(t.finish());

    let mut t = Tally::new("atilde-identity");
    for z in [x, y] {
        let lifted = lift_a_tilde(shape, &relkl_id(backend, cond, z));
        let expect = relkl_id(backend, cond, &shape.a_apply(z));
        t.case(lifted == expect, || format!("A~(id) = {lifted}"));
    }
    report.push(t.finish());

    let (plan, sampled) = pair_plan(fs.len(), gs.len(), budget, seed);
    let (plan2, sampled2) = pair_plan(fs.len(), fs.len(), budget, seed ^ 2);
    // lifts are only needed at the sampled indices
    let lift_at = |arrows: &[RelKlArrow], used: &mut dyn Iterator<Item = usize>| {
        let mut bhat: HashMap<usize, RelKlArrow> = HashMap::new();
        let mut at: HashMap<usize, RelKlArrow> = HashMap::new();
        for i in used {
            bhat.entry(i).or_insert_with(|| lift_b_hat(shape, &arrows[i]));
            at.entry(i).or_insert_with(|| lift_a_tilde(shape, &arrows[i]));
        }
        (bhat, at)
    };
    let (bhat_f, at_f) = lift_at(
        &fs,
        &mut plan.iter().map(|p| p.0).chain(plan2.iter().flat_map(|p| [p.0, p.1])),
    );
    let (bhat_g, at_g) = lift_at(&gs, &mut plan.iter().map(|p| p.1));
    let mut tb = Tally::new("bhat-composition").sampled(sampled);
    let mut ta = Tally::new("atilde-composition").sampled(sampled);
    for &(i, j) in &plan {
        let gf = relkl_compose(&gs[j], &fs[i])?;
        let lhs = lift_b_hat(shape, &gf);
        let rhs = relkl_compose(&bhat_g[&j], &bhat_f[&i])?;
        tb.case(lhs == rhs, || format!("f = {}, g = {}", fs[i], gs[j]));
        let lhs = lift_a_tilde(shape, &gf);
        let rhs = relkl_compose(&at_g[&j], &at_f[&i])?;
        ta.case(lhs == rhs, || format!("f = {}, g = {}", fs[i], gs[j]));
    }
    report.push(tb.finish());
    report.push(ta.finish());

    // Both lifts and composition preserve non-empty joins, and every arrow is a
    // non-empty join of generators (bottom among them), so the generator pairs
    // decide functoriality.
    let fgen = rel_generators(backend, cond, x, y)?;
    let ggen = rel_generators(backend, cond, y, x)?;
    let mut t = Tally::new("composition/join-generators");
    for f in &fgen {
        let (bf, af) = (lift_b_hat(shape, f), lift_a_tilde(shape, f));
        for g in &ggen {
            let gf = relkl_compose(g, f)?;
            let ok = lift_b_hat(shape, &gf) == relkl_compose(&lift_b_hat(shape, g), &bf)?
                && lift_a_tilde(shape, &gf) == relkl_compose(&lift_a_tilde(shape, g), &af)?;
            t.case(ok, || format!("f = {f}, g = {g}"));
        }
    }
    report.push(t.finish());

    let mut tb = Tally::new("bhat-pure");
    let mut ta = Tally::new("atilde-pure");
    for h in &maps {
        let lh = embed_pure(backend, cond, x, y, h)?;
        let lhs = lift_b_hat(shape, &lh);
        let rhs = embed_pure(backend, cond, &bx, &shape.apply(y), &shape.map(h, y.len()))?;
        tb.case(lhs == rhs, || format!("h = {h:?}"));
        let lhs = lift_a_tilde(shape, &lh);
        let rhs = embed_pure(backend, cond, &ax, &shape.a_apply(y), &shape.a_map(h, y.len()))?;
        ta.case(lhs == rhs, || format!("h = {h:?}"));
    }
    report.push(tb.finish());
    report.push(ta.finish());

    // B-bar on the plain Kleisli category over the same carriers.
    let kf = all_arrows(backend, x, y, 1 << 20)?;
    let kg = all_arrows(backend, y, x, 1 << 20)?;
    let mut t = Tally::new("bbar-identity");
    for z in [x, y] {
        let lifted = machine_lift_bar(shape, &KlArrow::identity(backend, z));
        t.case(lifted == KlArrow::identity(backend, &shape.apply(z)), || {
            format!("B-bar(id) = {lifted}")
        });
    }
    report.push(t.finish());
    let (plan, sampled) = pair_plan(kf.len(), kg.len(), budget, seed ^ 1);
    let mut t = Tally::new("bbar-composition").sampled(sampled);
    for (i, j) in plan {
        let lhs = machine_lift_bar(shape, &kl_compose(&kg[j], &kf[i])?);
        let rhs = kl_compose(&machine_lift_bar(shape, &kg[j]), &machine_lift_bar(shape, &kf[i]))?;
        t.case(lhs == rhs, || format!("f = {}, g = {}", kf[i], kg[j]));
    }
    report.push(t.finish());
    let mut t = Tally::new("bbar-pure");
    for h in &maps {
        let lhs = machine_lift_bar(shape, &KlArrow::pure(backend, x, y, h)?);
        let rhs = KlArrow::pure(backend, &bx, &shape.apply(y), &shape.map(h, y.len()))?;
        t.case(lhs == rhs, || format!("h = {h:?}"));
    }
    report.push(t.finish());

    // Local monotonicity and join preservation of B^ and A~, then continuity on
    // chains bot <= f <= f v f', and the exchange of joins with copairing.
    let mut tj = Tally::new("bhat-atilde-preserve-joins").sampled(sampled2);
    let mut tc = Tally::new("bhat-continuous-on-chains").sampled(sampled2);
    let mut tx = Tally::new("join-copair-exchange").sampled(sampled2);
    let join = |a: &RelKlArrow, b: &RelKlArrow| -> RelKlArrow {
        RelKlArrow::wrap(
            &a.cond,
            &a.dom,
            &a.cod,
            kl_join(&[a.inner.clone(), b.inner.clone()]).expect("parallel"),
        )
    };
    for (i, j) in plan2 {
        let (f, f2) = (&fs[i], &fs[j]);
        let fj = join(f, f2);
        let bhat_fj = lift_b_hat(shape, &fj);
        let ok = bhat_fj == join(&bhat_f[&i], &bhat_f[&j])
            && lift_a_tilde(shape, &fj) == join(&at_f[&i], &at_f[&j])
            && kl_order(bhat_f[&i].as_kl(), bhat_fj.as_kl())?;
        tj.case(ok, || format!("f = {f}, f' = {f2}"));

        let bot = RelKlArrow::wrap(
            &f.cond,
            &f.dom,
            &f.cod,
            kl_bottom(backend, &f.inner.dom, &f.inner.cod),
        );
        let chain = [bot.clone(), f.clone(), fj.clone()];
        let lifted: Vec<RelKlArrow> = chain.iter().map(|c| lift_b_hat(shape, c)).collect();
        let sup = lifted[1..].iter().fold(lifted[0].clone(), |a, b| join(&a, b));
        tc.case(bhat_fj == sup, || format!("chain bot <= {f} <= {fj}"));

        // [v f_i, v g_i] = v [f_i, g_i] for the chains bot <= f <= f v f'
        // and bot <= f' <= f v f'
        let bot_k = kl_bottom(backend, &f.inner.dom, &f.inner.cod);
        let fk = [bot_k.clone(), f.inner.clone(), fj.inner.clone()];
        let gk = [bot_k, f2.inner.clone(), fj.inner.clone()];
        let left = kl_copair(&kl_join(&fk)?, &kl_join(&gk)?)?;
        let pieces: Vec<KlArrow> = fk
            .iter()
            .zip(&gk)
            .map(|(a, b)| kl_copair(a, b))
            .collect::<Result<_>>()?;
        let right = kl_join(&pieces)?;
        tx.case(left == right, || format!("chain bot <= {f} <= {fj}"));
    }
    report.push(tj.finish());
    report.push(tc.finish());
    report.push(tx.finish());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(names: &[&str]) -> FinPoset {
        FinPoset::discrete(&FinSet::new(names.iter().copied()).unwrap())
    }

    fn arrow(dom: &FinPoset, cod: &FinPoset, rows: &[&[&str]]) -> KlArrow {
        let table = rows
            .iter()
            .map(|r| BitSet::from_iter_len(cod.len(), r.iter().map(|s| cod.carrier().require(s).unwrap())))
            .collect();
        KlArrow::new(Backend::Set, dom, cod, table).unwrap()
    }

    // Oracle: composition of the relations {(x, y) | y in f(x)}.
    fn relational(g: &KlArrow, f: &KlArrow) -> Vec<Vec<usize>> {
        (0..f.dom().len())
            .map(|x| {
                let mut zs: Vec<usize> = (0..g.cod().len())
                    .filter(|&z| (0..f.cod().len()).any(|y| f.apply(x).contains(y) && g.apply(y).contains(z)))
                    .collect();
                zs.sort();
                zs
            })
            .collect()
    }

    #[test]
    fn composition_matches_relations() {
        let x = set(&["x"]);
        let y = set(&["y1", "y2"]);
        let z = set(&["z"]);
        let f = arrow(&x, &y, &[&["y1", "y2"]]);
        let g = arrow(&y, &z, &[&["z"], &[]]);
        let gf = kl_compose(&g, &f).unwrap();
        assert_eq!(gf.apply(0).iter().collect::<Vec<_>>(), vec![0]);
        let ys = set(&["a", "b", "c"]);
        for f in all_arrows(Backend::Set, &ys, &ys, 1000).unwrap().iter().step_by(37) {
            for g in all_arrows(Backend::Set, &ys, &ys, 1000).unwrap().iter().step_by(41) {
                let c = kl_compose(g, f).unwrap();
                let got: Vec<Vec<usize>> = c.table().iter().map(|v| v.iter().collect()).collect();
                assert_eq!(got, relational(g, f));
            }
        }
        assert_eq!(kl_compose(&KlArrow::identity(Backend::Set, &y), &f).unwrap(), f);
    }

    #[test]
    fn pos_composition_stays_legal() {
        let c = FinPoset::chain(&["0", "1"]);
        let arrows = all_arrows(Backend::Pos, &c, &c, 1000).unwrap();
        for f in &arrows {
            for g in &arrows {
                kl_compose(g, f).unwrap().validate().unwrap();
            }
        }
    }

    #[test]
    fn bottom_and_joins() {
        let x = set(&["a", "b"]);
        let bot = kl_bottom(Backend::Set, &x, &x);
        for f in all_arrows(Backend::Set, &x, &x, 100).unwrap() {
            assert!(kl_order(&bot, &f).unwrap());
            assert_eq!(kl_join(&[f.clone(), f.clone(), f.clone()]).unwrap(), f);
            assert_eq!(kl_compose(&bot, &f).unwrap(), bot);
        }
    }

    #[test]
    fn relative_identity_is_principal_downset() {
        let k = FinPoset::chain(&["k2", "k1"]);
        let x = set(&["x"]);
        let id = relkl_id(Backend::Pos, &k, &x);
        assert_eq!(id.cell_pairs(1, 0), vec![(0, 0), (1, 0)]);
        let ids: Vec<usize> = vec![0];
        assert_eq!(embed_pure(Backend::Pos, &k, &x, &x, &ids).unwrap(), id);
    }

    #[test]
    fn embed_pure_is_functorial() {
        let k = FinPoset::chain(&["k2", "k1"]);
        let x = set(&["a", "b"]);
        for f in all_maps(&x, &x, false) {
            for g in all_maps(&x, &x, false) {
                let gf: Vec<usize> = f.iter().map(|&i| g[i]).collect();
                let lhs = embed_pure(Backend::Pos, &k, &x, &x, &gf).unwrap();
                let rhs = relkl_compose(
                    &embed_pure(Backend::Pos, &k, &x, &x, &g).unwrap(),
                    &embed_pure(Backend::Pos, &k, &x, &x, &f).unwrap(),
                )
                .unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn bar_lifting_worked_example() {
        let shape = MachineShape::new(FinSet::new(["a"]).unwrap(), set(&["o"]));
        let x = set(&["x"]);
        let y = set(&["y", "z"]);
        let f = arrow(&x, &y, &[&["y", "z"]]);
        let bf = machine_lift_bar(&shape, &f);
        let cod = bf.cod().clone();
        let labels = |s: &BitSet| s.iter().map(|i| cod.label(i).to_string()).collect::<Vec<_>>();
        assert_eq!(labels(bf.apply(0)), vec!["inl((a,y))", "inl((a,z))"]);
        assert_eq!(labels(bf.apply(1)), vec!["inr(o)"]);
    }

    #[test]
    fn atilde_singleton_transport() {
        let k = FinPoset::chain(&["k2", "k1"]);
        let x = set(&["x"]);
        let y = set(&["y"]);
        let f = RelKlArrow::from_fn(Backend::Set, &k, &x, &y, |k, _| vec![(k, 0)]).unwrap();
        let shape = MachineShape::new(FinSet::new(["a", "b"]).unwrap(), set(&["o"]));
        let af = lift_a_tilde(&shape, &f);
        // (k1, (b, x)) |-> {(k1, (b, y))}
        assert_eq!(af.cell_pairs(1, 1), vec![(1, 1)]);
    }

    #[test]
    fn bhat_observation_cells() {
        let k = FinPoset::chain(&["k2", "k1"]);
        let x = set(&["x"]);
        let shape = MachineShape::new(FinSet::new(["a"]).unwrap(), set(&["o"]));
        let o = shape.inr(0, 1);
        for (backend, expect) in [(Backend::Set, vec![(1, o)]), (Backend::Pos, vec![(0, o), (1, o)])] {
            let f = kl_bottom(backend, &g_carrier(backend, &k, &x), &g_carrier(backend, &k, &x));
            let f = RelKlArrow::wrap(&k, &x, &x, f);
            let bf = lift_b_hat(&shape, &f);
            assert_eq!(bf.cell_pairs(1, o), expect);
        }
    }

    #[test]
    fn small_universe_laws() {
        let two = set(&["0", "1"]);
        let r = check_kleisli_laws(Backend::Set, &two, &two, EXHAUSTIVE_BUDGET, 7).unwrap();
        assert!(r.all_pass(), "{r}");
        let k = FinPoset::chain(&["k2", "k1"]);
        let one = set(&["0"]);
        let r = check_relkleisli_laws(Backend::Pos, &k, &one, &two, EXHAUSTIVE_BUDGET, 7).unwrap();
        assert!(r.all_pass(), "{r}");
        let shape = MachineShape::new(FinSet::new(["a"]).unwrap(), set(&["o"]));
        let r = check_lifting_theorems(Backend::Pos, &shape, &k, &one, &two, 20_000, 7).unwrap();
        assert!(r.all_pass(), "{r}");
    }
}
