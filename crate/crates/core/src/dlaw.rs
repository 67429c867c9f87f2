//! Distributive laws `F T => T F` built from predicate liftings.
//!
//! Predicates over a carrier are subsets (up-closed subsets for posets). A relation
//! on `X x IY` is up-closed in `X` and down-closed in `Y`; relations correspond to
//! Kleisli arrows `X -> T Y` via `theta`. A predicate lifting `sigma` extends to
//! relations as `exists_lambda . sigma`, and the law is
//! `vartheta_X = theta^-1(sigma~(membership_X))`.

use std::fmt;

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::kleisli::{all_arrows, all_maps, BElem, KlArrow, MachineShape};
use crate::monad::{labels_of, Backend, TCarrier, ENUM_BOUND};
use crate::order::{FinPoset, FinSet};
use crate::report::{LawReport, Tally};

/// An element of the fibre over a carrier.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Predicate {
    backend: Backend,
    carrier: FinPoset,
    members: BitSet,
}

impl Predicate {
    pub fn new(backend: Backend, carrier: &FinPoset, members: BitSet) -> Result<Self> {
        let carrier = backend.view(carrier);
        if members.len() != carrier.len() {
            return Err(Error::CarrierMismatch("predicate over a different carrier".into()));
        }
        if backend == Backend::Pos && !carrier.is_up_closed(&members) {
            return Err(Error::ClosureViolation(format!(
                "predicate {} is not up-closed",
                labels_of(carrier.carrier(), &members)
            )));
        }
        Ok(Predicate {
            backend,
            carrier,
            members,
        })
    }

    pub fn members(&self) -> &BitSet {
        &self.members
    }

    pub fn carrier(&self) -> &FinPoset {
        &self.carrier
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&labels_of(self.carrier.carrier(), &self.members))
    }
}

fn check_map(backend: Backend, f: &[usize], src: &FinPoset, tgt: &FinPoset) -> Result<()> {
    if f.len() != src.len() || f.iter().any(|&y| y >= tgt.len()) {
        return Err(Error::CarrierMismatch("mapping does not fit its carriers".into()));
    }
    if backend == Backend::Pos {
        if let Some((x, y)) = src.first_monotonicity_violation(f, tgt) {
            return Err(Error::NotMonotone(format!(
                "{} <= {} but {} is not below {}",
                src.label(x),
                src.label(y),
                tgt.label(f[x]),
                tgt.label(f[y])
            )));
        }
    }
    Ok(())
}

/// `f* P = { x | f(x) in P }`.
pub fn reindex(f: &[usize], src: &FinPoset, p: &Predicate) -> Result<Predicate> {
    let src = p.backend.view(src);
    check_map(p.backend, f, &src, &p.carrier)?;
    let members = BitSet::from_iter_len(src.len(), (0..src.len()).filter(|&x| p.members.contains(f[x])));
    Predicate::new(p.backend, &src, members)
}

/// `exists_f P`: the image, up-closed under `Pos`.
pub fn direct_image(f: &[usize], tgt: &FinPoset, p: &Predicate) -> Result<Predicate> {
    let tgt = p.backend.view(tgt);
    check_map(p.backend, f, &p.carrier, &tgt)?;
    let image = BitSet::from_iter_len(tgt.len(), p.members.iter().map(|x| f[x]));
    let members = match p.backend {
        Backend::Set => image,
        Backend::Pos => tgt.up_close(&image),
    };
    Predicate::new(p.backend, &tgt, members)
}

/// A relation on `left x I right`; the pair `(x, y)` has index `x * |right| + y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    backend: Backend,
    left: FinPoset,
    right: FinPoset,
    members: BitSet,
}

impl Relation {
    pub fn new(backend: Backend, left: &FinPoset, right: &FinPoset, members: BitSet) -> Result<Self> {
        let r = Relation {
            backend,
            left: backend.view(left),
            right: backend.view(right),
            members,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn from_pairs(
        backend: Backend,
        left: &FinPoset,
        right: &FinPoset,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let m = right.len();
        let members = BitSet::from_iter_len(left.len() * m, pairs.into_iter().map(|(x, y)| x * m + y));
        Self::new(backend, left, right, members)
    }

    fn derived(backend: Backend, left: FinPoset, right: FinPoset, members: BitSet) -> Self {
        let r = Relation {
            backend,
            left,
            right,
            members,
        };
        if let Err(e) = r.validate() {
            panic!("derived relation violates its invariants: {e}");
        }
        r
    }

    pub fn validate(&self) -> Result<()> {
        if self.members.len() != self.left.len() * self.right.len() {
            return Err(Error::CarrierMismatch("relation over different carriers".into()));
        }
        if self.backend == Backend::Pos {
            let closed = close_relation(&self.left, &self.right, &self.members);
            if closed != self.members {
                let extra = closed.iter().find(|&i| !self.members.contains(i)).unwrap();
                let m = self.right.len();
                return Err(Error::ClosureViolation(format!(
                    "({},{}) is forced by up-closure in {} / down-closure in {} but missing",
                    self.left.label(extra / m),
                    self.right.label(extra % m),
                    "the left carrier",
                    "the right carrier"
                )));
            }
        }
        Ok(())
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn left(&self) -> &FinPoset {
        &self.left
    }

    pub fn right(&self) -> &FinPoset {
        &self.right
    }

    pub fn members(&self) -> &BitSet {
        &self.members
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.members.contains(x * self.right.len() + y)
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let m = self.right.len();
        self.members.iter().map(|i| (i / m, i % m)).collect()
    }

    pub fn len(&self) -> usize {
        self.members.count()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// The row `{ y | (x, y) in R }`.
    pub fn row(&self, x: usize) -> BitSet {
        let m = self.right.len();
        BitSet::from_iter_len(m, (0..m).filter(|&y| self.members.contains(x * m + y)))
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .pairs()
            .into_iter()
            .map(|(x, y)| format!("({},{})", self.left.label(x), self.right.label(y)))
            .collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Least superset that is up-closed in `left` and down-closed in `right`.
fn close_relation(left: &FinPoset, right: &FinPoset, members: &BitSet) -> BitSet {
    let (n, m) = (left.len(), right.len());
    if left.is_discrete() && right.is_discrete() {
        return members.clone();
    }
    let rows: Vec<BitSet> = (0..n)
        .map(|x| {
            let row = BitSet::from_iter_len(m, (0..m).filter(|&y| members.contains(x * m + y)));
            right.down_close(&row)
        })
        .collect();
    let mut out = BitSet::new(n * m);
    for x in 0..n {
        for x2 in left.up_of(x).iter() {
            for y in rows[x].iter() {
                out.insert(x2 * m + y);
            }
        }
    }
    out
}

/// Largest subset that is up-closed in `left` and down-closed in `right`.
fn interior_relation(left: &FinPoset, right: &FinPoset, members: &BitSet) -> BitSet {
    let m = right.len();
    BitSet::from_iter_len(
        members.len(),
        members.iter().filter(|&i| {
            let (x, y) = (i / m, i % m);
            left.up_of(x)
                .iter()
                .all(|x2| right.down_of(y).iter().all(|y2| members.contains(x2 * m + y2)))
        }),
    )
}

/// `theta(f) = {(x, y) | y in f(x)}`.
pub fn theta(f: &KlArrow) -> Relation {
    let m = f.cod().len();
    let mut members = BitSet::new(f.dom().len() * m);
    for x in 0..f.dom().len() {
        for y in f.apply(x).iter() {
            members.insert(x * m + y);
        }
    }
    Relation::derived(f.backend(), f.dom().clone(), f.cod().clone(), members)
}

/// `theta^-1(R) = x |-> { y | (x, y) in R }`.
pub fn theta_inv(r: &Relation) -> Result<KlArrow> {
    r.validate()?;
    let table = (0..r.left.len()).map(|x| r.row(x)).collect();
    KlArrow::new(r.backend, &r.left, &r.right, table)
}

/// `membership_X = theta(id_{TX})` on `T X x X`, together with the enumerated `T X`.
pub fn membership(backend: Backend, x: &FinPoset) -> Result<(TCarrier, Relation)> {
    let tx = TCarrier::enumerate(backend, x, ENUM_BOUND)?;
    let txp = tx.as_poset()?;
    let x = backend.view(x);
    let n = x.len();
    let mut members = BitSet::new(tx.len() * n);
    for (s, v) in tx.values().iter().enumerate() {
        for xi in v.iter() {
            members.insert(s * n + xi);
        }
    }
    let rel = Relation::derived(backend, txp, x, members);
    Ok((tx, rel))
}

/// `Delta_X = theta(eta_X)`: the diagonal, or `{(x, x') | x' <= x}` for posets.
pub fn delta(backend: Backend, x: &FinPoset) -> Relation {
    theta(&KlArrow::identity(backend, x))
}

/// `S . R = theta(theta^-1 S . theta^-1 R)`, asserted equal to relational composition.
pub fn rel_compose(s: &Relation, r: &Relation) -> Result<Relation> {
    if !r.right.same_as(&s.left) {
        return Err(Error::CarrierMismatch("middle carriers of a composite differ".into()));
    }
    let via_kleisli = theta(&crate::kleisli::kl_compose(&theta_inv(s)?, &theta_inv(r)?)?);
    let plain = relational_compose(s, r);
    assert_eq!(
        via_kleisli.members, plain,
        "Kleisli composite disagrees with relational composition"
    );
    Ok(via_kleisli)
}

fn relational_compose(s: &Relation, r: &Relation) -> BitSet {
    let (n, m) = (r.left.len(), s.right.len());
    let mut out = BitSet::new(n * m);
    for x in 0..n {
        for y in r.row(x).iter() {
            for z in s.row(y).iter() {
                out.insert(x * m + z);
            }
        }
    }
    out
}

/// The finite functors a lifting can be registered for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FiniteFunctor {
    Identity,
    /// `A x _`
    A(MachineShape),
    /// `A x _ + O`
    B(MachineShape),
}

impl FiniteFunctor {
    pub fn a(alphabet: &FinSet) -> Self {
        FiniteFunctor::A(MachineShape::new(
            alphabet.clone(),
            FinPoset::discrete(&FinSet::range(0)),
        ))
    }

    /// `O` is discretely ordered, so the functor commutes with taking duals.
    pub fn b(alphabet: &FinSet, obs: &FinSet) -> Self {
        FiniteFunctor::B(MachineShape::new(alphabet.clone(), FinPoset::discrete(obs)))
    }

    pub fn name(&self) -> String {
        match self {
            FiniteFunctor::Identity => "Id".into(),
            FiniteFunctor::A(s) => format!("A[{}]", s.letters()),
            FiniteFunctor::B(s) => format!("B[{},{}]", s.letters(), s.obs().len()),
        }
    }

    pub fn size(&self, n: usize) -> usize {
        match self {
            FiniteFunctor::Identity => n,
            FiniteFunctor::A(s) => s.letters() * n,
            FiniteFunctor::B(s) => s.size(n),
        }
    }

    pub fn obj(&self, x: &FinPoset) -> FinPoset {
        match self {
            FiniteFunctor::Identity => x.clone(),
            FiniteFunctor::A(s) => s.a_apply(x),
            FiniteFunctor::B(s) => s.apply(x),
        }
    }

    pub fn arr(&self, f: &[usize], ny: usize) -> Vec<usize> {
        match self {
            FiniteFunctor::Identity => f.to_vec(),
            FiniteFunctor::A(s) => s.a_map(f, ny),
            FiniteFunctor::B(s) => s.map(f, ny),
        }
    }

    /// `lambda = <F pr_X, F pr_Y>` as a table `F(X x Y) -> FX x FY`, where
    /// `X x Y` is indexed `x * ny + y`.
    pub fn lambda(&self, nx: usize, ny: usize) -> Vec<(usize, usize)> {
        let pr_x: Vec<usize> = (0..nx * ny).map(|i| i / ny).collect();
        let pr_y: Vec<usize> = (0..nx * ny).map(|i| i % ny).collect();
        let fx = self.arr(&pr_x, nx);
        let fy = self.arr(&pr_y, ny);
        fx.into_iter().zip(fy).collect()
    }
}

/// `sigma_X: Phi X -> Phi(F X)`, given on the members of a predicate over a
/// carrier of size `n`.
pub trait PredicateLifting: Sync {
    fn name(&self) -> String;
    fn functor(&self) -> &FiniteFunctor;
    fn lift(&self, n: usize, u: &BitSet) -> BitSet;
}

/// The liftings used throughout: `sigma(U) = U`, `A x U`, or `O + A x U`.
#[derive(Clone, Debug)]
pub struct StandardLifting(pub FiniteFunctor);

impl PredicateLifting for StandardLifting {
    fn name(&self) -> String {
        format!("sigma_{}", self.0.name())
    }

    fn functor(&self) -> &FiniteFunctor {
        &self.0
    }

    fn lift(&self, n: usize, u: &BitSet) -> BitSet {
        let mut out = BitSet::new(self.0.size(n));
        match &self.0 {
            FiniteFunctor::Identity => return u.clone(),
            FiniteFunctor::A(s) | FiniteFunctor::B(s) => {
                for a in 0..s.letters() {
                    for x in u.iter() {
                        out.insert(s.inl(a, x, n));
                    }
                }
                if let FiniteFunctor::B(_) = &self.0 {
                    for o in 0..s.obs().len() {
                        out.insert(s.inr(o, n));
                    }
                }
            }
        }
        out
    }
}

/// `sigma~: Phi(X x IY) -> Phi(FX x IFY)`.
pub trait RelationLifting: Sync {
    fn name(&self) -> String;
    fn functor(&self) -> &FiniteFunctor;
    fn lift(&self, r: &Relation) -> Relation;
}

/// The relation lifting induced by a predicate lifting: `exists_lambda . sigma`.
pub struct Induced<L: PredicateLifting>(pub L);

impl<L: PredicateLifting> RelationLifting for Induced<L> {
    fn name(&self) -> String {
        format!("{}~", self.0.name())
    }

    fn functor(&self) -> &FiniteFunctor {
        self.0.functor()
    }

    fn lift(&self, r: &Relation) -> Relation {
        relation_lift(&self.0, r)
    }
}

/// `sigma~ R = exists_lambda(sigma_{X x IY}(R))`.
pub fn relation_lift(sigma: &dyn PredicateLifting, r: &Relation) -> Relation {
    let functor = sigma.functor();
    let (nx, ny) = (r.left.len(), r.right.len());
    let lifted = sigma.lift(nx * ny, &r.members);
    let fx = r.backend.view(&functor.obj(&r.left));
    let fy = r.backend.view(&functor.obj(&r.right));
    let lam = functor.lambda(nx, ny);
    let m = fy.len();
    let image = BitSet::from_iter_len(fx.len() * m, lifted.iter().map(|i| lam[i].0 * m + lam[i].1));
    let members = match r.backend {
        Backend::Set => image,
        Backend::Pos => close_relation(&fx, &fy, &image),
    };
    Relation::derived(r.backend, fx, fy, members)
}

/// Corruptions of a relation lifting used to show that the law checks have teeth.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    /// Forget the `O` summand of the lifted predicate.
    DropObservations,
    /// Every lifted relation becomes the full relation.
    Saturate,
    /// Lift `R . R^op . R` instead of `R`.
    Difunctional,
    /// Remove the first pair of the lifted relation (and whatever forces it).
    DropFirstPair,
}

impl Mutation {
    pub const ALL: [Mutation; 4] = [
        Mutation::DropObservations,
        Mutation::Saturate,
        Mutation::Difunctional,
        Mutation::DropFirstPair,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mutation::DropObservations => "drop-observations",
            Mutation::Saturate => "saturate",
            Mutation::Difunctional => "difunctional",
            Mutation::DropFirstPair => "drop-first-pair",
        }
    }
}

pub struct Mutant {
    pub base: StandardLifting,
    pub mutation: Mutation,
}

impl RelationLifting for Mutant {
    fn name(&self) -> String {
        format!("{}~/{}", self.base.name(), self.mutation.name())
    }

    fn functor(&self) -> &FiniteFunctor {
        self.base.functor()
    }

    fn lift(&self, r: &Relation) -> Relation {
        let good = relation_lift(&self.base, r);
        let (fx, fy) = (good.left.clone(), good.right.clone());
        let members = match self.mutation {
            Mutation::DropObservations => {
                let without = match &self.base.0 {
                    FiniteFunctor::B(s) => StandardLifting(FiniteFunctor::A(s.clone())),
                    other => StandardLifting(other.clone()),
                };
                let (nx, ny) = (r.left.len(), r.right.len());
                let lifted = without.lift(nx * ny, &r.members);
                let lam = self.base.0.lambda(nx, ny);
                let m = fy.len();
                let image =
                    BitSet::from_iter_len(fx.len() * m, lifted.iter().map(|i| lam[i].0 * m + lam[i].1));
                close_relation(&fx, &fy, &image)
            }
            Mutation::Saturate => BitSet::full(fx.len() * fy.len()),
            Mutation::Difunctional => {
                // R . R^op . R, then lifted
                let (n, m) = (r.left.len(), r.right.len());
                let mut d = BitSet::new(n * m);
                for (x, y) in r.pairs() {
                    for x2 in 0..n {
                        if r.contains(x2, y) {
                            for y2 in r.row(x2).iter() {
                                let _ = x;
                                d.insert(x * m + y2);
                            }
                        }
                    }
                }
                let d = close_relation(&r.left, &r.right, &d);
                let dr = Relation::derived(r.backend, r.left.clone(), r.right.clone(), d);
                relation_lift(&self.base, &dr).members
            }
            Mutation::DropFirstPair => {
                let mut m = good.members.clone();
                if let Some(first) = m.first() {
                    m.remove(first);
                }
                interior_relation(&fx, &fy, &m)
            }
        };
        Relation::derived(r.backend, fx, fy, members)
    }
}

/// `vartheta_X = theta^-1(sigma~(membership_X))` as a Kleisli arrow `F T X -> T F X`.
pub fn build_dlaw(lifting: &dyn RelationLifting, backend: Backend, x: &FinPoset) -> Result<Dlaw> {
    let (tx, mem) = membership(backend, x)?;
    let lifted = lifting.lift(&mem);
    let arrow = theta_inv(&lifted)?;
    Ok(Dlaw { tx, arrow })
}

/// One component of a distributive law, with the enumerated `T X` it ranges over.
#[derive(Clone, Debug)]
pub struct Dlaw {
    pub tx: TCarrier,
    pub arrow: KlArrow,
}

impl Dlaw {
    pub fn apply(&self, e: usize) -> &BitSet {
        self.arrow.apply(e)
    }
}

/// `vartheta(a, U) = {(a, x) | x in U}` and `vartheta(o) = {o}` for the standard
/// lifting of `A` or `B`, on every carrier of the universe.
pub fn check_closed_form(functor: &FiniteFunctor, universe: &Universe) -> Result<LawReport> {
    let shape = match functor {
        FiniteFunctor::A(s) | FiniteFunctor::B(s) => s,
        FiniteFunctor::Identity => return Err(Error::CarrierMismatch("no closed form for Id".into())),
    };
    let lifting = Induced(StandardLifting(functor.clone()));
    let mut t = Tally::new("closed-form");
    for x in &universe.carriers {
        let law = build_dlaw(&lifting, universe.backend, x)?;
        let (n, ntx) = (x.len(), law.tx.len());
        for e in 0..functor.size(ntx) {
            let expect = match shape.decode(e, ntx) {
                BElem::Step(a, u) => BitSet::from_iter_len(
                    functor.size(n),
                    law.tx.value(u).iter().map(|y| shape.inl(a, y, n)),
                ),
                BElem::Obs(o) => BitSet::singleton(functor.size(n), shape.inr(o, n)),
            };
            t.case(*law.apply(e) == expect, || {
                format!("X = {x}, at {}: {:?}", law.arrow.dom().label(e), law.apply(e))
            });
        }
    }
    let mut report = LawReport::new();
    report.push(t.finish());
    Ok(report)
}

/// The registered universe for law checks: carriers and all (monotone) maps among them.
pub struct Universe {
    pub backend: Backend,
    pub carriers: Vec<FinPoset>,
}

impl Universe {
    /// Sets of size `0..=n`, or all posets of size `0..=n` up to isomorphism.
    pub fn up_to(backend: Backend, n: usize) -> Self {
        let carriers = match backend {
            Backend::Set => (0..=n).map(|i| FinPoset::discrete(&FinSet::range(i))).collect(),
            Backend::Pos => (0..=n).flat_map(crate::order::posets_up_to_iso).collect(),
        };
        Universe { backend, carriers }
    }

    fn maps(&self, x: &FinPoset, y: &FinPoset) -> Vec<Vec<usize>> {
        all_maps(x, y, self.backend == Backend::Pos)
    }
}

/// Naturality, unit triangle and multiplication pentagon of the law built from
/// `lifting`, on every carrier and every map of the universe.
///
/// The pentagon is checked in Kleisli form:
/// `vartheta_X . F mu_X = vartheta_X . vartheta_{TX}` (Kleisli composite), which
/// unfolds to `mu_{FX} . T vartheta_X . vartheta_{TX}`.
pub fn check_kl_law(lifting: &dyn RelationLifting, universe: &Universe) -> Result<LawReport> {
    let backend = universe.backend;
    let functor = lifting.functor();
    let mut laws: Vec<(usize, Dlaw)> = Vec::new();
    for (i, x) in universe.carriers.iter().enumerate() {
        laws.push((i, build_dlaw(lifting, backend, x)?));
    }
    let mut report = LawReport::new();

    let mut nat = Tally::new("naturality");
    for (i, x) in universe.carriers.iter().enumerate() {
        for (j, y) in universe.carriers.iter().enumerate() {
            let (lx, ly) = (&laws[i].1, &laws[j].1);
            for h in universe.maps(x, y) {
                // T h on T X, as a map of indices into T Y
                let th: Vec<usize> = lx
                    .tx
                    .values()
                    .iter()
                    .map(|s| {
                        let img = BitSet::from_iter_len(y.len(), s.iter().map(|a| h[a]));
                        ly.tx
                            .index_of(&backend.close(&backend.view(y), &img))
                            .expect("image of a T-value is a T-value")
                    })
                    .collect();
                let fth = functor.arr(&th, ly.tx.len());
                let fh = functor.arr(&h, y.len());
                let fy = backend.view(&functor.obj(y));
                for e in 0..functor.size(lx.tx.len()) {
                    let lhs = ly.apply(fth[e]);
                    let img = BitSet::from_iter_len(fy.len(), lx.apply(e).iter().map(|u| fh[u]));
                    let rhs = backend.close(&fy, &img);
                    nat.case(*lhs == rhs, || {
                        format!(
                            "X = {}, Y = {}, h = {h:?}, at {}: {} vs {}",
                            x,
                            y,
                            lx.arrow.dom().label(e),
                            labels_of(fy.carrier(), lhs),
                            labels_of(fy.carrier(), &rhs)
                        )
                    });
                }
            }
        }
    }
    report.push(nat.finish());

    let mut unit = Tally::new("unit");
    for (i, x) in universe.carriers.iter().enumerate() {
        let lx = &laws[i].1;
        let xv = backend.view(x);
        let eta: Vec<usize> = (0..x.len())
            .map(|a| lx.tx.index_of(&backend.unit(&xv, a)).expect("unit is a T-value"))
            .collect();
        let feta = functor.arr(&eta, lx.tx.len());
        let fx = backend.view(&functor.obj(x));
        for e in 0..fx.len() {
            let lhs = lx.apply(feta[e]);
            let rhs = backend.unit(&fx, e);
            unit.case(*lhs == rhs, || {
                format!(
                    "X = {}, at {}: {} vs {}",
                    x,
                    fx.label(e),
                    labels_of(fx.carrier(), lhs),
                    labels_of(fx.carrier(), &rhs)
                )
            });
        }
    }
    report.push(unit.finish());

    let mut mult = Tally::new("multiplication");
    for (i, x) in universe.carriers.iter().enumerate() {
        let lx = &laws[i].1;
        let txp = lx.tx.as_poset()?;
        let ltx = build_dlaw(lifting, backend, &txp)?;
        // mu_X as a map T T X -> T X
        let mu: Vec<usize> = ltx
            .tx
            .values()
            .iter()
            .map(|fam| {
                let mut u = BitSet::new(x.len());
                for s in fam.iter() {
                    u.union_with(lx.tx.value(s));
                }
                lx.tx.index_of(&u).expect("union of T-values is a T-value")
            })
            .collect();
        let fmu = functor.arr(&mu, lx.tx.len());
        let fx = backend.view(&functor.obj(x));
        for e in 0..functor.size(ltx.tx.len()) {
            let lhs = lx.apply(fmu[e]);
            let rhs = lx.arrow.extend(ltx.apply(e));
            mult.case(*lhs == rhs, || {
                format!(
                    "X = {}, at {}: {} vs {}",
                    x,
                    ltx.arrow.dom().label(e),
                    labels_of(fx.carrier(), lhs),
                    labels_of(fx.carrier(), &rhs)
                )
            });
        }
    }
    report.push(mult.finish());
    Ok(report)
}

/// Every relation on `x x I y` for the backend, via `theta` of every arrow.
pub fn all_relations(backend: Backend, x: &FinPoset, y: &FinPoset) -> Result<Vec<Relation>> {
    Ok(all_arrows(backend, x, y, 1 << 20)?.iter().map(theta).collect())
}

/// `sigma~ Delta_X = Delta_FX` and `sigma~(S . R) = sigma~ S . sigma~ R` for every
/// relation over the carriers of the universe with at most `rel_bound` elements.
pub fn check_lifting_preserves(
    lifting: &dyn RelationLifting,
    universe: &Universe,
    rel_bound: usize,
) -> Result<LawReport> {
    let backend = universe.backend;
    let functor = lifting.functor();
    let mut report = LawReport::new();

    let mut d = Tally::new("preserves-identity");
    for x in &universe.carriers {
        let lifted = lifting.lift(&delta(backend, x));
        let expect = delta(backend, &functor.obj(x));
        d.case(lifted == expect, || {
            format!("X = {}: lifted Delta = {lifted}", x)
        });
    }
    report.push(d.finish());

    let small: Vec<&FinPoset> = universe.carriers.iter().filter(|c| c.len() <= rel_bound).collect();
    let mut c = Tally::new("preserves-composition");
    for x in &small {
        for y in &small {
            let rs = all_relations(backend, x, y)?;
            let lifted_r: Vec<Relation> = rs.iter().map(|r| lifting.lift(r)).collect();
            for z in &small {
                let ss = all_relations(backend, y, z)?;
                let lifted_s: Vec<Relation> = ss.iter().map(|s| lifting.lift(s)).collect();
                for (r, lr) in rs.iter().zip(&lifted_r) {
                    for (s, ls) in ss.iter().zip(&lifted_s) {
                        let lhs = lifting.lift(&rel_compose(s, r)?);
                        let rhs = rel_compose(ls, lr)?;
                        c.case(lhs == rhs, || format!("R = {r}, S = {s}"));
                    }
                }
            }
        }
    }
    report.push(c.finish());
    Ok(report)
}

/// Naturality of a predicate lifting, `f* . sigma_Y = sigma_X . f*`, over the universe.
pub fn check_predicate_lifting(sigma: &dyn PredicateLifting, universe: &Universe) -> Result<LawReport> {
    let backend = universe.backend;
    let functor = sigma.functor();
    let mut t = Tally::new("predicate-lifting-natural");
    for x in &universe.carriers {
        for y in &universe.carriers {
            if y.len() > 12 {
                continue;
            }
            let ffs = universe.maps(x, y);
            for f in &ffs {
                let ff = functor.arr(f, y.len());
                for mask in 0..1u64 << y.len() {
                    let u = BitSet::from_mask(y.len(), mask);
                    if backend == Backend::Pos && !backend.view(y).is_up_closed(&u) {
                        continue;
                    }
                    let lhs = {
                        let s = sigma.lift(y.len(), &u);
                        BitSet::from_iter_len(ff.len(), (0..ff.len()).filter(|&e| s.contains(ff[e])))
                    };
                    let pre = BitSet::from_iter_len(x.len(), (0..x.len()).filter(|&a| u.contains(f[a])));
                    let rhs = sigma.lift(x.len(), &pre);
                    t.case(lhs == rhs, || format!("f = {f:?}, U = {u:?}"));
                }
            }
        }
    }
    let mut report = LawReport::new();
    report.push(t.finish());
    Ok(report)
}

/// Rejects a user-supplied predicate lifting unless it is natural on the universe.
pub fn validate_lifting(sigma: &dyn PredicateLifting, universe: &Universe) -> Result<()> {
    let r = check_predicate_lifting(sigma, universe)?;
    let first = r.failures().next().cloned();
    match first {
        None => Ok(()),
        Some(e) => Err(Error::NotCommuting(format!(
            "{}: {}",
            sigma.name(),
            e.counterexample.unwrap_or_default()
        ))),
    }
}

/// A commuting square `h . g = k . f`:
///
/// ```text
///   W --g--> Z
///   |f       |h
///   v        v
///   Y --k--> V
/// ```
#[derive(Clone, Debug)]
pub struct Square {
    pub backend: Backend,
    pub w: FinPoset,
    pub y: FinPoset,
    pub z: FinPoset,
    pub v: FinPoset,
    pub f: Vec<usize>,
    pub g: Vec<usize>,
    pub h: Vec<usize>,
    pub k: Vec<usize>,
}

impl Square {
    pub fn new(
        backend: Backend,
        (w, y, z, v): (&FinPoset, &FinPoset, &FinPoset, &FinPoset),
        f: Vec<usize>,
        g: Vec<usize>,
        h: Vec<usize>,
        k: Vec<usize>,
    ) -> Result<Self> {
        let sq = Square {
            backend,
            w: backend.view(w),
            y: backend.view(y),
            z: backend.view(z),
            v: backend.view(v),
            f,
            g,
            h,
            k,
        };
        check_map(backend, &sq.f, &sq.w, &sq.y)?;
        check_map(backend, &sq.g, &sq.w, &sq.z)?;
        check_map(backend, &sq.h, &sq.z, &sq.v)?;
        check_map(backend, &sq.k, &sq.y, &sq.v)?;
        for a in 0..sq.w.len() {
            if sq.h[sq.g[a]] != sq.k[sq.f[a]] {
                return Err(Error::NotCommuting(sq.w.label(a).to_string()));
            }
        }
        Ok(sq)
    }
}

/// Every pair `(y, z)` over a common point of `V` comes from some `w`.
pub fn is_weak_pullback(sq: &Square) -> bool {
    weak_pullback_witness(sq).is_none()
}

/// A pair `(y, z)` with `k(y) = h(z)` that no element of `W` covers.
pub fn weak_pullback_witness(sq: &Square) -> Option<(usize, usize)> {
    (0..sq.y.len())
        .flat_map(|y| (0..sq.z.len()).map(move |z| (y, z)))
        .find(|&(y, z)| {
            sq.k[y] == sq.h[z] && !(0..sq.w.len()).any(|a| sq.f[a] == y && sq.g[a] == z)
        })
}

/// `k* . exists_h = exists_f . g*` on every predicate over `Z` when there are at
/// most `2^exhaustive_bits` of them; otherwise on the empty predicate and every
/// principal one. Both sides preserve unions and those predicates generate the
/// fibre under unions, so either way the verdict covers the whole fibre.
pub fn check_beck_chevalley(sq: &Square, exhaustive_bits: usize) -> Result<LawReport> {
    let z = &sq.z;
    let n = z.len();
    let mut preds: Vec<BitSet> = Vec::new();
    let exhaustive = n <= exhaustive_bits;
    if exhaustive {
        for mask in 0..1u64 << n {
            let u = BitSet::from_mask(n, mask);
            if sq.backend == Backend::Set || z.is_up_closed(&u) {
                preds.push(u);
            }
        }
    } else {
        preds.push(BitSet::new(n));
        for a in 0..n {
            preds.push(sq.backend.view(z).up_close(&BitSet::singleton(n, a)));
        }
    }
    let mut t = Tally::new("beck-chevalley");
    for u in preds {
        let p = Predicate::new(sq.backend, z, u)?;
        let lhs = reindex(&sq.k, &sq.y, &direct_image(&sq.h, &sq.v, &p)?)?;
        let rhs = direct_image(&sq.f, &sq.y, &reindex(&sq.g, &sq.w, &p)?)?;
        t.case(lhs == rhs, || {
            format!("U = {p}: k*(exists_h U) = {lhs}, exists_f(g* U) = {rhs}")
        });
    }
    let mut report = LawReport::new();
    report.push(t.finish());
    Ok(report)
}

/// The square formed by `lambda` along `f: X -> X'`:
/// `F(X x IY) -> FX x IFY` over `F(X' x IY) -> FX' x IFY`, verticals
/// `F(f x IY)` and `Ff x IFY`.
pub fn lambda_square(
    backend: Backend,
    functor: &FiniteFunctor,
    x: &FinPoset,
    x2: &FinPoset,
    y: &FinPoset,
    f: &[usize],
) -> Result<Square> {
    let (nx, nx2, ny) = (x.len(), x2.len(), y.len());
    let prod = |a: &FinPoset| backend.view(a).product_cached(&backend.view(y).dual());
    let w = backend.view(&functor.obj(&prod(x)));
    let yy = backend.view(&functor.obj(&prod(x2)));
    let fx = backend.view(&functor.obj(x));
    let fx2 = backend.view(&functor.obj(x2));
    let fy_dual = backend.view(&functor.obj(y)).dual();
    let z = fx.product_cached(&fy_dual);
    let v = fx2.product_cached(&fy_dual);
    let nfy = functor.size(ny);
    let lam = functor.lambda(nx, ny);
    let lam2 = functor.lambda(nx2, ny);
    let fxy: Vec<usize> = (0..nx * ny).map(|i| f[i / ny] * ny + i % ny).collect();
    let top: Vec<usize> = lam.iter().map(|&(a, b)| a * nfy + b).collect();
    let left = functor.arr(&fxy, nx2 * ny);
    let ff = functor.arr(f, nx2);
    let right: Vec<usize> = (0..z.len()).map(|i| ff[i / nfy] * nfy + i % nfy).collect();
    let bottom: Vec<usize> = lam2.iter().map(|&(a, b)| a * nfy + b).collect();
    Square::new(backend, (&w, &yy, &z, &v), left, top, right, bottom)
}

/// A commuting square that is not a weak pullback: `W = {x1, x2}` maps onto
/// `Y = {y1, y2}` and constantly to `z1` in `Z = {z1, z2}`, over a one-point `V`.
pub fn non_pullback_square() -> Square {
    let w = FinPoset::discrete(&FinSet::new(["x1", "x2"]).unwrap());
    let y = FinPoset::discrete(&FinSet::new(["y1", "y2"]).unwrap());
    let z = FinPoset::discrete(&FinSet::new(["z1", "z2"]).unwrap());
    let v = FinPoset::discrete(&FinSet::new(["pt"]).unwrap());
    Square::new(
        Backend::Set,
        (&w, &y, &z, &v),
        vec![0, 1],
        vec![0, 0],
        vec![0, 0],
        vec![0, 0],
    )
    .expect("the square commutes")
}
