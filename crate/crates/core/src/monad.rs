//! The finite powerset monad on sets and the downset monad on posets.
//!
//! T-values are bit-sets over the carrier. For the downset monad a value must be
//! down-closed and `T X` is ordered by inclusion.

use std::collections::HashMap;

use serde::Serialize;

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::order::{FinPoset, FinSet};
use crate::report::{LawReport, Tally};

/// Which monad backs a Kleisli category: powerset on sets or downset on posets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Set,
    Pos,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Set => "set",
            Backend::Pos => "pos",
        }
    }

    /// The carrier as this backend sees it: `Set` forgets the order.
    pub fn view(self, p: &FinPoset) -> FinPoset {
        match self {
            Backend::Set => p.discrete_cached(),
            Backend::Pos => p.clone(),
        }
    }

    /// Identity on subsets for `Set`, down-closure for `Pos`.
    pub fn close(self, p: &FinPoset, s: &BitSet) -> BitSet {
        match self {
            Backend::Set => s.clone(),
            Backend::Pos => p.down_close(s),
        }
    }

    pub fn is_value(self, p: &FinPoset, s: &BitSet) -> bool {
        match self {
            Backend::Set => true,
            Backend::Pos => p.is_down_closed(s),
        }
    }

    pub fn unit(self, p: &FinPoset, x: usize) -> BitSet {
        match self {
            Backend::Set => p_unit(p.len(), x),
            Backend::Pos => pd_unit(p, x),
        }
    }

    pub fn instance(self) -> &'static dyn MonadInstance {
        match self {
            Backend::Set => &Powerset,
            Backend::Pos => &Downset,
        }
    }
}

pub fn p_unit(n: usize, x: usize) -> BitSet {
    BitSet::singleton(n, x)
}

pub fn p_mult<'a>(n: usize, family: impl IntoIterator<Item = &'a BitSet>) -> BitSet {
    let mut out = BitSet::new(n);
    for s in family {
        out.union_with(s);
    }
    out
}

/// Direct image of `s` under `f`, valued in a carrier of size `m`.
pub fn p_map(f: &[usize], m: usize, s: &BitSet) -> BitSet {
    BitSet::from_iter_len(m, s.iter().map(|x| f[x]))
}

pub fn pd_unit(p: &FinPoset, x: usize) -> BitSet {
    p.down_of(x).clone()
}

pub fn pd_mult<'a>(p: &FinPoset, family: impl IntoIterator<Item = &'a BitSet>) -> Result<BitSet> {
    let mut out = BitSet::new(p.len());
    for s in family {
        if !p.is_down_closed(s) {
            return Err(Error::NotDownClosed(labels_of(p.carrier(), s)));
        }
        out.union_with(s);
    }
    Ok(out)
}

pub fn pd_map(f: &[usize], src: &FinPoset, tgt: &FinPoset, s: &BitSet) -> Result<BitSet> {
    if let Some((x, y)) = src.first_monotonicity_violation(f, tgt) {
        return Err(Error::NotMonotone(format!(
            "{} <= {} but {} is not below {}",
            src.label(x),
            src.label(y),
            tgt.label(f[x]),
            tgt.label(f[y])
        )));
    }
    if !src.is_down_closed(s) {
        return Err(Error::NotDownClosed(labels_of(src.carrier(), s)));
    }
    Ok(tgt.down_close(&p_map(f, tgt.len(), s)))
}

/// `{a,b}` rendering of a subset.
pub fn labels_of(set: &FinSet, s: &BitSet) -> String {
    let parts: Vec<&str> = s.iter().map(|i| set.label(i)).collect();
    format!("{{{}}}", parts.join(","))
}

/// unit / mult / map of a monad on finite carriers, as total operations.
/// Inputs are trusted; the checked `p_*` / `pd_*` functions validate.
pub trait MonadInstance: Sync {
    fn name(&self) -> String;
    fn backend(&self) -> Backend;
    fn unit(&self, x: &FinPoset, i: usize) -> BitSet;
    fn mult(&self, x: &FinPoset, family: &[&BitSet]) -> BitSet;
    fn map(&self, src: &FinPoset, tgt: &FinPoset, f: &[usize], s: &BitSet) -> BitSet;
}

pub struct Powerset;
pub struct Downset;

impl MonadInstance for Powerset {
    fn name(&self) -> String {
        "powerset".into()
    }
    fn backend(&self) -> Backend {
        Backend::Set
    }
    fn unit(&self, x: &FinPoset, i: usize) -> BitSet {
        p_unit(x.len(), i)
    }
    fn mult(&self, x: &FinPoset, family: &[&BitSet]) -> BitSet {
        p_mult(x.len(), family.iter().copied())
    }
    fn map(&self, _src: &FinPoset, tgt: &FinPoset, f: &[usize], s: &BitSet) -> BitSet {
        p_map(f, tgt.len(), s)
    }
}

impl MonadInstance for Downset {
    fn name(&self) -> String {
        "downset".into()
    }
    fn backend(&self) -> Backend {
        Backend::Pos
    }
    fn unit(&self, x: &FinPoset, i: usize) -> BitSet {
        pd_unit(x, i)
    }
    fn mult(&self, x: &FinPoset, family: &[&BitSet]) -> BitSet {
        p_mult(x.len(), family.iter().copied())
    }
    fn map(&self, _src: &FinPoset, tgt: &FinPoset, f: &[usize], s: &BitSet) -> BitSet {
        tgt.down_close(&p_map(f, tgt.len(), s))
    }
}

/// Default ceiling on enumerated T-carriers.
pub const ENUM_BOUND: usize = 1 << 16;

/// `T X` materialized: every legal T-value over a base carrier, in canonical order.
#[derive(Clone, Debug)]
pub struct TCarrier {
    base: FinPoset,
    backend: Backend,
    values: Vec<BitSet>,
    index: HashMap<BitSet, usize>,
}

impl TCarrier {
    pub fn enumerate(backend: Backend, base: &FinPoset, bound: usize) -> Result<Self> {
        let base = backend.view(base);
        let values = enumerate_values(&base, bound)?;
        let index = values.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        Ok(TCarrier {
            base,
            backend,
            values,
            index,
        })
    }

    pub fn base(&self) -> &FinPoset {
        &self.base
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, i: usize) -> &BitSet {
        &self.values[i]
    }

    pub fn values(&self) -> &[BitSet] {
        &self.values
    }

    pub fn index_of(&self, v: &BitSet) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn label(&self, i: usize) -> String {
        labels_of(self.base.carrier(), &self.values[i])
    }

    /// `T X` as a poset under inclusion (discrete for the powerset backend).
    pub fn as_poset(&self) -> Result<FinPoset> {
        const MATRIX_BOUND: usize = 1 << 13;
        if self.len() > MATRIX_BOUND {
            return Err(Error::CarrierTooLarge {
                what: "order matrix of T X".into(),
                size: self.len() as u128,
                bound: MATRIX_BOUND as u128,
            });
        }
        let labels = (0..self.len()).map(|i| self.label(i)).collect();
        let set = FinSet::from_ordered(labels)?;
        Ok(match self.backend {
            Backend::Set => FinPoset::discrete(&set),
            Backend::Pos => {
                FinPoset::from_leq_fn(set, |i, j| self.values[i].is_subset(&self.values[j]))
            }
        })
    }
}

/// All T-values over `base` (all subsets if discrete, else all downsets),
/// sorted by the bit-set order.
fn enumerate_values(base: &FinPoset, bound: usize) -> Result<Vec<BitSet>> {
    let n = base.len();
    let too_large = |size: u128| Error::CarrierTooLarge {
        what: "T X".into(),
        size,
        bound: bound as u128,
    };
    if base.is_discrete() {
        if n >= 64 || (1u128 << n) > bound as u128 {
            return Err(too_large(1u128 << n.min(127)));
        }
        return Ok((0..1u64 << n).map(|m| BitSet::from_mask(n, m)).collect());
    }
    // Decide elements in index order; including x forces everything below it,
    // excluding x forces everything above it out.
    let mut out = Vec::new();
    let mut chosen = BitSet::new(n);
    let mut excluded = BitSet::new(n);
    fn go(
        base: &FinPoset,
        i: usize,
        chosen: &mut BitSet,
        excluded: &mut BitSet,
        out: &mut Vec<BitSet>,
        bound: usize,
    ) -> bool {
        if out.len() > bound {
            return false;
        }
        if i == base.len() {
            out.push(chosen.clone());
            return true;
        }
        let can_include = base.down_of(i).is_disjoint(excluded);
        let can_exclude = base.up_of(i).is_disjoint(chosen);
        if can_exclude {
            excluded.insert(i);
            let ok = go(base, i + 1, chosen, excluded, out, bound);
            excluded.remove(i);
            if !ok {
                return false;
            }
        }
        if can_include {
            chosen.insert(i);
            let ok = go(base, i + 1, chosen, excluded, out, bound);
            chosen.remove(i);
            if !ok {
                return false;
            }
        }
        true
    }
    if !go(base, 0, &mut chosen, &mut excluded, &mut out, bound) {
        return Err(too_large(bound as u128 + 1));
    }
    out.sort();
    Ok(out)
}

/// Exhaustive check of the unit laws on `T X` and of associativity on `T T T X`.
///
/// `T T T X` is enumerated in full when `|T T X| <= 16`. Beyond that,
/// associativity is checked exhaustively on the join-generators (the empty
/// value and every `eta(F)`), and as a sampled cross-check on the closure of
/// every pair `{F, G}` drawn from the first 512 elements of `T T X`.
pub fn check_monad_laws(m: &dyn MonadInstance, carrier: &FinPoset) -> Result<LawReport> {
    let x = m.backend().view(carrier);
    let tx = TCarrier::enumerate(m.backend(), &x, ENUM_BOUND)?;
    let tx_pos = tx.as_poset()?;
    let ttx = TCarrier::enumerate(m.backend(), &tx_pos, ENUM_BOUND)?;
    let name = m.name();
    let mut report = LawReport::new();

    // mu_X as a function of T T X indices, computed once.
    let mu: Vec<BitSet> = ttx
        .values()
        .iter()
        .map(|fam| {
            let members: Vec<&BitSet> = fam.iter().map(|j| tx.value(j)).collect();
            m.mult(&x, &members)
        })
        .collect();
    let mult_value = |fam: &BitSet| -> BitSet {
        let members: Vec<&BitSet> = fam.iter().map(|j| tx.value(j)).collect();
        m.mult(&x, &members)
    };

    let mut left = Tally::new(format!("{name}/left-unit"));
    for (i, s) in tx.values().iter().enumerate() {
        let eta_t = m.unit(&tx_pos, i);
        let back = mult_value(&eta_t);
        left.case(&back == s, || {
            format!(
                "S = {}: mu(eta(S)) = {}",
                tx.label(i),
                labels_of(x.carrier(), &back)
            )
        });
    }
    report.push(left.finish());

    let eta_table: Vec<usize> = (0..x.len())
        .map(|xi| {
            tx.index_of(&m.unit(&x, xi))
                .expect("unit must produce a legal T-value")
        })
        .collect();
    let mut right = Tally::new(format!("{name}/right-unit"));
    for (i, s) in tx.values().iter().enumerate() {
        let t_eta = m.map(&x, &tx_pos, &eta_table, s);
        let back = mult_value(&t_eta);
        right.case(&back == s, || {
            format!(
                "S = {}: mu(T eta(S)) = {}",
                tx.label(i),
                labels_of(x.carrier(), &back)
            )
        });
    }
    report.push(right.finish());

    // T T T X values are bit-sets over T T X indices.
    let ttx_pos = if ttx.len() <= 4096 {
        Some(ttx.as_poset()?)
    } else {
        None
    };
    let mu_index: Vec<usize> = mu
        .iter()
        .map(|v| tx.index_of(v).unwrap_or(usize::MAX))
        .collect();
    let check = |fff: &BitSet, assoc: &mut Tally| {
        // mu_X . mu_{TX}
        let mut inner = BitSet::new(tx.len());
        for j in fff.iter() {
            inner.union_with(ttx.value(j));
        }
        let lhs = mult_value(&inner);
        // mu_X . T mu_X
        let mut image = BitSet::new(tx.len());
        let mut illegal = None;
        for j in fff.iter() {
            match mu_index[j] {
                usize::MAX => illegal = Some(j),
                k => {
                    image.insert(k);
                }
            }
        }
        let image = m.backend().close(&tx_pos, &image);
        let rhs = mult_value(&image);
        let ok = illegal.is_none() && lhs == rhs;
        assoc.case(ok, || {
            let fam: Vec<String> = fff.iter().map(|j| ttx.label_nested(&tx, j)).collect();
            format!(
                "F = {{{}}}: mu.mu_T = {}, mu.T mu = {}",
                fam.join(", "),
                labels_of(x.carrier(), &lhs),
                labels_of(x.carrier(), &rhs)
            )
        });
    };
    if ttx.len() <= 16 {
        let mut assoc = Tally::new(format!("{name}/associativity"));
        let tttx = TCarrier::enumerate(m.backend(), ttx_pos.as_ref().unwrap(), ENUM_BOUND)?;
        for v in tttx.values() {
            check(v, &mut assoc);
        }
        report.push(assoc.finish());
    } else {
        // Both sides preserve unions, and the empty value with the units eta(F)
        // generate T T T X under unions, so the generators decide the law.
        let close = |s: BitSet| match &ttx_pos {
            Some(p) => m.backend().close(p, &s),
            None => s,
        };
        let mut gens = Tally::new(format!("{name}/associativity/join-generators"));
        check(&BitSet::new(ttx.len()), &mut gens);
        for j in 0..ttx.len() {
            check(&close(BitSet::singleton(ttx.len(), j)), &mut gens);
        }
        report.push(gens.finish());
        let mut pairs = Tally::new(format!("{name}/associativity/pairs")).sampled(true);
        let head = ttx.len().min(512);
        for a in 0..head {
            for b in a + 1..head {
                check(&close(BitSet::from_iter_len(ttx.len(), [a, b])), &mut pairs);
            }
        }
        report.push(pairs.finish());
    }
    Ok(report)
}

impl TCarrier {
    /// Label of a `T T X` element, spelling out its members as `T X` labels.
    fn label_nested(&self, inner: &TCarrier, i: usize) -> String {
        let parts: Vec<String> = self.values[i].iter().map(|j| inner.label(j)).collect();
        format!("{{{}}}", parts.join(","))
    }
}

/// A deliberately broken powerset monad: multiplication drops the largest
/// element of the union whenever the family has at least two members.
pub struct CorruptedPowerset;

impl MonadInstance for CorruptedPowerset {
    fn name(&self) -> String {
        "corrupted-powerset".into()
    }
    fn backend(&self) -> Backend {
        Backend::Set
    }
    fn unit(&self, x: &FinPoset, i: usize) -> BitSet {
        p_unit(x.len(), i)
    }
    fn mult(&self, x: &FinPoset, family: &[&BitSet]) -> BitSet {
        let mut u = p_mult(x.len(), family.iter().copied());
        if family.len() >= 2 {
            if let Some(top) = u.iter().last() {
                u.remove(top);
            }
        }
        u
    }
    fn map(&self, _src: &FinPoset, tgt: &FinPoset, f: &[usize], s: &BitSet) -> BitSet {
        p_map(f, tgt.len(), s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::posets_up_to_iso;
    use proptest::prelude::*;

    fn set(names: &[&str]) -> FinPoset {
        FinPoset::discrete(&FinSet::new(names.iter().copied()).unwrap())
    }

    #[test]
    fn powerset_examples() {
        let ab = BitSet::from_iter_len(2, [0, 1]);
        let a = BitSet::singleton(2, 0);
        assert_eq!(p_mult(2, [&a, &ab]), ab);
        assert_eq!(p_map(&[0, 1], 2, &ab), ab);
        let units: Vec<BitSet> = ab.iter().map(|x| p_unit(2, x)).collect();
        assert_eq!(p_mult(2, &units), ab);
    }

    #[test]
    fn downset_examples() {
        let k = FinPoset::chain(&["k2", "k1"]);
        assert_eq!(pd_unit(&k, 1), BitSet::from_iter_len(2, [0, 1]));
        let fam = [pd_unit(&k, 0), pd_unit(&k, 1)];
        assert!(k.is_down_closed(&pd_mult(&k, &fam).unwrap()));
        let bad = BitSet::singleton(2, 1);
        assert!(matches!(pd_mult(&k, [&bad]), Err(Error::NotDownClosed(_))));
        let flip = [1, 0];
        assert!(matches!(
            pd_map(&flip, &k, &k, &pd_unit(&k, 0)),
            Err(Error::NotMonotone(_))
        ));
    }

    #[test]
    fn downset_on_discrete_is_powerset() {
        let p = set(&["a", "b", "c"]);
        for m in 0..8 {
            let s = BitSet::from_mask(3, m);
            for x in 0..3 {
                assert_eq!(pd_unit(&p, x), p_unit(3, x));
            }
            let f = [2, 2, 0];
            assert_eq!(pd_map(&f, &p, &p, &s).unwrap(), p_map(&f, 3, &s));
        }
    }

    // The oracle counts downsets by brute force over all masks.
    fn brute_downsets(p: &FinPoset) -> Vec<BitSet> {
        let n = p.len();
        let mut v: Vec<BitSet> = (0..1u64 << n)
            .map(|m| BitSet::from_mask(n, m))
            .filter(|s| p.is_down_closed(s))
            .collect();
        v.sort();
        v
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for n in 0..=4 {
            for p in posets_up_to_iso(n) {
                let t = TCarrier::enumerate(Backend::Pos, &p, ENUM_BOUND).unwrap();
                assert_eq!(t.values(), brute_downsets(&p).as_slice());
            }
        }
    }

    #[test]
    fn laws_hold_for_shipped_instances() {
        let r = check_monad_laws(&Powerset, &set(&["a", "b"])).unwrap();
        assert!(r.all_pass(), "{r}");
        let r = check_monad_laws(&Downset, &FinPoset::chain(&["k2", "k1"])).unwrap();
        assert!(r.all_pass(), "{r}");
    }

    #[test]
    fn corrupted_mult_breaks_associativity() {
        let r = check_monad_laws(&CorruptedPowerset, &set(&["a", "b"])).unwrap();
        let e = r.get("corrupted-powerset/associativity").unwrap();
        assert!(!e.passed);
        assert!(e.counterexample.as_ref().unwrap().starts_with("F = "));
    }

    #[test]
    fn oversize_carrier_is_rejected() {
        let big = FinPoset::discrete(&FinSet::range(20));
        assert!(matches!(
            TCarrier::enumerate(Backend::Set, &big, ENUM_BOUND),
            Err(Error::CarrierTooLarge { .. })
        ));
    }

    proptest! {
        #[test]
        fn pd_map_is_downclosed_and_monotone(
            pairs in proptest::collection::vec((0usize..5, 0usize..5), 0..6),
            fmap in proptest::collection::vec(0usize..4, 5),
            a in 0u64..32, b in 0u64..32,
        ) {
            let pairs: Vec<_> = pairs.into_iter().filter(|(x, y)| x != y)
                .map(|(x, y)| (x.min(y), x.max(y))).collect();
            let src = FinPoset::closure(&FinSet::range(5), &pairs).unwrap();
            let tgt = FinPoset::chain(&["0", "1", "2", "3"]);
            // make f monotone by taking the maximum over everything below
            let f: Vec<usize> = (0..5)
                .map(|x| src.down_of(x).iter().map(|y| fmap[y]).max().unwrap())
                .collect();
            let s = src.down_close(&BitSet::from_mask(5, a));
            let t = src.down_close(&BitSet::from_mask(5, a | b));
            let fs = pd_map(&f, &src, &tgt, &s).unwrap();
            let ft = pd_map(&f, &src, &tgt, &t).unwrap();
            prop_assert!(tgt.is_down_closed(&fs));
            prop_assert!(fs.is_subset(&ft));
        }
    }
}
