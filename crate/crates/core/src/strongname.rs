//! Fresh name generation: strong nominal sets with finitely many orbits and
//! Kleisli maps for the name-generation monad, represented orbit by orbit.
//!
//! An element of a tensor of `r` atomic orbits is a list of `r` tuples of
//! pairwise distinct names. Its orbit is recorded as the list of factors
//! together with the equality pattern of all positions, written as a
//! restricted growth string; the values of the pattern are the *slots* of
//! the orbit and their number is its arity. The canonical element of an
//! orbit uses name `k` for slot `k`.
//!
//! Every orbit of an object has the same number of factors (the object's
//! rank), so a tensor can always be split back into its two sides.
//!
//! A morphism sends each source orbit to one target orbit together with a
//! partial injection `σ` from target slots to source slots. Target slots
//! outside the domain of `σ` carry bound, pairwise distinct fresh names.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::markov::{Fallback, Markov, SplitSupport};

/// One atomic factor of a product orbit: a tag distinguishing the summands
/// of a base object, and the arity of that summand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Factor {
    pub tag: u32,
    pub arity: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Orbit {
    factors: Vec<Factor>,
    pattern: Vec<u32>,
}

impl Orbit {
    pub fn new(factors: Vec<Factor>, pattern: Vec<u32>) -> Result<Self> {
        let len: u32 = factors.iter().map(|f| f.arity).sum();
        if pattern.len() != len as usize {
            return Err(Error::InvalidObject(format!(
                "pattern has {} positions but the factors need {len}",
                pattern.len()
            )));
        }
        let mut next = 0;
        for &p in &pattern {
            if p > next {
                return Err(Error::InvalidObject(format!("pattern {pattern:?} is not in first-occurrence order")));
            }
            if p == next {
                next += 1;
            }
        }
        let mut start = 0;
        for f in &factors {
            let block = &pattern[start..start + f.arity as usize];
            for (i, a) in block.iter().enumerate() {
                if block[..i].contains(a) {
                    return Err(Error::InvalidObject(format!("repeated name inside factor in {pattern:?}")));
                }
            }
            start += f.arity as usize;
        }
        Ok(Orbit { factors, pattern })
    }

    /// The single orbit of the atomic set `⟨n⟩`, tagged `tag`.
    pub fn atomic(tag: u32, arity: u32) -> Self {
        Orbit { factors: vec![Factor { tag, arity }], pattern: (0..arity).collect() }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn pattern(&self) -> &[u32] {
        &self.pattern
    }

    /// Number of distinct names in an element of the orbit.
    pub fn arity(&self) -> usize {
        self.pattern.iter().max().map_or(0, |m| *m as usize + 1)
    }

    /// Number of positions covered by the first `k` factors.
    fn cut(&self, k: usize) -> usize {
        self.factors[..k].iter().map(|f| f.arity as usize).sum()
    }
}

/// A name occurring in the image of a canonical element: either the name
/// of a source slot or a bound fresh name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Name {
    Src(u32),
    Fresh(u32),
}

/// Orbit of the element with the given names per position, and the name
/// carried by each of its slots.
fn canonicalize(factors: Vec<Factor>, names: &[Name]) -> (Orbit, Vec<Name>) {
    let mut slots: Vec<Name> = Vec::new();
    let pattern = names
        .iter()
        .map(|n| match slots.iter().position(|s| s == n) {
            Some(i) => i as u32,
            None => {
                slots.push(*n);
                slots.len() as u32 - 1
            }
        })
        .collect();
    (Orbit { factors, pattern }, slots)
}

/// A strong nominal set with finitely many orbits, all of the same rank.
#[derive(Clone)]
pub struct NomObject {
    rank: usize,
    orbits: Arc<[Orbit]>,
}

impl PartialEq for NomObject {
    fn eq(&self, other: &Self) -> bool {
        self.rank == other.rank && (Arc::ptr_eq(&self.orbits, &other.orbits) || self.orbits == other.orbits)
    }
}

impl Eq for NomObject {}

impl fmt::Debug for NomObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(arities) = self.base_arities() {
            return write!(f, "Nom{arities:?}");
        }
        write!(f, "Nom(rank {}, {} orbits)", self.rank, self.orbits.len())
    }
}

impl NomObject {
    /// `⟨n₁⟩ + ⟨n₂⟩ + …`, a coproduct of atomic sets.
    pub fn base(arities: &[u32]) -> Result<Self> {
        if arities.is_empty() {
            return Err(Error::InvalidObject("an object needs at least one orbit".into()));
        }
        let orbits = arities.iter().enumerate().map(|(i, &n)| Orbit::atomic(i as u32, n)).collect();
        Self::from_orbits(1, orbits)
    }

    pub fn atomic(n: u32) -> Self {
        Self::base(&[n]).expect("one orbit")
    }

    pub fn unit() -> Self {
        NomObject { rank: 0, orbits: Arc::from(vec![Orbit { factors: vec![], pattern: vec![] }]) }
    }

    pub fn from_orbits(rank: usize, mut orbits: Vec<Orbit>) -> Result<Self> {
        if orbits.is_empty() {
            return Err(Error::InvalidObject("an object needs at least one orbit".into()));
        }
        if let Some(o) = orbits.iter().find(|o| o.factors.len() != rank) {
            return Err(Error::InvalidObject(format!("orbit with {} factors in a rank-{rank} object", o.factors.len())));
        }
        orbits.sort();
        orbits.dedup();
        Ok(NomObject { rank, orbits: Arc::from(orbits) })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn orbits(&self) -> &[Orbit] {
        &self.orbits
    }

    pub fn arities(&self) -> Vec<usize> {
        self.orbits.iter().map(Orbit::arity).collect()
    }

    pub fn index_of(&self, orbit: &Orbit) -> Option<usize> {
        self.orbits.binary_search(orbit).ok()
    }

    /// The arities, if this is a coproduct of atomic sets as built by [`NomObject::base`].
    pub fn base_arities(&self) -> Option<Vec<u32>> {
        if self.rank != 1 {
            return None;
        }
        self.orbits
            .iter()
            .enumerate()
            .map(|(i, o)| (*o == Orbit::atomic(i as u32, o.factors[0].arity)).then_some(o.factors[0].arity))
            .collect()
    }

    fn lookup(&self, orbit: &Orbit) -> Result<usize> {
        self.index_of(orbit)
            .ok_or_else(|| Error::Inconsistent(format!("orbit {orbit:?} missing from {self:?}")))
    }

    /// Splits an orbit of `self = X ⊗ Y` into its parts, where `X` has rank
    /// `left_rank`. Each part comes with the slot of this orbit carried by
    /// each of its own slots.
    fn split(orbit: &Orbit, left_rank: usize) -> ((Orbit, Vec<u32>), (Orbit, Vec<u32>)) {
        let cut = orbit.cut(left_rank);
        let part = |factors: &[Factor], pattern: &[u32]| {
            let names: Vec<Name> = pattern.iter().map(|&p| Name::Src(p)).collect();
            let (o, slots) = canonicalize(factors.to_vec(), &names);
            (o, slots.into_iter().map(slot_of).collect())
        };
        (
            part(&orbit.factors[..left_rank], &orbit.pattern[..cut]),
            part(&orbit.factors[left_rank..], &orbit.pattern[cut..]),
        )
    }
}

fn slot_of(n: Name) -> u32 {
    match n {
        Name::Src(i) => i,
        Name::Fresh(_) => unreachable!("split only sees source names"),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ObjectRepr {
    Base {
        orbits: Vec<u32>,
    },
    General {
        rank: usize,
        orbits: Vec<OrbitRepr>,
    },
}

#[derive(Serialize, Deserialize)]
struct OrbitRepr {
    factors: Vec<(u32, u32)>,
    pattern: Vec<u32>,
}

impl Serialize for NomObject {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.base_arities() {
            Some(orbits) => ObjectRepr::Base { orbits },
            None => ObjectRepr::General {
                rank: self.rank,
                orbits: self
                    .orbits
                    .iter()
                    .map(|o| OrbitRepr {
                        factors: o.factors.iter().map(|f| (f.tag, f.arity)).collect(),
                        pattern: o.pattern.clone(),
                    })
                    .collect(),
            },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for NomObject {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        match ObjectRepr::deserialize(d)? {
            ObjectRepr::Base { orbits } => NomObject::base(&orbits).map_err(D::Error::custom),
            ObjectRepr::General { rank, orbits } => {
                let orbits = orbits
                    .into_iter()
                    .map(|o| {
                        let factors = o.factors.into_iter().map(|(tag, arity)| Factor { tag, arity }).collect();
                        Orbit::new(factors, o.pattern)
                    })
                    .collect::<Result<Vec<_>>>()
                    .map_err(D::Error::custom)?;
                NomObject::from_orbits(rank, orbits).map_err(D::Error::custom)
            }
        }
    }
}

/// Image of one source orbit: target orbit index and, per target slot, the
/// source slot it copies (`None` for a fresh name).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrbitArrow {
    pub target: usize,
    pub sigma: Vec<Option<u32>>,
}

impl OrbitArrow {
    pub fn is_total(&self) -> bool {
        self.sigma.iter().all(Option::is_some)
    }

    fn fresh(target: usize, arity: usize) -> Self {
        OrbitArrow { target, sigma: vec![None; arity] }
    }

    fn identity(target: usize, arity: usize) -> Self {
        OrbitArrow { target, sigma: (0..arity as u32).map(Some).collect() }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct NomMorphism {
    dom: NomObject,
    cod: NomObject,
    arrows: Vec<OrbitArrow>,
}

impl fmt::Debug for NomMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NomMorphism({:?} -> {:?}, {:?})", self.dom, self.cod, self.arrows)
    }
}

impl NomMorphism {
    pub fn new(dom: NomObject, cod: NomObject, arrows: Vec<OrbitArrow>) -> Result<Self> {
        if arrows.len() != dom.orbits.len() {
            return Err(Error::InvalidMorphism(format!(
                "{} arrows for {} source orbits",
                arrows.len(),
                dom.orbits.len()
            )));
        }
        for (o, arrow) in dom.orbits.iter().zip(&arrows) {
            let target = cod.orbits.get(arrow.target).ok_or_else(|| {
                Error::InvalidMorphism(format!("target orbit {} out of range", arrow.target))
            })?;
            if arrow.sigma.len() != target.arity() {
                return Err(Error::InvalidMorphism(format!(
                    "sigma has {} entries for a target of arity {}",
                    arrow.sigma.len(),
                    target.arity()
                )));
            }
            let used: Vec<u32> = arrow.sigma.iter().flatten().copied().collect();
            for (k, i) in used.iter().enumerate() {
                if *i as usize >= o.arity() || used[..k].contains(i) {
                    return Err(Error::InvalidMorphism(format!("sigma {:?} is not a partial injection", arrow.sigma)));
                }
            }
        }
        Ok(NomMorphism { dom, cod, arrows })
    }

    pub fn arrows(&self) -> &[OrbitArrow] {
        &self.arrows
    }

    pub fn source(&self) -> &NomObject {
        &self.dom
    }

    pub fn target(&self) -> &NomObject {
        &self.cod
    }

    /// Builds a morphism from its action on canonical elements.
    fn from_rule(
        dom: &NomObject,
        cod: &NomObject,
        mut rule: impl FnMut(&Orbit) -> Result<(Vec<Factor>, Vec<Name>)>,
    ) -> Result<Self> {
        let arrows = dom
            .orbits
            .iter()
            .map(|o| {
                let (factors, names) = rule(o)?;
                let (orbit, slots) = canonicalize(factors, &names);
                let target = cod.lookup(&orbit)?;
                let sigma = slots
                    .into_iter()
                    .map(|n| match n {
                        Name::Src(i) => Some(i),
                        Name::Fresh(_) => None,
                    })
                    .collect();
                Ok(OrbitArrow { target, sigma })
            })
            .collect::<Result<_>>()?;
        Ok(NomMorphism { dom: dom.clone(), cod: cod.clone(), arrows })
    }

    /// Image of source orbit `i` when its slots carry `names`; fresh names
    /// are numbered from `fresh_base`.
    fn apply(&self, i: usize, names: &[Name], fresh_base: u32) -> (Vec<Factor>, Vec<Name>) {
        let arrow = &self.arrows[i];
        let target = &self.cod.orbits[arrow.target];
        let out = target
            .pattern
            .iter()
            .map(|&j| match arrow.sigma[j as usize] {
                Some(s) => names[s as usize],
                None => Name::Fresh(fresh_base + j),
            })
            .collect();
        (target.factors.clone(), out)
    }
}

#[derive(Serialize, Deserialize)]
struct ArrowRepr {
    target: usize,
    sigma: Vec<(u32, u32)>,
}

#[derive(Serialize, Deserialize)]
struct MorphismRepr {
    dom: NomObject,
    cod: NomObject,
    arrows: Vec<ArrowRepr>,
}

impl Serialize for NomMorphism {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MorphismRepr {
            dom: self.dom.clone(),
            cod: self.cod.clone(),
            arrows: self
                .arrows
                .iter()
                .map(|a| ArrowRepr {
                    target: a.target,
                    sigma: a
                        .sigma
                        .iter()
                        .enumerate()
                        .filter_map(|(j, i)| i.map(|i| (j as u32, i)))
                        .collect(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for NomMorphism {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = MorphismRepr::deserialize(d)?;
        let mut arrows = Vec::with_capacity(repr.arrows.len());
        for a in repr.arrows {
            let arity = repr
                .cod
                .orbits()
                .get(a.target)
                .ok_or_else(|| D::Error::custom(format!("target orbit {} out of range", a.target)))?
                .arity();
            let mut sigma = vec![None; arity];
            for (j, i) in a.sigma {
                let slot = sigma
                    .get_mut(j as usize)
                    .ok_or_else(|| D::Error::custom(format!("target slot {j} out of range")))?;
                if slot.is_some() {
                    return Err(D::Error::custom(format!("target slot {j} assigned twice")));
                }
                *slot = Some(i);
            }
            arrows.push(OrbitArrow { target: a.target, sigma });
        }
        NomMorphism::new(repr.dom, repr.cod, arrows).map_err(D::Error::custom)
    }
}

/// The Kleisli category of the name-generation monad on strong nominal sets.
#[derive(Debug, Clone, Copy, Default)]
pub struct StrongName;

fn source_names(o: &Orbit) -> Vec<Name> {
    o.pattern.iter().map(|&p| Name::Src(p)).collect()
}

/// All partial injections from `[b]` into `[a]`, as `b`-long option vectors.
pub fn partial_injections(b: usize, a: usize) -> Vec<Vec<Option<u32>>> {
    fn go(j: usize, b: usize, a: usize, used: &mut Vec<bool>, cur: &mut Vec<Option<u32>>, out: &mut Vec<Vec<Option<u32>>>) {
        if j == b {
            out.push(cur.clone());
            return;
        }
        cur.push(None);
        go(j + 1, b, a, used, cur, out);
        cur.pop();
        for i in 0..a {
            if !used[i] {
                used[i] = true;
                cur.push(Some(i as u32));
                go(j + 1, b, a, used, cur, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(0, b, a, &mut vec![false; a], &mut Vec::new(), &mut out);
    out
}

impl Markov for StrongName {
    type Obj = NomObject;
    type Mor = NomMorphism;

    fn name(&self) -> &'static str {
        "strongname"
    }

    fn unit(&self) -> NomObject {
        NomObject::unit()
    }

    fn tensor_obj(&self, x: &NomObject, y: &NomObject) -> NomObject {
        if x.rank == 0 {
            return y.clone();
        }
        if y.rank == 0 {
            return x.clone();
        }
        let mut orbits = Vec::new();
        for o in x.orbits.iter() {
            let a = o.arity();
            for p in y.orbits.iter() {
                // Each partial injection says which right slots reuse a left name.
                for shared in partial_injections(p.arity(), a) {
                    let names: Vec<Name> = o
                        .pattern
                        .iter()
                        .map(|&s| Name::Src(s))
                        .chain(p.pattern.iter().map(|&s| match shared[s as usize] {
                            Some(l) => Name::Src(l),
                            None => Name::Fresh(s),
                        }))
                        .collect();
                    let factors = o.factors.iter().chain(&p.factors).copied().collect();
                    orbits.push(canonicalize(factors, &names).0);
                }
            }
        }
        NomObject::from_orbits(x.rank + y.rank, orbits).expect("product orbits are valid")
    }

    fn dom(&self, f: &NomMorphism) -> NomObject {
        f.dom.clone()
    }

    fn cod(&self, f: &NomMorphism) -> NomObject {
        f.cod.clone()
    }

    fn id(&self, x: &NomObject) -> NomMorphism {
        let arrows = x.orbits.iter().enumerate().map(|(i, o)| OrbitArrow::identity(i, o.arity())).collect();
        NomMorphism { dom: x.clone(), cod: x.clone(), arrows }
    }

    fn compose(&self, g: &NomMorphism, f: &NomMorphism) -> Result<NomMorphism> {
        if f.cod != g.dom {
            return Err(Error::mismatch(&f.cod, &g.dom));
        }
        let arrows = f
            .arrows
            .iter()
            .map(|af| {
                let ag = &g.arrows[af.target];
                OrbitArrow {
                    target: ag.target,
                    sigma: ag.sigma.iter().map(|s| s.and_then(|j| af.sigma[j as usize])).collect(),
                }
            })
            .collect();
        Ok(NomMorphism { dom: f.dom.clone(), cod: g.cod.clone(), arrows })
    }

    fn tensor(&self, f: &NomMorphism, g: &NomMorphism) -> NomMorphism {
        let dom = self.tensor_obj(&f.dom, &g.dom);
        let cod = self.tensor_obj(&f.cod, &g.cod);
        NomMorphism::from_rule(&dom, &cod, |q| {
            let ((o1, s1), (o2, s2)) = NomObject::split(q, f.dom.rank);
            let n1: Vec<Name> = s1.into_iter().map(Name::Src).collect();
            let n2: Vec<Name> = s2.into_iter().map(Name::Src).collect();
            let (mut factors, mut names) = f.apply(f.dom.lookup(&o1)?, &n1, 0);
            let offset = names.len() as u32;
            let (factors2, names2) = g.apply(g.dom.lookup(&o2)?, &n2, offset);
            factors.extend(factors2);
            names.extend(names2);
            Ok((factors, names))
        })
        .expect("tensor of valid morphisms")
    }

    fn copy(&self, x: &NomObject) -> NomMorphism {
        let xx = self.tensor_obj(x, x);
        NomMorphism::from_rule(x, &xx, |o| {
            let names = source_names(o);
            Ok((o.factors.repeat(2), names.repeat(2)))
        })
        .expect("copy lands in the square")
    }

    fn del(&self, x: &NomObject) -> NomMorphism {
        let arrows = x.orbits.iter().map(|_| OrbitArrow::fresh(0, 0)).collect();
        NomMorphism { dom: x.clone(), cod: NomObject::unit(), arrows }
    }

    fn swap(&self, x: &NomObject, y: &NomObject) -> NomMorphism {
        let xy = self.tensor_obj(x, y);
        let yx = self.tensor_obj(y, x);
        NomMorphism::from_rule(&xy, &yx, |q| {
            let cut = q.cut(x.rank);
            let names = source_names(q);
            let factors = q.factors[x.rank..].iter().chain(&q.factors[..x.rank]).copied().collect();
            let names = names[cut..].iter().chain(&names[..cut]).copied().collect();
            Ok((factors, names))
        })
        .expect("swap lands in the swapped product")
    }

    fn mor_eq(&self, f: &NomMorphism, g: &NomMorphism) -> bool {
        f == g
    }

    /// Deterministic morphisms are exactly those that allocate no names.
    fn is_deterministic(&self, f: &NomMorphism) -> bool {
        f.arrows.iter().all(OrbitArrow::is_total)
    }

    fn pair(&self, f: &NomMorphism, g: &NomMorphism) -> Result<NomMorphism> {
        if f.dom != g.dom {
            return Err(Error::mismatch(&f.dom, &g.dom));
        }
        let cod = self.tensor_obj(&f.cod, &g.cod);
        NomMorphism::from_rule(&f.dom, &cod, |o| {
            let i = f.dom.lookup(o)?;
            let slots: Vec<Name> = (0..o.arity() as u32).map(Name::Src).collect();
            let (mut factors, mut names) = f.apply(i, &slots, 0);
            let (factors2, names2) = g.apply(i, &slots, names.len() as u32);
            factors.extend(factors2);
            names.extend(names2);
            Ok((factors, names))
        })
    }

    /// If `f(a) = ⟨C⟩(x, y)` then `f|X(x, a) = ⟨C ∖ supp x⟩ y`, extended by
    /// equivariance. Orbits of `X ⊗ A` not reached this way go to an
    /// all-fresh element of the first (canonical) or last (alternate) orbit.
    fn conditional_with(&self, f: &NomMorphism, x: &NomObject, y: &NomObject, fallback: Fallback) -> Result<NomMorphism> {
        let xy = self.tensor_obj(x, y);
        if f.cod != xy {
            return Err(Error::mismatch(&xy, &f.cod));
        }
        let a = &f.dom;
        let dom = self.tensor_obj(x, a);
        let fallback_orbit = match fallback {
            Fallback::Canonical => 0,
            Fallback::Alternate => y.orbits.len() - 1,
        };
        let arrows = dom
            .orbits
            .iter()
            .map(|q| {
                let ((ox, _), (oa, sa)) = NomObject::split(q, x.rank);
                let a_names: Vec<Name> = sa.iter().map(|&s| Name::Src(s)).collect();
                let (factors, names) = f.apply(a.lookup(&oa)?, &a_names, 0);
                let cut_q = q.cut(x.rank);
                let cut_t: usize = factors[..x.rank].iter().map(|f| f.arity as usize).sum();
                let matched = (factors[..x.rank] == ox.factors[..])
                    .then(|| match_fresh(&q.pattern[..cut_q], &names[..cut_t], &sa))
                    .flatten();
                let arrow = match matched {
                    Some(assign) => {
                        let y_names: Vec<Name> = names[cut_t..]
                            .iter()
                            .map(|n| match n {
                                Name::Fresh(k) => assign.get(k).map_or(*n, |s| Name::Src(*s)),
                                src => *src,
                            })
                            .collect();
                        let (orbit, slots) = canonicalize(factors[x.rank..].to_vec(), &y_names);
                        OrbitArrow {
                            target: y.lookup(&orbit)?,
                            sigma: slots
                                .into_iter()
                                .map(|n| match n {
                                    Name::Src(i) => Some(i),
                                    Name::Fresh(_) => None,
                                })
                                .collect(),
                        }
                    }
                    None => OrbitArrow::fresh(fallback_orbit, y.orbits[fallback_orbit].arity()),
                };
                Ok(arrow)
            })
            .collect::<Result<_>>()?;
        Ok(NomMorphism { dom, cod: y.clone(), arrows })
    }

    fn split_support(&self, p: &NomMorphism) -> Result<SplitSupport<Self>> {
        if p.dom.rank != 0 {
            return Err(Error::NotAState(format!("{:?}", p.dom)));
        }
        let x = &p.cod;
        let t = p.arrows[0].target;
        let w = x.orbits[t].clone();
        let arity = w.arity();
        let support = NomObject { rank: x.rank, orbits: Arc::from(vec![w]) };
        let inclusion = NomMorphism {
            dom: support.clone(),
            cod: x.clone(),
            arrows: vec![OrbitArrow::identity(t, arity)],
        };
        let arrows = (0..x.orbits.len())
            .map(|i| if i == t { OrbitArrow::identity(0, arity) } else { OrbitArrow::fresh(0, arity) })
            .collect();
        let projection = NomMorphism { dom: x.clone(), cod: support.clone(), arrows };
        Ok(SplitSupport { support, inclusion, projection })
    }
}

/// Matches the names `image` (in terms of source slots and fresh names)
/// against the concrete slots `target`; fresh names may only take slots
/// outside `bound` and must do so injectively.
fn match_fresh(target: &[u32], image: &[Name], bound: &[u32]) -> Option<BTreeMap<u32, u32>> {
    let mut assign: BTreeMap<u32, u32> = BTreeMap::new();
    for (&t, n) in target.iter().zip(image) {
        match *n {
            Name::Src(s) => {
                if s != t {
                    return None;
                }
            }
            Name::Fresh(k) => {
                if bound.contains(&t) {
                    return None;
                }
                match assign.get(&k) {
                    Some(&prev) if prev != t => return None,
                    Some(_) => {}
                    None => {
                        if assign.values().any(|&v| v == t) {
                            return None;
                        }
                        assign.insert(k, t);
                    }
                }
            }
        }
    }
    Some(assign)
}

/// How an orbit of `X ⊗ Y` decomposes: the orbits of the two components and
/// the pairs `(left slot, right slot)` that carry the same name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProductTag {
    pub left: usize,
    pub right: usize,
    pub shared: Vec<(u32, u32)>,
}

impl StrongName {
    /// Tags every orbit of `x ⊗ y`, in orbit order.
    pub fn orbit_product(&self, x: &NomObject, y: &NomObject) -> (NomObject, Vec<ProductTag>) {
        let xy = self.tensor_obj(x, y);
        let tags = xy
            .orbits
            .iter()
            .map(|q| {
                let ((ox, sx), (oy, sy)) = NomObject::split(q, x.rank);
                let shared = sx
                    .iter()
                    .enumerate()
                    .filter_map(|(i, s)| sy.iter().position(|t| t == s).map(|j| (i as u32, j as u32)))
                    .collect();
                ProductTag {
                    left: x.index_of(&ox).expect("left part is an orbit of x"),
                    right: y.index_of(&oy).expect("right part is an orbit of y"),
                    shared,
                }
            })
            .collect();
        (xy, tags)
    }

    /// Index of the orbit of `x ⊗ y` with the given tag.
    pub fn product_index(&self, x: &NomObject, y: &NomObject, tag: &ProductTag) -> Option<usize> {
        let (_, tags) = self.orbit_product(x, y);
        tags.iter().position(|t| t == tag)
    }

    /// One state per orbit: an all-fresh element of it.
    pub fn states(&self, x: &NomObject) -> Vec<NomMorphism> {
        (0..x.orbits.len()).map(|t| self.state(x, t)).collect()
    }

    pub fn state(&self, x: &NomObject, orbit: usize) -> NomMorphism {
        NomMorphism {
            dom: NomObject::unit(),
            cod: x.clone(),
            arrows: vec![OrbitArrow::fresh(orbit, x.orbits[orbit].arity())],
        }
    }

    /// Every morphism between two objects (exponentially many; small objects only).
    pub fn hom(&self, x: &NomObject, y: &NomObject) -> Vec<NomMorphism> {
        let mut all = vec![Vec::new()];
        for o in x.orbits.iter() {
            let options: Vec<OrbitArrow> = y
                .orbits
                .iter()
                .enumerate()
                .flat_map(|(t, w)| {
                    partial_injections(w.arity(), o.arity())
                        .into_iter()
                        .map(move |sigma| OrbitArrow { target: t, sigma })
                })
                .collect();
            all = all
                .into_iter()
                .flat_map(|prefix: Vec<OrbitArrow>| {
                    options.iter().map(move |a| {
                        let mut next = prefix.clone();
                        next.push(a.clone());
                        next
                    })
                })
                .collect();
        }
        all.into_iter()
            .map(|arrows| NomMorphism { dom: x.clone(), cod: y.clone(), arrows })
            .collect()
    }

    /// Normal form `(⟨n⟩, ⟨n⟩)` of the sample space `(x, p)`, with the
    /// isomorphisms to and from it.
    pub fn normal_form(&self, x: &NomObject, p: &NomMorphism) -> Result<NormalForm> {
        let split = self.split_support(p)?;
        let n = split.support.orbits[0].arity();
        let atom = NomObject::atomic(n as u32);
        let to_space = NomMorphism {
            dom: atom.clone(),
            cod: x.clone(),
            arrows: vec![OrbitArrow::identity(p.arrows[0].target, n)],
        };
        let arrows = (0..x.orbits.len())
            .map(|i| if i == p.arrows[0].target { OrbitArrow::identity(0, n) } else { OrbitArrow::fresh(0, n) })
            .collect();
        let from_space = NomMorphism { dom: x.clone(), cod: atom, arrows };
        Ok(NormalForm { n, to_space, from_space })
    }

    /// The injection `n ↪ m` named by a deterministic map `⟨m⟩ → ⟨n⟩`.
    pub fn as_injection(&self, f: &NomMorphism) -> Option<Vec<u32>> {
        if f.arrows.len() != 1 {
            return None;
        }
        f.arrows[0].sigma.iter().copied().collect()
    }

    /// The deterministic map `⟨m⟩ → ⟨n⟩` given by an injection `n ↪ m`.
    pub fn from_injection(&self, m: u32, injection: &[u32]) -> Result<NomMorphism> {
        NomMorphism::new(
            NomObject::atomic(m),
            NomObject::atomic(injection.len() as u32),
            vec![OrbitArrow { target: 0, sigma: injection.iter().map(|&i| Some(i)).collect() }],
        )
    }
}

#[derive(Debug, Clone)]
pub struct NormalForm {
    pub n: usize,
    pub to_space: NomMorphism,
    pub from_space: NomMorphism,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::MarkovOps;

    fn atom() -> NomObject {
        NomObject::atomic(1)
    }

    #[test]
    fn two_maps_from_names_to_names() {
        let s = StrongName;
        let homs = s.hom(&atom(), &atom());
        assert_eq!(homs.len(), 2);
        let fresh = homs.iter().find(|f| !f.arrows[0].is_total()).unwrap();
        let c = s.compose(&s.id(&atom()), fresh).unwrap();
        assert_eq!(&c, fresh);
        assert_eq!(&s.compose(fresh, fresh).unwrap(), fresh);
        assert!(!s.is_deterministic(fresh));
    }

    #[test]
    fn product_of_two_names() {
        let s = StrongName;
        let (xy, tags) = s.orbit_product(&atom(), &atom());
        assert_eq!(xy.arities(), vec![1, 2]);
        assert_eq!(tags[0].shared, vec![(0, 0)]);
        assert!(tags[1].shared.is_empty());
        assert_eq!(s.states(&xy).len(), 2);
        let (p, _) = s.orbit_product(&atom(), &NomObject::atomic(2));
        let mut ar = p.arities();
        ar.sort();
        assert_eq!(ar, vec![2, 2, 3]);
        let (u, _) = s.orbit_product(&s.unit(), &NomObject::atomic(3));
        assert_eq!(u.arities(), vec![3]);
    }

    #[test]
    fn product_orbit_counts() {
        let s = StrongName;
        for (a, b, count) in [(2, 2, 7), (3, 2, 13), (3, 3, 34)] {
            let (p, _) = s.orbit_product(&NomObject::atomic(a), &NomObject::atomic(b));
            assert_eq!(p.orbits().len(), count);
        }
    }

    #[test]
    fn tensor_is_strictly_associative() {
        let s = StrongName;
        let x = NomObject::base(&[1, 0]).unwrap();
        let y = NomObject::atomic(2);
        let z = NomObject::base(&[1, 1]).unwrap();
        let l = s.tensor_obj(&s.tensor_obj(&x, &y), &z);
        let r = s.tensor_obj(&x, &s.tensor_obj(&y, &z));
        assert_eq!(l, r);
        assert_eq!(s.tensor_obj(&x, &s.unit()), x);
    }

    #[test]
    fn shared_name_conditional_is_identity() {
        let s = StrongName;
        let xy = s.tensor_obj(&atom(), &atom());
        let diag = s.state(&xy, 0);
        let c = s.conditional(&diag, &atom(), &atom()).unwrap();
        assert_eq!(c, s.id(&atom()));
        assert!(s.is_conditional(&diag, &c, &atom(), &atom()).unwrap());
        let apart = s.state(&xy, 1);
        let c = s.conditional(&apart, &atom(), &atom()).unwrap();
        assert!(!c.arrows[0].is_total());
        assert!(s.is_conditional(&apart, &c, &atom(), &atom()).unwrap());
    }

    #[test]
    fn split_support_of_orbit() {
        let s = StrongName;
        let x = NomObject::base(&[2, 3]).unwrap();
        let p = s.state(&x, 0);
        let sp = s.split_support(&p).unwrap();
        assert_eq!(sp.support.arities(), vec![2]);
        assert_eq!(s.compose(&sp.projection, &sp.inclusion).unwrap(), s.id(&sp.support));
        let ip = s.compose(&sp.inclusion, &sp.projection).unwrap();
        assert!(s.as_equal(&ip, &s.id(&x), &p).unwrap());
        assert_eq!(s.normal_form(&x, &p).unwrap().n, 2);
    }

    #[test]
    fn injection_round_trip() {
        let s = StrongName;
        let f = s.from_injection(3, &[2, 0]).unwrap();
        assert_eq!(s.as_injection(&f), Some(vec![2, 0]));
        assert!(s.is_deterministic(&f));
    }

    #[test]
    fn json_round_trip() {
        let s = StrongName;
        let x = NomObject::base(&[1, 2]).unwrap();
        assert_eq!(serde_json::to_string(&x).unwrap(), r#"{"orbits":[1,2]}"#);
        let xx = s.tensor_obj(&x, &x);
        let back: NomObject = serde_json::from_str(&serde_json::to_string(&xx).unwrap()).unwrap();
        assert_eq!(back, xx);
        let f = s.from_injection(2, &[1]).unwrap();
        let js = serde_json::to_string(&f).unwrap();
        assert_eq!(js, r#"{"dom":{"orbits":[2]},"cod":{"orbits":[1]},"arrows":[{"target":0,"sigma":[[0,1]]}]}"#);
        assert_eq!(serde_json::from_str::<NomMorphism>(&js).unwrap(), f);
        let c = s.copy(&xx);
        let back: NomMorphism = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
