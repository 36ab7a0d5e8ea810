//! Nondeterminism: finite sets and left-total relations.
//!
//! A relation `X → Y` is stored as one bit row per element of `X` listing
//! the related elements of `Y`. Products of sets are flattened like
//! [`FinStoch`](crate::finstoch::FinStoch): `(x, y) ↦ x·|Y| + y`.

use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::independence::{IndependenceOps, Square};
use crate::markov::{Fallback, Markov, SplitSupport};
use crate::spaces::SpaceOps;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TotalRelation {
    cod: usize,
    image: Vec<FixedBitSet>,
}

impl TotalRelation {
    pub fn new(dom: usize, cod: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut image = vec![FixedBitSet::with_capacity(cod); dom];
        for (x, y) in pairs {
            if x >= dom || y >= cod {
                return Err(Error::InvalidMorphism(format!("pair ({x}, {y}) outside {dom} x {cod}")));
            }
            image[x].insert(y);
        }
        Self::from_image(cod, image)
    }

    pub fn from_image(cod: usize, image: Vec<FixedBitSet>) -> Result<Self> {
        if let Some(x) = image.iter().position(|row| row.is_clear()) {
            return Err(Error::InvalidMorphism(format!("element {x} has no image; relation is not left-total")));
        }
        let image = image
            .into_iter()
            .map(|mut row| {
                row.grow(cod);
                row
            })
            .collect::<Vec<_>>();
        if image.iter().any(|row| row.len() != cod) {
            return Err(Error::InvalidMorphism("image row longer than the codomain".into()));
        }
        Ok(TotalRelation { cod, image })
    }

    pub fn from_function(cod: usize, table: &[usize]) -> Result<Self> {
        Self::new(table.len(), cod, table.iter().copied().enumerate())
    }

    /// The state given by a nonempty subset.
    pub fn subset(cod: usize, elems: impl IntoIterator<Item = usize>) -> Result<Self> {
        Self::new(1, cod, elems.into_iter().map(|y| (0, y)))
    }

    pub fn dom_size(&self) -> usize {
        self.image.len()
    }

    pub fn cod_size(&self) -> usize {
        self.cod
    }

    pub fn image(&self, x: usize) -> &FixedBitSet {
        &self.image[x]
    }

    pub fn related(&self, x: usize, y: usize) -> bool {
        self.image[x].contains(y)
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.image
            .iter()
            .enumerate()
            .flat_map(|(x, row)| row.ones().map(move |y| (x, y)))
            .collect()
    }

    /// The function this relation represents, if it is single-valued.
    pub fn as_function(&self) -> Option<Vec<usize>> {
        self.image
            .iter()
            .map(|row| if row.count_ones(..) == 1 { row.minimum() } else { None })
            .collect()
    }

    /// Elements of a state.
    pub fn elements(&self) -> Vec<usize> {
        self.image[0].ones().collect()
    }
}

impl fmt::Debug for TotalRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TotalRelation({} -> {}, {:?})", self.dom_size(), self.cod, self.pairs())
    }
}

#[derive(Serialize, Deserialize)]
struct RelationRepr {
    dom: usize,
    cod: usize,
    pairs: Vec<(usize, usize)>,
}

impl Serialize for TotalRelation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RelationRepr { dom: self.dom_size(), cod: self.cod, pairs: self.pairs() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TotalRelation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = RelationRepr::deserialize(d)?;
        TotalRelation::new(repr.dom, repr.cod, repr.pairs).map_err(serde::de::Error::custom)
    }
}

/// The Markov category of finite sets and left-total relations.
#[derive(Debug, Clone, Copy, Default)]
pub struct SetMulti;

impl Markov for SetMulti {
    type Obj = usize;
    type Mor = TotalRelation;

    fn name(&self) -> &'static str {
        "setmulti"
    }

    fn unit(&self) -> usize {
        1
    }

    fn tensor_obj(&self, x: &usize, y: &usize) -> usize {
        x * y
    }

    fn dom(&self, f: &TotalRelation) -> usize {
        f.dom_size()
    }

    fn cod(&self, f: &TotalRelation) -> usize {
        f.cod
    }

    fn id(&self, x: &usize) -> TotalRelation {
        TotalRelation::new(*x, *x, (0..*x).map(|i| (i, i))).expect("identity is total")
    }

    fn compose(&self, g: &TotalRelation, f: &TotalRelation) -> Result<TotalRelation> {
        if f.cod != g.dom_size() {
            return Err(Error::mismatch(f.cod, g.dom_size()));
        }
        let image = f
            .image
            .iter()
            .map(|row| {
                let mut out = FixedBitSet::with_capacity(g.cod);
                for y in row.ones() {
                    out.union_with(&g.image[y]);
                }
                out
            })
            .collect();
        Ok(TotalRelation { cod: g.cod, image })
    }

    fn tensor(&self, f: &TotalRelation, g: &TotalRelation) -> TotalRelation {
        let cod = f.cod * g.cod;
        let mut image = Vec::with_capacity(f.dom_size() * g.dom_size());
        for fa in &f.image {
            for gb in &g.image {
                let mut row = FixedBitSet::with_capacity(cod);
                for x in fa.ones() {
                    for y in gb.ones() {
                        row.insert(x * g.cod + y);
                    }
                }
                image.push(row);
            }
        }
        TotalRelation { cod, image }
    }

    fn copy(&self, x: &usize) -> TotalRelation {
        TotalRelation::new(*x, x * x, (0..*x).map(|i| (i, i * x + i))).expect("copy is total")
    }

    fn del(&self, x: &usize) -> TotalRelation {
        TotalRelation::new(*x, 1, (0..*x).map(|i| (i, 0))).expect("delete is total")
    }

    fn swap(&self, x: &usize, y: &usize) -> TotalRelation {
        let pairs = (0..*x).flat_map(|i| (0..*y).map(move |j| (i * y + j, j * x + i)));
        TotalRelation::new(x * y, x * y, pairs).expect("swap is total")
    }

    fn mor_eq(&self, f: &TotalRelation, g: &TotalRelation) -> bool {
        f == g
    }

    fn is_deterministic(&self, f: &TotalRelation) -> bool {
        f.image.iter().all(|s| s.count_ones(..) == 1)
    }

    fn pair(&self, f: &TotalRelation, g: &TotalRelation) -> Result<TotalRelation> {
        if f.image.len() != g.image.len() {
            return Err(Error::mismatch(f.image.len(), g.image.len()));
        }
        let cod = f.cod * g.cod;
        let image = f
            .image
            .iter()
            .zip(&g.image)
            .map(|(a, b)| {
                let mut s = FixedBitSet::with_capacity(cod);
                for x in a.ones() {
                    for y in b.ones() {
                        s.insert(x * g.cod + y);
                    }
                }
                s
            })
            .collect();
        Ok(TotalRelation { cod, image })
    }

    /// `f|X(x, a) = {y : (x, y) ∈ f(a)}`; an empty fiber becomes all of `Y`
    /// (canonical) or the last element of `Y` (alternate).
    fn conditional_with(&self, f: &TotalRelation, x: &usize, y: &usize, fallback: Fallback) -> Result<TotalRelation> {
        let (nx, ny) = (*x, *y);
        if f.cod != nx * ny {
            return Err(Error::mismatch(nx * ny, f.cod));
        }
        if ny == 0 {
            return Err(Error::InvalidObject("conditional into the empty set".into()));
        }
        let na = f.dom_size();
        let mut image = Vec::with_capacity(nx * na);
        for xi in 0..nx {
            for fa in &f.image {
                let mut row = FixedBitSet::with_capacity(ny);
                for yi in 0..ny {
                    if fa.contains(xi * ny + yi) {
                        row.insert(yi);
                    }
                }
                if row.is_clear() {
                    match fallback {
                        Fallback::Canonical => row.insert_range(..),
                        Fallback::Alternate => row.insert(ny - 1),
                    }
                }
                image.push(row);
            }
        }
        Ok(TotalRelation { cod: ny, image })
    }

    fn split_support(&self, p: &TotalRelation) -> Result<SplitSupport<Self>> {
        if p.dom_size() != 1 {
            return Err(Error::NotAState(p.dom_size().to_string()));
        }
        let support = p.elements();
        let inclusion = TotalRelation::from_function(p.cod, &support)?;
        let table: Vec<usize> = (0..p.cod)
            .map(|x| support.iter().position(|&s| s == x).unwrap_or(0))
            .collect();
        let projection = TotalRelation::from_function(support.len(), &table)?;
        Ok(SplitSupport { support: support.len(), inclusion, projection })
    }
}

/// Commuting square of functions `f: Ω → X`, `g: Ω → Y`, `u: X → Z`, `v: Y → Z`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionSquare {
    pub f: Vec<usize>,
    pub g: Vec<usize>,
    pub u: Vec<usize>,
    pub v: Vec<usize>,
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

impl FunctionSquare {
    /// Checks that all four legs are surjective functions and the square commutes.
    pub fn validate(&self) -> Result<()> {
        let legs = [("f", &self.f, self.x), ("g", &self.g, self.y), ("u", &self.u, self.z), ("v", &self.v, self.z)];
        for (name, table, cod) in legs {
            let mut hit = vec![false; cod];
            for &t in table.iter() {
                if t >= cod {
                    return Err(Error::InvalidMorphism(format!("{name} maps outside its codomain")));
                }
                hit[t] = true;
            }
            if hit.iter().any(|h| !h) {
                return Err(Error::InvalidMorphism(format!("{name} is not surjective")));
            }
        }
        if self.u.len() != self.x || self.v.len() != self.y || self.f.len() != self.g.len() {
            return Err(Error::InvalidMorphism("square legs do not fit together".into()));
        }
        if self.f.iter().zip(&self.g).any(|(&a, &b)| self.u[a] != self.v[b]) {
            return Err(Error::NotCommuting("u∘f ≠ v∘g".into()));
        }
        Ok(())
    }

    /// Whether every pair `(x, y)` with `u(x) = v(y)` is hit by some `ω`.
    pub fn is_weak_pullback(&self) -> Result<bool> {
        self.validate()?;
        let mut hit = vec![false; self.x * self.y];
        for (&a, &b) in self.f.iter().zip(&self.g) {
            hit[a * self.y + b] = true;
        }
        Ok((0..self.x).all(|a| (0..self.y).all(|b| self.u[a] != self.v[b] || hit[a * self.y + b])))
    }

    /// The square as maps between faithful spaces.
    pub fn to_square(&self) -> Result<Square<SetMulti>> {
        self.validate()?;
        let m = SetMulti;
        let space = |n: usize| m.mk_space(TotalRelation::subset(n, 0..n)?);
        let (omega, x, y, z) = (space(self.f.len())?, space(self.x)?, space(self.y)?, space(self.z)?);
        m.square(
            m.mk_map(&omega, &x, TotalRelation::from_function(self.x, &self.f)?)?,
            m.mk_map(&omega, &y, TotalRelation::from_function(self.y, &self.g)?)?,
            m.mk_map(&x, &z, TotalRelation::from_function(self.z, &self.u)?)?,
            m.mk_map(&y, &z, TotalRelation::from_function(self.z, &self.v)?)?,
        )
    }

    /// Independence decided by the generic criteria, required to match
    /// [`FunctionSquare::is_weak_pullback`].
    pub fn generic_vs_weak_pullback(&self) -> Result<bool> {
        let generic = SetMulti.is_independent_checked(&self.to_square()?)?;
        let weak = self.is_weak_pullback()?;
        if generic != weak {
            return Err(Error::Inconsistent(format!(
                "generic independence says {generic}, weak pullback says {weak} for {self:?}"
            )));
        }
        Ok(weak)
    }
}
