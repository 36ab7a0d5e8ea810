//! Independent squares of sample spaces, relative products, and the
//! universal properties built from them.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::markov::{Fallback, Markov, MarkovOps};
use crate::spaces::{Kind, SampleSpace, SpaceMorphism, SpaceOps};

/// A commuting square of maps
///
/// ```text
///   Ω --f--> X
///   |        |
///   g        u
///   v        v
///   Y --v--> Z
/// ```
pub struct Square<M: Markov> {
    pub f: SpaceMorphism<M>,
    pub g: SpaceMorphism<M>,
    pub u: SpaceMorphism<M>,
    pub v: SpaceMorphism<M>,
}

impl<M: Markov> Clone for Square<M> {
    fn clone(&self) -> Self {
        Square { f: self.f.clone(), g: self.g.clone(), u: self.u.clone(), v: self.v.clone() }
    }
}

impl<M: Markov> fmt::Debug for Square<M> {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("Square")
            .field("p", self.omega().state())
            .field("f", self.f.rep())
            .field("g", self.g.rep())
            .field("u", self.u.rep())
            .field("v", self.v.rep())
            .finish()
    }
}

impl<M: Markov> Square<M> {
    pub fn omega(&self) -> &Arc<SampleSpace<M>> {
        self.f.dom()
    }

    pub fn x(&self) -> &Arc<SampleSpace<M>> {
        self.f.cod()
    }

    pub fn y(&self) -> &Arc<SampleSpace<M>> {
        self.g.cod()
    }

    pub fn z(&self) -> &Arc<SampleSpace<M>> {
        self.u.cod()
    }

    /// The same square with the roles of `X` and `Y` exchanged.
    pub fn transpose(&self) -> Square<M> {
        Square { f: self.g.clone(), g: self.f.clone(), u: self.v.clone(), v: self.u.clone() }
    }

    pub fn cospan(&self) -> Cospan<M> {
        Cospan { u1: self.u.clone(), u2: self.v.clone() }
    }
}

/// Two maps `X₁ → Y ← X₂` into a common space.
pub struct Cospan<M: Markov> {
    pub u1: SpaceMorphism<M>,
    pub u2: SpaceMorphism<M>,
}

impl<M: Markov> Clone for Cospan<M> {
    fn clone(&self) -> Self {
        Cospan { u1: self.u1.clone(), u2: self.u2.clone() }
    }
}

impl<M: Markov> fmt::Debug for Cospan<M> {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("Cospan").field("u1", self.u1.rep()).field("u2", self.u2.rep()).finish()
    }
}

/// All the equivalent ways of deciding independence, evaluated with one
/// choice of Bayesian inverses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Criteria {
    /// Whether `⟨f, g⟩ ∘ p` equals each of the six composites.
    pub verdicts: [bool; 6],
    /// Whether the six composites equal each other.
    pub composites_agree: bool,
    /// `g ∘ f† ≈ v† ∘ u` under the state of `X`.
    pub dagger: bool,
    /// `⟨f, d, g⟩ ∘ p = (u† ⊗ id ⊗ v†) ∘ copy₃ ∘ p_Z`.
    pub definitional: bool,
}

impl Criteria {
    /// The common verdict, if every criterion gives the same one.
    pub fn verdict(&self) -> Option<bool> {
        let v = self.verdicts[0];
        let same = self.composites_agree
            && self.verdicts.iter().all(|&w| w == v)
            && self.dagger == v
            && self.definitional == v;
        same.then_some(v)
    }
}

fn require_map<M: Markov>(f: &SpaceMorphism<M>, name: &str) -> Result<()> {
    if f.kind() == Kind::Map {
        Ok(())
    } else {
        Err(Error::NotDeterministic(format!("{name} is a channel, squares need maps")))
    }
}

/// Independence of squares and the constructions around it.
pub trait IndependenceOps: SpaceOps {
    fn square(
        &self,
        f: SpaceMorphism<Self>,
        g: SpaceMorphism<Self>,
        u: SpaceMorphism<Self>,
        v: SpaceMorphism<Self>,
    ) -> Result<Square<Self>> {
        for (leg, name) in [(&f, "f"), (&g, "g"), (&u, "u"), (&v, "v")] {
            require_map(leg, name)?;
        }
        self.expect_same_space(f.dom(), g.dom())?;
        self.expect_same_space(f.cod(), u.dom())?;
        self.expect_same_space(g.cod(), v.dom())?;
        self.expect_same_space(u.cod(), v.cod())?;
        let uf = self.space_compose(&u, &f)?;
        let vg = self.space_compose(&v, &g)?;
        if !self.space_eq(&uf, &vg)? {
            return Err(Error::NotCommuting(format!("u ∘ f = {:?}, v ∘ g = {:?}", uf.rep(), vg.rep())));
        }
        Ok(Square { f, g, u, v })
    }

    fn cospan(&self, u1: SpaceMorphism<Self>, u2: SpaceMorphism<Self>) -> Result<Cospan<Self>> {
        require_map(&u1, "u1")?;
        require_map(&u2, "u2")?;
        self.expect_same_space(u1.cod(), u2.cod())?;
        Ok(Cospan { u1, u2 })
    }

    /// The joint state `⟨f, g⟩ ∘ p` of the two legs.
    fn leg_joint(&self, sq: &Square<Self>) -> Result<Self::Mor> {
        self.compose(&self.pair(sq.f.rep(), sq.g.rep())?, sq.omega().state())
    }

    /// `(u† ⊗ v†) ∘ copy ∘ p_Z`.
    fn product_over(&self, u: &SpaceMorphism<Self>, v: &SpaceMorphism<Self>, fallback: Fallback) -> Result<Self::Mor> {
        let ud = self.bayes_inverse_with(u.rep(), u.dom().state(), fallback)?;
        let vd = self.bayes_inverse_with(v.rep(), v.dom().state(), fallback)?;
        let z = u.cod();
        self.chain(&[z.state(), &self.copy(z.object()), &self.tensor(&ud, &vd)])
    }

    /// Decides independence by comparing the leg joint with the product
    /// of the two Bayesian inverses over `Z`.
    fn is_independent(&self, sq: &Square<Self>) -> Result<bool> {
        Ok(self.mor_eq(&self.leg_joint(sq)?, &self.product_over(&sq.u, &sq.v, Fallback::Canonical)?))
    }

    /// Evaluates every characterization of independence.
    fn criteria(&self, sq: &Square<Self>, fallback: Fallback) -> Result<Criteria> {
        let (x, y, z) = (sq.x(), sq.y(), sq.z());
        let (ox, oy, oz) = (x.object(), y.object(), z.object());
        let p = sq.omega().state();
        let dag = |h: &Self::Mor, q: &Self::Mor| self.bayes_inverse_with(h, q, fallback);
        let ud = dag(sq.u.rep(), x.state())?;
        let vd = dag(sq.v.rep(), y.state())?;
        let fd = dag(sq.f.rep(), p)?;
        let d = self.compose(sq.u.rep(), sq.f.rep())?;
        let dd = dag(&d, p)?;
        let fdd = self.compose(sq.f.rep(), &dd)?;
        let gdd = self.compose(sq.g.rep(), &dd)?;
        let copy_z = self.compose(&self.copy(oz), z.state())?;
        let idx = self.id(ox);
        let idy = self.id(oy);

        let composites = [
            self.compose(&self.tensor(&ud, &vd), &copy_z)?,
            self.compose(&self.tensor(&fdd, &gdd), &copy_z)?,
            self.compose(&self.pair(&idx, &self.compose(&vd, sq.u.rep())?)?, x.state())?,
            self.compose(&self.pair(&self.compose(&ud, sq.v.rep())?, &idy)?, y.state())?,
            self.compose(&self.pair(&idx, &self.chain(&[sq.u.rep(), &dd, sq.g.rep()])?)?, x.state())?,
            self.compose(&self.pair(&self.chain(&[sq.v.rep(), &dd, sq.f.rep()])?, &idy)?, y.state())?,
        ];
        let joint = self.leg_joint(sq)?;
        let verdicts = composites.clone().map(|c| self.mor_eq(&joint, &c));
        let composites_agree = composites.iter().all(|c| self.mor_eq(c, &composites[0]));

        let gf = self.compose(sq.g.rep(), &fd)?;
        let vu = self.compose(&vd, sq.u.rep())?;
        let dagger = self.as_equal(&gf, &vu, x.state())?;

        let three = self.pair(sq.f.rep(), &self.pair(&d, sq.g.rep())?)?;
        let lhs = self.compose(&three, p)?;
        let copy3 = self.compose(&self.tensor(&self.id(oz), &self.copy(oz)), &self.copy(oz))?;
        let rhs = self.chain(&[z.state(), &copy3, &self.tensor(&ud, &self.tensor(&self.id(oz), &vd))])?;
        let definitional = self.mor_eq(&lhs, &rhs);

        Ok(Criteria { verdicts, composites_agree, dagger, definitional })
    }

    /// [`IndependenceOps::is_independent`], cross-checked against every
    /// other characterization under both fallbacks.
    fn is_independent_checked(&self, sq: &Square<Self>) -> Result<bool> {
        let verdict = self.is_independent(sq)?;
        for fallback in [Fallback::Canonical, Fallback::Alternate] {
            let c = self.criteria(sq, fallback)?;
            if c.verdict() != Some(verdict) {
                return Err(Error::Inconsistent(format!(
                    "independence criteria disagree ({fallback:?}): {c:?} vs verdict {verdict} on {sq:?}"
                )));
            }
        }
        Ok(verdict)
    }

    /// The relative product `(X₁ ⊗ X₂, ρ)` with its two projections.
    fn relative_product(&self, cs: &Cospan<Self>) -> Result<Square<Self>> {
        let rho = self.product_over(&cs.u1, &cs.u2, Fallback::Canonical)?;
        let apex = self.mk_space(rho)?;
        let (x1, x2) = (cs.u1.dom(), cs.u2.dom());
        let p1 = self.mk_map(&apex, x1, self.proj1(x1.object(), x2.object()))?;
        let p2 = self.mk_map(&apex, x2, self.proj2(x1.object(), x2.object()))?;
        self.square(p1, p2, cs.u1.clone(), cs.u2.clone())
    }

    /// `⟨f, g⟩` from the apex of `sq` into the relative product of its cospan.
    fn comparison(&self, sq: &Square<Self>) -> Result<SpaceMorphism<Self>> {
        let r = self.relative_product(&sq.cospan())?;
        self.space_pair(&sq.f, &sq.g, r.omega())
    }

    /// Independent, and the comparison map into the relative product is an
    /// isomorphism.
    fn is_independent_pullback(&self, sq: &Square<Self>) -> Result<bool> {
        if !self.is_independent(sq)? {
            return Ok(false);
        }
        self.is_unitary(&self.comparison(sq)?)
    }

    /// The unique map from the apex of an independent kite `(f₁, f₂)` over
    /// the cospan of `target` into the apex of `target`.
    fn pullback_mediator(
        &self,
        target: &Square<Self>,
        f1: &SpaceMorphism<Self>,
        f2: &SpaceMorphism<Self>,
    ) -> Result<SpaceMorphism<Self>> {
        let kite = self.square(f1.clone(), f2.clone(), target.u.clone(), target.v.clone())?;
        if !self.is_independent(&kite)? {
            return Err(Error::NotIndependent(
                "⟨f₁, f₂⟩ does not carry the kite state to the relative product state".into(),
            ));
        }
        let r = self.relative_product(&target.cospan())?;
        let h0 = self.space_pair(f1, f2, r.omega())?;
        let c = self.space_pair(&target.f, &target.g, r.omega())?;
        if !self.is_unitary(&c)? {
            return Err(Error::NotIndependent("target square is not an independent pullback".into()));
        }
        let h = self.as_map(&self.space_compose(&self.dagger(&c)?, &h0)?)?;
        let ok = self.space_eq(&self.space_compose(&target.f, &h)?, f1)?
            && self.space_eq(&self.space_compose(&target.g, &h)?, f2)?;
        if !ok {
            return Err(Error::Inconsistent("mediator does not factor the kite".into()));
        }
        Ok(h)
    }

    /// The unique `k : Z → W` with `k ∘ u = i` and `k ∘ v = j`, namely `i ∘ u†`.
    fn pushout_mediator(
        &self,
        sq: &Square<Self>,
        i: &SpaceMorphism<Self>,
        j: &SpaceMorphism<Self>,
    ) -> Result<SpaceMorphism<Self>> {
        require_map(i, "i")?;
        require_map(j, "j")?;
        let fi = self.space_compose(i, &sq.f)?;
        let gj = self.space_compose(j, &sq.g)?;
        if !self.space_eq(&fi, &gj)? {
            return Err(Error::NotCommuting("i ∘ f and j ∘ g differ".into()));
        }
        if !self.is_independent(sq)? {
            return Err(Error::NotIndependent("pushout mediators need an independent square".into()));
        }
        let k = self.space_compose(i, &self.dagger(&sq.u)?)?;
        let k_alt = self.space_compose(j, &self.dagger(&sq.v)?)?;
        let k = self.as_map(&k)?;
        let ok = self.space_eq(&k, &k_alt)?
            && self.space_eq(&self.space_compose(&k, &sq.u)?, i)?
            && self.space_eq(&self.space_compose(&k, &sq.v)?, j)?;
        if !ok {
            return Err(Error::Inconsistent("i ∘ u† does not mediate the cocone".into()));
        }
        Ok(k)
    }

    /// A channel `φ` from the apex of `outer` to the apex of `inner` with
    /// `f ∘ φ = f'` and `g ∘ φ = g'`, through the relative product.
    fn weak_mediator(&self, outer: &Square<Self>, inner: &Square<Self>) -> Result<SpaceMorphism<Self>> {
        let same = self.space_eq(&outer.u, &inner.u)? && self.space_eq(&outer.v, &inner.v)?;
        if !same {
            return Err(Error::InvalidMorphism("squares are over different cospans".into()));
        }
        if !self.is_independent(outer)? || !self.is_independent(inner)? {
            return Err(Error::NotIndependent("weak mediators need two independent squares".into()));
        }
        let r = self.relative_product(&inner.cospan())?;
        let h_outer = self.space_pair(&outer.f, &outer.g, r.omega())?;
        let h_inner = self.space_pair(&inner.f, &inner.g, r.omega())?;
        let phi = self.space_compose(&self.dagger(&h_inner)?, &h_outer)?;
        let ok = self.space_eq(&self.space_compose(&inner.f, &phi)?, &outer.f)?
            && self.space_eq(&self.space_compose(&inner.g, &phi)?, &outer.g)?;
        if !ok {
            return Err(Error::Inconsistent("weak mediator does not commute".into()));
        }
        Ok(phi)
    }
}

impl<M: Markov + Sized> IndependenceOps for M {}
