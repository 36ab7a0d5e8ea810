//! Probability spaces over a backend: the category of state-preserving
//! channels modulo almost-sure equality, and its wide subcategory of
//! almost surely deterministic maps.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::markov::{Fallback, Markov, MarkovOps, SplitSupport};

/// An object together with a state on it.
pub struct SampleSpace<M: Markov> {
    object: M::Obj,
    state: M::Mor,
    support: SplitSupport<M>,
}

impl<M: Markov> Clone for SampleSpace<M> {
    fn clone(&self) -> Self {
        SampleSpace {
            object: self.object.clone(),
            state: self.state.clone(),
            support: SplitSupport {
                support: self.support.support.clone(),
                inclusion: self.support.inclusion.clone(),
                projection: self.support.projection.clone(),
            },
        }
    }
}

impl<M: Markov> fmt::Debug for SampleSpace<M> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampleSpace").field("object", &self.object).field("state", &self.state).finish()
    }
}

impl<M: Markov> SampleSpace<M> {
    pub fn object(&self) -> &M::Obj {
        &self.object
    }

    pub fn state(&self) -> &M::Mor {
        &self.state
    }

    pub fn support(&self) -> &SplitSupport<M> {
        &self.support
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Channel,
    Map,
}

/// A state-preserving channel between sample spaces, stored as one
/// representative of its almost-sure equivalence class.
pub struct SpaceMorphism<M: Markov> {
    dom: Arc<SampleSpace<M>>,
    cod: Arc<SampleSpace<M>>,
    rep: M::Mor,
    kind: Kind,
}

impl<M: Markov> Clone for SpaceMorphism<M> {
    fn clone(&self) -> Self {
        SpaceMorphism { dom: self.dom.clone(), cod: self.cod.clone(), rep: self.rep.clone(), kind: self.kind }
    }
}

impl<M: Markov> fmt::Debug for SpaceMorphism<M> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpaceMorphism")
            .field("kind", &self.kind)
            .field("rep", &self.rep)
            .field("dom", &self.dom.state)
            .field("cod", &self.cod.state)
            .finish()
    }
}

impl<M: Markov> SpaceMorphism<M> {
    pub fn dom(&self) -> &Arc<SampleSpace<M>> {
        &self.dom
    }

    pub fn cod(&self) -> &Arc<SampleSpace<M>> {
        &self.cod
    }

    pub fn rep(&self) -> &M::Mor {
        &self.rep
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }
}

/// A joint state on `X ⊗ Y` whose marginals are the states of two spaces.
pub struct Coupling<M: Markov> {
    pub left: Arc<SampleSpace<M>>,
    pub right: Arc<SampleSpace<M>>,
    pub joint: M::Mor,
}

impl<M: Markov> Clone for Coupling<M> {
    fn clone(&self) -> Self {
        Coupling { left: self.left.clone(), right: self.right.clone(), joint: self.joint.clone() }
    }
}

impl<M: Markov> fmt::Debug for Coupling<M> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Coupling").field("joint", &self.joint).finish()
    }
}

/// Outcomes of the three equivalent tests for being a map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoisometryChecks {
    pub deterministic: bool,
    pub right_inverse: bool,
    pub diagonal_coupling: bool,
}

/// Sample spaces and their morphisms, for every backend.
pub trait SpaceOps: Markov + Sized {
    fn mk_space(&self, state: Self::Mor) -> Result<Arc<SampleSpace<Self>>> {
        self.expect_state(&state)?;
        let support = self.split_support(&state)?;
        Ok(Arc::new(SampleSpace { object: self.cod(&state), state, support }))
    }

    fn same_space(&self, a: &SampleSpace<Self>, b: &SampleSpace<Self>) -> bool {
        a.object == b.object && self.mor_eq(&a.state, &b.state)
    }

    fn expect_same_space(&self, a: &SampleSpace<Self>, b: &SampleSpace<Self>) -> Result<()> {
        if a.object != b.object {
            return Err(Error::mismatch(&a.object, &b.object));
        }
        if !self.mor_eq(&a.state, &b.state) {
            return Err(Error::NotStatePreserving(format!("states differ: {:?} vs {:?}", a.state, b.state)));
        }
        Ok(())
    }

    fn mk_channel(
        &self,
        dom: &Arc<SampleSpace<Self>>,
        cod: &Arc<SampleSpace<Self>>,
        rep: Self::Mor,
    ) -> Result<SpaceMorphism<Self>> {
        if self.dom(&rep) != dom.object {
            return Err(Error::mismatch(&dom.object, self.dom(&rep)));
        }
        if self.cod(&rep) != cod.object {
            return Err(Error::mismatch(&cod.object, self.cod(&rep)));
        }
        let pushed = self.compose(&rep, &dom.state)?;
        if !self.mor_eq(&pushed, &cod.state) {
            return Err(Error::NotStatePreserving(format!(
                "f ∘ p = {pushed:?} but the codomain state is {:?}",
                cod.state
            )));
        }
        Ok(SpaceMorphism { dom: dom.clone(), cod: cod.clone(), rep, kind: Kind::Channel })
    }

    fn mk_map(
        &self,
        dom: &Arc<SampleSpace<Self>>,
        cod: &Arc<SampleSpace<Self>>,
        rep: Self::Mor,
    ) -> Result<SpaceMorphism<Self>> {
        let f = self.mk_channel(dom, cod, rep)?;
        if !self.as_deterministic(&f.rep, &dom.state)? {
            return Err(Error::NotDeterministic(format!(
                "copy ∘ f and (f ⊗ f) ∘ copy differ on the support of p, f = {:?}",
                f.rep
            )));
        }
        Ok(SpaceMorphism { kind: Kind::Map, ..f })
    }

    /// Re-validates a channel as a map.
    fn as_map(&self, f: &SpaceMorphism<Self>) -> Result<SpaceMorphism<Self>> {
        self.mk_map(&f.dom, &f.cod, f.rep.clone())
    }

    /// The space `(Y, f ∘ p)` and `f` as a channel into it.
    fn push_forward(&self, dom: &Arc<SampleSpace<Self>>, rep: Self::Mor) -> Result<SpaceMorphism<Self>> {
        let cod = self.mk_space(self.compose(&rep, &dom.state)?)?;
        self.mk_channel(dom, &cod, rep)
    }

    /// Like [`SpaceOps::push_forward`], but insisting on a map.
    fn push_forward_map(&self, dom: &Arc<SampleSpace<Self>>, rep: Self::Mor) -> Result<SpaceMorphism<Self>> {
        let f = self.push_forward(dom, rep)?;
        self.as_map(&f)
    }

    /// The support of `x` as a space of its own, with its inclusion into `x`
    /// (an isomorphism).
    fn support_space(&self, x: &Arc<SampleSpace<Self>>) -> Result<SpaceMorphism<Self>> {
        let s = &x.support;
        let sp = self.mk_space(self.compose(&s.projection, &x.state)?)?;
        self.mk_map(&sp, x, s.inclusion.clone())
    }

    fn space_id(&self, x: &Arc<SampleSpace<Self>>) -> SpaceMorphism<Self> {
        SpaceMorphism { dom: x.clone(), cod: x.clone(), rep: self.id(&x.object), kind: Kind::Map }
    }

    /// `g ∘ f`; a map when both are.
    fn space_compose(&self, g: &SpaceMorphism<Self>, f: &SpaceMorphism<Self>) -> Result<SpaceMorphism<Self>> {
        self.expect_same_space(&f.cod, &g.dom)?;
        let kind = if f.kind == Kind::Map && g.kind == Kind::Map { Kind::Map } else { Kind::Channel };
        Ok(SpaceMorphism { dom: f.dom.clone(), cod: g.cod.clone(), rep: self.compose(&g.rep, &f.rep)?, kind })
    }

    /// Equality of parallel morphisms, almost surely under the domain state.
    fn space_eq(&self, f: &SpaceMorphism<Self>, g: &SpaceMorphism<Self>) -> Result<bool> {
        self.expect_same_space(&f.dom, &g.dom)?;
        self.expect_same_space(&f.cod, &g.cod)?;
        self.as_equal(&f.rep, &g.rep, &f.dom.state)
    }

    fn dagger_with(&self, f: &SpaceMorphism<Self>, fallback: Fallback) -> Result<SpaceMorphism<Self>> {
        let rep = self.bayes_inverse_with(&f.rep, &f.dom.state, fallback)?;
        Ok(SpaceMorphism { dom: f.cod.clone(), cod: f.dom.clone(), rep, kind: Kind::Channel })
    }

    fn dagger(&self, f: &SpaceMorphism<Self>) -> Result<SpaceMorphism<Self>> {
        self.dagger_with(f, Fallback::Canonical)
    }

    fn is_map(&self, f: &SpaceMorphism<Self>) -> Result<bool> {
        self.as_deterministic(&f.rep, &f.dom.state)
    }

    /// Runs the three characterizations of maps separately.
    fn coisometry_checks(&self, f: &SpaceMorphism<Self>) -> Result<CoisometryChecks> {
        let deterministic = self.is_map(f)?;
        let dag = self.dagger(f)?;
        let round = self.space_compose(f, &dag)?;
        let right_inverse = self.as_equal(&round.rep, &self.id(&f.cod.object), &f.cod.state)?;
        let diagonal = self.compose(&self.copy(&f.cod.object), &f.cod.state)?;
        let diagonal_coupling = self.mor_eq(&self.graph_state(&round.rep, &f.cod.state)?, &diagonal);
        Ok(CoisometryChecks { deterministic, right_inverse, diagonal_coupling })
    }

    /// `f ∘ f† = id`; fails if the equivalent characterizations disagree.
    fn is_coisometry(&self, f: &SpaceMorphism<Self>) -> Result<bool> {
        let c = self.coisometry_checks(f)?;
        if c.deterministic == c.right_inverse && c.right_inverse == c.diagonal_coupling {
            Ok(c.deterministic)
        } else {
            Err(Error::Inconsistent(format!("map characterizations disagree: {c:?} for {f:?}")))
        }
    }

    /// `f` is an isomorphism: a map whose dagger is a map inverse to it.
    fn is_unitary(&self, f: &SpaceMorphism<Self>) -> Result<bool> {
        let dag = self.dagger(f)?;
        Ok(self.is_map(f)?
            && self.as_deterministic(&dag.rep, &dag.dom.state)?
            && self.space_eq(&self.space_compose(&dag, f)?, &self.space_id(&f.dom))?
            && self.space_eq(&self.space_compose(f, &dag)?, &self.space_id(&f.cod))?)
    }

    fn to_coupling(&self, f: &SpaceMorphism<Self>) -> Result<Coupling<Self>> {
        Ok(Coupling { left: f.dom.clone(), right: f.cod.clone(), joint: self.graph_state(&f.rep, &f.dom.state)? })
    }

    fn mk_coupling(
        &self,
        left: &Arc<SampleSpace<Self>>,
        right: &Arc<SampleSpace<Self>>,
        joint: Self::Mor,
    ) -> Result<Coupling<Self>> {
        self.expect_state(&joint)?;
        let (x, y) = (&left.object, &right.object);
        if self.cod(&joint) != self.tensor_obj(x, y) {
            return Err(Error::mismatch(self.tensor_obj(x, y), self.cod(&joint)));
        }
        if !self.mor_eq(&self.marginal1(&joint, x, y)?, &left.state) {
            return Err(Error::NotStatePreserving("first marginal differs from the left state".into()));
        }
        if !self.mor_eq(&self.marginal2(&joint, x, y)?, &right.state) {
            return Err(Error::NotStatePreserving("second marginal differs from the right state".into()));
        }
        Ok(Coupling { left: left.clone(), right: right.clone(), joint })
    }

    fn from_coupling(&self, c: &Coupling<Self>) -> Result<SpaceMorphism<Self>> {
        let rep = self.conditional(&c.joint, &c.left.object, &c.right.object)?;
        self.mk_channel(&c.left, &c.right, rep)
    }

    fn coupling_swap(&self, c: &Coupling<Self>) -> Result<Coupling<Self>> {
        let joint = self.compose(&self.swap(&c.left.object, &c.right.object), &c.joint)?;
        Ok(Coupling { left: c.right.clone(), right: c.left.clone(), joint })
    }

    fn coupling_eq(&self, a: &Coupling<Self>, b: &Coupling<Self>) -> bool {
        self.same_space(&a.left, &b.left) && self.same_space(&a.right, &b.right) && self.mor_eq(&a.joint, &b.joint)
    }

    /// `(X ⊗ Y, p ⊗ q)`.
    fn tensor_space(&self, a: &SampleSpace<Self>, b: &SampleSpace<Self>) -> Result<Arc<SampleSpace<Self>>> {
        self.mk_space(self.tensor(&a.state, &b.state))
    }

    /// The two projections out of a space whose object is `X ⊗ Y`.
    fn projections(
        &self,
        joint: &Arc<SampleSpace<Self>>,
        x: &Self::Obj,
        y: &Self::Obj,
    ) -> Result<(SpaceMorphism<Self>, SpaceMorphism<Self>)> {
        let p1 = self.push_forward(joint, self.proj1(x, y))?;
        let p2 = self.push_forward(joint, self.proj2(x, y))?;
        Ok((SpaceMorphism { kind: Kind::Map, ..p1 }, SpaceMorphism { kind: Kind::Map, ..p2 }))
    }

    /// `⟨f, g⟩` into a given space on `X ⊗ Y`, checked to preserve its state.
    fn space_pair(
        &self,
        f: &SpaceMorphism<Self>,
        g: &SpaceMorphism<Self>,
        target: &Arc<SampleSpace<Self>>,
    ) -> Result<SpaceMorphism<Self>> {
        self.expect_same_space(&f.dom, &g.dom)?;
        let h = self.mk_channel(&f.dom, target, self.pair(&f.rep, &g.rep)?)?;
        let kind = if f.kind == Kind::Map && g.kind == Kind::Map { Kind::Map } else { Kind::Channel };
        Ok(SpaceMorphism { kind, ..h })
    }
}

impl<M: Markov + Sized> SpaceOps for M {}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;

    use super::*;
    use crate::finstoch::{rational, FinStoch, StochMatrix};
    use crate::gauss::{Gauss, GaussMorphism};

    fn parity() -> StochMatrix {
        StochMatrix::from_function(2, &[0, 1, 1, 0]).unwrap()
    }

    #[test]
    fn uniform_identity_is_a_map() {
        let m = FinStoch;
        let s = m.mk_space(StochMatrix::uniform(2)).unwrap();
        let f = m.mk_map(&s, &s, m.id(&2)).unwrap();
        assert_eq!(f.kind(), Kind::Map);
        assert!(m.is_coisometry(&f).unwrap());
    }

    #[test]
    fn gauss_average_is_a_map() {
        let m = Gauss::default();
        let r2 = m.mk_space(GaussMorphism::standard_normal(2)).unwrap();
        let r1 = m.mk_space(GaussMorphism::standard_normal(1)).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let a = GaussMorphism::linear(DMatrix::from_row_slice(1, 2, &[h, h]));
        let f = m.mk_map(&r2, &r1, a).unwrap();
        assert!(m.is_coisometry(&f).unwrap());
        let halves = GaussMorphism::linear(DMatrix::from_row_slice(1, 2, &[0.5, 0.5]));
        assert!(matches!(m.mk_map(&r2, &r1, halves), Err(Error::NotStatePreserving(_))));
    }

    #[test]
    fn coin_from_a_point() {
        let m = FinStoch;
        let point = m.mk_space(StochMatrix::uniform(1)).unwrap();
        let fair = m.mk_space(StochMatrix::uniform(2)).unwrap();
        let coin = StochMatrix::uniform(2);
        assert!(matches!(m.mk_map(&point, &fair, coin.clone()), Err(Error::NotDeterministic(_))));
        let f = m.mk_channel(&point, &fair, coin.clone()).unwrap();
        assert!(!m.is_coisometry(&f).unwrap());
        let biased = m.mk_space(StochMatrix::state(vec![rational(1, 3), rational(2, 3)]).unwrap()).unwrap();
        assert!(matches!(m.mk_channel(&point, &biased, coin), Err(Error::NotStatePreserving(_))));
    }

    #[test]
    fn dagger_of_parity() {
        let m = FinStoch;
        let bits = m.mk_space(StochMatrix::uniform(4)).unwrap();
        let f = m.push_forward_map(&bits, parity()).unwrap();
        let dag = m.dagger(&f).unwrap();
        let half = rational(1, 2);
        let zero = rational(0, 1);
        for w in 0..4 {
            let b = parity().as_function().unwrap()[w];
            assert_eq!(dag.rep().get(w, b), half);
            assert_eq!(dag.rep().get(w, 1 - b), zero);
        }
        let back = m.dagger(&dag).unwrap();
        assert!(m.space_eq(&back, &f).unwrap());
    }

    #[test]
    fn unitary_dagger_is_inverse() {
        let m = FinStoch;
        let s = m.mk_space(StochMatrix::state(vec![rational(1, 2), rational(1, 3), rational(1, 6)]).unwrap()).unwrap();
        let perm = StochMatrix::from_function(3, &[2, 0, 1]).unwrap();
        let f = m.push_forward_map(&s, perm.clone()).unwrap();
        assert!(m.is_unitary(&f).unwrap());
        let inverse = StochMatrix::from_function(3, &[1, 2, 0]).unwrap();
        assert!(m.mor_eq(m.dagger(&f).unwrap().rep(), &inverse));
    }

    #[test]
    fn gauss_dagger_is_transpose() {
        let m = Gauss::default();
        let r2 = m.mk_space(GaussMorphism::standard_normal(2)).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let a = DMatrix::from_row_slice(1, 2, &[h, h]);
        let f = m.push_forward_map(&r2, GaussMorphism::linear(a.clone())).unwrap();
        let dag = m.dagger(&f).unwrap();
        assert!(m.close(dag.rep().matrix(), &a.transpose()));
        assert!(m.close(dag.rep().covariance(), &(DMatrix::identity(2, 2) - a.transpose() * &a)));
        assert!(dag.rep().offset().iter().all(|b| b.abs() < 1e-12));
    }

    #[test]
    fn couplings() {
        let m = FinStoch;
        let coin = m.mk_space(StochMatrix::uniform(2)).unwrap();
        let c = m.to_coupling(&m.space_id(&coin)).unwrap();
        let diagonal = m.compose(&m.copy(&2), coin.state()).unwrap();
        assert!(m.mor_eq(&c.joint, &diagonal));
        assert!(m.coupling_eq(&m.coupling_swap(&c).unwrap(), &c));

        let bits = m.mk_space(StochMatrix::uniform(4)).unwrap();
        let f = m.push_forward_map(&bits, parity()).unwrap();
        let c = m.to_coupling(&f).unwrap();
        let quarter = rational(1, 4);
        let zero = rational(0, 1);
        let probs = c.joint.probabilities();
        assert_eq!(probs.len(), 8);
        for w in 0..4 {
            for b in 0..2 {
                let expected = if parity().as_function().unwrap()[w] == b { &quarter } else { &zero };
                assert_eq!(&probs[w * 2 + b], expected);
            }
        }
        let back = m.from_coupling(&c).unwrap();
        assert!(m.space_eq(&back, &f).unwrap());
        let swapped = m.from_coupling(&m.coupling_swap(&c).unwrap()).unwrap();
        assert!(m.space_eq(&swapped, &m.dagger(&f).unwrap()).unwrap());
        let bad = m.mk_coupling(&coin, &bits, m.tensor(coin.state(), &StochMatrix::point(4, 0)));
        assert!(matches!(bad, Err(Error::NotStatePreserving(_))));
    }
}
