//! Random elements over sample spaces: restriction, invariance under a
//! map, gluing along it, laws, and the pullback test for independent squares.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::finstoch::{FinStoch, StochMatrix};
use crate::independence::{IndependenceOps, Square};
use crate::markov::{Markov, MarkovOps};
use crate::spaces::{SampleSpace, SpaceMorphism};

/// An almost surely deterministic morphism out of a sample space, up to
/// almost-sure equality.
pub struct RandomElement<M: Markov> {
    base: Arc<SampleSpace<M>>,
    rep: M::Mor,
}

impl<M: Markov> Clone for RandomElement<M> {
    fn clone(&self) -> Self {
        RandomElement { base: self.base.clone(), rep: self.rep.clone() }
    }
}

impl<M: Markov> fmt::Debug for RandomElement<M> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RandomElement").field("base", &self.base.state()).field("rep", &self.rep).finish()
    }
}

impl<M: Markov> RandomElement<M> {
    pub fn base(&self) -> &Arc<SampleSpace<M>> {
        &self.base
    }

    pub fn rep(&self) -> &M::Mor {
        &self.rep
    }
}

/// `e = π† ∘ π` for a map `π`.
pub struct CondExpectation<M: Markov> {
    pub pi: SpaceMorphism<M>,
    pub e: SpaceMorphism<M>,
}

impl<M: Markov> fmt::Debug for CondExpectation<M> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CondExpectation").field("pi", self.pi.rep()).field("e", self.e.rep()).finish()
    }
}

/// Outcome of testing that a presheaf turns a square into a pullback.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PullbackCheck {
    /// Pairs `(a, b)` over `X` and `Y` with `a · f = b · g`.
    pub matching_pairs: usize,
    /// Elements over `Z`.
    pub elements: usize,
    pub failure: Option<String>,
}

impl PullbackCheck {
    pub fn holds(&self) -> bool {
        self.failure.is_none()
    }
}

pub trait SheafOps: IndependenceOps {
    fn random_element(&self, base: &Arc<SampleSpace<Self>>, rep: Self::Mor) -> Result<RandomElement<Self>> {
        if self.dom(&rep) != *base.object() {
            return Err(Error::mismatch(base.object(), self.dom(&rep)));
        }
        if !self.as_deterministic(&rep, base.state())? {
            return Err(Error::NotDeterministic(format!("random element {rep:?}")));
        }
        Ok(RandomElement { base: base.clone(), rep })
    }

    fn re_eq(&self, x: &RandomElement<Self>, y: &RandomElement<Self>) -> Result<bool> {
        self.expect_same_space(&x.base, &y.base)?;
        if self.cod(&x.rep) != self.cod(&y.rep) {
            return Ok(false);
        }
        self.as_equal(&x.rep, &y.rep, x.base.state())
    }

    /// `X · π = X ∘ π`.
    fn restrict(&self, x: &RandomElement<Self>, pi: &SpaceMorphism<Self>) -> Result<RandomElement<Self>> {
        self.expect_same_space(pi.cod(), &x.base)?;
        let rep = self.compose(&x.rep, pi.rep())?;
        if pi.kind() == crate::spaces::Kind::Map {
            Ok(RandomElement { base: pi.dom().clone(), rep })
        } else {
            self.random_element(pi.dom(), rep)
        }
    }

    /// `X ∘ p`.
    fn law(&self, x: &RandomElement<Self>) -> Result<Self::Mor> {
        self.compose(&x.rep, x.base.state())
    }

    fn cond_expectation(&self, pi: &SpaceMorphism<Self>) -> Result<CondExpectation<Self>> {
        let e = self.space_compose(&self.dagger(pi)?, pi)?;
        Ok(CondExpectation { pi: pi.clone(), e })
    }

    /// `e ∘ e = e`.
    fn is_idempotent(&self, c: &CondExpectation<Self>) -> Result<bool> {
        self.space_eq(&self.space_compose(&c.e, &c.e)?, &c.e)
    }

    /// `e† = e`.
    fn is_self_adjoint(&self, c: &CondExpectation<Self>) -> Result<bool> {
        self.space_eq(&self.dagger(&c.e)?, &c.e)
    }

    /// `⟨id, π⟩ ∘ e ≈ ⟨e, π⟩`.
    fn is_strong_idempotent(&self, c: &CondExpectation<Self>) -> Result<bool> {
        let omega = c.pi.dom().object();
        let lhs = self.compose(&self.pair(&self.id(omega), c.pi.rep())?, c.e.rep())?;
        let rhs = self.pair(c.e.rep(), c.pi.rep())?;
        self.as_equal(&lhs, &rhs, c.pi.dom().state())
    }

    /// `Y ≈ Y ∘ π† ∘ π`.
    fn is_invariant(&self, y: &RandomElement<Self>, pi: &SpaceMorphism<Self>) -> Result<bool> {
        self.expect_same_space(&y.base, pi.dom())?;
        let e = self.cond_expectation(pi)?;
        self.as_equal(&y.rep, &self.compose(&y.rep, e.e.rep())?, y.base.state())
    }

    /// Invariance tested on the kernel pair of `π`: the two legs `ρ, ρ'` of
    /// the relative product of `π` with itself satisfy `π ρ = π ρ'`, and `Y`
    /// is invariant iff `Y ρ ≈ Y ρ'`.
    fn is_invariant_kernel_pair(&self, y: &RandomElement<Self>, pi: &SpaceMorphism<Self>) -> Result<bool> {
        self.expect_same_space(&y.base, pi.dom())?;
        let kernel = self.relative_product(&self.cospan(pi.clone(), pi.clone())?)?;
        let a = self.restrict(y, &kernel.f)?;
        let b = self.restrict(y, &kernel.g)?;
        self.re_eq(&a, &b)
    }

    /// The unique `X` over the codomain of `π` with `X · π = Y`, namely `Y ∘ π†`.
    fn glue(&self, y: &RandomElement<Self>, pi: &SpaceMorphism<Self>) -> Result<RandomElement<Self>> {
        if !self.is_invariant(y, pi)? {
            return Err(Error::NotInvariant(format!("Y and Y ∘ π† ∘ π differ on the support, Y = {:?}", y.rep)));
        }
        let rep = self.compose(&y.rep, self.dagger(pi)?.rep())?;
        self.random_element(pi.cod(), rep)
    }

    /// `h ∘ X` for deterministic `h`.
    fn re_map(&self, h: &Self::Mor, x: &RandomElement<Self>) -> Result<RandomElement<Self>> {
        if !self.is_deterministic(h) {
            return Err(Error::NotDeterministic(format!("{h:?}")));
        }
        Ok(RandomElement { base: x.base.clone(), rep: self.compose(h, &x.rep)? })
    }

    /// `⟨X, Y⟩`, a random element of `U ⊗ V`.
    fn re_pair(&self, x: &RandomElement<Self>, y: &RandomElement<Self>) -> Result<RandomElement<Self>> {
        self.expect_same_space(&x.base, &y.base)?;
        Ok(RandomElement { base: x.base.clone(), rep: self.pair(&x.rep, &y.rep)? })
    }

    /// The two components of a random element of `U ⊗ V`.
    fn re_split(
        &self,
        z: &RandomElement<Self>,
        u: &Self::Obj,
        v: &Self::Obj,
    ) -> Result<(RandomElement<Self>, RandomElement<Self>)> {
        Ok((self.re_map(&self.proj1(u, v), z)?, self.re_map(&self.proj2(u, v), z)?))
    }

    /// Checks that restriction along the legs of `sq` turns the given
    /// element sets into a pullback of sets: every pair over `X` and `Y`
    /// agreeing over `Ω` comes from exactly one element over `Z`.
    fn sheaf_pullback_check(
        &self,
        sq: &Square<Self>,
        elements: &dyn Fn(&Arc<SampleSpace<Self>>) -> Result<Vec<RandomElement<Self>>>,
    ) -> Result<PullbackCheck> {
        let zs = elements(sq.z())?;
        let xs = elements(sq.x())?;
        let ys = elements(sq.y())?;
        let zu: Vec<_> = zs.iter().map(|c| self.restrict(c, &sq.u)).collect::<Result<_>>()?;
        let zv: Vec<_> = zs.iter().map(|c| self.restrict(c, &sq.v)).collect::<Result<_>>()?;
        let xf: Vec<_> = xs.iter().map(|a| self.restrict(a, &sq.f)).collect::<Result<_>>()?;
        let yg: Vec<_> = ys.iter().map(|b| self.restrict(b, &sq.g)).collect::<Result<_>>()?;
        let mut matching_pairs = 0;
        for (a, af) in xs.iter().zip(&xf) {
            for (b, bg) in ys.iter().zip(&yg) {
                if !self.re_eq(af, bg)? {
                    continue;
                }
                matching_pairs += 1;
                let mut glued = 0;
                for (cu, cv) in zu.iter().zip(&zv) {
                    if self.re_eq(cu, a)? && self.re_eq(cv, b)? {
                        glued += 1;
                    }
                }
                if glued != 1 {
                    return Ok(PullbackCheck {
                        matching_pairs,
                        elements: zs.len(),
                        failure: Some(format!("{glued} elements over Z restrict to a = {a:?}, b = {b:?}")),
                    });
                }
            }
        }
        Ok(PullbackCheck { matching_pairs, elements: zs.len(), failure: None })
    }
}

impl<M: Markov + Sized> SheafOps for M {}

/// All random elements of a finite space valued in `v` points: one per
/// function from the support, sending every other point to `0`.
pub fn finstoch_elements(space: &Arc<SampleSpace<FinStoch>>, v: usize) -> Result<Vec<RandomElement<FinStoch>>> {
    if v == 0 {
        return Err(Error::InvalidObject("empty value set".into()));
    }
    let support = space.state().support();
    let n = *space.object();
    let count = v.checked_pow(support.len() as u32).ok_or_else(|| Error::InvalidObject("too many elements".into()))?;
    (0..count)
        .map(|mut code| {
            let mut table = vec![0; n];
            for &s in &support {
                table[s] = code % v;
                code /= v;
            }
            let rep = StochMatrix::from_function(v, &table)?;
            Ok(RandomElement { base: space.clone(), rep })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use nalgebra::{DMatrix, DVector};

    use super::*;
    use crate::finstoch::rational;
    use crate::gauss::{Gauss, GaussMorphism};
    use crate::spaces::SpaceOps;

    fn bit(i: usize) -> StochMatrix {
        let table: Vec<usize> = (0..4).map(|w| (w >> i) & 1).collect();
        StochMatrix::from_function(2, &table).unwrap()
    }

    #[test]
    fn first_bit_glues_along_itself() {
        let m = FinStoch;
        let bits = m.mk_space(StochMatrix::uniform(4)).unwrap();
        let pi = m.push_forward_map(&bits, bit(0)).unwrap();
        let y = m.random_element(&bits, bit(0)).unwrap();
        assert!(m.is_invariant(&y, &pi).unwrap());
        assert!(m.is_invariant_kernel_pair(&y, &pi).unwrap());
        let x = m.glue(&y, &pi).unwrap();
        assert!(m.mor_eq(x.rep(), &m.id(&2)));
        assert!(m.re_eq(&m.restrict(&x, &pi).unwrap(), &y).unwrap());
    }

    #[test]
    fn second_bit_does_not_glue_along_the_first() {
        let m = FinStoch;
        let bits = m.mk_space(StochMatrix::uniform(4)).unwrap();
        let pi = m.push_forward_map(&bits, bit(0)).unwrap();
        let y = m.random_element(&bits, bit(1)).unwrap();
        assert!(!m.is_invariant(&y, &pi).unwrap());
        assert!(!m.is_invariant_kernel_pair(&y, &pi).unwrap());
        assert!(matches!(m.glue(&y, &pi), Err(Error::NotInvariant(_))));
    }

    #[test]
    fn conditional_expectation_laws() {
        let m = FinStoch;
        let p = StochMatrix::state(vec![rational(1, 6), rational(1, 3), rational(1, 4), rational(1, 4)]).unwrap();
        let omega = m.mk_space(p).unwrap();
        let pi = m.push_forward_map(&omega, StochMatrix::from_function(2, &[0, 1, 1, 0]).unwrap()).unwrap();
        let c = m.cond_expectation(&pi).unwrap();
        assert!(m.is_idempotent(&c).unwrap());
        assert!(m.is_self_adjoint(&c).unwrap());
        assert!(m.is_strong_idempotent(&c).unwrap());
        assert_eq!(c.e.kind(), crate::spaces::Kind::Channel);
    }

    #[test]
    fn noisy_representative_is_rejected() {
        let m = FinStoch;
        let bits = m.mk_space(StochMatrix::uniform(4)).unwrap();
        let noisy = StochMatrix::new(2, 4, vec![rational(1, 2); 8]).unwrap();
        assert!(matches!(m.random_element(&bits, noisy), Err(Error::NotDeterministic(_))));
        // Off the support anything goes.
        let point = m.mk_space(StochMatrix::point(2, 0)).unwrap();
        let half = StochMatrix::new(2, 2, vec![rational(1, 1), rational(1, 2), rational(0, 1), rational(1, 2)]).unwrap();
        assert!(m.random_element(&point, half).is_ok());
    }

    #[test]
    fn product_round_trip() {
        let m = FinStoch;
        let bits = m.mk_space(StochMatrix::uniform(4)).unwrap();
        // The first tensor factor is the high digit.
        let a = m.random_element(&bits, bit(1)).unwrap();
        let b = m.random_element(&bits, bit(0)).unwrap();
        let z = m.re_pair(&a, &b).unwrap();
        let (a2, b2) = m.re_split(&z, &2, &2).unwrap();
        assert!(m.re_eq(&a, &a2).unwrap() && m.re_eq(&b, &b2).unwrap());
        assert!(m.mor_eq(z.rep(), &m.id(&4)));
    }

    #[test]
    fn gauss_law_of_the_average() {
        let m = Gauss::default();
        let r2 = m.mk_space(GaussMorphism::standard_normal(2)).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let x = m.random_element(&r2, GaussMorphism::linear(DMatrix::from_row_slice(1, 2, &[h, h]))).unwrap();
        assert!(m.mor_eq(&m.law(&x).unwrap(), &GaussMorphism::standard_normal(1)));
        let shifted = GaussMorphism::affine(DMatrix::from_row_slice(1, 2, &[h, h]), DVector::from_element(1, 1.0)).unwrap();
        let y = m.re_map(&shifted.clone(), &m.random_element(&r2, m.id(&2)).unwrap()).unwrap();
        assert!(!m.re_eq(&x, &y).unwrap());
    }

    #[test]
    fn element_enumeration_counts_support_functions() {
        let m = FinStoch;
        let p = StochMatrix::state(vec![rational(1, 2), rational(0, 1), rational(1, 2)]).unwrap();
        let omega = m.mk_space(p).unwrap();
        let all = finstoch_elements(&omega, 3).unwrap();
        assert_eq!(all.len(), 9);
        for (i, a) in all.iter().enumerate() {
            for b in &all[i + 1..] {
                assert!(!m.re_eq(a, b).unwrap());
            }
        }
    }
}
