//! The contract every backend implements, and the operations derived from it.
//!
//! A backend is a value (so it can carry configuration such as a numerical
//! tolerance) implementing [`Markov`]. Tensor products of objects are strict:
//! `I ⊗ X`, `X ⊗ I` and `X` are the same object, and `(X ⊗ Y) ⊗ Z` equals
//! `X ⊗ (Y ⊗ Z)`, so no coherence isomorphisms appear anywhere.
//!
//! Everything probabilistic (pairing, marginals, Bayesian inversion,
//! almost-sure equality and determinism) is defined once in [`MarkovOps`]
//! from the seven primitives plus conditionals.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which representative a backend emits on inputs of probability zero.
///
/// Conditionals are only unique almost surely. `Canonical` is the documented
/// default of each backend; `Alternate` is a second, deliberately different
/// choice used to check that nothing downstream depends on the fallback.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fallback {
    #[default]
    Canonical,
    Alternate,
}

/// A split support `(i, π)` of a state `p` on `X`: `π ∘ i = id`,
/// `i ∘ π ≈_p id`, and `f ≈_p g` iff `f ∘ i = g ∘ i`.
#[derive(Clone)]
pub struct SplitSupport<M: Markov + ?Sized> {
    pub support: M::Obj,
    pub inclusion: M::Mor,
    pub projection: M::Mor,
}

impl<M: Markov + ?Sized> fmt::Debug for SplitSupport<M> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SplitSupport")
            .field("support", &self.support)
            .field("inclusion", &self.inclusion)
            .field("projection", &self.projection)
            .finish()
    }
}

/// A Markov category with conditionals and split supports.
pub trait Markov: Send + Sync {
    type Obj: Clone + PartialEq + fmt::Debug + Send + Sync;
    type Mor: Clone + fmt::Debug + Send + Sync;

    fn name(&self) -> &'static str;

    fn unit(&self) -> Self::Obj;
    fn tensor_obj(&self, x: &Self::Obj, y: &Self::Obj) -> Self::Obj;

    fn dom(&self, f: &Self::Mor) -> Self::Obj;
    fn cod(&self, f: &Self::Mor) -> Self::Obj;

    fn id(&self, x: &Self::Obj) -> Self::Mor;
    /// `g ∘ f`.
    fn compose(&self, g: &Self::Mor, f: &Self::Mor) -> Result<Self::Mor>;
    fn tensor(&self, f: &Self::Mor, g: &Self::Mor) -> Self::Mor;
    fn copy(&self, x: &Self::Obj) -> Self::Mor;
    fn del(&self, x: &Self::Obj) -> Self::Mor;
    fn swap(&self, x: &Self::Obj, y: &Self::Obj) -> Self::Mor;

    /// Payload equality (within the backend tolerance, if any).
    fn mor_eq(&self, f: &Self::Mor, g: &Self::Mor) -> bool;

    /// For `f : A → X ⊗ Y`, a morphism `f|X : X ⊗ A → Y` with
    /// `f = (id_X ⊗ f|X) ∘ (copy_X ⊗ id_A) ∘ (f_X ⊗ id_A) ∘ copy_A`.
    fn conditional_with(
        &self,
        f: &Self::Mor,
        x: &Self::Obj,
        y: &Self::Obj,
        fallback: Fallback,
    ) -> Result<Self::Mor>;

    fn split_support(&self, state: &Self::Mor) -> Result<SplitSupport<Self>>;

    fn conditional(&self, f: &Self::Mor, x: &Self::Obj, y: &Self::Obj) -> Result<Self::Mor> {
        self.conditional_with(f, x, y, Fallback::Canonical)
    }

    /// `⟨f, g⟩ = (f ⊗ g) ∘ copy`.
    fn pair(&self, f: &Self::Mor, g: &Self::Mor) -> Result<Self::Mor> {
        let a = self.dom(f);
        let b = self.dom(g);
        if a != b {
            return Err(Error::mismatch(a, b));
        }
        self.compose(&self.tensor(f, g), &self.copy(&a))
    }

    /// Whether `f` commutes with copying. Backends override this with a
    /// direct test on the payload.
    fn is_deterministic(&self, f: &Self::Mor) -> bool {
        self.commutes_with_copy(f)
    }
}

/// Operations every Markov category gets for free.
pub trait MarkovOps: Markov {
    fn is_state(&self, p: &Self::Mor) -> bool {
        self.dom(p) == self.unit()
    }

    fn expect_state(&self, p: &Self::Mor) -> Result<()> {
        if self.is_state(p) {
            Ok(())
        } else {
            Err(Error::NotAState(format!("{:?}", self.dom(p))))
        }
    }

    /// Composite of a pipeline, applied left to right: `fs[n-1] ∘ … ∘ fs[0]`.
    fn chain(&self, fs: &[&Self::Mor]) -> Result<Self::Mor> {
        let (first, rest) = fs
            .split_first()
            .ok_or_else(|| Error::InvalidMorphism("empty composite".into()))?;
        rest.iter()
            .try_fold((*first).clone(), |acc, g| self.compose(g, &acc))
    }

    /// `π₁ = id_X ⊗ del_Y : X ⊗ Y → X`.
    fn proj1(&self, x: &Self::Obj, y: &Self::Obj) -> Self::Mor {
        self.tensor(&self.id(x), &self.del(y))
    }

    /// `π₂ = del_X ⊗ id_Y : X ⊗ Y → Y`.
    fn proj2(&self, x: &Self::Obj, y: &Self::Obj) -> Self::Mor {
        self.tensor(&self.del(x), &self.id(y))
    }

    fn marginal1(&self, f: &Self::Mor, x: &Self::Obj, y: &Self::Obj) -> Result<Self::Mor> {
        self.compose(&self.proj1(x, y), f)
    }

    fn marginal2(&self, f: &Self::Mor, x: &Self::Obj, y: &Self::Obj) -> Result<Self::Mor> {
        self.compose(&self.proj2(x, y), f)
    }

    /// `copy ∘ f = (f ⊗ f) ∘ copy`, evaluated literally.
    fn commutes_with_copy(&self, f: &Self::Mor) -> bool {
        let lhs = self.compose(&self.copy(&self.cod(f)), f);
        let rhs = self.compose(&self.tensor(f, f), &self.copy(&self.dom(f)));
        match (lhs, rhs) {
            (Ok(l), Ok(r)) => self.mor_eq(&l, &r),
            _ => false,
        }
    }

    /// The joint state `⟨id, f⟩ ∘ p`.
    fn graph_state(&self, f: &Self::Mor, p: &Self::Mor) -> Result<Self::Mor> {
        self.expect_state(p)?;
        let x = self.dom(f);
        self.compose(&self.pair(&self.id(&x), f)?, p)
    }

    /// `f ≈_p g`, i.e. `⟨id, f⟩ ∘ p = ⟨id, g⟩ ∘ p`. Decided through the
    /// split support `(i, π)` of `p` as `f ∘ i = g ∘ i`; see
    /// [`MarkovOps::as_equal_joint`] for the joint-state form.
    fn as_equal(&self, f: &Self::Mor, g: &Self::Mor, p: &Self::Mor) -> Result<bool> {
        if self.cod(f) != self.cod(g) {
            return Err(Error::mismatch(self.cod(f), self.cod(g)));
        }
        if self.dom(f) != self.cod(p) || self.dom(g) != self.cod(p) {
            return Err(Error::mismatch(self.cod(p), self.dom(f)));
        }
        let i = self.split_support(p)?.inclusion;
        Ok(self.mor_eq(&self.compose(f, &i)?, &self.compose(g, &i)?))
    }

    /// `f ≈_p g` by comparing the two joint states directly.
    fn as_equal_joint(&self, f: &Self::Mor, g: &Self::Mor, p: &Self::Mor) -> Result<bool> {
        if self.cod(f) != self.cod(g) {
            return Err(Error::mismatch(self.cod(f), self.cod(g)));
        }
        Ok(self.mor_eq(&self.graph_state(f, p)?, &self.graph_state(g, p)?))
    }

    /// `copy ∘ f ≈_p (f ⊗ f) ∘ copy`, i.e. `f ∘ i` is deterministic for the
    /// support inclusion `i` of `p`.
    fn as_deterministic(&self, f: &Self::Mor, p: &Self::Mor) -> Result<bool> {
        if self.dom(f) != self.cod(p) {
            return Err(Error::mismatch(self.cod(p), self.dom(f)));
        }
        let i = self.split_support(p)?.inclusion;
        Ok(self.is_deterministic(&self.compose(f, &i)?))
    }

    /// [`MarkovOps::as_deterministic`] through the defining equation.
    fn as_deterministic_by_copy(&self, f: &Self::Mor, p: &Self::Mor) -> Result<bool> {
        let lhs = self.compose(&self.copy(&self.cod(f)), f)?;
        let rhs = self.compose(&self.tensor(f, f), &self.copy(&self.dom(f)))?;
        self.as_equal(&lhs, &rhs, p)
    }

    /// Bayesian inverse `f†_p : Y → X`, the conditional of `⟨f, id⟩ ∘ p` on `Y`.
    fn bayes_inverse_with(&self, f: &Self::Mor, p: &Self::Mor, fallback: Fallback) -> Result<Self::Mor> {
        self.expect_state(p)?;
        let x = self.dom(f);
        let y = self.cod(f);
        let joint = self.compose(&self.pair(f, &self.id(&x))?, p)?;
        self.conditional_with(&joint, &y, &x, fallback)
    }

    fn bayes_inverse(&self, f: &Self::Mor, p: &Self::Mor) -> Result<Self::Mor> {
        self.bayes_inverse_with(f, p, Fallback::Canonical)
    }

    /// Checks the defining equation of a Bayesian inverse:
    /// `⟨id_X, f⟩ ∘ p = swap ∘ ⟨id_Y, f†⟩ ∘ f ∘ p`.
    fn is_bayes_inverse(&self, f: &Self::Mor, p: &Self::Mor, dagger: &Self::Mor) -> Result<bool> {
        let x = self.dom(f);
        let y = self.cod(f);
        let lhs = self.graph_state(f, p)?;
        let q = self.compose(f, p)?;
        let rhs = self.compose(&self.swap(&y, &x), &self.graph_state(dagger, &q)?)?;
        Ok(self.mor_eq(&lhs, &rhs))
    }

    /// Rebuilds `f : A → X ⊗ Y` from its first marginal and a conditional.
    fn recombine(&self, f: &Self::Mor, cond: &Self::Mor, x: &Self::Obj, y: &Self::Obj) -> Result<Self::Mor> {
        let a = self.dom(f);
        let fx = self.marginal1(f, x, y)?;
        self.chain(&[
            &self.copy(&a),
            &self.tensor(&fx, &self.id(&a)),
            &self.tensor(&self.copy(x), &self.id(&a)),
            &self.tensor(&self.id(x), cond),
        ])
    }

    /// Whether `cond` is a valid conditional of `f` on `X`.
    fn is_conditional(&self, f: &Self::Mor, cond: &Self::Mor, x: &Self::Obj, y: &Self::Obj) -> Result<bool> {
        Ok(self.mor_eq(&self.recombine(f, cond, x, y)?, f))
    }
}

impl<M: Markov + ?Sized> MarkovOps for M {}
