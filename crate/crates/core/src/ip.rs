//! Random squares of sample spaces and the randomized suites for
//! independence: agreement of the criteria and the independent-pullback
//! axioms.

use std::sync::Arc;

use rand::Rng;

use crate::axioms::perturb_off_support;
use crate::error::Result;
use crate::generate::Generate;
use crate::independence::{Cospan, IndependenceOps, Square};
use crate::markov::{Fallback, MarkovOps};
use crate::report::{run_trials, SuiteConfig, SuiteReport, Trial};
use crate::spaces::{SampleSpace, SpaceMorphism, SpaceOps};

/// Largest object used for the legs of generated squares.
const LEG_SIZE: usize = 2;

/// A random space on a small object, with a faithful state more often than not.
pub fn random_space<M: Generate, R: Rng + ?Sized>(m: &M, rng: &mut R, max: usize) -> Result<Arc<SampleSpace<M>>> {
    let x = m.random_small_object(rng, max);
    let p = if rng.gen_bool(0.3) { m.random_state(rng, &x) } else { m.random_faithful_state(rng, &x) };
    m.mk_space(p)
}

/// A random deterministic map out of `x` into a small object, carrying the
/// pushed-forward state.
pub fn random_map_from<M: Generate, R: Rng + ?Sized>(
    m: &M,
    rng: &mut R,
    x: &Arc<SampleSpace<M>>,
) -> Result<SpaceMorphism<M>> {
    for attempt in 0..4 {
        let y = m.random_small_object(rng, LEG_SIZE);
        if attempt < 2 && y == m.unit() {
            continue;
        }
        if let Some(d) = m.random_deterministic(rng, x.object(), &y) {
            return compact_cod(m, m.push_forward_map(x, d)?);
        }
    }
    m.push_forward_map(x, m.del(x.object()))
}

/// `f` corestricted to the support of its codomain, if the backend asks
/// for compact spaces.
pub fn compact_cod<M: Generate>(m: &M, f: SpaceMorphism<M>) -> Result<SpaceMorphism<M>> {
    if !m.compact_spaces() {
        return Ok(f);
    }
    let i = m.support_space(f.cod())?;
    let rep = m.compose(&f.cod().support().projection, f.rep())?;
    m.mk_map(f.dom(), i.dom(), rep)
}

/// `f` restricted to the support of its domain, if the backend asks for
/// compact spaces.
pub fn compact_dom<M: Generate>(m: &M, f: SpaceMorphism<M>) -> Result<SpaceMorphism<M>> {
    if !m.compact_spaces() {
        return Ok(f);
    }
    m.space_compose(&f, &m.support_space(f.dom())?)
}

/// A random commuting square. The legs are `f = ⟨a, c⟩` and `g = ⟨c, b⟩`
/// for random maps `a, b, c` out of `Ω`, and both sides of the cospan
/// read off `c`, optionally followed by a further map `e`.
pub fn random_square<M: Generate, R: Rng + ?Sized>(m: &M, rng: &mut R, max: usize) -> Result<Square<M>> {
    let omega = random_space(m, rng, max)?;
    let a = random_map_from(m, rng, &omega)?;
    let b = random_map_from(m, rng, &omega)?;
    let c = random_map_from(m, rng, &omega)?;
    let e = if rng.gen_bool(0.3) { m.space_id(c.cod()) } else { random_map_from(m, rng, c.cod())? };
    let (oa, ob, oc) = (a.cod().object(), b.cod().object(), c.cod().object());
    let f = m.push_forward_map(&omega, m.pair(a.rep(), c.rep())?)?;
    let g = m.push_forward_map(&omega, m.pair(c.rep(), b.rep())?)?;
    let u = m.mk_map(f.cod(), e.cod(), m.compose(e.rep(), &m.proj2(oa, oc))?)?;
    let v = m.mk_map(g.cod(), e.cod(), m.compose(e.rep(), &m.proj1(oc, ob))?)?;
    let (f, u) = (compact_cod(m, f)?, compact_dom(m, u)?);
    let (g, v) = (compact_cod(m, g)?, compact_dom(m, v)?);
    m.square(f, g, u, v)
}

/// `(X ⊗ W, ⟨id, κ⟩ ∘ p)` for a random channel `κ`, with its projection to `X`.
pub fn random_extension<M: Generate, R: Rng + ?Sized>(
    m: &M,
    rng: &mut R,
    x: &Arc<SampleSpace<M>>,
) -> Result<SpaceMorphism<M>> {
    let w = m.random_small_object(rng, LEG_SIZE);
    let kappa = m.random_morphism(rng, x.object(), &w);
    compact_dom(m, extension_by(m, x, &kappa)?)
}

fn extension_by<M: Generate>(m: &M, x: &Arc<SampleSpace<M>>, kappa: &M::Mor) -> Result<SpaceMorphism<M>> {
    let w = m.cod(kappa);
    let ext = m.mk_space(m.graph_state(kappa, x.state())?)?;
    m.mk_map(&ext, x, m.proj1(x.object(), &w))
}

/// An independent square over `cs`: the relative product, extended by a
/// random channel out of its apex.
pub fn independent_square_over<M: Generate, R: Rng + ?Sized>(m: &M, rng: &mut R, cs: &Cospan<M>) -> Result<Square<M>> {
    let r = m.relative_product(cs)?;
    let i = m.support_space(r.omega())?;
    let q = m.space_compose(&i, &random_extension(m, rng, i.dom())?)?;
    m.square(m.space_compose(&r.f, &q)?, m.space_compose(&r.g, &q)?, cs.u1.clone(), cs.u2.clone())
}

/// The criteria suite: every characterization of independence agrees with
/// the verdict, under both choices of Bayesian inverse.
pub fn verify_criteria<M: Generate>(m: &M, config: &SuiteConfig) -> SuiteReport {
    run_trials("independence criteria", m.name(), config, |rng, t| {
        let sq = random_square(m, rng, config.max_size)?;
        let verdict = m.is_independent(&sq)?;
        t.pass(if verdict { "independent squares generated" } else { "dependent squares generated" });
        for fallback in [Fallback::Canonical, Fallback::Alternate] {
            let c = m.criteria(&sq, fallback)?;
            t.check("the six composites coincide", Ok(c.composites_agree), || format!("{sq:?}"));
            t.check("the six criteria agree", Ok(c.verdicts.iter().all(|&w| w == verdict)), || {
                format!("{:?} vs {verdict}: {sq:?}", c.verdicts)
            });
            t.check("dagger criterion agrees", Ok(c.dagger == verdict), || format!("{sq:?}"));
            t.check("definition agrees", Ok(c.definitional == verdict), || format!("{sq:?}"));
        }
        let perturbed = perturb_legs(m, &sq)?;
        t.check("verdict is invariant under a.s. equality", m.is_independent(&perturbed).map(|w| w == verdict), || {
            format!("{sq:?}")
        });
        t.check("verdict is invariant under transposition", m.is_independent(&sq.transpose()).map(|w| w == verdict), || {
            format!("{sq:?}")
        });
        Ok(())
    })
}

fn perturb<M: Generate>(m: &M, f: &SpaceMorphism<M>) -> Result<SpaceMorphism<M>> {
    let rep = perturb_off_support(m, f.rep(), f.dom().state(), Fallback::Alternate)?;
    m.mk_map(f.dom(), f.cod(), rep)
}

fn perturb_legs<M: Generate>(m: &M, sq: &Square<M>) -> Result<Square<M>> {
    m.square(perturb(m, &sq.f)?, perturb(m, &sq.g)?, perturb(m, &sq.u)?, perturb(m, &sq.v)?)
}

fn check_eq<M: Generate>(
    m: &M,
    t: &mut Trial,
    name: &'static str,
    f: Result<SpaceMorphism<M>>,
    g: Result<SpaceMorphism<M>>,
) {
    match (f, g) {
        (Ok(f), Ok(g)) => t.check(name, m.space_eq(&f, &g), || format!("{f:?} vs {g:?}")),
        (Err(e), _) | (_, Err(e)) => t.check(name, Err(e), String::new),
    }
}

/// The independent-pullback axioms, descent, and the universal properties
/// of relative products.
pub fn verify_ip_axioms<M: Generate>(m: &M, config: &SuiteConfig) -> SuiteReport {
    let k = config.max_size;
    run_trials("independent pullbacks", m.name(), config, |rng, t| {
        // identity edge
        let omega = random_space(m, rng, k)?;
        let f = random_map_from(m, rng, &omega)?;
        let u = random_map_from(m, rng, f.cod())?;
        let g = m.space_compose(&u, &f)?;
        let id = m.space_id(u.cod());
        let sq = m.square(f, g, u, id)?;
        t.check("squares with an identity edge are independent", m.is_independent(&sq), || format!("{sq:?}"));

        let sq = random_square(m, rng, k)?;
        let verdict = m.is_independent(&sq)?;
        let transposed = m.is_independent(&sq.transpose())?;
        t.check("independence is symmetric", Ok(!verdict || transposed), || format!("{sq:?}"));

        // horizontal composition of two independent squares
        let b = independent_square_over(m, rng, &sq.cospan())?;
        let x2 = random_extension(m, rng, b.y())?;
        let a = m.relative_product(&m.cospan(b.g.clone(), x2)?)?;
        let i = m.support_space(a.omega())?;
        let a = m.square(m.space_compose(&a.f, &i)?, m.space_compose(&a.g, &i)?, a.u, a.v)?;
        let ab = m.square(m.space_compose(&b.f, &a.f)?, a.g.clone(), b.u.clone(), m.space_compose(&b.v, &a.v)?)?;
        t.check("independent squares compose", m.is_independent(&ab), || format!("A = {a:?}, B = {b:?}"));

        // cancellation against a relative product
        let b = m.relative_product(&sq.cospan())?;
        let i = m.support_space(b.omega())?;
        let gi = m.space_compose(&b.g, &i)?;
        let w = m.random_small_object(rng, LEG_SIZE);
        let kappa = if rng.gen_bool(0.5) {
            m.compose(&m.random_morphism(rng, b.y().object(), &w), gi.rep())?
        } else {
            m.random_morphism(rng, i.dom().object(), &w)
        };
        let ext = extension_by(m, i.dom(), &kappa)?;
        let side = m.push_forward_map(ext.dom(), m.tensor(gi.rep(), &m.id(&w)))?;
        let down = m.mk_map(side.cod(), b.y(), m.proj1(b.y().object(), &w))?;
        let (top, side) = (compact_dom(m, m.space_compose(&i, &ext)?)?, compact_dom(m, side)?);
        let (side, down) = (compact_cod(m, side)?, compact_dom(m, down)?);
        let a = m.square(top, side, b.g.clone(), down)?;
        let ab = m.square(m.space_compose(&b.f, &a.f)?, a.g.clone(), b.u.clone(), m.space_compose(&b.v, &a.v)?)?;
        let (ab_ind, a_ind) = (m.is_independent(&ab)?, m.is_independent(&a)?);
        t.check("independent composite cancels to an independent square", Ok(!ab_ind || a_ind), || format!("A = {a:?}, B = {b:?}"));
        if ab_ind {
            t.pass("cancellation with an independent composite");
        }

        // completion of a cospan
        let r = m.relative_product(&sq.cospan())?;
        t.check("relative product is independent", m.is_independent_checked(&r), || format!("{r:?}"));
        t.check("relative product is an independent pullback", m.is_independent_pullback(&r), || {
            format!("{r:?}")
        });

        let kite = independent_square_over(m, rng, &sq.cospan())?;
        match m.pullback_mediator(&r, &kite.f, &kite.g) {
            Ok(h) => {
                t.check("pullback mediator is a pairing", m.space_eq(&h, &m.space_pair(&kite.f, &kite.g, r.omega())?), || {
                    format!("{kite:?}")
                });
                let alt = m.space_compose(&m.dagger_with(&m.comparison(&r)?, Fallback::Alternate)?, &h)?;
                t.check("pullback mediator is unique among channels", m.space_eq(&alt, &h), || format!("{kite:?}"));
                let phi = m.weak_mediator(&kite, &r)?;
                t.check("weak mediator into a pullback is the mediator", m.space_eq(&phi, &h), || format!("{kite:?}"));
            }
            Err(e) => t.fail("pullback mediator is a pairing", format!("{e}: {kite:?}")),
        }
        if !verdict {
            let refused = m.pullback_mediator(&r, &sq.f, &sq.g).is_err();
            t.check("dependent kites have no mediator", Ok(refused), || format!("{sq:?}"));
        }
        if verdict {
            let c = m.comparison(&sq)?;
            let back = m.space_compose(&m.dagger(&c)?, &c)?;
            let iso = m.space_eq(&back, &m.space_id(sq.omega()))?;
            t.check("strong uniqueness", m.is_independent_pullback(&sq).map(|w| w == iso), || format!("{sq:?}"));
            let phi = m.weak_mediator(&r, &sq);
            t.check("weak mediator exists", phi.map(|_| true), || format!("{sq:?}"));
        }

        let rr = random_map_from(m, rng, r.z())?;
        let i = m.space_compose(&rr, &r.u)?;
        let j = m.space_compose(&rr, &r.v)?;
        match m.pushout_mediator(&r, &i, &j) {
            Ok(kk) => t.check("pushout mediator is unique", m.space_eq(&kk, &rr), || format!("{r:?}")),
            Err(e) => t.fail("pushout mediator is unique", format!("{e}: {r:?}")),
        }
        if verdict {
            let i = m.space_compose(&rr, &sq.u)?;
            let j = m.space_compose(&rr, &sq.v)?;
            check_eq(m, t, "independent squares are pushouts", m.pushout_mediator(&sq, &i, &j), Ok(rr.clone()));
        }

        // descent along a map
        let phi = random_extension(m, rng, sq.omega())?;
        let outer = m.square(m.space_compose(&sq.f, &phi)?, m.space_compose(&sq.g, &phi)?, sq.u.clone(), sq.v.clone())?;
        t.check("descent along maps", m.is_independent(&outer).map(|w| w == verdict), || format!("{sq:?}"));

        // descent along a channel
        let (ox, oy) = (sq.x().object(), sq.y().object());
        let image = m.push_forward_map(sq.omega(), m.pair(sq.f.rep(), sq.g.rep())?)?;
        let phi = m.dagger(&image)?;
        let f1 = m.mk_map(image.cod(), sq.x(), m.proj1(ox, oy))?;
        let f2 = m.mk_map(image.cod(), sq.y(), m.proj2(ox, oy))?;
        check_eq(m, t, "channel mediator commutes", m.space_compose(&sq.f, &phi), Ok(f1.clone()));
        check_eq(m, t, "channel mediator commutes", m.space_compose(&sq.g, &phi), Ok(f2.clone()));
        let outer = m.square(f1, f2, sq.u.clone(), sq.v.clone())?;
        t.check("descent along channels", m.is_independent(&outer).map(|w| w == verdict), || format!("{sq:?}"));
        Ok(())
    })
}
