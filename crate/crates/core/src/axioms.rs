//! Randomized checks of the Markov-category axioms and of Bayesian inversion.

use rand::Rng;

use crate::error::Result;
use crate::generate::Generate;
use crate::markov::{Fallback, MarkovOps};
use crate::report::{run_trials, SuiteConfig, SuiteReport, Trial};

fn eq_check<M: Generate>(m: &M, t: &mut Trial, name: &'static str, lhs: Result<M::Mor>, rhs: Result<M::Mor>) {
    match (lhs, rhs) {
        (Ok(l), Ok(r)) => {
            let ok = m.mor_eq(&l, &r);
            t.check(name, Ok(ok), || format!("lhs = {l:?}, rhs = {r:?}"));
        }
        (Err(e), _) | (_, Err(e)) => t.check(name, Err(e), String::new),
    }
}

/// An a.s.-deterministic morphism equal to `d` on the support of `p` but
/// built through a conditional, so it usually differs off the support.
pub fn perturb_off_support<M: Generate>(m: &M, d: &M::Mor, p: &M::Mor, fallback: Fallback) -> Result<M::Mor> {
    let graph = m.graph_state(d, p)?;
    m.conditional_with(&graph, &m.dom(d), &m.cod(d), fallback)
}

/// Every axiom of a Markov category with conditionals, on random data.
pub fn verify_markov_axioms<M: Generate>(m: &M, config: &SuiteConfig) -> SuiteReport {
    let k = config.max_size;
    run_trials("markov axioms", m.name(), config, |rng, t| {
        let x = m.random_object(rng, k);
        let y = m.random_object(rng, k);
        let z = m.random_object(rng, k);
        let w = m.random_object(rng, k);
        let f = m.random_morphism(rng, &x, &y);
        let g = m.random_morphism(rng, &y, &z);
        let h = m.random_morphism(rng, &z, &w);

        eq_check(m, t, "composition is associative", m.chain(&[&f, &g, &h]), m.compose(&m.compose(&h, &g)?, &f));
        eq_check(m, t, "left unit", m.compose(&m.id(&y), &f), Ok(f.clone()));
        eq_check(m, t, "right unit", m.compose(&f, &m.id(&x)), Ok(f.clone()));

        // tensor products of up to three morphisms use small objects
        let sx = m.random_small_object(rng, k);
        let sy = m.random_small_object(rng, k);
        let sz = m.random_small_object(rng, k);
        let sw = m.random_small_object(rng, k);
        let f1 = m.random_morphism(rng, &sx, &sy);
        let f2 = m.random_morphism(rng, &sz, &sw);
        let g1 = m.random_morphism(rng, &sy, &sx);
        let g2 = m.random_morphism(rng, &sw, &sz);
        eq_check(
            m,
            t,
            "tensor is functorial",
            m.compose(&m.tensor(&g1, &g2), &m.tensor(&f1, &f2)),
            Ok(m.tensor(&m.compose(&g1, &f1)?, &m.compose(&g2, &f2)?)),
        );
        eq_check(
            m,
            t,
            "tensor preserves identities",
            Ok(m.tensor(&m.id(&sx), &m.id(&sz))),
            Ok(m.id(&m.tensor_obj(&sx, &sz))),
        );
        let f3 = m.random_morphism(rng, &sx, &sz);
        eq_check(
            m,
            t,
            "tensor is associative",
            Ok(m.tensor(&m.tensor(&f1, &f2), &f3)),
            Ok(m.tensor(&f1, &m.tensor(&f2, &f3))),
        );
        let unit = m.id(&m.unit());
        eq_check(m, t, "tensor unit", Ok(m.tensor(&f1, &unit)), Ok(f1.clone()));
        eq_check(m, t, "tensor unit (left)", Ok(m.tensor(&unit, &f1)), Ok(f1.clone()));

        eq_check(
            m,
            t,
            "swap is an involution",
            m.compose(&m.swap(&sz, &sx), &m.swap(&sx, &sz)),
            Ok(m.id(&m.tensor_obj(&sx, &sz))),
        );
        eq_check(
            m,
            t,
            "swap is natural",
            m.compose(&m.swap(&sy, &sw), &m.tensor(&f1, &f2)),
            m.compose(&m.tensor(&f2, &f1), &m.swap(&sx, &sz)),
        );
        eq_check(
            m,
            t,
            "hexagon",
            Ok(m.swap(&sx, &m.tensor_obj(&sy, &sz))),
            m.compose(
                &m.tensor(&m.id(&sy), &m.swap(&sx, &sz)),
                &m.tensor(&m.swap(&sx, &sy), &m.id(&sz)),
            ),
        );

        let copy = m.copy(&sx);
        let idx = m.id(&sx);
        eq_check(
            m,
            t,
            "copy is coassociative",
            m.compose(&m.tensor(&copy, &idx), &copy),
            m.compose(&m.tensor(&idx, &copy), &copy),
        );
        eq_check(m, t, "delete is a left counit", m.compose(&m.tensor(&m.del(&sx), &idx), &copy), Ok(idx.clone()));
        eq_check(m, t, "delete is a right counit", m.compose(&m.tensor(&idx, &m.del(&sx)), &copy), Ok(idx.clone()));
        eq_check(m, t, "copy is commutative", m.compose(&m.swap(&sx, &sx), &copy), Ok(copy.clone()));
        eq_check(
            m,
            t,
            "copy is monoidal",
            Ok(m.copy(&m.tensor_obj(&sx, &sy))),
            m.chain(&[
                &m.tensor(&m.copy(&sx), &m.copy(&sy)),
                &m.tensor(&m.tensor(&m.id(&sx), &m.swap(&sx, &sy)), &m.id(&sy)),
            ]),
        );
        eq_check(
            m,
            t,
            "delete is monoidal",
            Ok(m.del(&m.tensor_obj(&sx, &sy))),
            Ok(m.tensor(&m.del(&sx), &m.del(&sy))),
        );
        eq_check(m, t, "copy on the unit", Ok(m.copy(&m.unit())), Ok(unit.clone()));
        eq_check(m, t, "delete on the unit", Ok(m.del(&m.unit())), Ok(unit.clone()));
        eq_check(m, t, "delete is natural", m.compose(&m.del(&y), &f), Ok(m.del(&x)));

        if let Some(d) = m.random_deterministic(rng, &x, &y) {
            t.check("generated maps are deterministic", Ok(m.is_deterministic(&d)), || format!("{d:?}"));
            t.check("determinism test matches the copy equation", Ok(m.commutes_with_copy(&d)), || format!("{d:?}"));
            let noisy = m.random_morphism(rng, &x, &y);
            t.check(
                "determinism test matches the copy equation",
                Ok(m.is_deterministic(&noisy) == m.commutes_with_copy(&noisy)),
                || format!("{noisy:?}"),
            );
            eq_check(
                m,
                t,
                "positivity",
                m.chain(&[&d, &m.copy(&y), &m.tensor(&m.id(&y), &g)]),
                m.pair(&d, &m.compose(&g, &d)?),
            );
            let p = m.random_state(rng, &x);
            let d2 = perturb_off_support(m, &d, &p, Fallback::Canonical)?;
            t.check("perturbed maps are a.s. deterministic", m.as_deterministic(&d2, &p), || {
                format!("d = {d:?}, p = {p:?}")
            });
            t.check("a.s. determinism matches the copy equation", m.as_deterministic_by_copy(&d2, &p), || {
                format!("d = {d:?}, p = {p:?}")
            });
            let joint = m.chain(&[&d2, &m.copy(&y), &m.tensor(&m.id(&y), &g)])?;
            let paired = m.pair(&d2, &m.compose(&g, &d2)?)?;
            t.check("relative positivity", m.as_equal(&joint, &paired, &p), || {
                format!("d = {d2:?}, g = {g:?}, p = {p:?}")
            });
        }

        let a = m.random_small_object(rng, k);
        let joint = m.random_morphism(rng, &a, &m.tensor_obj(&sx, &y));
        for fallback in [Fallback::Canonical, Fallback::Alternate] {
            let name = match fallback {
                Fallback::Canonical => "conditional factorization",
                Fallback::Alternate => "conditional factorization (alternate fallback)",
            };
            let ok = m
                .conditional_with(&joint, &sx, &y, fallback)
                .and_then(|c| m.is_conditional(&joint, &c, &sx, &y));
            t.check(name, ok, || format!("f = {joint:?}"));
        }
        Ok(())
    })
}

/// The defining equation of Bayesian inverses, and the dagger laws in the
/// category of probability spaces.
pub fn verify_bayes<M: Generate>(m: &M, config: &SuiteConfig) -> SuiteReport {
    let k = config.max_size;
    run_trials("bayesian inversion", m.name(), config, |rng, t| {
        let x = m.random_object(rng, k);
        let y = m.random_object(rng, k);
        let z = m.random_object(rng, k);
        let p = if rng.gen_bool(0.5) { m.random_state(rng, &x) } else { m.random_faithful_state(rng, &x) };
        let f = m.random_morphism(rng, &x, &y);
        let g = m.random_morphism(rng, &y, &z);
        let q = m.compose(&f, &p)?;
        for fallback in [Fallback::Canonical, Fallback::Alternate] {
            let dag = m.bayes_inverse_with(&f, &p, fallback)?;
            t.check("bayes equation", m.is_bayes_inverse(&f, &p, &dag), || {
                format!("f = {f:?}, p = {p:?}, dagger = {dag:?}")
            });
            let back = m.bayes_inverse_with(&dag, &q, fallback)?;
            t.check("dagger is involutive", m.as_equal(&back, &f, &p), || {
                format!("f = {f:?}, p = {p:?}, dagger of dagger = {back:?}")
            });
        }
        let dag_f = m.bayes_inverse(&f, &p)?;
        let dag_g = m.bayes_inverse(&g, &q)?;
        let dag_gf = m.bayes_inverse(&m.compose(&g, &f)?, &p)?;
        let r = m.compose(&g, &q)?;
        t.check("dagger is contravariant", m.as_equal(&dag_gf, &m.compose(&dag_f, &dag_g)?, &r), || {
            format!("f = {f:?}, g = {g:?}, p = {p:?}")
        });
        t.check("dagger of the identity", m.as_equal(&m.bayes_inverse(&m.id(&x), &p)?, &m.id(&x), &p), || {
            format!("p = {p:?}")
        });

        let f2 = perturb_off_support(m, &f, &p, Fallback::Alternate)?;
        t.check("a.s. equality is reflexive on perturbations", m.as_equal(&f, &f2, &p), || {
            format!("f = {f:?}, p = {p:?}")
        });
        t.check("a.s. equality is a congruence", m.as_equal(&m.compose(&g, &f)?, &m.compose(&g, &f2)?, &p), || {
            format!("f = {f:?}, g = {g:?}, p = {p:?}")
        });
        Ok(())
    })
}
