//! A concrete model of the name-generation backend: elements are tuples of
//! actual names, and Kleisli maps return tuples in which some names are
//! bound. Orbits are found by searching for renamings, never from the
//! pattern encoding, so the orbit-wise rules can be checked against it.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::markov::Markov;
use crate::report::{summarize, SuiteReport, Trial};
use crate::strongname::{NomMorphism, NomObject, Orbit, StrongName};

/// Names at or above this value are bound.
pub const FRESH: u32 = 1 << 20;

/// Largest number of concrete elements tried per orbit.
const PER_ORBIT: usize = 24;

/// A concrete element: per factor, its tag and its names.
pub type Elem = Vec<(u32, Vec<u32>)>;

/// The element of an orbit that uses name `k` for slot `k`.
pub fn decode(o: &Orbit) -> Elem {
    let mut pos = 0;
    o.factors()
        .iter()
        .map(|f| {
            let names = o.pattern()[pos..pos + f.arity as usize].to_vec();
            pos += f.arity as usize;
            (f.tag, names)
        })
        .collect()
}

fn all_names(e: &Elem) -> impl Iterator<Item = u32> + '_ {
    e.iter().flat_map(|(_, ns)| ns.iter().copied())
}

/// A bijection of names carrying `from` onto `to`, if there is one.
pub fn renaming(from: &Elem, to: &Elem) -> Option<BTreeMap<u32, u32>> {
    if from.len() != to.len() {
        return None;
    }
    let mut fwd = BTreeMap::new();
    let mut bwd = BTreeMap::new();
    for ((t1, n1), (t2, n2)) in from.iter().zip(to) {
        if t1 != t2 || n1.len() != n2.len() {
            return None;
        }
        for (&a, &b) in n1.iter().zip(n2) {
            if *fwd.entry(a).or_insert(b) != b || *bwd.entry(b).or_insert(a) != a {
                return None;
            }
        }
    }
    Some(fwd)
}

/// Renumbers bound names by first occurrence, so that alpha-equivalent
/// values become equal.
pub fn normalize(e: Elem) -> Elem {
    let mut seen: Vec<u32> = Vec::new();
    e.into_iter()
        .map(|(t, ns)| {
            let ns = ns
                .into_iter()
                .map(|n| {
                    if n < FRESH {
                        return n;
                    }
                    let k = seen.iter().position(|&s| s == n).unwrap_or_else(|| {
                        seen.push(n);
                        seen.len() - 1
                    });
                    FRESH + k as u32
                })
                .collect();
            (t, ns)
        })
        .collect()
}

/// The first name that is fresh for everything in `es`.
fn fresh_above(es: &[&Elem]) -> u32 {
    es.iter().flat_map(|e| all_names(e)).map(|n| n + 1).fold(FRESH, u32::max)
}

fn injections(slots: usize, pool: u32) -> Vec<Vec<u32>> {
    fn go(slots: usize, pool: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == slots {
            out.push(cur.clone());
            return;
        }
        for n in 0..pool {
            if !cur.contains(&n) {
                cur.push(n);
                go(slots, pool, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(slots, pool, &mut Vec::new(), &mut out);
    out
}

fn rename(e: &Elem, names: &[u32]) -> Elem {
    e.iter().map(|(t, ns)| (*t, ns.iter().map(|&n| names[n as usize]).collect())).collect()
}

/// Concrete elements of every orbit of `x`: all namings of its slots from a
/// pool one larger than its arity, or a few of them when that is too many.
pub fn elements(x: &NomObject) -> Vec<Elem> {
    x.orbits()
        .iter()
        .flat_map(|o| {
            let a = o.arity();
            let c = decode(o);
            let all = injections(a, a as u32 + 1);
            if all.len() <= PER_ORBIT {
                all.iter().map(|ns| rename(&c, ns)).collect::<Vec<_>>()
            } else {
                let shifted: Vec<u32> = (0..a as u32).map(|k| a as u32 - k).collect();
                let rotated: Vec<u32> = (0..a as u32).map(|k| (k + 1) % a as u32).collect();
                vec![c.clone(), rename(&c, &shifted), rename(&c, &rotated)]
            }
        })
        .collect()
}

/// The orbit of `x` containing `e`, with the renaming from its canonical element.
pub fn orbit_of(x: &NomObject, e: &Elem) -> Result<(usize, BTreeMap<u32, u32>)> {
    let mut found = x.orbits().iter().enumerate().filter_map(|(i, o)| renaming(&decode(o), e).map(|r| (i, r)));
    let first = found.next().ok_or_else(|| Error::Inconsistent(format!("{e:?} lies in no orbit of {x:?}")))?;
    if found.next().is_some() {
        return Err(Error::Inconsistent(format!("{e:?} lies in two orbits of {x:?}")));
    }
    Ok(first)
}

/// `f(e)`, with new bound names above `floor` and above every name of `e`.
fn eval_above(f: &NomMorphism, e: &Elem, floor: u32) -> Result<Elem> {
    let (i, rho) = orbit_of(f.source(), e)?;
    let arrow = &f.arrows()[i];
    let base = floor.max(fresh_above(&[e]));
    let c = decode(&f.target().orbits()[arrow.target]);
    Ok(c.into_iter()
        .map(|(t, ns)| {
            let ns = ns
                .into_iter()
                .map(|j| match arrow.sigma[j as usize] {
                    Some(s) => rho[&s],
                    None => base + j,
                })
                .collect();
            (t, ns)
        })
        .collect())
}

/// The value of `f` at `e`, up to renaming of bound names.
pub fn eval(f: &NomMorphism, e: &Elem) -> Result<Elem> {
    Ok(normalize(eval_above(f, e, FRESH)?))
}

fn split(e: &Elem, rank: usize) -> (Elem, Elem) {
    (e[..rank].to_vec(), e[rank..].to_vec())
}

fn concat(a: &Elem, b: &Elem) -> Elem {
    a.iter().chain(b).cloned().collect()
}

/// Kleisli composite computed concretely: run `f`, then `g` on its value,
/// binding the names bound by either.
pub fn kleisli(g: &NomMorphism, f: &NomMorphism, e: &Elem) -> Result<Elem> {
    let y = eval_above(f, e, FRESH)?;
    Ok(normalize(eval_above(g, &y, FRESH)?))
}

/// `(f ⊗ g)(e₁, e₂)` computed concretely, with disjoint bound names.
pub fn tensor_concrete(f: &NomMorphism, g: &NomMorphism, e: &Elem) -> Result<Elem> {
    let (e1, e2) = split(e, f.source().rank());
    let a = eval_above(f, &e1, fresh_above(&[e]))?;
    let b = eval_above(g, &e2, fresh_above(&[e, &a]))?;
    Ok(normalize(concat(&a, &b)))
}

/// `⟨f, g⟩(e)` computed concretely.
pub fn pair_concrete(f: &NomMorphism, g: &NomMorphism, e: &Elem) -> Result<Elem> {
    let a = eval_above(f, e, FRESH)?;
    let b = eval_above(g, e, fresh_above(&[e, &a]))?;
    Ok(normalize(concat(&a, &b)))
}

/// The conditional of `f : A → X ⊗ Y` at `(x, a)`, computed concretely: if
/// `x` is a way of choosing the bound names of the `X` part of `f(a)`, those
/// names become free in the `Y` part. `None` when `x` is not such a choice.
pub fn conditional_concrete(f: &NomMorphism, x_rank: usize, e: &Elem) -> Result<Option<Elem>> {
    let (x, a) = split(e, x_rank);
    let v = eval_above(f, &a, fresh_above(&[e]))?;
    let (xv, yv) = split(&v, x_rank);
    let a_names: Vec<u32> = all_names(&a).collect();
    let mut rho: BTreeMap<u32, u32> = BTreeMap::new();
    for ((t1, n1), (t2, n2)) in xv.iter().zip(&x) {
        if t1 != t2 || n1.len() != n2.len() {
            return Ok(None);
        }
        for (&bound, &actual) in n1.iter().zip(n2) {
            if bound < FRESH {
                if bound != actual {
                    return Ok(None);
                }
                continue;
            }
            if a_names.contains(&actual) {
                return Ok(None);
            }
            match rho.get(&bound) {
                Some(&prev) if prev != actual => return Ok(None),
                Some(_) => {}
                None => {
                    if rho.values().any(|&v| v == actual) {
                        return Ok(None);
                    }
                    rho.insert(bound, actual);
                }
            }
        }
    }
    let y = yv
        .into_iter()
        .map(|(t, ns)| (t, ns.into_iter().map(|n| rho.get(&n).copied().unwrap_or(n)).collect()))
        .collect();
    Ok(Some(normalize(y)))
}

/// Atomic objects, then coproducts of two atomic objects of arity at most
/// `max_sum_arity` in total.
pub fn small_objects(max_arity: u32, max_sum_arity: u32) -> Vec<NomObject> {
    let mut out: Vec<NomObject> = (0..=max_arity).map(NomObject::atomic).collect();
    for a in 0..=max_arity {
        for b in a..=max_arity {
            if a + b <= max_sum_arity {
                out.push(NomObject::base(&[a, b]).expect("two orbits"));
            }
        }
    }
    out
}

fn check_values(
    trial: &mut Trial,
    name: &'static str,
    elems: &[Elem],
    mut got: impl FnMut(&Elem) -> Result<Elem>,
    mut want: impl FnMut(&Elem) -> Result<Elem>,
    label: impl Fn() -> String,
) {
    for e in elems {
        match (got(e), want(e)) {
            (Ok(a), Ok(b)) if a == b => {}
            (Ok(a), Ok(b)) => return trial.fail(name, format!("{} at {e:?}: {a:?} vs {b:?}", label())),
            (Err(err), _) | (_, Err(err)) => return trial.fail(name, format!("{} at {e:?}: {err}", label())),
        }
    }
    trial.pass(name);
}

/// Composition against concrete Kleisli composition, for every composable
/// pair between the given objects; also checks that distinct
/// representations denote distinct functions.
pub fn check_composition(objects: &[NomObject]) -> Vec<Trial> {
    let s = StrongName;
    let mut trials = Vec::new();
    for x in objects {
        let ex = elements(x);
        for y in objects {
            let fs = s.hom(x, y);
            let mut trial = Trial::default();
            let mut seen: BTreeMap<Vec<Elem>, usize> = BTreeMap::new();
            for (k, f) in fs.iter().enumerate() {
                match ex.iter().map(|e| eval(f, e)).collect::<Result<Vec<_>>>() {
                    Ok(values) => {
                        if let Some(prev) = seen.insert(values, k) {
                            trial.fail("distinct arrows denote distinct maps", format!("{f:?} and {:?}", fs[prev]));
                        } else {
                            trial.pass("distinct arrows denote distinct maps");
                        }
                    }
                    Err(e) => trial.fail("distinct arrows denote distinct maps", e.to_string()),
                }
            }
            for z in objects {
                let gs = s.hom(y, z);
                for f in &fs {
                    for g in &gs {
                        match s.compose(g, f) {
                            Ok(gf) => check_values(
                                &mut trial,
                                "composition",
                                &ex,
                                |e| eval(&gf, e),
                                |e| kleisli(g, f, e),
                                || format!("g = {g:?}, f = {f:?}"),
                            ),
                            Err(e) => trial.fail("composition", e.to_string()),
                        }
                    }
                }
            }
            trials.push(trial);
        }
    }
    trials
}

/// The orbits of `x ⊗ y` against a partition of concrete pairs, and the
/// structure maps against their concrete versions.
pub fn check_products(objects: &[NomObject]) -> Vec<Trial> {
    let s = StrongName;
    let mut trials = Vec::new();
    for x in objects {
        for y in objects {
            let mut trial = Trial::default();
            let (xy, tags) = s.orbit_product(x, y);
            let pool = (x.arities().into_iter().max().unwrap_or(0) + y.arities().into_iter().max().unwrap_or(0)) as u32;
            let pairs: Vec<Elem> = x
                .orbits()
                .iter()
                .flat_map(|o| injections(o.arity(), pool).into_iter().map(move |ns| rename(&decode(o), &ns)))
                .flat_map(|ex| {
                    y.orbits()
                        .iter()
                        .flat_map(|o| injections(o.arity(), pool).into_iter().map(move |ns| rename(&decode(o), &ns)))
                        .map(move |ey| concat(&ex, &ey))
                })
                .collect();
            let mut classes: Vec<Elem> = Vec::new();
            for p in pairs {
                if !classes.iter().any(|c| renaming(c, &p).is_some()) {
                    classes.push(p);
                }
            }
            let hits: Vec<Option<usize>> = xy
                .orbits()
                .iter()
                .map(|o| {
                    let d = decode(o);
                    classes.iter().position(|c| renaming(c, &d).is_some())
                })
                .collect();
            let mut distinct: Vec<usize> = hits.iter().flatten().copied().collect();
            distinct.sort();
            distinct.dedup();
            if classes.len() == xy.orbits().len() && distinct.len() == classes.len() {
                trial.pass("product orbits");
            } else {
                trial.fail(
                    "product orbits",
                    format!("{x:?} ⊗ {y:?}: {} concrete orbits, {} represented", classes.len(), xy.orbits().len()),
                );
            }
            let (m, n) = (x.rank(), y.rank());
            for (k, tag) in tags.iter().enumerate() {
                let left = decode(&x.orbits()[tag.left]);
                let right = decode(&y.orbits()[tag.right]);
                let la = x.orbits()[tag.left].arity() as u32;
                let shared: BTreeMap<u32, u32> = tag.shared.iter().map(|&(i, j)| (j, i)).collect();
                let right = right
                    .into_iter()
                    .map(|(t, ns)| (t, ns.into_iter().map(|j| shared.get(&j).copied().unwrap_or(la + j)).collect()))
                    .collect::<Elem>();
                let expected_arity = la as usize + y.orbits()[tag.right].arity() - tag.shared.len();
                let ok = renaming(&decode(&xy.orbits()[k]), &concat(&left, &right)).is_some()
                    && xy.orbits()[k].arity() == expected_arity;
                trial.check("product tags", Ok(ok), || format!("{x:?} ⊗ {y:?}, tag {tag:?}"));
            }
            let exy = elements(&xy);
            let copy = s.copy(x);
            check_values(&mut trial, "copy", &elements(x), |e| eval(&copy, e), |e| Ok(concat(e, e)), || format!("{x:?}"));
            let swap = s.swap(x, y);
            check_values(
                &mut trial,
                "swap",
                &exy,
                |e| eval(&swap, e),
                |e| {
                    let (a, b) = split(e, m);
                    Ok(concat(&b, &a))
                },
                || format!("{x:?}, {y:?}"),
            );
            let del = s.del(&xy);
            check_values(&mut trial, "delete", &exy, |e| eval(&del, e), |_| Ok(Vec::new()), || format!("{xy:?}"));
            debug_assert_eq!(xy.rank(), m + n);
            trials.push(trial);
        }
    }
    trials
}

/// Tensor and pairing of every pair of arrows between the given objects.
pub fn check_tensors(objects: &[NomObject]) -> Vec<Trial> {
    let s = StrongName;
    let homs: Vec<NomMorphism> =
        objects.iter().flat_map(|x| objects.iter().flat_map(move |y| StrongName.hom(x, y))).collect();
    let mut trials = Vec::new();
    for f in &homs {
        let mut trial = Trial::default();
        for g in &homs {
            let fg = s.tensor(f, g);
            check_values(
                &mut trial,
                "tensor",
                &elements(fg.source()),
                |e| eval(&fg, e),
                |e| tensor_concrete(f, g, e),
                || format!("f = {f:?}, g = {g:?}"),
            );
            if f.source() == g.source() {
                match s.pair(f, g) {
                    Ok(p) => check_values(
                        &mut trial,
                        "pairing",
                        &elements(f.source()),
                        |e| eval(&p, e),
                        |e| pair_concrete(f, g, e),
                        || format!("f = {f:?}, g = {g:?}"),
                    ),
                    Err(e) => trial.fail("pairing", e.to_string()),
                }
            }
        }
        trials.push(trial);
    }
    trials
}

/// Conditionals of every `f : A → X ⊗ Y` against the concrete rule where
/// it applies, and the factorisation of `f` through its conditional
/// everywhere.
pub fn check_conditionals(sources: &[NomObject], sides: &[NomObject]) -> Vec<Trial> {
    let s = StrongName;
    let mut trials = Vec::new();
    for a in sources {
        let ea = elements(a);
        for x in sides {
            for y in sides {
                let mut trial = Trial::default();
                let xy = s.tensor_obj(x, y);
                let dom = s.tensor_obj(x, a);
                let ed = elements(&dom);
                for f in s.hom(a, &xy) {
                    let c = match s.conditional(&f, x, y) {
                        Ok(c) => c,
                        Err(e) => {
                            trial.fail("conditional", e.to_string());
                            continue;
                        }
                    };
                    let mut failure = None;
                    for e in &ed {
                        match (conditional_concrete(&f, x.rank(), e), eval(&c, e)) {
                            (Ok(Some(want)), Ok(got)) if want != got => {
                                failure = Some(format!("f = {f:?} at {e:?}: {got:?} vs {want:?}"));
                            }
                            (Err(err), _) | (_, Err(err)) => failure = Some(format!("f = {f:?} at {e:?}: {err}")),
                            _ => {}
                        }
                        if failure.is_some() {
                            break;
                        }
                    }
                    match failure {
                        None => trial.pass("conditional"),
                        Some(d) => trial.fail("conditional", d),
                    }
                    check_values(
                        &mut trial,
                        "conditional factorisation",
                        &ea,
                        |e| eval(&f, e),
                        |e| {
                            let v = eval_above(&f, e, FRESH)?;
                            let (xv, _) = split(&v, x.rank());
                            let w = eval_above(&c, &concat(&xv, e), fresh_above(&[&v, e]))?;
                            Ok(normalize(concat(&xv, &w)))
                        },
                        || format!("f = {f:?}"),
                    );
                }
                trials.push(trial);
            }
        }
    }
    trials
}

/// Every check above over objects whose orbits have arity at most `max_arity`.
pub fn verify_name_pool(max_arity: u32) -> SuiteReport {
    let atoms = small_objects(max_arity, 0);
    let atoms: Vec<NomObject> = atoms.into_iter().filter(|o| o.orbits().len() == 1).collect();
    let mixed = small_objects(max_arity.min(1), 2);
    let small = small_objects(max_arity.min(2), 0).into_iter().filter(|o| o.orbits().len() == 1).collect::<Vec<_>>();
    let mut trials = check_composition(&atoms);
    trials.extend(check_composition(&mixed));
    trials.extend(check_products(&small_objects(max_arity, max_arity)));
    trials.extend(check_tensors(&atoms));
    trials.extend(check_tensors(&mixed));
    trials.extend(check_conditionals(&atoms, &atoms));
    trials.extend(check_conditionals(&small, &mixed));
    let n = trials.len();
    summarize("name-pool", StrongName.name(), n, 0, trials)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::MarkovOps;
    use crate::strongname::OrbitArrow;

    #[test]
    fn product_of_one_and_two_names_has_three_orbits() {
        let trials = check_products(&[NomObject::atomic(1), NomObject::atomic(2)]);
        let report = summarize("t", "strongname", trials.len(), 0, trials);
        assert!(report.ok(), "{report:?}");
        let (p, _) = StrongName.orbit_product(&NomObject::atomic(1), &NomObject::atomic(2));
        assert_eq!(p.orbits().len(), 3);
    }

    #[test]
    fn fresh_names_stay_fresh_under_composition() {
        let s = StrongName;
        let a = NomObject::atomic(1);
        let fresh = NomMorphism::new(a.clone(), a.clone(), vec![OrbitArrow { target: 0, sigma: vec![None] }]).unwrap();
        let e = vec![(0, vec![5])];
        let v = kleisli(&fresh, &fresh, &e).unwrap();
        assert_eq!(v, vec![(0, vec![FRESH])]);
        assert_eq!(eval(&s.compose(&fresh, &fresh).unwrap(), &e).unwrap(), v);
        assert_eq!(eval(&s.id(&a), &e).unwrap(), e);
    }

    #[test]
    fn conditioning_on_a_shared_name_copies_it() {
        let s = StrongName;
        let a = NomObject::atomic(1);
        let aa = s.tensor_obj(&a, &a);
        let diag = s.state(&aa, 0);
        let e = vec![(0, vec![3])];
        assert_eq!(conditional_concrete(&diag, 1, &e).unwrap(), Some(vec![(0, vec![3])]));
        let apart = s.state(&aa, 1);
        assert_eq!(conditional_concrete(&apart, 1, &e).unwrap(), Some(vec![(0, vec![FRESH])]));
    }

    #[test]
    fn a_wrong_rule_is_caught() {
        // Claim that composing with the fresh map keeps the name.
        let s = StrongName;
        let a = NomObject::atomic(1);
        let fresh = NomMorphism::new(a.clone(), a.clone(), vec![OrbitArrow { target: 0, sigma: vec![None] }]).unwrap();
        let e = vec![(0, vec![2])];
        assert_ne!(eval(&s.id(&a), &e).unwrap(), kleisli(&fresh, &s.id(&a), &e).unwrap());
        // A swapped tensor is told apart from the real one.
        let b = NomObject::atomic(2);
        let f = s.tensor(&s.id(&a), &s.id(&b));
        let wrong = s.swap(&a, &b);
        let ed = elements(f.source());
        assert!(ed.iter().any(|e| eval(&wrong, e).unwrap() != tensor_concrete(&s.id(&a), &s.id(&b), e).unwrap()));
        assert!(ed.iter().all(|e| eval(&f, e).unwrap() == tensor_concrete(&s.id(&a), &s.id(&b), e).unwrap()));
    }

    #[test]
    fn exhaustive_up_to_two_names() {
        let report = verify_name_pool(2);
        assert!(report.ok(), "{:?}", report.failures().collect::<Vec<_>>());
        assert!(report.total_checks() > 10_000);
    }

    #[test]
    fn deterministic_conditionals_are_deterministic() {
        let s = StrongName;
        let a = NomObject::atomic(2);
        let x = NomObject::atomic(1);
        let xy = s.tensor_obj(&x, &x);
        for f in s.hom(&a, &xy).into_iter().filter(|f| s.is_deterministic(f)) {
            let c = s.conditional(&f, &x, &x).unwrap();
            assert!(s.as_deterministic(&c, &s.state(&s.tensor_obj(&x, &a), 0)).is_ok());
        }
    }
}
