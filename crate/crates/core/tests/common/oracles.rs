//! Oracles and generators that do not go through the library's own
//! constructions: plain function tables and hand-rolled probability sums.

use std::sync::Arc;

use markov_spaces::finstoch::{rational, BigRational, FinStoch, StochMatrix};
use markov_spaces::independence::{IndependenceOps, Square};
use markov_spaces::setmulti::FunctionSquare;
use markov_spaces::spaces::{SampleSpace, SpaceOps};
use markov_spaces::Result;
use rand::Rng;

/// A commuting square of functions on a finite weighted set `Ω`.
#[derive(Debug, Clone)]
pub struct TableSquare {
    pub weights: Vec<i64>,
    pub f: Vec<usize>,
    pub g: Vec<usize>,
    pub u: Vec<usize>,
    pub v: Vec<usize>,
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

fn find(parent: &mut [usize], a: usize) -> usize {
    let mut r = a;
    while parent[r] != r {
        r = parent[r];
    }
    parent[a] = r;
    r
}

/// The coarsest `u, v` making the square commute on `live` points, merged
/// further at random (half the time down to a point).
fn random_cospan<R: Rng + ?Sized>(
    rng: &mut R,
    f: &[usize],
    g: &[usize],
    x: usize,
    y: usize,
    live: &[bool],
) -> (Vec<usize>, Vec<usize>, usize) {
    let mut parent: Vec<usize> = (0..x + y).collect();
    for w in 0..f.len() {
        if live[w] {
            let (a, b) = (find(&mut parent, f[w]), find(&mut parent, x + g[w]));
            parent[a] = b;
        }
    }
    let roots: Vec<usize> = (0..x + y).map(|k| find(&mut parent, k)).collect();
    let mut distinct = roots.clone();
    distinct.sort();
    distinct.dedup();
    let buckets = if rng.gen_bool(0.5) { 1 } else { rng.gen_range(1..=distinct.len()) };
    let merged: Vec<usize> = distinct.iter().map(|_| rng.gen_range(0..buckets)).collect();
    let mut used: Vec<usize> = merged.clone();
    used.sort();
    used.dedup();
    let label = |k: usize| {
        let c = distinct.binary_search(&roots[k]).unwrap();
        used.binary_search(&merged[c]).unwrap()
    };
    let u = (0..x).map(label).collect();
    let v = (x..x + y).map(label).collect();
    (u, v, used.len())
}

/// A random commuting square with `|Ω|, |X|, |Y| ≤ max`; some points of `Ω`
/// may carry no mass.
pub fn random_table_square<R: Rng + ?Sized>(rng: &mut R, max: usize) -> TableSquare {
    let n = rng.gen_range(1..=max);
    let mut weights: Vec<i64> = (0..n).map(|_| if rng.gen_bool(0.2) { 0 } else { rng.gen_range(1..=3) }).collect();
    if weights.iter().all(|&w| w == 0) {
        weights[0] = 1;
    }
    let x = rng.gen_range(2.min(max)..=max);
    let y = rng.gen_range(2.min(max)..=max);
    let f: Vec<usize> = (0..n).map(|_| rng.gen_range(0..x)).collect();
    let g: Vec<usize> = (0..n).map(|_| rng.gen_range(0..y)).collect();
    let live: Vec<bool> = weights.iter().map(|&w| w > 0).collect();
    let (u, v, z) = random_cospan(rng, &f, &g, x, y, &live);
    TableSquare { weights, f, g, u, v, x, y, z }
}

impl TableSquare {
    fn prob(&self, w: usize) -> BigRational {
        let total: i64 = self.weights.iter().sum();
        rational(self.weights[w], total)
    }

    /// For every `z` of positive mass, `p(x, y, z) p(z) = p(x, z) p(y, z)`.
    pub fn conditionally_independent(&self) -> bool {
        let zero = || rational(0, 1);
        let mut pxyz = vec![zero(); self.x * self.y * self.z];
        let mut pxz = vec![zero(); self.x * self.z];
        let mut pyz = vec![zero(); self.y * self.z];
        let mut pz = vec![zero(); self.z];
        for w in 0..self.weights.len() {
            let (a, b) = (self.f[w], self.g[w]);
            let c = self.u[a];
            let q = self.prob(w);
            pxyz[(a * self.y + b) * self.z + c] += q.clone();
            pxz[a * self.z + c] += q.clone();
            pyz[b * self.z + c] += q.clone();
            pz[c] += q;
        }
        (0..self.z).filter(|&c| pz[c] != zero()).all(|c| {
            (0..self.x).all(|a| {
                (0..self.y).all(|b| {
                    pxyz[(a * self.y + b) * self.z + c].clone() * pz[c].clone()
                        == pxz[a * self.z + c].clone() * pyz[b * self.z + c].clone()
                })
            })
        })
    }

    pub fn to_square(&self) -> Result<Square<FinStoch>> {
        let m = FinStoch;
        let p = StochMatrix::state((0..self.weights.len()).map(|w| self.prob(w)).collect())?;
        let omega = m.mk_space(p)?;
        let f = m.push_forward_map(&omega, StochMatrix::from_function(self.x, &self.f)?)?;
        let g = m.push_forward_map(&omega, StochMatrix::from_function(self.y, &self.g)?)?;
        let d: Vec<usize> = self.f.iter().map(|&a| self.u[a]).collect();
        let z: Arc<SampleSpace<FinStoch>> = m.push_forward_map(&omega, StochMatrix::from_function(self.z, &d)?)?.cod().clone();
        let u = m.mk_map(f.cod(), &z, StochMatrix::from_function(self.z, &self.u)?)?;
        let v = m.mk_map(g.cod(), &z, StochMatrix::from_function(self.z, &self.v)?)?;
        m.square(f, g, u, v)
    }
}

/// A random commuting square of surjections with `|Ω| ≤ max`.
pub fn random_surjection_square<R: Rng + ?Sized>(rng: &mut R, max: usize) -> FunctionSquare {
    let n = rng.gen_range(1..=max);
    let onto = |rng: &mut R| {
        let k = rng.gen_range(1..=n);
        let raw: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let mut seen: Vec<usize> = raw.clone();
        seen.sort();
        seen.dedup();
        let table: Vec<usize> = raw.iter().map(|r| seen.binary_search(r).unwrap()).collect();
        (table, seen.len())
    };
    let (f, x) = onto(rng);
    let (g, y) = onto(rng);
    let (u, v, z) = random_cospan(rng, &f, &g, x, y, &vec![true; n]);
    FunctionSquare { f, g, u, v, x, y, z }
}

/// Whether `y` is constant on every fibre of `pi` among the `live` points.
pub fn constant_on_fibres(y: &[usize], pi: &[usize], live: &[bool]) -> bool {
    (0..y.len()).all(|a| (0..y.len()).all(|b| !(live[a] && live[b] && pi[a] == pi[b]) || y[a] == y[b]))
}

fn all_tables(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|t: Vec<usize>| {
                (0..k).map(move |c| {
                    let mut next = t.clone();
                    next.push(c);
                    next
                })
            })
            .collect();
    }
    out
}

/// Set partitions of `0..n` as restricted growth strings.
fn partitions(n: usize) -> Vec<Vec<usize>> {
    all_tables(n, n.max(1))
        .into_iter()
        .filter(|t| {
            let mut next = 0;
            t.iter().all(|&c| {
                let ok = c <= next;
                if c == next {
                    next += 1;
                }
                ok
            })
        })
        .collect()
}

/// Counts from [`sheaf_exhaustive`].
#[derive(Debug, Default)]
pub struct SheafTally {
    pub cases: usize,
    pub invariant: usize,
    pub separation_pairs: usize,
}

/// Over every space on at most `max_points` points (each support, two
/// weightings), every quotient `π` of it and every `Y : Ω → V` with
/// `|V| ≤ max_v`: invariance by `e`, by the kernel pair and by fibres
/// agree; invariant elements glue to exactly one element downstairs;
/// restriction is injective; `e` is a strong dagger idempotent; laws are
/// natural.
pub fn sheaf_exhaustive(max_points: usize, max_v: usize) -> std::result::Result<SheafTally, String> {
    use markov_spaces::sheaves::{finstoch_elements, SheafOps};
    use markov_spaces::Markov;
    let m = FinStoch;
    let mut tally = SheafTally::default();
    for n in 1..=max_points {
        for mask in 1..(1u32 << n) {
            for skew in [false, true] {
                let live: Vec<bool> = (0..n).map(|k| mask & (1 << k) != 0).collect();
                let weights: Vec<BigRational> = (0..n)
                    .map(|k| if live[k] { rational(if skew { k as i64 + 1 } else { 1 }, 1) } else { rational(0, 1) })
                    .collect();
                let total: BigRational = weights.iter().cloned().sum();
                let p = StochMatrix::state(weights.into_iter().map(|w| w / total.clone()).collect()).map_err(|e| e.to_string())?;
                let omega = m.mk_space(p).map_err(|e| e.to_string())?;
                for pi_table in partitions(n) {
                    let k = pi_table.iter().max().unwrap() + 1;
                    let pi = m
                        .push_forward_map(&omega, StochMatrix::from_function(k, &pi_table).unwrap())
                        .map_err(|e| e.to_string())?;
                    let c = m.cond_expectation(&pi).map_err(|e| e.to_string())?;
                    let laws = m.is_idempotent(&c).and_then(|a| Ok(a && m.is_self_adjoint(&c)?))
                        .and_then(|a| Ok(a && m.is_strong_idempotent(&c)?));
                    if laws != Ok(true) {
                        return Err(format!("conditional expectation laws fail for π = {pi_table:?} on {mask:b}: {laws:?}"));
                    }
                    for v in 1..=max_v {
                        let below = finstoch_elements(pi.cod(), v).map_err(|e| e.to_string())?;
                        let pulled: Vec<_> = below.iter().map(|x| m.restrict(x, &pi)).collect::<Result<_>>().map_err(|e| e.to_string())?;
                        for (a, xa) in below.iter().enumerate() {
                            let law_ok = m.mor_eq(&m.law(xa).unwrap(), &m.law(&pulled[a]).unwrap());
                            if !law_ok {
                                return Err(format!("law not natural along π = {pi_table:?}"));
                            }
                            for b in a + 1..below.len() {
                                tally.separation_pairs += 1;
                                if m.re_eq(&pulled[a], &pulled[b]).unwrap() {
                                    return Err(format!("separation fails along π = {pi_table:?}: {xa:?} vs {:?}", below[b]));
                                }
                            }
                        }
                        for y_table in all_tables(n, v) {
                            tally.cases += 1;
                            let y = m
                                .random_element(&omega, StochMatrix::from_function(v, &y_table).unwrap())
                                .map_err(|e| e.to_string())?;
                            let by_e = m.is_invariant(&y, &pi).map_err(|e| e.to_string())?;
                            let by_kernel = m.is_invariant_kernel_pair(&y, &pi).map_err(|e| e.to_string())?;
                            let by_fibres = constant_on_fibres(&y_table, &pi_table, &live);
                            if by_e != by_fibres || by_kernel != by_fibres {
                                return Err(format!(
                                    "invariance of Y = {y_table:?} along π = {pi_table:?} on {mask:b}: e {by_e}, kernel {by_kernel}, fibres {by_fibres}"
                                ));
                            }
                            let preimages = pulled.iter().filter(|x| m.re_eq(x, &y).unwrap()).count();
                            match m.glue(&y, &pi) {
                                Ok(x) => {
                                    tally.invariant += 1;
                                    let back = m.restrict(&x, &pi).map_err(|e| e.to_string())?;
                                    if !by_fibres || preimages != 1 || !m.re_eq(&back, &y).unwrap() {
                                        return Err(format!("glue of Y = {y_table:?} along π = {pi_table:?} is wrong"));
                                    }
                                }
                                Err(markov_spaces::Error::NotInvariant(_)) if !by_fibres && preimages == 0 => {}
                                Err(e) => return Err(format!("glue of Y = {y_table:?} along π = {pi_table:?}: {e}")),
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(tally)
}
