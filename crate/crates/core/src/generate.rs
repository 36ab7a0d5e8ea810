//! Random objects and morphisms for the property suites.

use nalgebra::{DMatrix, DVector};
use num::BigRational;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::finstoch::{FinStoch, StochMatrix};
use crate::gauss::{Gauss, GaussMorphism};
use crate::markov::Markov;
use crate::setmulti::{SetMulti, TotalRelation};
use crate::strongname::{partial_injections, NomObject, NomMorphism, OrbitArrow, StrongName};

/// The generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Random sampling of objects and morphisms of a backend.
pub trait Generate: Markov {
    /// An object of size at most `max` (points, dimension, or arity).
    fn random_object<R: Rng + ?Sized>(&self, rng: &mut R, max: usize) -> Self::Obj;

    /// An object small enough to be tensored with two or three others.
    fn random_small_object<R: Rng + ?Sized>(&self, rng: &mut R, max: usize) -> Self::Obj {
        self.random_object(rng, max)
    }

    fn random_morphism<R: Rng + ?Sized>(&self, rng: &mut R, dom: &Self::Obj, cod: &Self::Obj) -> Self::Mor;

    /// A deterministic morphism, if one exists between these objects.
    fn random_deterministic<R: Rng + ?Sized>(&self, rng: &mut R, dom: &Self::Obj, cod: &Self::Obj)
        -> Option<Self::Mor>;

    fn random_state<R: Rng + ?Sized>(&self, rng: &mut R, x: &Self::Obj) -> Self::Mor {
        self.random_morphism(rng, &self.unit(), x)
    }

    /// A state whose support is the whole object, if the backend can tell.
    fn random_faithful_state<R: Rng + ?Sized>(&self, rng: &mut R, x: &Self::Obj) -> Self::Mor;

    /// Whether generated spaces should be cut down to their supports before
    /// building on them, because tensor products grow too fast otherwise.
    fn compact_spaces(&self) -> bool {
        false
    }
}

fn random_column<R: Rng + ?Sized>(rng: &mut R, n: usize, allow_zero: bool) -> Vec<BigRational> {
    loop {
        let weights: Vec<i64> = (0..n)
            .map(|_| if allow_zero && rng.gen_bool(0.3) { 0 } else { rng.gen_range(1..=4) })
            .collect();
        let total: i64 = weights.iter().sum();
        if total > 0 {
            return weights.into_iter().map(|w| BigRational::new(w.into(), total.into())).collect();
        }
    }
}

fn stoch_from_columns(rows: usize, columns: Vec<Vec<BigRational>>) -> StochMatrix {
    let cols = columns.len();
    let entries = (0..rows)
        .flat_map(|y| columns.iter().map(move |c| c[y].clone()).collect::<Vec<_>>())
        .collect();
    StochMatrix::new(rows, cols, entries).expect("columns are distributions")
}

impl Generate for FinStoch {
    fn random_object<R: Rng + ?Sized>(&self, rng: &mut R, max: usize) -> usize {
        rng.gen_range(1..=max.max(1))
    }

    fn random_morphism<R: Rng + ?Sized>(&self, rng: &mut R, dom: &usize, cod: &usize) -> StochMatrix {
        let columns = (0..*dom)
            .map(|_| {
                if rng.gen_bool(0.25) {
                    let mut c = vec![BigRational::from_integer(0.into()); *cod];
                    c[rng.gen_range(0..*cod)] = BigRational::from_integer(1.into());
                    c
                } else {
                    random_column(rng, *cod, true)
                }
            })
            .collect();
        stoch_from_columns(*cod, columns)
    }

    fn random_deterministic<R: Rng + ?Sized>(&self, rng: &mut R, dom: &usize, cod: &usize) -> Option<StochMatrix> {
        let table: Vec<usize> = (0..*dom).map(|_| rng.gen_range(0..*cod)).collect();
        Some(StochMatrix::from_function(*cod, &table).expect("valid function"))
    }

    fn random_faithful_state<R: Rng + ?Sized>(&self, rng: &mut R, x: &usize) -> StochMatrix {
        stoch_from_columns(*x, vec![random_column(rng, *x, false)])
    }
}

fn small_int_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-4..=4) as f64 / 2.0)
}

impl Generate for Gauss {
    fn random_object<R: Rng + ?Sized>(&self, rng: &mut R, max: usize) -> usize {
        rng.gen_range(0..=max)
    }

    fn random_morphism<R: Rng + ?Sized>(&self, rng: &mut R, dom: &usize, cod: &usize) -> GaussMorphism {
        let (n, m) = (*cod, *dom);
        let a = small_int_matrix(rng, n, m);
        let b = DVector::from_fn(n, |_, _| rng.gen_range(-4..=4) as f64 / 2.0);
        let rank = rng.gen_range(0..=n);
        let l = small_int_matrix(rng, n, rank);
        GaussMorphism::new(a, b, &l * l.transpose()).expect("L Lᵀ is positive semidefinite")
    }

    fn random_deterministic<R: Rng + ?Sized>(&self, rng: &mut R, dom: &usize, cod: &usize) -> Option<GaussMorphism> {
        let a = small_int_matrix(rng, *cod, *dom);
        let b = DVector::from_fn(*cod, |_, _| rng.gen_range(-2..=2) as f64);
        Some(GaussMorphism::affine(a, b).expect("finite entries"))
    }

    fn random_faithful_state<R: Rng + ?Sized>(&self, rng: &mut R, x: &usize) -> GaussMorphism {
        let n = *x;
        let l = small_int_matrix(rng, n, n) + DMatrix::identity(n, n) * 3.0;
        let mean = DVector::from_fn(n, |_, _| rng.gen_range(-2..=2) as f64);
        GaussMorphism::normal(mean, &l * l.transpose()).expect("positive definite")
    }
}

fn random_subset<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<usize> {
    loop {
        let s: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
        if !s.is_empty() {
            return s;
        }
    }
}

impl Generate for SetMulti {
    fn random_object<R: Rng + ?Sized>(&self, rng: &mut R, max: usize) -> usize {
        rng.gen_range(1..=max.max(1))
    }

    fn random_morphism<R: Rng + ?Sized>(&self, rng: &mut R, dom: &usize, cod: &usize) -> TotalRelation {
        let pairs: Vec<(usize, usize)> = (0..*dom)
            .flat_map(|x| random_subset(rng, *cod).into_iter().map(move |y| (x, y)))
            .collect();
        TotalRelation::new(*dom, *cod, pairs).expect("every row is nonempty")
    }

    fn random_deterministic<R: Rng + ?Sized>(&self, rng: &mut R, dom: &usize, cod: &usize) -> Option<TotalRelation> {
        let table: Vec<usize> = (0..*dom).map(|_| rng.gen_range(0..*cod)).collect();
        Some(TotalRelation::from_function(*cod, &table).expect("valid function"))
    }

    fn random_faithful_state<R: Rng + ?Sized>(&self, _rng: &mut R, x: &usize) -> TotalRelation {
        TotalRelation::subset(*x, 0..*x).expect("nonempty")
    }
}

impl Generate for StrongName {
    fn random_object<R: Rng + ?Sized>(&self, rng: &mut R, max: usize) -> NomObject {
        let orbits = rng.gen_range(1..=2);
        let arities: Vec<u32> = (0..orbits).map(|_| rng.gen_range(0..=max as u32)).collect();
        NomObject::base(&arities).expect("at least one orbit")
    }

    /// At most two names in total across the orbits.
    fn random_small_object<R: Rng + ?Sized>(&self, rng: &mut R, max: usize) -> NomObject {
        let budget = max.min(2) as u32;
        let first = rng.gen_range(0..=budget);
        let mut arities = vec![first];
        if rng.gen_bool(0.5) {
            arities.push(rng.gen_range(0..=budget - first));
        }
        NomObject::base(&arities).expect("at least one orbit")
    }

    fn random_morphism<R: Rng + ?Sized>(&self, rng: &mut R, dom: &NomObject, cod: &NomObject) -> NomMorphism {
        let arrows = dom
            .orbits()
            .iter()
            .map(|o| {
                let target = rng.gen_range(0..cod.orbits().len());
                let options = partial_injections(cod.orbits()[target].arity(), o.arity());
                let sigma = options.choose(rng).expect("the empty injection exists").clone();
                OrbitArrow { target, sigma }
            })
            .collect();
        NomMorphism::new(dom.clone(), cod.clone(), arrows).expect("valid arrows")
    }

    fn random_deterministic<R: Rng + ?Sized>(&self, rng: &mut R, dom: &NomObject, cod: &NomObject) -> Option<NomMorphism> {
        let arrows = dom
            .orbits()
            .iter()
            .map(|o| {
                let targets: Vec<usize> = (0..cod.orbits().len())
                    .filter(|&t| cod.orbits()[t].arity() <= o.arity())
                    .collect();
                let &target = targets.choose(rng)?;
                let mut slots: Vec<u32> = (0..o.arity() as u32).collect();
                slots.shuffle(rng);
                let sigma = slots[..cod.orbits()[target].arity()].iter().map(|&i| Some(i)).collect();
                Some(OrbitArrow { target, sigma })
            })
            .collect::<Option<Vec<_>>>()?;
        Some(NomMorphism::new(dom.clone(), cod.clone(), arrows).expect("valid arrows"))
    }

    fn random_faithful_state<R: Rng + ?Sized>(&self, rng: &mut R, x: &NomObject) -> NomMorphism {
        // Only single-orbit objects have faithful states; pick any orbit.
        self.state(x, rng.gen_range(0..x.orbits().len()))
    }

    fn compact_spaces(&self) -> bool {
        true
    }
}
