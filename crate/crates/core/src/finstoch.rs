//! Finite sets and stochastic matrices with exact rational entries.
//!
//! Objects are set sizes; the tensor of `m` and `n` is `m·n` with the pair
//! `(x, y)` stored at index `x·n + y`. A matrix `p : X → Y` has `|Y|` rows and
//! `|X|` columns and entry `p(y|x)` at row `y`, column `x`.

use std::fmt;
use std::str::FromStr;

pub use num::BigRational;
use num::{BigInt, One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::markov::{Fallback, Markov, SplitSupport};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StochMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigRational>,
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl StochMatrix {
    /// Builds a matrix from row-major entries, checking the column sums.
    pub fn new(rows: usize, cols: usize, entries: Vec<BigRational>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidMorphism("finite sets must be nonempty".into()));
        }
        if entries.len() != rows * cols {
            return Err(Error::InvalidMorphism(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(e) = entries.iter().find(|e| e.is_negative()) {
            return Err(Error::InvalidMorphism(format!("negative entry {e}")));
        }
        let m = StochMatrix { rows, cols, entries };
        for x in 0..cols {
            let s: BigRational = (0..rows).map(|y| m.get(y, x)).sum();
            if !s.is_one() {
                return Err(Error::InvalidMorphism(format!("column {x} sums to {s}, not 1")));
            }
        }
        Ok(m)
    }

    fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> BigRational) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for y in 0..rows {
            for x in 0..cols {
                entries.push(f(y, x));
            }
        }
        StochMatrix { rows, cols, entries }
    }

    /// The 0/1 matrix of a function `dom → cod` given by its table.
    pub fn from_function(cod: usize, table: &[usize]) -> Result<Self> {
        if let Some(&bad) = table.iter().find(|&&v| v >= cod) {
            return Err(Error::InvalidMorphism(format!("function value {bad} outside 0..{cod}")));
        }
        if table.is_empty() || cod == 0 {
            return Err(Error::InvalidMorphism("finite sets must be nonempty".into()));
        }
        Ok(Self::from_fn(cod, table.len(), |y, x| indicator(table[x] == y)))
    }

    /// A state on a set of size `probs.len()`.
    pub fn state(probs: Vec<BigRational>) -> Result<Self> {
        Self::new(probs.len(), 1, probs)
    }

    pub fn uniform(n: usize) -> Self {
        Self::from_fn(n, 1, |_, _| rational(1, n as i64))
    }

    pub fn point(n: usize, k: usize) -> Self {
        Self::from_fn(n, 1, |y, _| indicator(y == k))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// `p(y|x)`.
    pub fn get(&self, y: usize, x: usize) -> BigRational {
        self.entries[y * self.cols + x].clone()
    }

    fn at(&self, y: usize, x: usize) -> &BigRational {
        &self.entries[y * self.cols + x]
    }

    /// The function table, if every column is a point mass.
    pub fn as_function(&self) -> Option<Vec<usize>> {
        (0..self.cols)
            .map(|x| (0..self.rows).find(|&y| self.at(y, x).is_one()))
            .collect()
    }

    /// Probabilities of a state, in order.
    pub fn probabilities(&self) -> Vec<BigRational> {
        (0..self.rows).map(|y| self.get(y, 0)).collect()
    }

    /// Indices with positive mass of a state.
    pub fn support(&self) -> Vec<usize> {
        (0..self.rows).filter(|&y| self.at(y, 0).is_positive()).collect()
    }

    pub fn is_faithful_state(&self) -> bool {
        self.cols == 1 && self.entries.iter().all(|e| e.is_positive())
    }
}

fn indicator(b: bool) -> BigRational {
    if b {
        BigRational::one()
    } else {
        BigRational::zero()
    }
}

impl fmt::Debug for StochMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StochMatrix{}x{}[", self.rows, self.cols)?;
        for y in 0..self.rows {
            if y > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = (0..self.cols).map(|x| self.at(y, x).to_string()).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<String>>,
}

impl Serialize for StochMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MatrixRepr {
            rows: self.rows,
            cols: self.cols,
            entries: (0..self.rows)
                .map(|y| (0..self.cols).map(|x| self.at(y, x).to_string()).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for StochMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = MatrixRepr::deserialize(d)?;
        if repr.entries.len() != repr.rows || repr.entries.iter().any(|r| r.len() != repr.cols) {
            return Err(D::Error::custom(format!(
                "entries do not form a {}x{} matrix",
                repr.rows, repr.cols
            )));
        }
        let entries = repr
            .entries
            .iter()
            .flatten()
            .map(|s| BigRational::from_str(s.trim()).map_err(|e| D::Error::custom(format!("bad rational {s:?}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        StochMatrix::new(repr.rows, repr.cols, entries).map_err(D::Error::custom)
    }
}

/// The category of finite sets and stochastic matrices.
#[derive(Debug, Clone, Copy, Default)]
pub struct FinStoch;

impl Markov for FinStoch {
    type Obj = usize;
    type Mor = StochMatrix;

    fn name(&self) -> &'static str {
        "finstoch"
    }

    fn unit(&self) -> usize {
        1
    }

    fn tensor_obj(&self, x: &usize, y: &usize) -> usize {
        x * y
    }

    fn dom(&self, f: &StochMatrix) -> usize {
        f.cols
    }

    fn cod(&self, f: &StochMatrix) -> usize {
        f.rows
    }

    fn id(&self, x: &usize) -> StochMatrix {
        StochMatrix::from_fn(*x, *x, |y, x| indicator(x == y))
    }

    fn compose(&self, g: &StochMatrix, f: &StochMatrix) -> Result<StochMatrix> {
        if g.cols != f.rows {
            return Err(Error::mismatch(f.rows, g.cols));
        }
        let mut entries = vec![BigRational::zero(); g.rows * f.cols];
        for z in 0..g.rows {
            for y in 0..g.cols {
                let gzy = g.at(z, y);
                if gzy.is_zero() {
                    continue;
                }
                for x in 0..f.cols {
                    let fyx = f.at(y, x);
                    if !fyx.is_zero() {
                        entries[z * f.cols + x] += gzy * fyx;
                    }
                }
            }
        }
        Ok(StochMatrix { rows: g.rows, cols: f.cols, entries })
    }

    fn tensor(&self, f: &StochMatrix, g: &StochMatrix) -> StochMatrix {
        StochMatrix::from_fn(f.rows * g.rows, f.cols * g.cols, |y, x| {
            let (y1, y2) = (y / g.rows, y % g.rows);
            let (x1, x2) = (x / g.cols, x % g.cols);
            f.at(y1, x1) * g.at(y2, x2)
        })
    }

    fn copy(&self, x: &usize) -> StochMatrix {
        let n = *x;
        StochMatrix::from_fn(n * n, n, |y, x| indicator(y == x * n + x))
    }

    fn del(&self, x: &usize) -> StochMatrix {
        StochMatrix::from_fn(1, *x, |_, _| BigRational::one())
    }

    fn swap(&self, x: &usize, y: &usize) -> StochMatrix {
        let (n, m) = (*x, *y);
        StochMatrix::from_fn(n * m, n * m, |out, inp| {
            let (a, b) = (inp / m, inp % m);
            indicator(out == b * n + a)
        })
    }

    fn mor_eq(&self, f: &StochMatrix, g: &StochMatrix) -> bool {
        f == g
    }

    fn is_deterministic(&self, f: &StochMatrix) -> bool {
        f.as_function().is_some()
    }

    fn pair(&self, f: &StochMatrix, g: &StochMatrix) -> Result<StochMatrix> {
        if f.cols != g.cols {
            return Err(Error::mismatch(f.cols, g.cols));
        }
        Ok(StochMatrix::from_fn(f.rows * g.rows, f.cols, |y, x| f.at(y / g.rows, x) * g.at(y % g.rows, x)))
    }

    fn conditional_with(&self, f: &StochMatrix, x: &usize, y: &usize, fallback: Fallback) -> Result<StochMatrix> {
        let (nx, ny, na) = (*x, *y, f.cols);
        if f.rows != nx * ny {
            return Err(Error::mismatch(nx * ny, f.rows));
        }
        let mut entries = vec![BigRational::zero(); ny * nx * na];
        let cols = nx * na;
        for xx in 0..nx {
            for a in 0..na {
                let col = xx * na + a;
                let mass: BigRational = (0..ny).map(|yy| f.at(xx * ny + yy, a)).sum();
                for yy in 0..ny {
                    entries[yy * cols + col] = if mass.is_positive() {
                        f.at(xx * ny + yy, a) / &mass
                    } else {
                        match fallback {
                            Fallback::Canonical => rational(1, ny as i64),
                            Fallback::Alternate => indicator(yy + 1 == ny),
                        }
                    };
                }
            }
        }
        Ok(StochMatrix { rows: ny, cols, entries })
    }

    /// Support `S = {x : p(x) > 0}`; off-support points project to the least
    /// support element.
    fn split_support(&self, p: &StochMatrix) -> Result<SplitSupport<Self>> {
        if p.cols != 1 {
            return Err(Error::NotAState(p.cols.to_string()));
        }
        let support = p.support();
        let k = support.len();
        let inclusion = StochMatrix::from_function(p.rows, &support)?;
        let table: Vec<usize> = (0..p.rows)
            .map(|x| support.iter().position(|&s| s == x).unwrap_or(0))
            .collect();
        let projection = StochMatrix::from_function(k, &table)?;
        Ok(SplitSupport { support: k, inclusion, projection })
    }
}

/// Whether `f` is a morphism of `FinProb` from `(Ω, p)` to `(Ω', q)`:
/// a function pushing `p` forward to `q`, both states faithful.
pub fn is_finprob_morphism(f: &StochMatrix, p: &StochMatrix, q: &StochMatrix) -> bool {
    if !p.is_faithful_state() || !q.is_faithful_state() || f.cols != p.rows || f.rows != q.rows {
        return false;
    }
    let Some(table) = f.as_function() else {
        return false;
    };
    (0..q.rows).all(|w| {
        let pre: BigRational = (0..p.rows).filter(|&o| table[o] == w).map(|o| p.get(o, 0)).sum();
        pre == q.get(w, 0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::MarkovOps;

    fn r(n: i64, d: i64) -> BigRational {
        rational(n, d)
    }

    fn joint_example() -> StochMatrix {
        // p(x, y) with x the first factor: [[1/2, 0], [1/4, 1/4]]
        StochMatrix::state(vec![r(1, 2), r(0, 1), r(1, 4), r(1, 4)]).unwrap()
    }

    #[test]
    fn rejects_bad_columns() {
        assert!(StochMatrix::new(2, 1, vec![r(1, 2), r(1, 3)]).is_err());
        assert!(StochMatrix::new(2, 1, vec![r(3, 2), r(-1, 2)]).is_err());
        assert!(StochMatrix::new(2, 1, vec![r(1, 2)]).is_err());
    }

    #[test]
    fn identity_after_coin_is_coin() {
        let m = FinStoch;
        let f = StochMatrix::new(2, 2, vec![r(1, 2), r(1, 2), r(1, 2), r(1, 2)]).unwrap();
        assert_eq!(m.compose(&m.id(&2), &f).unwrap(), f);
    }

    #[test]
    fn copy_is_the_diagonal() {
        let c = FinStoch.copy(&2);
        assert_eq!(c.as_function(), Some(vec![0, 3]));
        assert_eq!((c.rows(), c.cols()), (4, 2));
    }

    #[test]
    fn pair_of_identities_is_diagonal() {
        let m = FinStoch;
        let p = m.pair(&m.id(&2), &m.id(&2)).unwrap();
        assert_eq!(p, m.copy(&2));
    }

    #[test]
    fn fair_coin_is_not_deterministic() {
        let m = FinStoch;
        assert!(!m.is_deterministic(&StochMatrix::uniform(2)));
        assert!(m.is_deterministic(&StochMatrix::from_function(3, &[2, 0, 0, 1]).unwrap()));
    }

    #[test]
    fn conditional_of_joint_example() {
        let m = FinStoch;
        let c = m.conditional(&joint_example(), &2, &2).unwrap();
        assert_eq!(c.probabilities_column(0), vec![r(1, 1), r(0, 1)]);
        assert_eq!(c.probabilities_column(1), vec![r(1, 2), r(1, 2)]);
        assert!(m.is_conditional(&joint_example(), &c, &2, &2).unwrap());
    }

    #[test]
    fn conditional_of_product_is_constant() {
        let m = FinStoch;
        let p = StochMatrix::state(vec![r(1, 3), r(2, 3)]).unwrap();
        let q = StochMatrix::state(vec![r(1, 5), r(3, 5), r(1, 5)]).unwrap();
        let c = m.conditional(&m.tensor(&p, &q), &2, &3).unwrap();
        for col in 0..2 {
            assert_eq!(c.probabilities_column(col), q.probabilities());
        }
    }

    #[test]
    fn conditional_fallbacks_differ_only_off_support() {
        let m = FinStoch;
        let p = StochMatrix::state(vec![r(1, 2), r(1, 2), r(0, 1), r(0, 1)]).unwrap();
        let c1 = m.conditional_with(&p, &2, &2, Fallback::Canonical).unwrap();
        let c2 = m.conditional_with(&p, &2, &2, Fallback::Alternate).unwrap();
        assert_ne!(c1, c2);
        assert!(m.is_conditional(&p, &c1, &2, &2).unwrap());
        assert!(m.is_conditional(&p, &c2, &2, &2).unwrap());
        assert_eq!(c1.probabilities_column(1), vec![r(1, 2), r(1, 2)]);
        assert_eq!(c2.probabilities_column(1), vec![r(0, 1), r(1, 1)]);
    }

    #[test]
    fn as_equal_ignores_null_inputs() {
        let m = FinStoch;
        let p = StochMatrix::state(vec![r(1, 2), r(1, 2), r(0, 1)]).unwrap();
        let f = StochMatrix::from_function(2, &[0, 1, 0]).unwrap();
        let g = StochMatrix::from_function(2, &[0, 1, 1]).unwrap();
        assert!(m.as_equal(&f, &g, &p).unwrap());
        assert!(!m.as_equal(&f, &g, &StochMatrix::uniform(3)).unwrap());
    }

    #[test]
    fn as_deterministic_on_null_randomness() {
        let m = FinStoch;
        let f = StochMatrix::new(2, 3, vec![r(1, 1), r(0, 1), r(1, 2), r(0, 1), r(1, 1), r(1, 2)]).unwrap();
        let p = StochMatrix::state(vec![r(1, 2), r(1, 2), r(0, 1)]).unwrap();
        assert!(!m.is_deterministic(&f));
        assert!(m.as_deterministic(&f, &p).unwrap());
        assert!(!m.as_deterministic(&f, &StochMatrix::uniform(3)).unwrap());
    }

    #[test]
    fn split_support_of_partial_state() {
        let m = FinStoch;
        let p = StochMatrix::state(vec![r(1, 2), r(1, 2), r(0, 1)]).unwrap();
        let s = m.split_support(&p).unwrap();
        assert_eq!(s.support, 2);
        assert_eq!(s.inclusion.as_function(), Some(vec![0, 1]));
        assert_eq!(s.projection.as_function(), Some(vec![0, 1, 0]));
        assert_eq!(m.compose(&s.projection, &s.inclusion).unwrap(), m.id(&2));
        let ip = m.compose(&s.inclusion, &s.projection).unwrap();
        assert!(m.as_equal(&ip, &m.id(&3), &p).unwrap());
        assert_ne!(ip, m.id(&3));
    }

    #[test]
    fn split_support_trivial_cases() {
        let m = FinStoch;
        let s = m.split_support(&StochMatrix::uniform(3)).unwrap();
        assert_eq!(s.inclusion, m.id(&3));
        assert_eq!(s.projection, m.id(&3));
        let s = m.split_support(&StochMatrix::point(3, 0)).unwrap();
        assert_eq!(s.support, 1);
    }

    #[test]
    fn finprob_characterization() {
        let parity = StochMatrix::from_function(2, &[0, 1, 1, 0]).unwrap();
        assert!(is_finprob_morphism(&parity, &StochMatrix::uniform(4), &StochMatrix::uniform(2)));
        let constant = StochMatrix::from_function(2, &[0, 0, 0, 0]).unwrap();
        assert!(!is_finprob_morphism(&constant, &StochMatrix::uniform(4), &StochMatrix::uniform(2)));
        let coin = StochMatrix::new(2, 4, vec![r(1, 2); 8]).unwrap();
        assert!(!is_finprob_morphism(&coin, &StochMatrix::uniform(4), &StochMatrix::uniform(2)));
        // a point mass is not faithful on two points
        assert!(!is_finprob_morphism(&constant, &StochMatrix::uniform(4), &StochMatrix::point(2, 0)));
        let to_one = StochMatrix::from_function(1, &[0, 0, 0, 0]).unwrap();
        assert!(is_finprob_morphism(&to_one, &StochMatrix::uniform(4), &StochMatrix::uniform(1)));
    }

    #[test]
    fn bayes_rule_holds_entrywise() {
        let m = FinStoch;
        let f = StochMatrix::new(2, 3, vec![r(1, 3), r(1, 1), r(0, 1), r(2, 3), r(0, 1), r(1, 1)]).unwrap();
        let p = StochMatrix::state(vec![r(1, 2), r(1, 4), r(1, 4)]).unwrap();
        let dag = m.bayes_inverse(&f, &p).unwrap();
        let q = m.compose(&f, &p).unwrap();
        for x in 0..3 {
            for y in 0..2 {
                assert_eq!(dag.get(x, y) * q.get(y, 0), f.get(y, x) * p.get(x, 0));
            }
        }
        assert!(m.is_bayes_inverse(&f, &p, &dag).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let f = StochMatrix::new(2, 2, vec![r(1, 2), r(1, 1), r(1, 2), r(0, 1)]).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"rows":2,"cols":2,"entries":[["1/2","1"],["1/2","0"]]}"#);
        let back: StochMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<StochMatrix>(r#"{"rows":1,"cols":1,"entries":[["2"]]}"#).is_err());
    }

    impl StochMatrix {
        fn probabilities_column(&self, x: usize) -> Vec<BigRational> {
            (0..self.rows).map(|y| self.get(y, x)).collect()
        }
    }
}
