//! Gaussian channels `x ↦ Ax + N(b, Σ)` between Euclidean spaces.
//!
//! Objects are dimensions; `ℝ⁰` is the monoidal unit and tensor adds
//! dimensions. Equality of morphisms is entrywise closeness within the
//! backend tolerance, so every equation checked here is approximate.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::markov::{Fallback, Markov, SplitSupport};

/// Eigenvalues above `-PSD_REPAIR` (relative to the matrix scale) are
/// clamped to zero; anything more negative is rejected as input.
pub const PSD_REPAIR: f64 = 1e-12;

#[derive(Clone, PartialEq)]
pub struct GaussMorphism {
    a: DMatrix<f64>,
    b: DVector<f64>,
    sigma: DMatrix<f64>,
}

impl GaussMorphism {
    /// `a` is `n×m` for a channel `ℝᵐ → ℝⁿ`.
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if b.len() != n || sigma.nrows() != n || sigma.ncols() != n {
            return Err(Error::InvalidMorphism(format!(
                "shapes A {}x{}, b {}, Sigma {}x{} are inconsistent",
                n,
                a.ncols(),
                b.len(),
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        if a.iter().chain(b.iter()).chain(sigma.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidMorphism("non-finite entry".into()));
        }
        let scale = max_abs(&sigma).max(1.0);
        let asym = max_abs(&(&sigma - sigma.transpose()));
        if asym > 1e-9 * scale {
            return Err(Error::InvalidMorphism(format!("Sigma is not symmetric (defect {asym:e})")));
        }
        let sigma = symmetrize(&sigma);
        if n > 0 {
            let min = SymmetricEigen::new(sigma.clone()).eigenvalues.min();
            if min < -PSD_REPAIR * scale {
                return Err(Error::InvalidMorphism(format!(
                    "Sigma is not positive semidefinite (eigenvalue {min:e})"
                )));
            }
        }
        Ok(GaussMorphism { a, b, sigma: repair_psd(sigma) })
    }

    /// A deterministic affine map `x ↦ Ax + b`.
    pub fn affine(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let n = a.nrows();
        Self::new(a, b, DMatrix::zeros(n, n))
    }

    pub fn linear(a: DMatrix<f64>) -> Self {
        let n = a.nrows();
        GaussMorphism { a, b: DVector::zeros(n), sigma: DMatrix::zeros(n, n) }
    }

    /// The state `N(mean, cov)`.
    pub fn normal(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let n = mean.len();
        Self::new(DMatrix::zeros(n, 0), mean, cov)
    }

    pub fn standard_normal(n: usize) -> Self {
        GaussMorphism { a: DMatrix::zeros(n, 0), b: DVector::zeros(n), sigma: DMatrix::identity(n, n) }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    fn raw(a: DMatrix<f64>, b: DVector<f64>, sigma: DMatrix<f64>) -> Self {
        GaussMorphism { a, b, sigma: repair_psd(symmetrize(&sigma)) }
    }
}

impl fmt::Debug for GaussMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Gauss(A={:?}, b={:?}, Sigma={:?})",
            rows_of(&self.a),
            self.b.as_slice(),
            rows_of(&self.sigma)
        )
    }
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn from_rows(rows: &[Vec<f64>], ncols: usize) -> Option<DMatrix<f64>> {
    if rows.iter().any(|r| r.len() != ncols) {
        return None;
    }
    Some(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

#[derive(Serialize, Deserialize)]
struct GaussRepr {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    #[serde(rename = "Sigma")]
    sigma: Vec<Vec<f64>>,
    /// Needed only when `A` has no rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dom: Option<usize>,
}

impl Serialize for GaussMorphism {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        GaussRepr {
            a: rows_of(&self.a),
            b: self.b.iter().copied().collect(),
            sigma: rows_of(&self.sigma),
            dom: (self.a.nrows() == 0).then_some(self.a.ncols()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GaussMorphism {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = GaussRepr::deserialize(d)?;
        let n = repr.b.len();
        let m = match (repr.a.first(), repr.dom) {
            (Some(row), _) => row.len(),
            (None, Some(m)) => m,
            (None, None) => 0,
        };
        if repr.a.len() != n {
            return Err(D::Error::custom(format!("A has {} rows but b has {n} entries", repr.a.len())));
        }
        let a = from_rows(&repr.a, m).ok_or_else(|| D::Error::custom("ragged A"))?;
        let sigma = from_rows(&repr.sigma, n)
            .filter(|s| s.nrows() == n)
            .ok_or_else(|| D::Error::custom("Sigma must be n x n"))?;
        GaussMorphism::new(a, DVector::from_vec(repr.b), sigma).map_err(D::Error::custom)
    }
}

/// The Gaussian Markov category, with its comparison tolerances.
#[derive(Debug, Clone, Copy)]
pub struct Gauss {
    /// Entrywise tolerance for morphism equality.
    pub tol: f64,
    /// Relative pivot / singular-value threshold for rank decisions.
    pub rank_tol: f64,
}

impl Default for Gauss {
    fn default() -> Self {
        Gauss { tol: 1e-9, rank_tol: 1e-9 }
    }
}

impl Gauss {
    pub fn with_tol(tol: f64) -> Self {
        Gauss { tol, ..Gauss::default() }
    }

    pub fn close(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> bool {
        a.shape() == b.shape()
            && a.iter()
                .zip(b.iter())
                .all(|(x, y)| (x - y).abs() <= self.tol * x.abs().max(y.abs()).max(1.0))
    }

    fn close_vec(&self, a: &DVector<f64>, b: &DVector<f64>) -> bool {
        a.len() == b.len()
            && a.iter()
                .zip(b.iter())
                .all(|(x, y)| (x - y).abs() <= self.tol * x.abs().max(y.abs()).max(1.0))
    }

    /// Pseudoinverse of a covariance matrix, with the backend rank threshold.
    pub fn pinv(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        pinv_psd(m, self.rank_tol)
    }

    /// Rank-revealing factor `L` (`n×k`, `k = rank Σ`) with `L Lᵀ = Σ`.
    pub fn factor(&self, sigma: &DMatrix<f64>) -> DMatrix<f64> {
        pivoted_cholesky(sigma, self.rank_tol)
    }

    /// Replaces `(ℝⁿ, N(μ, Σ))` by a standard space `(ℝᵏ, N(0, I))`.
    pub fn standardize(&self, space: &GaussMorphism) -> Result<Standardization> {
        if space.a.ncols() != 0 {
            return Err(Error::NotAState(space.a.ncols().to_string()));
        }
        let l = self.factor(&space.sigma);
        let dim = l.ncols();
        let l_pinv = left_inverse(&l);
        let projection_offset = -(&l_pinv * &space.b);
        Ok(Standardization {
            dim,
            iso: GaussMorphism::raw(l.clone(), space.b.clone(), DMatrix::zeros(l.nrows(), l.nrows())),
            projection: GaussMorphism::raw(l_pinv, projection_offset, DMatrix::zeros(dim, dim)),
            factor: l,
        })
    }

    /// Classifies a channel between standard spaces, `x ↦ Ax + N(0, Σ)`.
    pub fn classify(&self, f: &GaussMorphism) -> Result<Classification> {
        let n = f.a.nrows();
        let aat = &f.a * f.a.transpose();
        let mut violated = Vec::new();
        if !self.close_vec(&f.b, &DVector::zeros(n)) {
            violated.push("b = 0".to_string());
        }
        if !self.close(&(&aat + &f.sigma), &DMatrix::identity(n, n)) {
            violated.push("A Aᵀ + Σ = I".to_string());
        }
        if !violated.is_empty() {
            return Err(Error::NotMeasurePreserving(violated.join(", ")));
        }
        Ok(self.classify_matrix(&f.a))
    }

    pub fn classify_matrix(&self, a: &DMatrix<f64>) -> Classification {
        let (n, m) = a.shape();
        let aat = a * a.transpose();
        let ata = a.transpose() * a;
        let defect = DMatrix::identity(n, n) - &aat;
        let contraction = n == 0 || SymmetricEigen::new(symmetrize(&defect)).eigenvalues.min() >= -self.tol;
        Classification {
            contraction,
            coisometry: self.close(&aat, &DMatrix::identity(n, n)),
            isometry: self.close(&ata, &DMatrix::identity(m, m)),
        }
    }

    /// The measure-preserving channel `(A, 0, I − AAᵀ)` between standard spaces.
    pub fn standard_channel(&self, a: &DMatrix<f64>) -> Result<GaussMorphism> {
        if !self.classify_matrix(a).contraction {
            return Err(Error::InvalidMorphism(format!(
                "A is not a contraction: I - A Aᵀ has eigenvalue {:e}",
                SymmetricEigen::new(symmetrize(&(DMatrix::identity(a.nrows(), a.nrows()) - a * a.transpose())))
                    .eigenvalues
                    .min()
            )));
        }
        let n = a.nrows();
        let sigma = DMatrix::identity(n, n) - a * a.transpose();
        Ok(GaussMorphism::raw(a.clone(), DVector::zeros(n), sigma))
    }

    /// Largest entry of `G Fᵀ − Vᵀ U` for a commuting square of co-isometries.
    pub fn coisom_defect(
        &self,
        f: &DMatrix<f64>,
        g: &DMatrix<f64>,
        u: &DMatrix<f64>,
        v: &DMatrix<f64>,
    ) -> Result<f64> {
        for (name, m) in [("F", f), ("G", g), ("U", u), ("V", v)] {
            if !self.classify_matrix(m).coisometry {
                return Err(Error::InvalidMorphism(format!("{name} is not a co-isometry")));
            }
        }
        if f.ncols() != g.ncols() || u.ncols() != f.nrows() || v.ncols() != g.nrows() || u.nrows() != v.nrows() {
            return Err(Error::InvalidMorphism("square shapes do not fit".into()));
        }
        if !self.close(&(u * f), &(v * g)) {
            return Err(Error::NotCommuting("U F ≠ V G".into()));
        }
        Ok(max_abs(&(g * f.transpose() - v.transpose() * u)))
    }

    /// Independence of a commuting square of co-isometries: `G Fᵀ = Vᵀ U`.
    pub fn coisom_independent(
        &self,
        f: &DMatrix<f64>,
        g: &DMatrix<f64>,
        u: &DMatrix<f64>,
        v: &DMatrix<f64>,
    ) -> Result<bool> {
        let scale = max_abs(&(g * f.transpose())).max(1.0);
        Ok(self.coisom_defect(f, g, u, v)? <= self.tol * scale)
    }
}

/// Output of [`Gauss::standardize`].
#[derive(Debug, Clone)]
pub struct Standardization {
    /// Rank of the covariance.
    pub dim: usize,
    /// `L` with `L Lᵀ = Σ`.
    pub factor: DMatrix<f64>,
    /// `z ↦ L z + μ`, from the standard space onto the support.
    pub iso: GaussMorphism,
    /// `x ↦ L⁺ (x − μ)`, its retraction.
    pub projection: GaussMorphism,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub contraction: bool,
    pub coisometry: bool,
    pub isometry: bool,
}

impl Classification {
    pub fn unitary(&self) -> bool {
        self.coisometry && self.isometry
    }
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Clamps negative eigenvalues of a symmetric matrix to zero.
fn repair_psd(m: DMatrix<f64>) -> DMatrix<f64> {
    if m.nrows() == 0 {
        return m;
    }
    let eig = SymmetricEigen::new(m.clone());
    if eig.eigenvalues.min() >= 0.0 {
        return m;
    }
    let clamped = eig.eigenvalues.map(|v| v.max(0.0));
    let q = &eig.eigenvectors;
    symmetrize(&(q * DMatrix::from_diagonal(&clamped) * q.transpose()))
}

/// Pseudoinverse of a symmetric positive semidefinite matrix. Eigenvalues
/// up to `rel · max(λ_max, 1)` count as zero.
pub fn pinv_psd(m: &DMatrix<f64>, rel: f64) -> DMatrix<f64> {
    let n = m.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let cutoff = rel * eig.eigenvalues.max().max(1.0);
    let q = &eig.eigenvectors;
    let inv = eig.eigenvalues.map(|l| if l > cutoff { 1.0 / l } else { 0.0 });
    symmetrize(&(q * DMatrix::from_diagonal(&inv) * q.transpose()))
}

/// `(LᵀL)⁻¹Lᵀ` for a factor with independent columns.
fn left_inverse(l: &DMatrix<f64>) -> DMatrix<f64> {
    if l.ncols() == 0 {
        return DMatrix::zeros(0, l.nrows());
    }
    let gram = l.transpose() * l;
    match gram.clone().cholesky() {
        Some(c) => c.solve(&l.transpose()),
        None => pinv_psd(&gram, 0.0) * l.transpose(),
    }
}

/// Outer-product Cholesky with diagonal pivoting; stops once the largest
/// remaining diagonal drops below `rel · max(d_max, 1)`, where `d_max` is the
/// largest original diagonal entry.
pub fn pivoted_cholesky(sigma: &DMatrix<f64>, rel: f64) -> DMatrix<f64> {
    let n = sigma.nrows();
    let mut residual = symmetrize(sigma);
    let top = (0..n).map(|i| residual[(i, i)]).fold(0.0, f64::max);
    let mut columns: Vec<DVector<f64>> = Vec::new();
    if top <= 0.0 {
        return DMatrix::zeros(n, 0);
    }
    loop {
        let (piv, d) = (0..n)
            .map(|i| (i, residual[(i, i)]))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        if columns.len() == n || d <= rel * top.max(1.0) {
            break;
        }
        let col = residual.column(piv) / d.sqrt();
        residual -= &col * col.transpose();
        columns.push(col);
    }
    DMatrix::from_columns(&columns).resize(n, columns.len(), 0.0)
}

fn block_diag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (r1, c1) = a.shape();
    let (r2, c2) = b.shape();
    let mut out = DMatrix::zeros(r1 + r2, c1 + c2);
    out.view_mut((0, 0), (r1, c1)).copy_from(a);
    out.view_mut((r1, c1), (r2, c2)).copy_from(b);
    out
}

impl Markov for Gauss {
    type Obj = usize;
    type Mor = GaussMorphism;

    fn name(&self) -> &'static str {
        "gauss"
    }

    fn unit(&self) -> usize {
        0
    }

    fn tensor_obj(&self, x: &usize, y: &usize) -> usize {
        x + y
    }

    fn dom(&self, f: &GaussMorphism) -> usize {
        f.a.ncols()
    }

    fn cod(&self, f: &GaussMorphism) -> usize {
        f.a.nrows()
    }

    fn id(&self, x: &usize) -> GaussMorphism {
        GaussMorphism::linear(DMatrix::identity(*x, *x))
    }

    /// `(A, b, Σ) ∘ (C, d, Ξ) = (AC, b + Ad, Σ + A Ξ Aᵀ)`.
    fn compose(&self, g: &GaussMorphism, f: &GaussMorphism) -> Result<GaussMorphism> {
        if g.a.ncols() != f.a.nrows() {
            return Err(Error::mismatch(f.a.nrows(), g.a.ncols()));
        }
        Ok(GaussMorphism::raw(
            &g.a * &f.a,
            &g.b + &g.a * &f.b,
            &g.sigma + &g.a * &f.sigma * g.a.transpose(),
        ))
    }

    fn tensor(&self, f: &GaussMorphism, g: &GaussMorphism) -> GaussMorphism {
        let mut b = DVector::zeros(f.b.len() + g.b.len());
        b.rows_mut(0, f.b.len()).copy_from(&f.b);
        b.rows_mut(f.b.len(), g.b.len()).copy_from(&g.b);
        GaussMorphism { a: block_diag(&f.a, &g.a), b, sigma: block_diag(&f.sigma, &g.sigma) }
    }

    fn copy(&self, x: &usize) -> GaussMorphism {
        let n = *x;
        GaussMorphism::linear(DMatrix::from_fn(2 * n, n, |i, j| if i % n == j { 1.0 } else { 0.0 }))
    }

    fn del(&self, x: &usize) -> GaussMorphism {
        GaussMorphism::linear(DMatrix::zeros(0, *x))
    }

    fn swap(&self, x: &usize, y: &usize) -> GaussMorphism {
        let (n, m) = (*x, *y);
        // input (u, v) with u ∈ ℝⁿ, v ∈ ℝᵐ; output (v, u)
        GaussMorphism::linear(DMatrix::from_fn(n + m, n + m, |i, j| {
            let src = if i < m { n + i } else { i - m };
            if src == j {
                1.0
            } else {
                0.0
            }
        }))
    }

    fn mor_eq(&self, f: &GaussMorphism, g: &GaussMorphism) -> bool {
        self.close(&f.a, &g.a) && self.close_vec(&f.b, &g.b) && self.close(&f.sigma, &g.sigma)
    }

    fn is_deterministic(&self, f: &GaussMorphism) -> bool {
        max_abs(&f.sigma) <= self.tol
    }

    /// Schur-complement conditioning with the pseudoinverse of `Σ₁₁`.
    fn conditional_with(&self, f: &GaussMorphism, x: &usize, y: &usize, fallback: Fallback) -> Result<GaussMorphism> {
        let (nx, ny) = (*x, *y);
        let na = f.a.ncols();
        if f.a.nrows() != nx + ny {
            return Err(Error::mismatch(nx + ny, f.a.nrows()));
        }
        let m1 = f.a.rows(0, nx).into_owned();
        let m2 = f.a.rows(nx, ny).into_owned();
        let b1 = f.b.rows(0, nx).into_owned();
        let b2 = f.b.rows(nx, ny).into_owned();
        let s11 = f.sigma.view((0, 0), (nx, nx)).into_owned();
        let s12 = f.sigma.view((0, nx), (nx, ny)).into_owned();
        let s21 = f.sigma.view((nx, 0), (ny, nx)).into_owned();
        let s22 = f.sigma.view((nx, nx), (ny, ny)).into_owned();
        let s11_pinv = self.pinv(&s11);
        let gain = &s21 * &s11_pinv;
        let sigma = &s22 - &gain * &s12;
        // The alternate representative adds a gain acting only off the
        // support of Σ₁₁, which leaves the factorization intact.
        let gain = match fallback {
            Fallback::Canonical => gain,
            Fallback::Alternate => {
                let off_support = DMatrix::identity(nx, nx) - &s11_pinv * &s11;
                let widest = (0..nx)
                    .max_by(|&i, &j| off_support.row(i).norm().total_cmp(&off_support.row(j).norm()));
                match widest {
                    Some(k) if off_support.row(k).norm() > self.rank_tol => {
                        let row = off_support.row(k).into_owned();
                        gain + DMatrix::from_fn(ny, nx, |_, j| row[j])
                    }
                    _ => gain,
                }
            }
        };
        let mut a = DMatrix::zeros(ny, nx + na);
        a.view_mut((0, 0), (ny, nx)).copy_from(&gain);
        a.view_mut((0, nx), (ny, na)).copy_from(&(&m2 - &gain * &m1));
        Ok(GaussMorphism::raw(a, &b2 - &gain * &b1, sigma))
    }

    fn split_support(&self, p: &GaussMorphism) -> Result<SplitSupport<Self>> {
        let st = self.standardize(p)?;
        Ok(SplitSupport { support: st.dim, inclusion: st.iso, projection: st.projection })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::MarkovOps;

    fn m(rows: usize, cols: usize, data: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows, cols, data)
    }

    fn v(data: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(data)
    }

    #[test]
    fn composition_rule() {
        let g = Gauss::default();
        let outer = GaussMorphism::new(m(1, 1, &[2.0]), v(&[1.0]), m(1, 1, &[1.0])).unwrap();
        let inner = GaussMorphism::new(m(1, 1, &[3.0]), v(&[0.0]), m(1, 1, &[1.0])).unwrap();
        let c = g.compose(&outer, &inner).unwrap();
        let want = GaussMorphism::new(m(1, 1, &[6.0]), v(&[1.0]), m(1, 1, &[5.0])).unwrap();
        assert!(g.mor_eq(&c, &want));
    }

    #[test]
    fn copy_and_pair() {
        let g = Gauss::default();
        let c = g.copy(&1);
        assert_eq!(c.matrix(), &m(2, 1, &[1.0, 1.0]));
        assert_eq!(c.covariance(), &DMatrix::zeros(2, 2));
        let p = g
            .pair(&GaussMorphism::linear(m(1, 1, &[1.0])), &GaussMorphism::linear(m(1, 1, &[2.0])))
            .unwrap();
        assert_eq!(p.matrix(), &m(2, 1, &[1.0, 2.0]));
    }

    #[test]
    fn swap_exchanges_blocks() {
        let g = Gauss::default();
        let s = g.swap(&1, &2);
        let x = GaussMorphism::normal(v(&[1.0, 2.0, 3.0]), DMatrix::zeros(3, 3)).unwrap();
        let y = g.compose(&s, &x).unwrap();
        assert_eq!(y.offset().as_slice(), &[2.0, 3.0, 1.0]);
    }

    #[test]
    fn determinism_is_zero_noise() {
        let g = Gauss::default();
        let noisy = GaussMorphism::new(m(1, 1, &[1.0]), v(&[0.0]), m(1, 1, &[0.5])).unwrap();
        assert!(!g.is_deterministic(&noisy));
        assert!(g.is_deterministic(&GaussMorphism::linear(m(2, 1, &[1.0, -3.0]))));
        let p = GaussMorphism::standard_normal(1);
        assert!(!g.as_deterministic(&noisy, &p).unwrap());
    }

    #[test]
    fn rejects_indefinite_covariance() {
        assert!(GaussMorphism::normal(v(&[0.0, 0.0]), m(2, 2, &[1.0, 2.0, 2.0, 1.0])).is_err());
        assert!(GaussMorphism::normal(v(&[0.0]), m(1, 1, &[-1e-3])).is_err());
        let tiny = GaussMorphism::normal(v(&[0.0]), m(1, 1, &[-1e-14])).unwrap();
        assert!(tiny.covariance()[(0, 0)] >= 0.0);
    }

    #[test]
    fn standardize_examples() {
        let g = Gauss::default();
        let st = g.standardize(&GaussMorphism::normal(v(&[1.0]), m(1, 1, &[4.0])).unwrap()).unwrap();
        assert_eq!(st.dim, 1);
        assert!((st.factor[(0, 0)] - 2.0).abs() < 1e-12);
        let st = g.standardize(&GaussMorphism::standard_normal(3)).unwrap();
        assert!(g.mor_eq(&st.iso, &g.id(&3)));
        let st = g
            .standardize(&GaussMorphism::normal(v(&[0.0, 0.0]), m(2, 2, &[1.0, 1.0, 1.0, 1.0])).unwrap())
            .unwrap();
        assert_eq!(st.dim, 1);
        assert!(g.close(&st.factor, &m(2, 1, &[1.0, 1.0])));
    }

    #[test]
    fn standardization_is_a_split_support() {
        let g = Gauss::default();
        let p = GaussMorphism::normal(v(&[1.0, -1.0, 2.0]), m(3, 3, &[2.0, 1.0, 3.0, 1.0, 1.0, 2.0, 3.0, 2.0, 5.0]))
            .unwrap();
        let s = g.split_support(&p).unwrap();
        assert_eq!(s.support, 2);
        let pi_i = g.compose(&s.projection, &s.inclusion).unwrap();
        assert!(g.mor_eq(&pi_i, &g.id(&2)));
        let i_pi = g.compose(&s.inclusion, &s.projection).unwrap();
        assert!(g.as_equal(&i_pi, &g.id(&3), &p).unwrap());
        assert!(!g.mor_eq(&i_pi, &g.id(&3)));
        let std = g.compose(&s.projection, &p).unwrap();
        assert!(g.mor_eq(&std, &GaussMorphism::standard_normal(2)));
    }

    #[test]
    fn classify_examples() {
        let g = Gauss::default();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let c = g.classify(&GaussMorphism::linear(m(1, 2, &[h, h]))).unwrap();
        assert!(c.contraction && c.coisometry && !c.isometry);
        let c = g.classify(&g.id(&2)).unwrap();
        assert!(c.unitary());
        assert!(g.standard_channel(&m(1, 2, &[1.0, 1.0])).is_err());
        assert!(matches!(
            g.classify(&GaussMorphism::linear(m(1, 2, &[1.0, 1.0]))),
            Err(Error::NotMeasurePreserving(_))
        ));
        let half = g.standard_channel(&m(1, 1, &[0.5])).unwrap();
        let c = g.classify(&half).unwrap();
        assert!(c.contraction && !c.coisometry);
        assert!(!g.is_deterministic(&half));
    }

    #[test]
    fn coisometry_squares() {
        let g = Gauss::default();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let f = m(1, 2, &[1.0, 0.0]);
        let gg = m(1, 2, &[h, h]);
        let to_zero = DMatrix::zeros(0, 1);
        assert!(!g.coisom_independent(&f, &gg, &to_zero, &to_zero).unwrap());
        assert!((g.coisom_defect(&f, &gg, &to_zero, &to_zero).unwrap() - h).abs() < 1e-12);
        let id = DMatrix::identity(2, 2);
        assert!(g.coisom_independent(&id, &id, &id, &id).unwrap());
        let p2 = m(1, 2, &[0.0, 1.0]);
        assert!(g.coisom_independent(&f, &p2, &to_zero, &to_zero).unwrap());
        assert!(matches!(
            g.coisom_independent(&f, &p2, &m(1, 1, &[1.0]), &m(1, 1, &[1.0])),
            Err(Error::NotCommuting(_))
        ));
    }

    #[test]
    fn bayes_inverse_of_standard_channel() {
        let g = Gauss::default();
        let a = m(2, 3, &[0.3, -0.2, 0.1, 0.0, 0.5, 0.4]);
        let f = g.standard_channel(&a).unwrap();
        let p = GaussMorphism::standard_normal(3);
        let dag = g.bayes_inverse(&f, &p).unwrap();
        let want = g.standard_channel(&a.transpose()).unwrap();
        assert!(g.mor_eq(&dag, &want), "{dag:?} vs {want:?}");
        assert!(g.is_bayes_inverse(&f, &p, &dag).unwrap());
        let back = g.bayes_inverse(&dag, &GaussMorphism::standard_normal(2)).unwrap();
        assert!(g.mor_eq(&back, &f));
    }

    #[test]
    fn conditional_fallbacks_agree_on_support() {
        let g = Gauss::default();
        // x is degenerate: x = (z, z), y = z + noise
        let joint = GaussMorphism::normal(
            v(&[0.0, 0.0, 1.0]),
            m(3, 3, &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0]),
        )
        .unwrap();
        let c1 = g.conditional_with(&joint, &2, &1, Fallback::Canonical).unwrap();
        let c2 = g.conditional_with(&joint, &2, &1, Fallback::Alternate).unwrap();
        assert!(!g.mor_eq(&c1, &c2));
        assert!(g.is_conditional(&joint, &c1, &2, &1).unwrap());
        assert!(g.is_conditional(&joint, &c2, &2, &1).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let f = GaussMorphism::new(m(1, 2, &[1.0, 0.5]), v(&[2.0]), m(1, 1, &[0.25])).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"A":[[1.0,0.5]],"b":[2.0],"Sigma":[[0.25]]}"#);
        assert_eq!(serde_json::from_str::<GaussMorphism>(&s).unwrap(), f);
        let del = Gauss::default().del(&3);
        let back: GaussMorphism = serde_json::from_str(&serde_json::to_string(&del).unwrap()).unwrap();
        assert_eq!(back, del);
    }
}
