//! Dense complex linear algebra on small matrices.
//!
//! Everything downstream (forms, relations, semigroups) is phrased in terms of
//! [`Subspace`]s carrying orthonormal bases and Hermitian eigendecompositions.
//! Rank decisions always use singular-value cutoffs relative to the largest
//! singular value, so subspace detection is scale invariant.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

/// Numerical thresholds shared by every decision procedure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerance {
    /// Singular-value cutoff, relative to the largest singular value.
    pub rank_tol: f64,
    /// Eigenvalue floor for PSD decisions, relative to the spectral scale.
    pub psd_tol: f64,
    /// Target for resolvent distances.
    pub conv_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { rank_tol: 1e-9, psd_tol: 1e-9, conv_tol: 1e-8 }
    }
}

impl Tolerance {
    pub fn new(rank_tol: f64, psd_tol: f64, conv_tol: f64) -> Result<Self> {
        let tol = Self { rank_tol, psd_tol, conv_tol };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("rank_tol", self.rank_tol), ("psd_tol", self.psd_tol), ("conv_tol", self.conv_tol)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Slack for subspace containment tests.
    pub fn containment(&self) -> f64 {
        1e3 * self.rank_tol
    }
}

pub fn check_finite(m: &CMatrix, what: &'static str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub fn check_square(m: &CMatrix) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare(m.nrows(), m.ncols()))
    }
}

/// Singular values, descending.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    match to_faer(m).singular_values() {
        Ok(mut values) => {
            values.sort_by(|a, b| b.total_cmp(a));
            values.iter_mut().for_each(|s| *s = s.max(0.0));
            values
        }
        Err(_) => faer_svd(m).1,
    }
}

/// `√λ_max(MᴴM)` from the smaller Gram matrix; relative accuracy is that of
/// the eigensolver.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram = if m.nrows() < m.ncols() { m * m.adjoint() } else { m.adjoint() * m };
    hermitian_eigenvalues(&gram).last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

fn to_faer(m: &CMatrix) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, C64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Thin SVD, values descending. Falls back to the augmented eigenproblem if
/// the iteration does not converge.
fn faer_svd(m: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let (r, c) = m.shape();
    match to_faer(m).thin_svd() {
        Ok(svd) => {
            let s = svd.S().column_vector();
            let mut order: Vec<usize> = (0..s.nrows()).collect();
            order.sort_by(|&a, &b| s[b].re.total_cmp(&s[a].re));
            let (u, v) = (from_faer(svd.U()), from_faer(svd.V()));
            let pick = |x: &CMatrix| x.select_columns(order.iter());
            (pick(&u), order.iter().map(|&k| s[k].re).collect(), pick(&v))
        }
        Err(_) => {
            let eig = augmented_eigen(m);
            let k = r.min(c);
            let root2 = C64::new(std::f64::consts::SQRT_2, 0.0);
            let idx: Vec<usize> = (0..eig.values.len()).rev().take(k).collect();
            let u = CMatrix::from_fn(r, k, |i, j| eig.vectors[(i, idx[j])] * root2);
            let v = CMatrix::from_fn(c, k, |i, j| eig.vectors[(r + i, idx[j])] * root2);
            (polar_factor(&u), idx.iter().map(|&j| eig.values[j]).collect(), polar_factor(&v))
        }
    }
}

/// Eigendecomposition of `[[0, M], [Mᴴ, 0]]`, whose eigenvalues are `±σᵢ`
/// (padded with zeros) and whose eigenvectors are `(uᵢ; ±vᵢ)/√2`.
fn augmented_eigen(m: &CMatrix) -> HermitianEigen {
    let (r, c) = m.shape();
    let mut aug = CMatrix::zeros(r + c, r + c);
    aug.view_mut((0, r), (r, c)).copy_from(m);
    aug.view_mut((r, 0), (c, r)).copy_from(&m.adjoint());
    hermitian_eigen(&aug)
}

/// Singular triplets with `σ > cutoff`, sorted descending. The cutoff is
/// floored at `1e-13·σ_max`.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    pub u: CMatrix,
    pub values: Vec<f64>,
    pub v: CMatrix,
}

pub fn truncated_svd(m: &CMatrix, cutoff: f64) -> TruncatedSvd {
    truncated_svd_relative(m, 0.0, cutoff)
}

/// Truncation at `max(rel·σ_max, abs)` from a single decomposition.
pub(crate) fn truncated_svd_relative(m: &CMatrix, rel: f64, abs: f64) -> TruncatedSvd {
    let (r, c) = m.shape();
    let empty = TruncatedSvd { u: CMatrix::zeros(r, 0), values: Vec::new(), v: CMatrix::zeros(c, 0) };
    if m.is_empty() {
        return empty;
    }
    let (u, values, v) = faer_svd(m);
    let smax = values.first().copied().unwrap_or(0.0);
    if smax <= 0.0 {
        return empty;
    }
    let cutoff = (rel * smax).max(abs).max(1e-13 * smax);
    let keep = values.iter().take_while(|&&s| s > cutoff).count();
    TruncatedSvd {
        u: u.columns(0, keep).into_owned(),
        values: values[..keep].to_vec(),
        v: v.columns(0, keep).into_owned(),
    }
}

/// `X·(XᴴX)^{-1/2}`, the nearest matrix with orthonormal columns to a nearly
/// orthonormal `X`.
fn polar_factor(x: &CMatrix) -> CMatrix {
    if x.ncols() == 0 {
        return x.clone();
    }
    let gram = hermitian_eigen(&(x.adjoint() * x));
    x * gram.apply(|l| if l > 0.0 { 1.0 / l.sqrt() } else { 0.0 })
}

/// `(P + Pᴴ) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// `(P − Pᴴ) / (2i)`, Hermitian.
pub fn skew_part(m: &CMatrix) -> CMatrix {
    (m - m.adjoint()) * C64::new(0.0, -0.5)
}

/// Relative asymmetry `‖P − Pᴴ‖ / ‖P‖` (zero for the zero matrix).
pub fn asymmetry(m: &CMatrix) -> f64 {
    let norm = spectral_norm(m);
    if norm == 0.0 {
        return 0.0;
    }
    spectral_norm(&(m - m.adjoint())) / norm
}

pub fn check_hermitian(m: &CMatrix, tol: &Tolerance) -> Result<()> {
    check_square(m)?;
    check_finite(m, "matrix")?;
    let a = asymmetry(m);
    if a > 10.0 * tol.psd_tol {
        return Err(Error::NotHermitian(a));
    }
    Ok(())
}

/// Multiplies `v` by a unit scalar so its first non-negligible entry is real
/// and positive.
pub fn fix_phase(v: &mut CVector) {
    let scale = v.norm();
    if scale == 0.0 {
        return;
    }
    if let Some(z) = v.iter().copied().find(|z| z.norm() > 1e-12 * scale) {
        let phase = z.conj() / z.norm();
        v.iter_mut().for_each(|x| *x *= phase);
    }
}

fn lexicographic(a: &CVector, b: &CVector) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let ord = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    Ordering::Equal
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Largest eigenvalue magnitude.
    pub fn scale(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }

    /// `U · diag(f(λ)) · Uᴴ`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.vectors.nrows();
        let mut scaled = self.vectors.clone();
        for (k, &lambda) in self.values.iter().enumerate() {
            let fk = C64::new(f(lambda), 0.0);
            scaled.column_mut(k).iter_mut().for_each(|x| *x *= fk);
        }
        if n == 0 {
            return CMatrix::zeros(0, 0);
        }
        scaled * self.vectors.adjoint()
    }

    /// Eigenvectors whose eigenvalues satisfy `keep`, in ascending order.
    pub fn select(&self, keep: impl Fn(f64) -> bool) -> CMatrix {
        let cols: Vec<CVector> = self
            .values
            .iter()
            .enumerate()
            .filter(|(_, &l)| keep(l))
            .map(|(k, _)| self.vectors.column(k).into_owned())
            .collect();
        columns_to_matrix(self.vectors.nrows(), &cols)
    }
}

/// Eigenvalues of the Hermitian part of `m`, ascending, without vectors.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let h = hermitian_part(m);
    let mut values = match to_faer(&h).self_adjoint_eigenvalues(faer::Side::Lower) {
        Ok(values) => values,
        Err(_) => h.symmetric_eigenvalues().iter().copied().collect(),
    };
    values.sort_by(f64::total_cmp);
    values
}

/// Hermitian eigendecomposition of the Hermitian part of `m`. Eigenvalues are
/// sorted ascending; each eigenvector has its phase fixed, and exact ties are
/// broken lexicographically so the output is reproducible.
pub fn hermitian_eigen(m: &CMatrix) -> HermitianEigen {
    let n = m.nrows();
    if n == 0 {
        return HermitianEigen { values: Vec::new(), vectors: CMatrix::zeros(0, 0) };
    }
    let h = hermitian_part(m);
    let (values, vectors) = match to_faer(&h).self_adjoint_eigen(faer::Side::Lower) {
        Ok(eig) => {
            let s = eig.S().column_vector();
            ((0..n).map(|k| s[k].re).collect::<Vec<f64>>(), from_faer(eig.U()))
        }
        Err(_) => {
            let eig = h.symmetric_eigen();
            (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
        }
    };
    let mut pairs: Vec<(f64, CVector)> = (0..n)
        .map(|k| {
            let mut v = vectors.column(k).into_owned();
            fix_phase(&mut v);
            (values[k], v)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| lexicographic(&a.1, &b.1)));
    let values = pairs.iter().map(|p| p.0).collect();
    let cols: Vec<CVector> = pairs.into_iter().map(|p| p.1).collect();
    HermitianEigen { values, vectors: columns_to_matrix(n, &cols) }
}

pub fn columns_to_matrix(rows: usize, cols: &[CVector]) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols.len());
    for (k, c) in cols.iter().enumerate() {
        m.set_column(k, c);
    }
    m
}

/// Horizontal concatenation `[a | b]`.
pub fn hstack(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.nrows(), b.nrows(), "hstack row mismatch");
    let mut m = CMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    m.columns_mut(0, a.ncols()).copy_from(a);
    m.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    m
}

/// Vertical concatenation `[a; b]`.
pub fn vstack(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.ncols(), "vstack column mismatch");
    let mut m = CMatrix::zeros(a.nrows() + b.nrows(), a.ncols());
    m.rows_mut(0, a.nrows()).copy_from(a);
    m.rows_mut(a.nrows(), b.nrows()).copy_from(b);
    m
}

pub fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> CMatrix {
    CMatrix::from_row_iterator(rows, cols, entries.iter().map(|&x| C64::new(x, 0.0)))
}

pub fn diag(entries: &[C64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_column_slice(entries))
}

pub fn real_diag(entries: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(entries.len(), entries.iter().map(|&x| C64::new(x, 0.0))))
}

/// A linear subspace of `ℂⁿ` represented by an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: CMatrix,
    tol: f64,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Self { ambient_dim, basis: CMatrix::zeros(ambient_dim, 0), tol: Tolerance::default().rank_tol }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self { ambient_dim, basis: CMatrix::identity(ambient_dim, ambient_dim), tol: Tolerance::default().rank_tol }
    }

    /// Spans the given standard basis vectors.
    pub fn coordinate(ambient_dim: usize, indices: &[usize]) -> Self {
        let mut basis = CMatrix::zeros(ambient_dim, indices.len());
        for (k, &i) in indices.iter().enumerate() {
            basis[(i, k)] = C64::new(1.0, 0.0);
        }
        Self { ambient_dim, basis, tol: Tolerance::default().rank_tol }
    }

    /// Wraps a basis that is already orthonormal (checked to `1e-8`).
    pub fn from_orthonormal(basis: CMatrix, tol: &Tolerance) -> Result<Self> {
        check_finite(&basis, "subspace basis")?;
        let gram = basis.adjoint() * &basis;
        let k = basis.ncols();
        // Frobenius bounds the spectral norm, so it settles the common case.
        let defect = match k {
            0 => 0.0,
            _ => {
                let d = gram - CMatrix::identity(k, k);
                if d.norm() <= 1e-8 { d.norm() } else { spectral_norm(&d) }
            }
        };
        if defect > 1e-8 {
            return Err(Error::InvalidParameter(format!(
                "basis is not orthonormal (defect {defect:.3e})"
            )));
        }
        Ok(Self { ambient_dim: basis.nrows(), basis, tol: tol.rank_tol })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn rank_tol(&self) -> f64 {
        self.tol
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim
    }

    /// Orthogonal projector `Q·Qᴴ`.
    pub fn projector(&self) -> CMatrix {
        &self.basis * self.basis.adjoint()
    }

    /// Coordinates `Qᴴ·x` of a vector (or of the columns of a matrix).
    pub fn coordinates(&self, x: &CMatrix) -> CMatrix {
        self.basis.adjoint() * x
    }

    pub fn project(&self, x: &CVector) -> Result<CVector> {
        if x.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim, found: x.len() });
        }
        Ok(&self.basis * (self.basis.adjoint() * x))
    }

    pub fn complement(&self) -> Subspace {
        let n = self.ambient_dim;
        if self.is_zero() {
            return Subspace { tol: self.tol, ..Subspace::full(n) };
        }
        if self.is_full() {
            return Subspace { tol: self.tol, ..Subspace::zero(n) };
        }
        // The basis has full column rank, so the trailing columns of a full
        // Householder Q span the complement exactly.
        let q = from_faer(to_faer(&self.basis).qr().compute_Q().as_ref());
        let basis = q.columns(self.dim(), n - self.dim()).into_owned();
        Subspace { ambient_dim: n, basis, tol: self.tol }
    }

    /// `‖(I − P)·Q_other‖`, the sine of the largest angle by which `other`
    /// sticks out of `self`.
    pub fn containment_residual(&self, other: &Subspace) -> f64 {
        if other.is_zero() {
            return 0.0;
        }
        let outside = other.basis() - &self.basis * (self.basis.adjoint() * other.basis());
        spectral_norm(&outside)
    }

    pub fn contains(&self, other: &Subspace, slack: f64) -> bool {
        self.ambient_dim == other.ambient_dim && self.containment_residual(other) <= slack
    }

    pub fn intersection(&self, other: &Subspace, tol: &Tolerance) -> Subspace {
        if self.is_zero() || other.is_zero() {
            return Subspace { tol: tol.rank_tol, ..Subspace::zero(self.ambient_dim) };
        }
        // Pairs (c, d) with Q₁c = Q₂d.
        let stacked = hstack(&self.basis, &(-other.basis()));
        let kernel = null_space(&stacked, tol);
        let coeffs = kernel.basis().rows(0, self.dim()).into_owned();
        orthonormalize(&(&self.basis * coeffs), tol).unwrap_or_else(|_| Subspace::zero(self.ambient_dim))
    }

    pub fn sum(&self, other: &Subspace, tol: &Tolerance) -> Subspace {
        orthonormalize(&hstack(&self.basis, other.basis()), tol).unwrap_or_else(|_| Subspace::zero(self.ambient_dim))
    }

    /// Spectral distance of the projectors; equals the sine of the largest
    /// principal angle when dimensions agree, and 1 otherwise.
    pub fn distance(&self, other: &Subspace) -> f64 {
        if self.ambient_dim != other.ambient_dim || self.dim() != other.dim() {
            return 1.0;
        }
        spectral_norm(&(self.projector() - other.projector()))
    }

    pub fn same_span(&self, other: &Subspace, slack: f64) -> bool {
        self.distance(other) <= slack
    }
}

/// Orthonormal basis of the column space of `vectors`.
pub fn orthonormalize(vectors: &CMatrix, tol: &Tolerance) -> Result<Subspace> {
    orthonormalize_scaled(vectors, 0.0, tol)
}

/// As [`orthonormalize`], with cutoff `rank_tol·max(σ_max, scale)`. Blocks of
/// an orthonormal basis pass `scale = 1` so roundoff rows are not mistaken for
/// directions.
pub fn orthonormalize_scaled(vectors: &CMatrix, scale: f64, tol: &Tolerance) -> Result<Subspace> {
    check_finite(vectors, "vectors")?;
    let n = vectors.nrows();
    let zero = Subspace { tol: tol.rank_tol, ..Subspace::zero(n) };
    if n == 0 || vectors.ncols() == 0 {
        return Ok(zero);
    }
    let svd = truncated_svd_relative(vectors, tol.rank_tol, tol.rank_tol * scale);
    if svd.values.is_empty() {
        return Ok(zero);
    }
    Ok(Subspace { ambient_dim: n, basis: svd.u, tol: tol.rank_tol })
}

/// Orthonormal basis of the `rank` leading left singular directions of
/// `vectors`, for callers that know the rank a priori.
pub fn orthonormalize_rank(vectors: &CMatrix, rank: usize) -> Result<Subspace> {
    check_finite(vectors, "vectors")?;
    let n = vectors.nrows();
    if rank > n.min(vectors.ncols()) {
        return Err(Error::InvalidParameter(format!("rank {rank} exceeds the matrix shape")));
    }
    let svd = truncated_svd(vectors, 0.0);
    if svd.values.len() < rank {
        return Err(Error::Singular(format!("numerical rank {} below the expected {rank}", svd.values.len())));
    }
    let basis = svd.u.columns(0, rank).into_owned();
    Ok(Subspace { ambient_dim: n, basis, tol: Tolerance::default().rank_tol })
}

pub fn project(s: &Subspace, x: &CVector) -> Result<CVector> {
    s.project(x)
}

/// Null space of `m` as a subspace of `ℂ^{cols}`.
pub fn null_space(m: &CMatrix, tol: &Tolerance) -> Subspace {
    null_space_scaled(m, 0.0, tol)
}

/// Null space with the cutoff of [`orthonormalize_scaled`].
pub fn null_space_scaled(m: &CMatrix, scale: f64, tol: &Tolerance) -> Subspace {
    let cols = m.ncols();
    if m.nrows() == 0 {
        return Subspace { tol: tol.rank_tol, ..Subspace::full(cols) };
    }
    match orthonormalize_scaled(&m.adjoint(), scale, tol) {
        Ok(rows) => rows.complement(),
        Err(_) => Subspace::zero(cols),
    }
}

/// Moore–Penrose pseudo-inverse with the relative rank cutoff.
pub fn pinv(m: &CMatrix, tol: &Tolerance) -> CMatrix {
    pinv_scaled(m, 0.0, tol)
}

/// Pseudo-inverse with cutoff `rank_tol·max(σ_max, scale)`.
pub fn pinv_scaled(m: &CMatrix, scale: f64, tol: &Tolerance) -> CMatrix {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return CMatrix::zeros(c, r);
    }
    let svd = truncated_svd_relative(m, tol.rank_tol, tol.rank_tol * scale);
    let inv = CMatrix::from_diagonal(&CVector::from_iterator(
        svd.values.len(),
        svd.values.iter().map(|&s| C64::new(1.0 / s, 0.0)),
    ));
    &svd.v * inv * svd.u.adjoint()
}

/// Solves `a·x = b` by LU. Fails when `a` is numerically singular
/// (pivot ratio below `1e-14`).
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    check_square(a)?;
    let n = a.nrows();
    if n == 0 {
        return Ok(CMatrix::zeros(0, b.ncols()));
    }
    let lu = a.clone().lu();
    let u = lu.u();
    let pivots: Vec<f64> = (0..n).map(|k| u[(k, k)].norm()).collect();
    let pmax = pivots.iter().copied().fold(0.0, f64::max);
    let pmin = pivots.iter().copied().fold(f64::INFINITY, f64::min);
    if pmax == 0.0 || pmin <= 1e-14 * pmax {
        return Err(Error::Singular(format!("pivot ratio {:.3e}", if pmax == 0.0 { 0.0 } else { pmin / pmax })));
    }
    let x = lu.solve(b).ok_or_else(|| Error::Singular("LU solve failed".into()))?;
    check_finite(&x, "solution")?;
    Ok(x)
}

pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    solve(a, &CMatrix::identity(a.nrows(), a.nrows()))
}

/// PSD test relative to the spectral scale of `m`.
pub fn is_psd(m: &CMatrix, tol: &Tolerance) -> bool {
    is_psd_scaled(m, 0.0, tol)
}

/// PSD test with eigenvalue floor `−psd_tol·max(scale, ‖m‖)`.
pub fn is_psd_scaled(m: &CMatrix, scale: f64, tol: &Tolerance) -> bool {
    let values = hermitian_eigenvalues(m);
    let (min, max) = (values.first().copied().unwrap_or(0.0), values.last().copied().unwrap_or(0.0));
    min >= -tol.psd_tol * scale.max(min.abs()).max(max.abs())
}

/// Loewner order `P ≤ Q`: the smallest eigenvalue of `Q − P` is at least
/// `−psd_tol·max(‖P‖, ‖Q‖, ‖Q − P‖)`.
pub fn psd_order(p: &CMatrix, q: &CMatrix, tol: &Tolerance) -> Result<bool> {
    check_hermitian(p, tol)?;
    check_hermitian(q, tol)?;
    if p.shape() != q.shape() {
        return Err(Error::DimensionMismatch { expected: p.nrows(), found: q.nrows() });
    }
    let scale = spectral_norm(p).max(spectral_norm(q));
    Ok(is_psd_scaled(&(q - p), scale, tol))
}

pub fn matrix_exp(m: &CMatrix) -> Result<CMatrix> {
    check_square(m)?;
    check_finite(m, "exponent")?;
    if m.nrows() == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let e = m.exp();
    check_finite(&e, "matrix exponential")?;
    Ok(e)
}

/// `P^{†1/2}`: inverse square root on the numerical range of `P`, zero on
/// eigenvalues below `rank_tol·λ_max`.
pub fn pinv_sqrt(p: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    check_hermitian(p, tol)?;
    let eig = hermitian_eigen(p);
    let scale = eig.scale();
    if eig.min() < -tol.psd_tol * scale {
        return Err(Error::NotPositiveSemidefinite(eig.min()));
    }
    let cutoff = tol.rank_tol * scale;
    Ok(eig.apply(|l| if l > cutoff { 1.0 / l.sqrt() } else { 0.0 }))
}

/// Principal square root of a Hermitian PSD matrix.
pub fn psd_sqrt(p: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    check_hermitian(p, tol)?;
    let eig = hermitian_eigen(p);
    if eig.min() < -tol.psd_tol * eig.scale() {
        return Err(Error::NotPositiveSemidefinite(eig.min()));
    }
    Ok(eig.apply(|l| l.max(0.0).sqrt()))
}
