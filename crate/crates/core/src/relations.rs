//! Linear relations `A ⊆ ℂᵍ ⊕ ℂʰ`, stored as graph subspaces.
//!
//! A graph basis `G` (orthonormal columns) is split into its top block `T`
//! (first `g` rows) and bottom block `B`; every pair in `A` is `(T·c, B·c)`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::forms::matrix_sector_check_scaled;
use crate::linalg::{
    check_finite, hermitian_eigenvalues, hermitian_part, hstack, is_psd_scaled, null_space_scaled, orthonormalize, orthonormalize_scaled,
    psd_sqrt, singular_values, solve, spectral_norm, truncated_svd_relative, vstack, CMatrix, CVector, Subspace, Tolerance, C64,
};
use crate::serde_matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearRelation {
    dim_in: usize,
    dim_out: usize,
    graph: Subspace,
}

impl LinearRelation {
    pub fn from_graph(dim_in: usize, dim_out: usize, graph: Subspace) -> Result<Self> {
        if graph.ambient_dim() != dim_in + dim_out {
            return Err(Error::DimensionMismatch { expected: dim_in + dim_out, found: graph.ambient_dim() });
        }
        Ok(Self { dim_in, dim_out, graph })
    }

    /// Span of the columns of `pairs`, each a stacked `(x; y)`.
    pub fn from_pairs(dim_in: usize, dim_out: usize, pairs: &CMatrix, tol: &Tolerance) -> Result<Self> {
        if pairs.nrows() != dim_in + dim_out {
            return Err(Error::DimensionMismatch { expected: dim_in + dim_out, found: pairs.nrows() });
        }
        Self::from_graph(dim_in, dim_out, orthonormalize(pairs, tol)?)
    }

    /// Graph of the operator `m: ℂ^{cols} → ℂ^{rows}`.
    pub fn from_matrix(m: &CMatrix, tol: &Tolerance) -> Result<Self> {
        check_finite(m, "operator")?;
        let (rows, cols) = m.shape();
        Self::from_pairs(cols, rows, &vstack(&CMatrix::identity(cols, cols), m), tol)
    }

    /// `{0} × sub`.
    pub fn multivalued(dim_in: usize, sub: &Subspace) -> Self {
        let basis = vstack(&CMatrix::zeros(dim_in, sub.dim()), sub.basis());
        let graph = Subspace::from_orthonormal(basis, &Tolerance::default()).expect("orthonormal by construction");
        Self { dim_in, dim_out: sub.ambient_dim(), graph }
    }

    /// `A₀ ⊕ ({0} × H₀⊥)` for an operator `a0` given in `h0`-coordinates.
    pub fn from_operator_part(h0: &Subspace, a0: &CMatrix, tol: &Tolerance) -> Result<Self> {
        if a0.nrows() != h0.dim() || a0.ncols() != h0.dim() {
            return Err(Error::DimensionMismatch { expected: h0.dim(), found: a0.nrows() });
        }
        check_finite(a0, "operator part")?;
        let n = h0.ambient_dim();
        let q = h0.basis();
        // Orthonormalize the single-valued block by QR on its own: it has
        // full column rank, and keeping {0} × H₀⊥ separate keeps the split
        // exact even when ‖A₀‖ is large.
        let single = if h0.is_zero() { CMatrix::zeros(2 * n, 0) } else { vstack(q, &(q * a0)).qr().q() };
        let perp = h0.complement();
        let multi = vstack(&CMatrix::zeros(n, perp.dim()), perp.basis());
        Self::from_graph(n, n, Subspace::from_orthonormal(hstack(&single, &multi), tol)?)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn graph(&self) -> &Subspace {
        &self.graph
    }

    pub fn graph_dim(&self) -> usize {
        self.graph.dim()
    }

    fn tol(&self) -> Tolerance {
        Tolerance { rank_tol: self.graph.rank_tol(), ..Tolerance::default() }
    }

    /// First-block rows of the graph basis.
    pub fn top(&self) -> CMatrix {
        self.graph.basis().rows(0, self.dim_in).into_owned()
    }

    /// Second-block rows of the graph basis.
    pub fn bottom(&self) -> CMatrix {
        self.graph.basis().rows(self.dim_in, self.dim_out).into_owned()
    }

    pub fn is_square(&self) -> bool {
        self.dim_in == self.dim_out
    }

    pub fn dom(&self) -> Subspace {
        orthonormalize_scaled(&self.top(), 1.0, &self.tol()).unwrap_or_else(|_| Subspace::zero(self.dim_in))
    }

    pub fn ran(&self) -> Subspace {
        orthonormalize_scaled(&self.bottom(), 1.0, &self.tol()).unwrap_or_else(|_| Subspace::zero(self.dim_out))
    }

    /// `{x : (x, 0) ∈ A}`.
    pub fn ker(&self) -> Subspace {
        let coeffs = null_space_scaled(&self.bottom(), 1.0, &self.tol());
        orthonormalize_scaled(&(self.top() * coeffs.basis()), 1.0, &self.tol()).unwrap_or_else(|_| Subspace::zero(self.dim_in))
    }

    /// `{y : (0, y) ∈ A}`.
    pub fn mul(&self) -> Subspace {
        let coeffs = null_space_scaled(&self.top(), 1.0, &self.tol());
        orthonormalize_scaled(&(self.bottom() * coeffs.basis()), 1.0, &self.tol())
            .unwrap_or_else(|_| Subspace::zero(self.dim_out))
    }

    pub fn is_operator(&self) -> bool {
        self.mul().is_zero()
    }

    /// `{(y, x) : (x, y) ∈ A}`.
    pub fn inverse(&self) -> Self {
        let basis = vstack(&self.bottom(), &self.top());
        let graph = Subspace::from_orthonormal(basis, &self.tol()).expect("row permutation keeps orthonormality");
        Self { dim_in: self.dim_out, dim_out: self.dim_in, graph }
    }

    /// `−A = {(x, −y)}`.
    pub fn negate(&self) -> Self {
        let basis = vstack(&self.top(), &(-self.bottom()));
        let graph = Subspace::from_orthonormal(basis, &self.tol()).expect("sign flip keeps orthonormality");
        Self { graph, ..self.clone() }
    }

    /// `e^{−iη}·A = {(x, e^{−iη}y)}`.
    pub fn rotated(&self, eta: f64) -> Self {
        let basis = vstack(&self.top(), &(self.bottom() * C64::from_polar(1.0, -eta)));
        let graph = Subspace::from_orthonormal(basis, &self.tol()).expect("unit phase keeps orthonormality");
        Self { graph, ..self.clone() }
    }

    /// Orthogonal complement of the graph in `ℂᵍ ⊕ ℂʰ`.
    pub fn orthogonal_complement(&self) -> Self {
        Self { graph: self.graph.complement(), ..self.clone() }
    }

    /// `B ∘ A = {(x, z) : ∃y, (x, y) ∈ A, (y, z) ∈ B}`.
    pub fn compose(&self, b: &LinearRelation, tol: &Tolerance) -> Result<Self> {
        if self.dim_out != b.dim_in {
            return Err(Error::DimensionMismatch { expected: self.dim_out, found: b.dim_in });
        }
        let k = self.graph_dim();
        let matching = null_space_scaled(&hstack(&self.bottom(), &(-b.top())), 1.0, tol);
        let c = matching.basis().rows(0, k).into_owned();
        let d = matching.basis().rows(k, b.graph_dim()).into_owned();
        let pairs = vstack(&(self.top() * c), &(b.bottom() * d));
        Self::from_pairs(self.dim_in, b.dim_out, &pairs, tol)
    }

    /// Graph distance (spectral distance of the graph projectors).
    pub fn distance(&self, other: &LinearRelation) -> f64 {
        if self.dim_in != other.dim_in || self.dim_out != other.dim_out {
            return 1.0;
        }
        self.graph.distance(&other.graph)
    }

    pub fn approx_eq(&self, other: &LinearRelation, slack: f64) -> bool {
        self.distance(other) <= slack
    }

    /// The matrix of an everywhere defined single-valued relation.
    pub fn to_operator(&self, tol: &Tolerance) -> Result<CMatrix> {
        // Full domain and trivial multivalued part together mean the graph
        // has dimension dim_in with a nonsingular top block, and then the
        // operator is bottom·top⁻¹.
        if self.graph_dim() != self.dim_in {
            return Err(Error::NotAnOperator);
        }
        let top = self.top();
        let sv = singular_values(&top);
        let smin = sv.last().copied().unwrap_or(1.0);
        if smin <= tol.rank_tol * sv.first().copied().unwrap_or(0.0).max(1.0) {
            return Err(Error::NotAnOperator);
        }
        Ok(solve(&top.adjoint(), &self.bottom().adjoint())?.adjoint())
    }
}

#[derive(Serialize, Deserialize)]
struct RelationRepr {
    dim_in: usize,
    dim_out: usize,
    #[serde(with = "serde_matrix")]
    graph_basis: CMatrix,
}

impl Serialize for LinearRelation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RelationRepr { dim_in: self.dim_in, dim_out: self.dim_out, graph_basis: self.graph.basis().clone() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LinearRelation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = RelationRepr::deserialize(d)?;
        let total = repr.dim_in + repr.dim_out;
        let basis = if repr.graph_basis.nrows() == 0 { CMatrix::zeros(total, 0) } else { repr.graph_basis };
        // Accept any spanning set; store an orthonormal basis.
        LinearRelation::from_pairs(repr.dim_in, repr.dim_out, &basis, &Tolerance::default()).map_err(D::Error::custom)
    }
}

pub fn rel_inverse(a: &LinearRelation) -> LinearRelation {
    a.inverse()
}

/// `A* = ((−A)⊥)⁻¹`.
pub fn rel_adjoint(a: &LinearRelation) -> LinearRelation {
    a.negate().orthogonal_complement().inverse()
}

/// `(H₀, A₀)` with `H₀ = dom A` and `A₀` the operator part in
/// `H₀`-coordinates. Requires `mul A = H₀⊥`.
pub fn operator_part(a: &LinearRelation, tol: &Tolerance) -> Result<(Subspace, CMatrix)> {
    if !a.is_square() {
        return Err(Error::NotDecomposable);
    }
    let (h0, cmin, mul) = selection_parts(a, tol);
    let perp = h0.complement();
    if mul.dim() != perp.dim() || !perp.contains(&mul, tol.containment()) {
        return Err(Error::NotDecomposable);
    }
    let a0 = h0.basis().adjoint() * cmin;
    Ok((h0, a0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MSectorialFailure {
    RangeDeficient,
    NumericalRangeOutsideSector,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MSectorialVerdict {
    pub is_m_sectorial: bool,
    pub angle_theta: Option<f64>,
    pub reason: Option<MSectorialFailure>,
}

impl MSectorialVerdict {
    fn fail(reason: MSectorialFailure, angle_theta: Option<f64>) -> Self {
        Self { is_m_sectorial: false, angle_theta, reason: Some(reason) }
    }
}

/// m-sectoriality with vertex 0 and angle at most `theta`.
///
/// The numerical range `{⟨y, x⟩ : (x, y) ∈ A}` is the range of the form
/// `cᴴ·(Tᴴ·B)·c` on graph coefficients, so the sector test runs on `Tᴴ·B`.
/// This coincides with the test on `A₀` when `A = A₀ ⊕ ({0} × H₀⊥)` and
/// rejects any multivalued part that is not orthogonal to the domain.
pub fn m_sectorial_check(a: &LinearRelation, theta: f64, tol: &Tolerance) -> MSectorialVerdict {
    use MSectorialFailure::*;
    if !a.is_square() {
        return MSectorialVerdict::fail(RangeDeficient, None);
    }
    let t = a.top();
    let b = a.bottom();
    let coeff_form = t.adjoint() * &b;
    let sector = matrix_sector_check_scaled(&coeff_form, 1.0, tol);
    if !sector.is_sectorial {
        return MSectorialVerdict::fail(NumericalRangeOutsideSector, None);
    }
    if !sector.admits_angle(theta) {
        return MSectorialVerdict::fail(NumericalRangeOutsideSector, sector.angle_theta);
    }
    let n = a.dim_in();
    let sv = singular_values(&(t + b));
    let cutoff = tol.rank_tol * sv.first().copied().unwrap_or(0.0).max(1.0);
    let range = sv.iter().filter(|&&s| s > cutoff).count();
    if range < n {
        return MSectorialVerdict::fail(RangeDeficient, sector.angle_theta);
    }
    MSectorialVerdict { is_m_sectorial: true, angle_theta: sector.angle_theta, reason: None }
}

/// `(λ − A)⁻¹` as an ambient matrix.
///
/// With `S = λ·T − B`, a pair `(T·c, B·c)` solves `λx − y = z` iff `S·c = z`,
/// so `(λ − A)⁻¹ = T·S⁻¹`. On decomposable relations this is
/// `(λ − A₀)⁻¹·P₀`.
pub fn resolvent(a: &LinearRelation, lambda: C64) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::NotDecomposable);
    }
    let n = a.dim_in();
    if a.graph_dim() != n {
        return Err(Error::Singular(format!(
            "graph dimension {} differs from {n}, so λ − A is not bijective",
            a.graph_dim()
        )));
    }
    let t = a.top();
    let s = &t * lambda - a.bottom();
    let c = solve(&s, &CMatrix::identity(n, n))?;
    Ok(t * c)
}

/// `(λ₀ − A₀)⁻¹·P₀`, from the operator part.
pub fn resolvent_from_operator_part(h0: &Subspace, a0: &CMatrix, lambda: C64) -> Result<CMatrix> {
    let d = h0.dim();
    let inner = solve(&(CMatrix::identity(d, d) * lambda - a0), &CMatrix::identity(d, d))?;
    Ok(h0.basis() * inner * h0.basis().adjoint())
}

/// `(I + A)⁻¹`.
pub fn inv_one_plus(a: &LinearRelation) -> Result<CMatrix> {
    Ok(-resolvent(a, C64::new(-1.0, 0.0))?)
}

/// Square root of a self-adjoint relation with accretive operator part:
/// `A₀^{1/2} ⊕ ({0} × H₀⊥)`.
pub fn rel_sqrt(a: &LinearRelation, tol: &Tolerance) -> Result<LinearRelation> {
    if !a.is_square() {
        return Err(Error::NotSelfAdjoint);
    }
    if rel_adjoint(a).distance(a) > tol.containment() {
        return Err(Error::NotSelfAdjoint);
    }
    let (h0, a0) = operator_part(a, tol)?;
    let root = psd_sqrt(&hermitian_part(&a0), tol)?;
    LinearRelation::from_operator_part(&h0, &root, tol)
}

/// `(dom C, C_min)` where `C_min` maps `dom C`-coordinates to the element of
/// least norm in `C x`.
pub fn least_norm_selection(c: &LinearRelation) -> (Subspace, CMatrix) {
    least_norm_selection_with(c, &c.tol())
}

fn least_norm_selection_with(c: &LinearRelation, tol: &Tolerance) -> (Subspace, CMatrix) {
    let (dom, cmin, _) = selection_parts(c, tol);
    (dom, cmin)
}

/// `dom C`, the least-norm selection and `mul C` from one SVD of the top
/// block `T = U·Σ·Vᴴ`: `dom C = span U`, the minimal coefficients hitting
/// `U` are `V·Σ⁻¹`, and `mul C` is `B` applied to `(span V)⊥`.
fn selection_parts(c: &LinearRelation, tol: &Tolerance) -> (Subspace, CMatrix, Subspace) {
    let svd = truncated_svd_relative(&c.top(), tol.rank_tol, tol.rank_tol);
    let bottom = c.bottom();
    let orthonormal = |basis: CMatrix| Subspace::from_orthonormal(basis, tol).expect("singular vectors are orthonormal");
    let null_coeffs = orthonormal(svd.v.clone()).complement();
    let mul = orthonormalize_scaled(&(&bottom * null_coeffs.basis()), 1.0, tol)
        .unwrap_or_else(|_| Subspace::zero(c.dim_out));
    let dom = orthonormal(svd.u);
    if dom.is_zero() {
        return (dom, CMatrix::zeros(c.dim_out, 0), mul);
    }
    let inv = CMatrix::from_diagonal(&CVector::from_iterator(
        svd.values.len(),
        svd.values.iter().map(|&s| C64::new(1.0 / s, 0.0)),
    ));
    let selection = bottom * (svd.v * inv);
    let cmin = &selection - mul.basis() * (mul.basis().adjoint() * &selection);
    (dom, cmin, mul)
}

/// Smallest eigenvalue of `M_Dᴴ·M_D − M_Cᴴ·M_C` on `dom D`, relative to the
/// larger of the two norms (floored at `rank_tol`, since selections carry
/// roundoff relative to the unit-normalised graph); `None` when
/// `dom D ⊄ dom C`, infinite when `dom D = {0}`.
pub fn domination_margin(d: &LinearRelation, c: &LinearRelation, tol: &Tolerance) -> Option<f64> {
    if d.dim_in != c.dim_in || d.dim_out != c.dim_out {
        return None;
    }
    let (dom_d, md) = least_norm_selection_with(d, tol);
    let (dom_c, mc) = least_norm_selection_with(c, tol);
    if !dom_c.contains(&dom_d, tol.containment()) {
        return None;
    }
    if dom_d.is_zero() {
        return Some(f64::INFINITY);
    }
    let mc_on_d = mc * (dom_c.basis().adjoint() * dom_d.basis());
    let gd = md.adjoint() * &md;
    let gc = mc_on_d.adjoint() * &mc_on_d;
    let scale = spectral_norm(&gd).max(spectral_norm(&gc)).max(tol.rank_tol);
    let diff = hermitian_part(&(gd - gc));
    let min = hermitian_eigenvalues(&diff).first().copied().unwrap_or(0.0);
    Some(min / scale)
}

/// `D` dominates `C`: for every `(x, y) ∈ D` there is `(x, z) ∈ C` with
/// `‖z‖ ≤ ‖y‖`.
pub fn dominates(d: &LinearRelation, c: &LinearRelation, tol: &Tolerance) -> bool {
    if d.dim_in != c.dim_in || d.dim_out != c.dim_out {
        return false;
    }
    let (dom_d, md) = least_norm_selection_with(d, tol);
    let (dom_c, mc) = least_norm_selection_with(c, tol);
    if !dom_c.contains(&dom_d, tol.containment()) {
        return false;
    }
    if dom_d.is_zero() {
        return true;
    }
    let mc_on_d = mc * (dom_c.basis().adjoint() * dom_d.basis());
    let gd = md.adjoint() * &md;
    let gc = mc_on_d.adjoint() * &mc_on_d;
    let scale = spectral_norm(&gd).max(spectral_norm(&gc)).max(tol.rank_tol);
    is_psd_scaled(&hermitian_part(&(gd - gc)), scale, tol)
}

/// `A = R⁻¹ − I`, spanned by `(R·eᵢ; eᵢ − R·eᵢ)`.
pub fn rel_from_resolvent(r: &CMatrix, tol: &Tolerance) -> Result<LinearRelation> {
    crate::linalg::check_square(r)?;
    check_finite(r, "resolvent")?;
    let n = r.nrows();
    let pairs = vstack(r, &(CMatrix::identity(n, n) - r));
    LinearRelation::from_pairs(n, n, &pairs, tol)
}
