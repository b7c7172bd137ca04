//! From forms to m-sectorial relations and back.
//!
//! Closed forms are associated directly through their coordinate matrix.
//! Non-closable forms are modelled by a [`JEllipticPresentation`]: a form
//! `ã` on an auxiliary space `V = ℂᵐ` together with `j: V → H`, and
//! `A = {(j·u, y) : ã(u, v) = ⟨y, j·v⟩ for all v}`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::forms::{matrix_at_z, matrix_sector_check, sector_check, Form, SectorVerdict};
use crate::linalg::{
    check_finite, check_square, hermitian_eigenvalues, hermitian_part, hstack, orthonormalize_rank, spectral_norm,
    truncated_svd, CMatrix, Subspace, Tolerance, C64,
};
use crate::relations::{m_sectorial_check, operator_part, LinearRelation};
use crate::serde_matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct JEllipticPresentation {
    j: CMatrix,
    matrix: CMatrix,
    omega: f64,
}

impl JEllipticPresentation {
    /// Checks shapes and coercivity of `Re ã + ω·jᴴj`.
    pub fn new(j: CMatrix, matrix: CMatrix, omega: f64, tol: &Tolerance) -> Result<Self> {
        check_square(&matrix)?;
        check_finite(&matrix, "presentation matrix")?;
        check_finite(&j, "j")?;
        if j.ncols() != matrix.nrows() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: j.ncols() });
        }
        if !omega.is_finite() || omega < 0.0 {
            return Err(Error::InvalidParameter(format!("omega must be finite and nonnegative, got {omega}")));
        }
        let p = Self { j, matrix, omega };
        p.check_coercive(tol)?;
        Ok(p)
    }

    pub fn with_unit_shift(j: CMatrix, matrix: CMatrix, tol: &Tolerance) -> Result<Self> {
        Self::new(j, matrix, 1.0, tol)
    }

    fn check_coercive(&self, tol: &Tolerance) -> Result<()> {
        if self.v_dim() == 0 {
            return Ok(());
        }
        let shifted = hermitian_part(&self.matrix) + self.j.adjoint() * &self.j * C64::new(self.omega, 0.0);
        let min = hermitian_eigenvalues(&shifted).first().copied().unwrap_or(0.0);
        let scale = spectral_norm(&self.matrix).max(self.omega * spectral_norm(&self.j).powi(2));
        if min <= tol.psd_tol * scale {
            return Err(Error::NotCoercive(min));
        }
        Ok(())
    }

    pub fn v_dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn space_dim(&self) -> usize {
        self.j.nrows()
    }

    pub fn j(&self) -> &CMatrix {
        &self.j
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn sector(&self, tol: &Tolerance) -> SectorVerdict {
        matrix_sector_check(&self.matrix, tol)
    }

    /// Same `j` and `ω`, new matrix on `V`; coercivity is re-checked.
    pub fn with_matrix(&self, matrix: CMatrix, tol: &Tolerance) -> Result<Self> {
        Self::new(self.j.clone(), matrix, self.omega, tol)
    }

    /// `ã_z = Re ã + z·Im ã`.
    pub fn at_z(&self, z: C64, tol: &Tolerance) -> Result<Self> {
        self.with_matrix(matrix_at_z(&self.matrix, z), tol)
    }

    /// `ã` as a densely defined form on `V`.
    pub fn as_form(&self) -> Form {
        Form::full(self.matrix.clone()).expect("square finite matrix")
    }

    pub fn is_injective(&self, tol: &Tolerance) -> bool {
        let smax = spectral_norm(&self.j);
        smax > 0.0 && truncated_svd(&self.j, tol.rank_tol * smax).values.len() == self.v_dim()
    }

    /// The form `a(j·u, j·v) = ã(u, v)` on `ran j`, for injective `j`.
    ///
    /// With `j = U·Σ·Vᴴ` the domain is `span U` and the coordinate matrix is
    /// `Σ⁻¹·Vᴴ·M·V·Σ⁻¹`.
    pub fn push_forward(&self, tol: &Tolerance) -> Result<Form> {
        if !self.is_injective(tol) {
            return Err(Error::InvalidParameter("push-forward needs an injective j".into()));
        }
        let svd = truncated_svd(&self.j, 0.0);
        let k = self.v_dim();
        let inv_sigma = CMatrix::from_diagonal(&crate::linalg::CVector::from_iterator(
            k,
            svd.values.iter().take(k).map(|&s| C64::new(1.0 / s, 0.0)),
        ));
        let u = svd.u.columns(0, k).into_owned();
        let v = svd.v.columns(0, k).into_owned();
        let coords = &inv_sigma * v.adjoint() * &self.matrix * &v * &inv_sigma;
        Form::new(Subspace::from_orthonormal(u, tol)?, coords)
    }
}

#[derive(Serialize, Deserialize)]
struct PresentationRepr {
    v_dim: usize,
    #[serde(with = "serde_matrix")]
    j: CMatrix,
    #[serde(with = "serde_matrix")]
    matrix: CMatrix,
    #[serde(default = "unit")]
    omega: f64,
}

fn unit() -> f64 {
    1.0
}

impl Serialize for JEllipticPresentation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PresentationRepr { v_dim: self.v_dim(), j: self.j.clone(), matrix: self.matrix.clone(), omega: self.omega }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for JEllipticPresentation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = PresentationRepr::deserialize(d)?;
        if repr.matrix.nrows() != repr.v_dim {
            return Err(D::Error::custom("matrix size differs from v_dim"));
        }
        JEllipticPresentation::new(repr.j, repr.matrix, repr.omega, &Tolerance::default()).map_err(D::Error::custom)
    }
}

/// `A = A₀ ⊕ ({0} × dom(a)⊥)` with `A₀` acting as the coordinate matrix of
/// `a` on `dom(a)`.
pub fn associate_closed(a: &Form, tol: &Tolerance) -> Result<LinearRelation> {
    if !sector_check(a, tol).is_sectorial {
        return Err(Error::NotSectorial);
    }
    LinearRelation::from_operator_part(a.domain(), a.matrix(), tol)
}

/// `{(j·u, y) : M·u = jᴴ·y}`, from the null space of `[M, −jᴴ]`.
///
/// Coercivity makes `[M, −jᴴ]` surjective, so the null space has dimension
/// exactly `dim H` and the graph is taken with that rank.
pub fn associate_jelliptic(p: &JEllipticPresentation, tol: &Tolerance) -> Result<LinearRelation> {
    p.check_coercive(tol)?;
    if !p.sector(tol).is_sectorial {
        return Err(Error::NotSectorial);
    }
    let (m, n) = (p.v_dim(), p.space_dim());
    let block = hstack(&p.matrix, &(-p.j.adjoint()));
    let kernel = if m == 0 {
        Subspace::full(n)
    } else {
        orthonormalize_rank(&block.adjoint(), m)?.complement()
    };
    let u = kernel.basis().rows(0, m).into_owned();
    let y = kernel.basis().rows(m, n).into_owned();
    let pairs = crate::linalg::vstack(&(&p.j * u), &y);
    let graph = orthonormalize_rank(&pairs, n)?;
    LinearRelation::from_graph(n, n, graph)
}

/// The closed form of an m-sectorial relation: `â(u, v) = ⟨A₀u, v⟩` on
/// `H₀ = dom A`.
pub fn associated_closed_form(a: &LinearRelation, tol: &Tolerance) -> Result<Form> {
    let verdict = m_sectorial_check(a, std::f64::consts::FRAC_PI_2, tol);
    if !verdict.is_m_sectorial {
        return Err(Error::NotMSectorial(format!("{:?}", verdict.reason)));
    }
    let (h0, a0) = operator_part(a, tol)?;
    Form::new(h0, a0)
}
