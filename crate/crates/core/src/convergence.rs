//! Monotone sequences of sectorial forms and their resolvent limits.
//!
//! Members are either closed forms or j-elliptic presentations sharing one
//! `j`. Limits come from an analytic family descriptor when one is attached,
//! and otherwise from a numerical certificate that the report flags.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::association::{associate_closed, associate_jelliptic, JEllipticPresentation};
use crate::error::{Error, Result};
use crate::forms::{
    form_at_z, form_difference, form_order_leq, matrix_at_z, matrix_sector_check, matrix_sector_check_noisy, Form, HoloStrip,
    SectorVerdict,
};
use crate::linalg::{
    hermitian_eigen, hermitian_part, is_psd_scaled, skew_part, spectral_norm, truncated_svd, CMatrix, CVector, Subspace,
    Tolerance, C64, I,
};
use crate::par::{map_range, Execution};
use crate::relations::{inv_one_plus, m_sectorial_check, rel_from_resolvent, resolvent_from_operator_part, LinearRelation, MSectorialVerdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SequenceKind {
    Closed,
    NonClosable,
}

/// One term of a form sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Member {
    Closed(Form),
    NonClosable(JEllipticPresentation),
}

impl Member {
    pub fn kind(&self) -> SequenceKind {
        match self {
            Member::Closed(_) => SequenceKind::Closed,
            Member::NonClosable(_) => SequenceKind::NonClosable,
        }
    }

    pub fn space_dim(&self) -> usize {
        match self {
            Member::Closed(f) => f.space_dim(),
            Member::NonClosable(p) => p.space_dim(),
        }
    }

    /// Coordinate matrix on the parameter space: `dom(a)` or `V`.
    pub fn matrix(&self) -> &CMatrix {
        match self {
            Member::Closed(f) => f.matrix(),
            Member::NonClosable(p) => p.matrix(),
        }
    }

    /// Same domain (or same `j`), new coordinate matrix.
    pub fn with_matrix(&self, m: CMatrix, tol: &Tolerance) -> Result<Member> {
        Ok(match self {
            Member::Closed(f) => Member::Closed(f.with_matrix(m)?),
            Member::NonClosable(p) => Member::NonClosable(p.with_matrix(m, tol)?),
        })
    }

    pub fn sector(&self, tol: &Tolerance) -> SectorVerdict {
        matrix_sector_check(self.matrix(), tol)
    }

    /// `Re a + z·Im a`.
    pub fn at_z(&self, z: C64, tol: &Tolerance) -> Result<Member> {
        self.with_matrix(matrix_at_z(self.matrix(), z), tol)
    }

    /// `e^{−iη}·a`.
    pub fn rotate(&self, eta: f64, tol: &Tolerance) -> Result<Member> {
        self.with_matrix(self.matrix() * C64::from_polar(1.0, -eta), tol)
    }

    pub fn associate(&self, tol: &Tolerance) -> Result<LinearRelation> {
        match self {
            Member::Closed(f) => associate_closed(f, tol),
            Member::NonClosable(p) => associate_jelliptic(p, tol),
        }
    }

    /// `(I + A_z)⁻¹` for the relation associated with `a_z`.
    pub fn resolvent_at(&self, z: C64, tol: &Tolerance) -> Result<CMatrix> {
        match self {
            Member::Closed(f) => {
                let mz = matrix_at_z(f.matrix(), z);
                Ok(-resolvent_from_operator_part(f.domain(), &mz, C64::new(-1.0, 0.0))?)
            }
            Member::NonClosable(_) => inv_one_plus(&self.at_z(z, tol)?.associate(tol)?),
        }
    }

    /// Ambient embedding of parameter-space coordinates.
    fn embed(&self, coords: &CVector) -> CVector {
        match self {
            Member::Closed(f) => f.domain().basis() * coords,
            Member::NonClosable(_) => coords.clone(),
        }
    }
}

fn same_j(a: &JEllipticPresentation, b: &JEllipticPresentation, tol: &Tolerance) -> bool {
    a.j().shape() == b.j().shape()
        && spectral_norm(&(a.j() - b.j())) <= tol.rank_tol * spectral_norm(a.j()).max(1.0)
}

/// `a_{n+1} − a_n`, on `dom(a_{n+1})` for closed members and on `V` for
/// presentations.
pub fn increment(prev: &Member, next: &Member, tol: &Tolerance) -> Result<Form> {
    match (prev, next) {
        (Member::Closed(a), Member::Closed(b)) => form_difference(b, a, tol),
        (Member::NonClosable(a), Member::NonClosable(b)) => {
            if !same_j(a, b, tol) {
                return Err(Error::InvalidParameter("members of a non-closable sequence must share j".into()));
            }
            Form::full(b.matrix() - a.matrix())
        }
        _ => Err(Error::InvalidParameter("mixed closed and non-closable members".into())),
    }
}

/// `a_{n,x} ≤ a_{n+1,x}` for real `x`.
pub fn slice_leq(prev: &Member, next: &Member, x: f64, tol: &Tolerance) -> Result<bool> {
    let z = C64::new(x, 0.0);
    match (prev, next) {
        (Member::Closed(a), Member::Closed(b)) => form_order_leq(&form_at_z(a, z), &form_at_z(b, z), tol),
        _ => {
            let d = increment(prev, next, tol)?;
            let scale = spectral_norm(prev.matrix()).max(spectral_norm(next.matrix()));
            Ok(is_psd_scaled(&hermitian_part(&matrix_at_z(d.matrix(), z)), scale, tol))
        }
    }
}

/// A term `coeffs[k]·form` added to the base of a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub form: Form,
    pub coeffs: Vec<f64>,
}

/// A term whose coefficients converge to `limit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub form: Form,
    pub coeffs: Vec<f64>,
    pub limit: f64,
}

/// `a_k = q + c_k·p + d_k·r` with `c_k ↑ ∞` and `d_k → d_∞`.
///
/// The limit is `q + d_∞·r` on `ker Re p` (intersected with `dom q`); `p`
/// must be sectorial, so it vanishes there. For presentations `p` and `r`
/// are forms on `V` and the limit restricts `V`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyDescriptor {
    pub base: Member,
    #[serde(default)]
    pub penalty: Option<Term>,
    #[serde(default)]
    pub drift: Option<Drift>,
}

impl FamilyDescriptor {
    /// Number of members, or `None` for a constant family.
    pub fn len(&self) -> Option<usize> {
        self.penalty.as_ref().map(|t| t.coeffs.len()).or(self.drift.as_ref().map(|d| d.coeffs.len()))
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    fn extra_matrix(&self, f: &Form, tol: &Tolerance) -> Result<CMatrix> {
        match &self.base {
            Member::Closed(q) => {
                if f.space_dim() != q.space_dim() {
                    return Err(Error::DimensionMismatch { expected: q.space_dim(), found: f.space_dim() });
                }
                Ok(f.restrict(q.domain(), tol)?.matrix().clone())
            }
            Member::NonClosable(p) => {
                if f.space_dim() != p.v_dim() || !f.domain().is_full() {
                    return Err(Error::InvalidParameter("family terms of a presentation must be full forms on V".into()));
                }
                Ok(f.matrix().clone())
            }
        }
    }

    pub fn validate(&self, tol: &Tolerance) -> Result<()> {
        if let (Some(p), Some(d)) = (&self.penalty, &self.drift) {
            if p.coeffs.len() != d.coeffs.len() {
                return Err(Error::InvalidParameter("penalty and drift coefficient lists differ in length".into()));
            }
        }
        if let Some(p) = &self.penalty {
            let m = self.extra_matrix(&p.form, tol)?;
            if !matrix_sector_check(&m, tol).is_sectorial {
                return Err(Error::InvalidParameter("penalty form must be sectorial".into()));
            }
            if p.coeffs.iter().any(|c| !c.is_finite()) || p.coeffs.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::InvalidParameter("penalty coefficients must be finite and nondecreasing".into()));
            }
        }
        if let Some(d) = &self.drift {
            self.extra_matrix(&d.form, tol)?;
            if d.coeffs.iter().any(|c| !c.is_finite()) || !d.limit.is_finite() {
                return Err(Error::InvalidParameter("drift coefficients must be finite".into()));
            }
        }
        Ok(())
    }

    /// The `k`-th member (0-based).
    pub fn member(&self, k: usize, tol: &Tolerance) -> Result<Member> {
        let mut m = self.base.matrix().clone();
        if let Some(p) = &self.penalty {
            m += self.extra_matrix(&p.form, tol)? * C64::new(p.coeffs[k], 0.0);
        }
        if let Some(d) = &self.drift {
            m += self.extra_matrix(&d.form, tol)? * C64::new(d.coeffs[k], 0.0);
        }
        self.base.with_matrix(m, tol)
    }

    pub fn limit(&self, tol: &Tolerance) -> Result<Member> {
        let mut m = self.base.matrix().clone();
        if let Some(d) = &self.drift {
            m += self.extra_matrix(&d.form, tol)? * C64::new(d.limit, 0.0);
        }
        let keep = match &self.penalty {
            Some(p) => {
                let eig = hermitian_eigen(&hermitian_part(&self.extra_matrix(&p.form, tol)?));
                let cutoff = tol.rank_tol * eig.scale();
                eig.select(|l| l <= cutoff)
            }
            None => CMatrix::identity(m.nrows(), m.nrows()),
        };
        let restricted = keep.adjoint() * m * &keep;
        Ok(match &self.base {
            Member::Closed(q) => {
                let dom = Subspace::from_orthonormal(q.domain().basis() * &keep, tol)?;
                Member::Closed(Form::new(dom, restricted)?)
            }
            Member::NonClosable(p) => {
                Member::NonClosable(JEllipticPresentation::new(p.j() * &keep, restricted, p.omega(), tol)?)
            }
        })
    }

    pub fn rotate(&self, eta: f64, tol: &Tolerance) -> Result<Self> {
        let phase = C64::from_polar(1.0, -eta);
        Ok(Self {
            base: self.base.rotate(eta, tol)?,
            penalty: self.penalty.as_ref().map(|t| Term { form: t.form.scale(phase), coeffs: t.coeffs.clone() }),
            drift: self.drift.as_ref().map(|d| Drift { form: d.form.scale(phase), ..d.clone() }),
        })
    }
}

/// How the limit of a sequence is known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
#[allow(clippy::large_enum_variant)]
pub enum LimitDescriptor {
    Family(FamilyDescriptor),
    UserSupplied { limit: Member },
}

impl LimitDescriptor {
    pub fn limit(&self, tol: &Tolerance) -> Result<Member> {
        match self {
            LimitDescriptor::Family(f) => f.limit(tol),
            LimitDescriptor::UserSupplied { limit } => Ok(limit.clone()),
        }
    }

    fn kind(&self) -> SequenceKind {
        match self {
            LimitDescriptor::Family(f) => f.base.kind(),
            LimitDescriptor::UserSupplied { limit } => limit.kind(),
        }
    }

    fn space_dim(&self) -> usize {
        match self {
            LimitDescriptor::Family(f) => f.base.space_dim(),
            LimitDescriptor::UserSupplied { limit } => limit.space_dim(),
        }
    }

    fn rotate(&self, eta: f64, tol: &Tolerance) -> Result<Self> {
        Ok(match self {
            LimitDescriptor::Family(f) => LimitDescriptor::Family(f.rotate(eta, tol)?),
            LimitDescriptor::UserSupplied { limit } => LimitDescriptor::UserSupplied { limit: limit.rotate(eta, tol)? },
        })
    }
}

/// A nonempty homogeneous sequence `(a_n)` with a declared sector angle.
#[derive(Debug, Clone, PartialEq)]
pub struct FormSequence {
    members: Vec<Member>,
    theta: f64,
    n_values: Vec<u64>,
    descriptor: Option<LimitDescriptor>,
}

impl FormSequence {
    pub fn new(members: Vec<Member>, theta: f64) -> Result<Self> {
        let first = members.first().ok_or_else(|| Error::InvalidParameter("empty form sequence".into()))?;
        if !(0.0..FRAC_PI_2).contains(&theta) {
            return Err(Error::InvalidParameter(format!("theta must lie in [0, π/2), got {theta}")));
        }
        let (kind, dim) = (first.kind(), first.space_dim());
        for m in &members {
            if m.kind() != kind {
                return Err(Error::InvalidParameter("mixed closed and non-closable members".into()));
            }
            if m.space_dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: m.space_dim() });
            }
        }
        let n_values = (1..=members.len() as u64).collect();
        Ok(Self { members, theta, n_values, descriptor: None })
    }

    pub fn with_n_values(mut self, n_values: Vec<u64>) -> Result<Self> {
        if n_values.len() != self.members.len() {
            return Err(Error::DimensionMismatch { expected: self.members.len(), found: n_values.len() });
        }
        if n_values.windows(2).any(|w| w[1] <= w[0]) || n_values.first() == Some(&0) {
            return Err(Error::InvalidParameter("n_values must be positive and increasing".into()));
        }
        self.n_values = n_values;
        Ok(self)
    }

    pub fn with_descriptor(mut self, descriptor: LimitDescriptor) -> Result<Self> {
        if descriptor.kind() != self.kind() || descriptor.space_dim() != self.space_dim() {
            return Err(Error::InvalidParameter("descriptor does not match the sequence".into()));
        }
        if let LimitDescriptor::Family(f) = &descriptor {
            if f.len().is_some_and(|l| l != self.members.len()) {
                return Err(Error::InvalidParameter("descriptor length differs from the sequence".into()));
            }
        }
        self.descriptor = Some(descriptor);
        Ok(self)
    }

    pub fn without_descriptor(&self) -> Self {
        Self { descriptor: None, ..self.clone() }
    }

    /// Members generated from a family, with the family as descriptor.
    pub fn from_family(family: FamilyDescriptor, theta: f64, tol: &Tolerance) -> Result<Self> {
        family.validate(tol)?;
        let len = family.len().unwrap_or(1);
        let members = (0..len).map(|k| family.member(k, tol)).collect::<Result<Vec<_>>>()?;
        Self::new(members, theta)?.with_descriptor(LimitDescriptor::Family(family))
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn n_values(&self) -> &[u64] {
        &self.n_values
    }

    pub fn descriptor(&self) -> Option<&LimitDescriptor> {
        self.descriptor.as_ref()
    }

    pub fn kind(&self) -> SequenceKind {
        self.members[0].kind()
    }

    pub fn space_dim(&self) -> usize {
        self.members[0].space_dim()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Serialize, Deserialize)]
struct FormSequenceRepr {
    #[serde(default)]
    kind: Option<SequenceKind>,
    theta: f64,
    #[serde(default)]
    forms: Vec<Member>,
    #[serde(default)]
    n_values: Option<Vec<u64>>,
    #[serde(default)]
    descriptor: Option<LimitDescriptor>,
}

impl Serialize for FormSequence {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FormSequenceRepr {
            kind: Some(self.kind()),
            theta: self.theta,
            forms: self.members.clone(),
            n_values: Some(self.n_values.clone()),
            descriptor: self.descriptor.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FormSequence {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = FormSequenceRepr::deserialize(d)?;
        let tol = Tolerance::default();
        let seq = match (repr.forms.is_empty(), repr.descriptor) {
            (true, Some(LimitDescriptor::Family(f))) => FormSequence::from_family(f, repr.theta, &tol),
            (_, descriptor) => FormSequence::new(repr.forms, repr.theta)
                .and_then(|s| match descriptor {
                    Some(desc) => s.with_descriptor(desc),
                    None => Ok(s),
                }),
        }
        .map_err(D::Error::custom)?;
        if repr.kind.is_some_and(|k| k != seq.kind()) {
            return Err(D::Error::custom("declared kind differs from the members"));
        }
        match repr.n_values {
            Some(n) => seq.with_n_values(n).map_err(D::Error::custom),
            None => Ok(seq),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HypothesisCheck {
    MemberSectorial,
    DomainContained,
    IncrementSectorial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberDiagnostics {
    pub n: u64,
    pub member_angle: Option<f64>,
    /// Against the previous member; absent for the first.
    pub domain_contained: Option<bool>,
    pub increment_angle: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// 0-based member index.
    pub index: usize,
    pub n: u64,
    pub check: HypothesisCheck,
    pub detail: String,
    /// A vector exhibiting the failure: in `H` for closed members, in `V`
    /// for presentations.
    pub witness: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub ok: bool,
    pub theta: f64,
    pub diagnostics: Vec<MemberDiagnostics>,
    pub first_violation: Option<Violation>,
}

/// A coordinate vector on which the form of `m` leaves the sector `theta`.
fn sector_witness(m: &CMatrix, tol: &Tolerance) -> CVector {
    let d = m.nrows();
    if d == 0 {
        return CVector::zeros(0);
    }
    let scale = spectral_norm(m).max(f64::MIN_POSITIVE);
    let eig = hermitian_eigen(&hermitian_part(m));
    if eig.min() < 0.0 {
        return eig.vectors.column(0).into_owned();
    }
    let cutoff = tol.rank_tol * scale;
    let kernel = eig.select(|l| l <= cutoff);
    if kernel.ncols() > 0 {
        let worst = (0..kernel.ncols())
            .max_by(|&a, &b| (m * kernel.column(a)).norm().total_cmp(&(m * kernel.column(b)).norm()))
            .unwrap_or(0);
        return kernel.column(worst).into_owned();
    }
    let mut w = eig.vectors.clone();
    for (k, l) in eig.values.iter().enumerate() {
        w.column_mut(k).iter_mut().for_each(|x| *x /= C64::new(l.sqrt(), 0.0));
    }
    let k_eig = hermitian_eigen(&(w.adjoint() * skew_part(m) * &w));
    let col = if k_eig.min().abs() > k_eig.max().abs() { 0 } else { d - 1 };
    let v = &w * k_eig.vectors.column(col);
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

/// Vector of `inner` farthest from `outer`.
fn containment_witness(outer: &Subspace, inner: &Subspace) -> CVector {
    let outside = inner.basis() - outer.basis() * (outer.basis().adjoint() * inner.basis());
    let svd = truncated_svd(&outside, 0.0);
    if svd.v.ncols() == 0 {
        return CVector::zeros(inner.ambient_dim());
    }
    inner.basis() * svd.v.column(0)
}

/// Sector verdict of an increment. Subtracting two large members leaves
/// roundoff of order `ε·‖a_n‖`, so cutoffs are floored at a small multiple of
/// the members' scale rather than the increment's own, and the angle carries
/// that noise as its roundoff band.
fn increment_verdict(prev: &Member, next: &Member, d: &Form, tol: &Tolerance) -> SectorVerdict {
    let scale = spectral_norm(prev.matrix()).max(spectral_norm(next.matrix()));
    let noise = 8.0 * f64::EPSILON * (prev.matrix().nrows() as f64) * scale;
    matrix_sector_check_noisy(d.matrix(), scale * tol.rank_tol.sqrt(), noise, tol)
}

fn verdict_angle(v: &SectorVerdict) -> Option<f64> {
    v.is_sectorial.then_some(v.angle_theta).flatten()
}

/// Checks, for every `n`: `a_n` sectorial with angle `θ`,
/// `dom(a_n) ⊇ dom(a_{n+1})`, and `a_{n+1} − a_n` sectorial with angle `θ`.
pub fn validate_hypotheses(seq: &FormSequence, tol: &Tolerance) -> HypothesisReport {
    let theta = seq.theta;
    let mut diagnostics = Vec::with_capacity(seq.len());
    let mut first: Option<Violation> = None;
    let mut record = |v: Violation| {
        if first.is_none() {
            first = Some(v);
        }
    };
    for (k, member) in seq.members.iter().enumerate() {
        let n = seq.n_values[k];
        let verdict = member.sector(tol);
        if !verdict.admits_angle(theta) {
            record(Violation {
                index: k,
                n,
                check: HypothesisCheck::MemberSectorial,
                detail: match verdict.angle_theta {
                    Some(a) if verdict.is_sectorial => format!("member angle {a:.6} exceeds theta {theta:.6}"),
                    _ => "member is not sectorial".into(),
                },
                witness: member.embed(&sector_witness(member.matrix(), tol)).iter().copied().collect(),
            });
        }
        let mut diag = MemberDiagnostics { n, member_angle: verdict_angle(&verdict), domain_contained: None, increment_angle: None };
        if k > 0 {
            let prev = &seq.members[k - 1];
            let contained = match (prev, member) {
                (Member::Closed(a), Member::Closed(b)) => {
                    let ok = a.domain().contains(b.domain(), tol.containment());
                    if !ok {
                        record(Violation {
                            index: k,
                            n,
                            check: HypothesisCheck::DomainContained,
                            detail: format!("dom(a_{n}) is not contained in the previous domain"),
                            witness: containment_witness(a.domain(), b.domain()).iter().copied().collect(),
                        });
                    }
                    ok
                }
                (Member::NonClosable(a), Member::NonClosable(b)) => {
                    let ok = same_j(a, b, tol);
                    if !ok {
                        record(Violation {
                            index: k,
                            n,
                            check: HypothesisCheck::DomainContained,
                            detail: "presentations do not share j".into(),
                            witness: Vec::new(),
                        });
                    }
                    ok
                }
                _ => false,
            };
            diag.domain_contained = Some(contained);
            if contained {
                if let Ok(d) = increment(prev, member, tol) {
                    let v = increment_verdict(prev, member, &d, tol);
                    diag.increment_angle = verdict_angle(&v);
                    if !v.admits_angle(theta) {
                        let coords = sector_witness(d.matrix(), tol);
                        let witness = match member {
                            Member::Closed(_) => d.domain().basis() * coords,
                            Member::NonClosable(_) => coords,
                        };
                        record(Violation {
                            index: k,
                            n,
                            check: HypothesisCheck::IncrementSectorial,
                            detail: match v.angle_theta {
                                Some(a) if v.is_sectorial => format!("increment angle {a:.6} exceeds theta {theta:.6}"),
                                _ => "increment is not sectorial".into(),
                            },
                            witness: witness.iter().copied().collect(),
                        });
                    }
                }
            }
        }
        diagnostics.push(diag);
    }
    HypothesisReport { ok: first.is_none(), theta, diagnostics, first_violation: first }
}

fn c_bound_with(seq: &FormSequence, limit: Option<&Member>, tol: &Tolerance) -> Result<f64> {
    let mut c = seq.theta.tan().max(1e-12);
    let mut take = |v: SectorVerdict| -> Result<()> {
        match v.c_bound {
            Some(b) if v.is_sectorial => {
                c = c.max(b);
                Ok(())
            }
            _ => Err(Error::NotSectorial),
        }
    };
    for (k, m) in seq.members.iter().enumerate() {
        take(m.sector(tol))?;
        if k > 0 {
            let prev = &seq.members[k - 1];
            let d = increment(prev, m, tol)?;
            take(increment_verdict(prev, m, &d, tol))?;
        }
    }
    if let Some(l) = limit {
        take(l.sector(tol))?;
    }
    Ok(c)
}

/// The `C` with `|Im a(u)| ≤ C·Re a(u)` for every member, every increment
/// and the analytic limit when one is attached; floored at `tan θ`.
pub fn uniform_c_bound(seq: &FormSequence, tol: &Tolerance) -> Result<f64> {
    let limit = seq.descriptor.as_ref().map(|d| d.limit(tol)).transpose()?;
    c_bound_with(seq, limit.as_ref(), tol)
}

const WINDOW: usize = 5;

/// Limit of an explicit closed sequence without descriptor.
///
/// The last few domains must agree. The last real increment is split into
/// directions that have settled (below `conv_tol` relative to `‖Re a_N‖`) and
/// directions still growing (above `√conv_tol`); anything between is
/// refused, as are growing directions whose increments shrink across the
/// window. The limit is `a_N` on the settled directions.
fn numerical_limit_form(seq: &FormSequence, tol: &Tolerance) -> Result<Form> {
    let forms: Vec<&Form> = seq
        .members
        .iter()
        .map(|m| match m {
            Member::Closed(f) => Ok(f),
            Member::NonClosable(_) => Err(Error::InvalidParameter("non-closable sequences have no limit form".into())),
        })
        .collect::<Result<_>>()?;
    let n = forms.len();
    if n < 2 {
        return Err(Error::LimitUndetermined("a single member certifies nothing".into()));
    }
    let last = forms[n - 1];
    for f in &forms[n.saturating_sub(WINDOW)..n - 1] {
        if f.domain().distance(last.domain()) > tol.containment() {
            return Err(Error::LimitUndetermined("domains have not stabilized".into()));
        }
    }
    let d = form_difference(last, forms[n - 2], tol)?;
    let s = spectral_norm(&hermitian_part(last.matrix())).max(f64::MIN_POSITIVE);
    let eig = hermitian_eigen(&hermitian_part(d.matrix()));
    let (settled, growing) = (tol.conv_tol * s, tol.conv_tol.sqrt() * s);
    if let Some(l) = eig.values.iter().find(|l| l.abs() > settled && l.abs() < growing) {
        return Err(Error::LimitUndetermined(format!(
            "increment {:.3e} is neither settled nor growing relative to {s:.3e}",
            l.abs()
        )));
    }
    // Growing directions must not be slowing down across the window; a
    // shrinking increment could belong to a convergent tail.
    let first = form_difference(forms[n.saturating_sub(WINDOW) + 1], forms[n.saturating_sub(WINDOW)], tol)?
        .restrict(last.domain(), tol)?;
    for (k, &l) in eig.values.iter().enumerate() {
        if l.abs() >= growing {
            let v = eig.vectors.column(k);
            let early = (v.adjoint() * hermitian_part(first.matrix()) * v)[(0, 0)].re;
            if l < 0.99 * early {
                return Err(Error::LimitUndetermined(format!(
                    "increment {l:.3e} is shrinking (was {early:.3e}); cannot tell growth from a slow tail"
                )));
            }
        }
    }
    let keep = eig.select(|l| l.abs() <= settled);
    let im_drift = spectral_norm(&(keep.adjoint() * skew_part(d.matrix()) * &keep));
    if im_drift > settled {
        return Err(Error::LimitUndetermined(format!("imaginary parts still move by {im_drift:.3e}")));
    }
    let dom = Subspace::from_orthonormal(last.domain().basis() * &keep, tol)?;
    Form::new(dom, keep.adjoint() * last.matrix() * &keep)
}

/// `a(u, v) = lim a_n(u, v)` on `{u : sup Re a_n(u) < ∞}`.
pub fn limit_form(seq: &FormSequence, tol: &Tolerance) -> Result<Form> {
    if seq.kind() != SequenceKind::Closed {
        return Err(Error::InvalidParameter("non-closable sequences have no limit form".into()));
    }
    match &seq.descriptor {
        Some(d) => match d.limit(tol)? {
            Member::Closed(f) => Ok(f),
            Member::NonClosable(_) => unreachable!("descriptor kind is checked on attach"),
        },
        None => numerical_limit_form(seq, tol),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitSource {
    /// Analytic limit of an attached family.
    Descriptor,
    UserSupplied,
    /// Settled directions of an explicit closed list.
    NumericalForm,
    /// `(I + A_N)⁻¹ − I` inverted, for explicit non-closable lists.
    ResolventExtraction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZSeries {
    pub z: C64,
    /// `‖(I + A_{n,z})⁻¹ − (I + A_z)⁻¹‖` per member.
    pub distances: Vec<f64>,
    pub max_resolvent_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceFailure {
    pub n: u64,
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolomorphyResidual {
    pub center: C64,
    pub radius: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub kind: SequenceKind,
    pub theta: f64,
    pub n_values: Vec<u64>,
    pub hypothesis_ok: bool,
    pub hypotheses: HypothesisReport,
    pub c_bound: Option<f64>,
    pub strip_half_width: Option<f64>,
    /// `i` first, then the requested complex samples, then the real ones.
    pub samples: Vec<C64>,
    pub real_samples: Vec<f64>,
    /// Distances at `z = i`.
    pub resolvent_distances: Vec<f64>,
    pub distances_by_z: Vec<ZSeries>,
    pub max_resolvent_norm: Option<f64>,
    pub slice_monotone: Option<bool>,
    pub slice_failures: Vec<SliceFailure>,
    /// `‖(I + A_N)⁻¹ − (I + A_{N−1})⁻¹‖` at `z = i`.
    pub cauchy_defect: Option<f64>,
    pub cauchy: Option<bool>,
    pub limit_source: Option<LimitSource>,
    pub limit_relation: Option<LinearRelation>,
    pub limit_form: Option<Form>,
    pub limit_verdict: Option<MSectorialVerdict>,
    pub rate_estimate: Option<f64>,
    pub holomorphy_residuals: Vec<HolomorphyResidual>,
    pub warnings: Vec<String>,
    /// `A_n` per member, for semigroup experiments.
    #[serde(skip)]
    pub relations: Vec<LinearRelation>,
}

impl ConvergenceReport {
    fn rejected(seq: &FormSequence, hypotheses: HypothesisReport) -> Self {
        Self {
            kind: seq.kind(),
            theta: seq.theta,
            n_values: seq.n_values.clone(),
            hypothesis_ok: hypotheses.ok,
            hypotheses,
            c_bound: None,
            strip_half_width: None,
            samples: Vec::new(),
            real_samples: Vec::new(),
            resolvent_distances: Vec::new(),
            distances_by_z: Vec::new(),
            max_resolvent_norm: None,
            slice_monotone: None,
            slice_failures: Vec::new(),
            cauchy_defect: None,
            cauchy: None,
            limit_source: None,
            limit_relation: None,
            limit_form: None,
            limit_verdict: None,
            rate_estimate: None,
            holomorphy_residuals: Vec::new(),
            warnings: Vec::new(),
            relations: Vec::new(),
        }
    }
}

/// Five symmetric points in `0.8·min(half_width, 4)`.
pub fn default_real_samples(strip: &HoloStrip) -> Vec<f64> {
    let w = 0.8 * strip.half_width.min(4.0);
    vec![-w, -0.5 * w, 0.0, 0.5 * w, w]
}

/// Least-squares slope of `log d` against `log n` over the final half,
/// negated; `None` with fewer than two positive distances there.
pub fn rate_estimate(n_values: &[u64], distances: &[f64]) -> Option<f64> {
    let start = distances.len() / 2;
    let pts: Vec<(f64, f64)> = n_values[start..]
        .iter()
        .zip(&distances[start..])
        .filter(|(_, &d)| d > 1e-300)
        .map(|(&n, &d)| ((n as f64).ln(), d.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| -sxy / sxx)
}

const HOLO_NODES: usize = 32;

fn holomorphy_residual(member: &Member, center: C64, radius: f64, nodes: usize, tol: &Tolerance) -> Result<f64> {
    let r0 = member.resolvent_at(center, tol)?;
    let mut mean = CMatrix::zeros(r0.nrows(), r0.ncols());
    for k in 0..nodes {
        let z = center + C64::from_polar(radius, 2.0 * PI * k as f64 / nodes as f64);
        mean += member.resolvent_at(z, tol)?;
    }
    Ok(spectral_norm(&(r0 - mean / C64::new(nodes as f64, 0.0))))
}

/// Cauchy mean-value defect `‖R(c) − mean_{|z−c|=r} R(z)‖` of
/// `z ↦ (I + A_z)⁻¹` on `num_nodes` equispaced circle points.
pub fn holomorphy_test(member: &Member, center: C64, radius: f64, num_nodes: usize, tol: &Tolerance) -> Result<f64> {
    if !(radius.is_finite() && radius > 0.0) || num_nodes == 0 {
        return Err(Error::InvalidParameter("radius must be positive and num_nodes nonzero".into()));
    }
    let verdict = member.sector(tol);
    let c = match verdict.c_bound {
        Some(c) if verdict.is_sectorial => c.max(1e-12),
        _ => return Err(Error::NotSectorial),
    };
    let strip = HoloStrip::new(c)?;
    if !strip.contains_disk(center, radius) {
        return Err(Error::OutsideStrip(format!("disk around {center} of radius {radius}"), strip.half_width));
    }
    holomorphy_residual(member, center, radius, num_nodes, tol)
}

/// Runs the strong resolvent convergence experiment.
///
/// `z = i` is always sampled first. Real samples default to
/// [`default_real_samples`]. A failed hypothesis yields a report with
/// `hypothesis_ok = false` and nothing else computed.
pub fn run_convergence(
    seq: &FormSequence,
    z_samples: &[C64],
    real_samples: Option<&[f64]>,
    tol: &Tolerance,
    exec: Execution,
) -> Result<ConvergenceReport> {
    tol.validate()?;
    let hypotheses = validate_hypotheses(seq, tol);
    let mut report = ConvergenceReport::rejected(seq, hypotheses);
    if !report.hypothesis_ok {
        return Ok(report);
    }

    let (limit_member, source) = match (&seq.descriptor, seq.kind()) {
        (Some(LimitDescriptor::Family(f)), _) => (Some(f.limit(tol)?), LimitSource::Descriptor),
        (Some(LimitDescriptor::UserSupplied { limit }), _) => (Some(limit.clone()), LimitSource::UserSupplied),
        (None, SequenceKind::Closed) => {
            report.warnings.push("limit form taken from a numerical Cauchy certificate, not an analytic family".into());
            (Some(Member::Closed(numerical_limit_form(seq, tol)?)), LimitSource::NumericalForm)
        }
        (None, SequenceKind::NonClosable) => {
            report.warnings.push("limit relation extracted from the last resolvent".into());
            (None, LimitSource::ResolventExtraction)
        }
    };
    report.limit_source = Some(source);

    let c = c_bound_with(seq, limit_member.as_ref(), tol)?;
    let strip = HoloStrip::new(c)?;
    report.c_bound = Some(c);
    report.strip_half_width = Some(strip.half_width);

    let mut complex = vec![I];
    for &z in z_samples {
        if !strip.contains(z) {
            return Err(Error::OutsideStrip(format!("z = {z}"), strip.half_width));
        }
        if !complex.contains(&z) {
            complex.push(z);
        }
    }
    let reals = real_samples.map(<[f64]>::to_vec).unwrap_or_else(|| default_real_samples(&strip));
    if let Some(&x) = reals.iter().find(|&&x| !strip.contains(C64::new(x, 0.0))) {
        return Err(Error::OutsideStrip(format!("x = {x}"), strip.half_width));
    }
    report.real_samples = reals.clone();
    let mut samples = complex.clone();
    for &x in &reals {
        let z = C64::new(x, 0.0);
        if !samples.contains(&z) {
            samples.push(z);
        }
    }

    let len = seq.len();
    let nz = samples.len();
    let grid = map_range(len * nz, exec, |k| seq.members[k / nz].resolvent_at(samples[k % nz], tol))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let at = |n: usize, s: usize| &grid[n * nz + s];
    report.relations = map_range(len, exec, |k| seq.members[k].associate(tol)).into_iter().collect::<Result<_>>()?;

    let limit_res: Vec<CMatrix> = match &limit_member {
        Some(m) => map_range(nz, exec, |s| m.resolvent_at(samples[s], tol)).into_iter().collect::<Result<_>>()?,
        None => (0..nz).map(|s| at(len - 1, s).clone()).collect(),
    };
    let mut max_norm: f64 = 0.0;
    for (s, &z) in samples.iter().enumerate() {
        let norms: Vec<f64> = (0..len).map(|n| spectral_norm(at(n, s))).collect();
        let series_max = norms.iter().copied().fold(0.0, f64::max);
        max_norm = max_norm.max(series_max);
        let distances = (0..len).map(|n| spectral_norm(&(at(n, s) - &limit_res[s]))).collect();
        report.distances_by_z.push(ZSeries { z, distances, max_resolvent_norm: series_max });
    }
    report.resolvent_distances = report.distances_by_z[0].distances.clone();
    report.max_resolvent_norm = Some(max_norm);

    let pairs = len.saturating_sub(1);
    let slice = map_range(pairs * reals.len(), exec, |k| {
        let (n, x) = (k / reals.len() + 1, reals[k % reals.len()]);
        slice_leq(&seq.members[n - 1], &seq.members[n], x, tol).map(|ok| (ok, n, x))
    });
    for r in slice {
        let (ok, n, x) = r?;
        if !ok {
            report.slice_failures.push(SliceFailure { n: seq.n_values[n], x });
        }
    }
    report.slice_monotone = Some(report.slice_failures.is_empty());

    if len >= 2 {
        let defect = spectral_norm(&(at(len - 1, 0) - at(len - 2, 0)));
        report.cauchy_defect = Some(defect);
        report.cauchy = Some(defect <= tol.conv_tol);
        if defect > tol.conv_tol {
            report.warnings.push(format!("resolvent sequence not Cauchy at {:.1e}: last step {defect:.3e}", tol.conv_tol));
        }
    }
    report.rate_estimate = rate_estimate(&seq.n_values, &report.resolvent_distances);

    let holo_member = limit_member.clone().unwrap_or_else(|| seq.members[len - 1].clone());
    let holo = map_range(complex.len(), exec, |s| {
        let center = complex[s];
        let radius = (0.25 * (strip.half_width - center.re.abs())).min(0.5);
        holomorphy_residual(&holo_member, center, radius, HOLO_NODES, tol)
            .map(|residual| HolomorphyResidual { center, radius, residual })
    });
    report.holomorphy_residuals = holo.into_iter().collect::<Result<_>>()?;

    let limit_relation = match &limit_member {
        Some(m) => m.associate(tol)?,
        None => rel_from_resolvent(at(len - 1, 0), tol)?,
    };
    let verdict = m_sectorial_check(&limit_relation, seq.theta, tol);
    if !verdict.is_m_sectorial {
        return Err(Error::NotMSectorial(format!("limit relation: {:?}", verdict.reason)));
    }
    report.limit_verdict = Some(verdict);
    report.limit_relation = Some(limit_relation);
    report.limit_form = match limit_member {
        Some(Member::Closed(f)) => Some(f),
        _ => None,
    };
    Ok(report)
}

/// The rotation `a_n ↦ e^{∓iη}·a_n` for sequences whose values lie in a
/// quarter plane with monotone imaginary parts.
///
/// Increasing imaginary parts rotate by `e^{−iη}`, decreasing ones by
/// `e^{+iη}`. The new angle is `max{θ₀ + η, π/2 − η}` with `θ₀` the largest
/// member angle.
pub fn ouhabaz_transform(seq: &FormSequence, eta: f64, tol: &Tolerance) -> Result<FormSequence> {
    let mut theta0: f64 = 0.0;
    for (k, m) in seq.members.iter().enumerate() {
        match verdict_angle(&m.sector(tol)) {
            Some(a) => theta0 = theta0.max(a),
            None => {
                return Err(Error::HypothesisViolated { n: seq.n_values[k] as usize, what: "member is not sectorial".into() })
            }
        }
    }
    if !(eta > 0.0 && eta < FRAC_PI_2 - theta0) {
        return Err(Error::InvalidParameter(format!("eta must lie in (0, {:.6}), got {eta}", FRAC_PI_2 - theta0)));
    }
    let sign_of = |m: &CMatrix, scale: f64| -> (bool, bool) {
        let im = skew_part(m);
        (is_psd_scaled(&im, scale, tol), is_psd_scaled(&(-im), scale, tol))
    };
    let (mut up, mut down) = (true, true);
    for (k, m) in seq.members.iter().enumerate() {
        let scale = spectral_norm(m.matrix());
        let (p, q) = sign_of(m.matrix(), scale);
        up &= p;
        down &= q;
        if k > 0 {
            let prev = &seq.members[k - 1];
            let d = increment(prev, m, tol)?;
            let scale = scale.max(spectral_norm(prev.matrix()));
            if !is_psd_scaled(&hermitian_part(d.matrix()), scale, tol) {
                return Err(Error::HypothesisViolated { n: seq.n_values[k] as usize, what: "real parts are not increasing".into() });
            }
            let (p, q) = sign_of(d.matrix(), scale);
            up &= p;
            down &= q;
        }
    }
    let signed = match (up, down) {
        (true, _) => eta,
        (false, true) => -eta,
        (false, false) => {
            return Err(Error::HypothesisViolated {
                n: seq.n_values[0] as usize,
                what: "values do not stay in a quarter plane with monotone imaginary parts".into(),
            })
        }
    };
    let members = seq.members.iter().map(|m| m.rotate(signed, tol)).collect::<Result<Vec<_>>>()?;
    let theta = (theta0 + eta).max(FRAC_PI_2 - eta);
    let mut out = FormSequence::new(members, theta)?.with_n_values(seq.n_values.clone())?;
    if let Some(d) = &seq.descriptor {
        out = out.with_descriptor(d.rotate(signed, tol)?)?;
    }
    let check = validate_hypotheses(&out, tol);
    if let Some(v) = check.first_violation {
        return Err(Error::HypothesisViolated { n: v.n as usize, what: format!("{} after rotation, witness {:?}", v.detail, v.witness) });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, real_diag, real_matrix};
    use crate::random;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn closed(m: CMatrix) -> Member {
        Member::Closed(Form::full(m).unwrap())
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// `diag(1, c_k)` for `c_k = k`, k = 1..=len, as a family.
    fn diag_family(len: usize) -> FormSequence {
        let family = FamilyDescriptor {
            base: closed(real_diag(&[1.0, 0.0])),
            penalty: Some(Term { form: Form::full(real_diag(&[0.0, 1.0])).unwrap(), coeffs: (1..=len).map(|k| k as f64).collect() }),
            drift: None,
        };
        FormSequence::from_family(family, 0.0, &tol()).unwrap()
    }

    #[test]
    fn hypothesis_examples() {
        assert!(validate_hypotheses(&diag_family(50), &tol()).ok);

        let seq = FormSequence::new(vec![closed(real_diag(&[2.0])), closed(real_diag(&[1.0]))], 0.0).unwrap();
        let report = validate_hypotheses(&seq, &tol());
        assert!(!report.ok);
        let v = report.first_violation.unwrap();
        assert_eq!((v.index, v.n, v.check), (1, 2, HypothesisCheck::IncrementSectorial));
        assert!((v.witness[0].norm() - 1.0).abs() < 1e-12);

        // Growing domain.
        let small = Member::Closed(Form::new(Subspace::coordinate(2, &[0]), real_diag(&[1.0])).unwrap());
        let seq = FormSequence::new(vec![small, closed(real_diag(&[1.0, 1.0]))], 0.0).unwrap();
        let v = validate_hypotheses(&seq, &tol()).first_violation.unwrap();
        assert_eq!(v.check, HypothesisCheck::DomainContained);
        assert!((v.witness[1].norm() - 1.0).abs() < 1e-12);

        // Angle too wide for the declared theta.
        let seq = FormSequence::new(vec![closed(diag(&[c(1.0, 2.0)]))], FRAC_PI_4).unwrap();
        assert_eq!(validate_hypotheses(&seq, &tol()).first_violation.unwrap().check, HypothesisCheck::MemberSectorial);
    }

    #[test]
    fn c_bound_examples() {
        let seq = diag_family(10);
        assert_eq!(uniform_c_bound(&seq, &tol()).unwrap(), 1e-12);

        let seq = FormSequence::new(vec![closed(diag(&[c(1.0, 0.0), c(1.0, 2.0)]))], 2f64.atan()).unwrap();
        assert!((uniform_c_bound(&seq, &tol()).unwrap() - 2.0).abs() < 1e-12);

        let bad = FormSequence::new(vec![closed(real_diag(&[-1.0]))], 0.0).unwrap();
        assert_eq!(uniform_c_bound(&bad, &tol()), Err(Error::NotSectorial));
    }

    #[test]
    fn limit_form_examples() {
        let f = limit_form(&diag_family(50), &tol()).unwrap();
        assert_eq!(f.dim(), 1);
        assert!((f.ambient_matrix() - real_diag(&[1.0, 0.0])).norm() < 1e-14);

        // Explicit lists: the same family without its descriptor.
        let f = limit_form(&diag_family(50).without_descriptor(), &tol()).unwrap();
        assert!((f.ambient_matrix() - real_diag(&[1.0, 0.0])).norm() < 1e-14);

        let a = real_matrix(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let constant = FormSequence::new(vec![closed(a.clone()); 4], 0.0).unwrap();
        assert!((limit_form(&constant, &tol()).unwrap().ambient_matrix() - &a).norm() < 1e-14);

        let family = FamilyDescriptor {
            base: closed(real_diag(&[1.0])),
            penalty: None,
            drift: Some(Drift { form: Form::full(real_diag(&[1.0])).unwrap(), coeffs: (1..=20).map(|n| -1.0 / n as f64).collect(), limit: 0.0 }),
        };
        let seq = FormSequence::from_family(family, 0.0, &tol()).unwrap();
        assert!((limit_form(&seq, &tol()).unwrap().matrix()[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        // Without the descriptor the 1/n² tail looks like slow growth.
        assert!(matches!(limit_form(&seq.without_descriptor(), &tol()), Err(Error::LimitUndetermined(_))));
    }

    #[test]
    fn diag_family_resolvents() {
        let seq = diag_family(50);
        let report = run_convergence(&seq, &[], None, &tol(), Execution::Sequential).unwrap();
        assert!(report.hypothesis_ok);
        for (k, d) in report.resolvent_distances.iter().enumerate() {
            assert!((d - 1.0 / (k as f64 + 2.0)).abs() < 1e-14);
        }
        let lim = inv_one_plus(report.limit_relation.as_ref().unwrap()).unwrap();
        assert!((lim - real_diag(&[0.5, 0.0])).norm() < 1e-14);
        let rate = report.rate_estimate.unwrap();
        assert!((rate - 1.0).abs() < 0.05, "rate {rate}");
        assert_eq!(report.slice_monotone, Some(true));
        assert!(report.max_resolvent_norm.unwrap() <= 1.0 + 1e-12);
        assert!(report.holomorphy_residuals.iter().all(|h| h.residual < 1e-14));
    }

    #[test]
    fn constant_sequence_has_zero_distances() {
        let m = diag(&[c(1.0, 0.5), c(2.0, -0.3)]);
        let seq = FormSequence::new(vec![closed(m); 6], FRAC_PI_4).unwrap();
        let report = run_convergence(&seq, &[c(0.3, 0.7)], None, &tol(), Execution::Sequential).unwrap();
        assert_eq!(report.limit_source, Some(LimitSource::NumericalForm));
        assert!(!report.warnings.is_empty());
        for s in &report.distances_by_z {
            assert!(s.distances.iter().all(|&d| d < 1e-15));
        }
        assert_eq!(report.cauchy, Some(true));
    }

    #[test]
    fn outside_strip_and_rejected_reports() {
        let seq = FormSequence::new(vec![closed(diag(&[c(1.0, 2.0)])); 2], 1.2).unwrap();
        assert!(matches!(
            run_convergence(&seq, &[c(0.6, 0.0)], None, &tol(), Execution::Sequential),
            Err(Error::OutsideStrip(..))
        ));
        let seq = FormSequence::new(vec![closed(real_diag(&[2.0])), closed(real_diag(&[1.0]))], 0.0).unwrap();
        let report = run_convergence(&seq, &[], None, &tol(), Execution::Sequential).unwrap();
        assert!(!report.hypothesis_ok);
        assert!(report.limit_relation.is_none());
    }

    #[test]
    fn holomorphy_examples() {
        let sym = closed(real_matrix(2, 2, &[2.0, 1.0, 1.0, 3.0]));
        assert!(holomorphy_test(&sym, c(0.0, 1.0), 0.5, 32, &tol()).unwrap() < 1e-15);

        let m = closed(diag(&[c(1.0, 0.0), c(1.0, 1.0)]));
        let r = holomorphy_test(&m, c(0.0, 0.0), 0.3, 32, &tol()).unwrap();
        assert!(r < 1e-8, "residual {r}");
        assert!(matches!(holomorphy_test(&m, c(0.9, 0.0), 0.3, 32, &tol()), Err(Error::OutsideStrip(..))));
    }

    /// `f(z) = 1/(2 + i z)` is the nontrivial entry above; its mean over the
    /// circle equals `f(0)` up to the trapezoid error `~ (r/R)^N`, with
    /// `R = 2` the distance to the pole. Densifying the nodes must drive the
    /// residual to roundoff, matching the extrapolated value 0.
    #[test]
    fn holomorphy_residual_shrinks_with_nodes() {
        let m = closed(diag(&[c(1.0, 0.0), c(1.0, 1.0)]));
        let coarse = holomorphy_test(&m, C64::new(0.0, 0.0), 0.3, 4, &tol()).unwrap();
        let fine = holomorphy_test(&m, C64::new(0.0, 0.0), 0.3, 64, &tol()).unwrap();
        let predicted = (0.3f64 / 2.0).powi(4) / 2.0;
        assert!((coarse - predicted).abs() < 0.1 * predicted, "{coarse} vs {predicted}");
        assert!(fine < 1e-15);
    }

    #[test]
    fn ouhabaz_examples() {
        // Symmetric increasing sequence: rotated members have angle η.
        let members: Vec<Member> = (1..=5).map(|n| closed(real_diag(&[1.0, n as f64]))).collect();
        let seq = FormSequence::new(members, 0.0).unwrap();
        let out = ouhabaz_transform(&seq, FRAC_PI_6, &tol()).unwrap();
        assert!((out.theta() - FRAC_PI_3).abs() < 1e-15);
        for m in out.members() {
            assert!((m.sector(&tol()).angle_theta.unwrap() - FRAC_PI_6).abs() < 1e-12);
        }
        assert!(matches!(ouhabaz_transform(&seq, 0.0, &tol()), Err(Error::InvalidParameter(_))));

        // Decreasing imaginary parts mirror the rotation.
        let members: Vec<Member> = (1..=4).map(|n| closed(diag(&[c(n as f64, -(n as f64) * 0.5)]))).collect();
        let seq = FormSequence::new(members, 0.5f64.atan()).unwrap();
        let out = ouhabaz_transform(&seq, 0.3, &tol()).unwrap();
        let rotated = out.members()[0].matrix()[(0, 0)];
        assert!((rotated - c(1.0, -0.5) * C64::from_polar(1.0, 0.3)).norm() < 1e-15);

        // Purely imaginary increments break the plain hypotheses but not the
        // rotated ones.
        let members: Vec<Member> = (1..=4).map(|n| closed(diag(&[c(1.0, 0.2 * n as f64)]))).collect();
        let seq = FormSequence::new(members, 0.8f64.atan()).unwrap();
        assert!(!validate_hypotheses(&seq, &tol()).ok);
        assert!(ouhabaz_transform(&seq, 0.3, &tol()).is_ok());
    }

    #[test]
    fn serde_round_trip() {
        let seq = diag_family(3);
        let json = serde_json::to_value(&seq).unwrap();
        assert_eq!(json["kind"], "closed");
        assert_eq!(json["forms"][0]["kind"], "closed");
        let back: FormSequence = serde_json::from_value(json.clone()).unwrap();
        assert_eq!(back, seq);

        // A family alone expands into its members.
        let mut compact = json;
        compact.as_object_mut().unwrap().remove("forms");
        let back: FormSequence = serde_json::from_value(compact).unwrap();
        assert_eq!(back.members(), seq.members());
    }

    fn random_family(seed: u64, n: usize, theta: f64, len: usize) -> FormSequence {
        let mut rng = random::seeded(seed);
        let q = random::sectorial(&mut rng, n, 0.2, theta.tan());
        let p = random::psd(&mut rng, n, 1 + seed as usize % n);
        let family = FamilyDescriptor {
            base: closed(q),
            penalty: Some(Term { form: Form::full(p).unwrap(), coeffs: (1..=len).map(|k| (k * k) as f64).collect() }),
            drift: None,
        };
        FormSequence::from_family(family, theta, &tol()).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn penalized_families_converge(seed in any::<u64>(), n in 1usize..5, theta in 0.0f64..1.0) {
            let seq = random_family(seed, n, theta, 20);
            let report = run_convergence(&seq, &[], None, &tol(), Execution::Sequential).unwrap();
            prop_assert!(report.hypothesis_ok);
            prop_assert_eq!(report.slice_monotone, Some(true));
            prop_assert!(report.max_resolvent_norm.unwrap() <= 1.0 + 1e-9);
            let d = &report.resolvent_distances;
            prop_assert!(d[d.len() - 1] < d[0] + 1e-12);
            prop_assert!(report.limit_verdict.unwrap().is_m_sectorial);
        }

        #[test]
        fn execution_modes_agree_bitwise(seed in any::<u64>(), n in 1usize..4) {
            let seq = random_family(seed, n, 0.7, 8);
            let a = run_convergence(&seq, &[c(0.1, 2.0)], None, &tol(), Execution::Sequential).unwrap();
            let b = run_convergence(&seq, &[c(0.1, 2.0)], None, &tol(), Execution::Parallel).unwrap();
            prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        }

        #[test]
        fn strip_resolvents_are_contractions(seed in any::<u64>(), n in 1usize..5, theta in 0.0f64..1.2, s in -0.9f64..0.9, y in -3.0f64..3.0) {
            let seq = random_family(seed, n, theta, 6);
            let c = uniform_c_bound(&seq, &tol()).unwrap();
            let z = C64::new(s / c, y);
            for m in seq.members() {
                prop_assert!(spectral_norm(&m.resolvent_at(z, &tol()).unwrap()) <= 1.0 + 1e-9);
            }
        }
    }
}
