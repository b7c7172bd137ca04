//! Sesquilinear forms on subspaces of `H = ℂⁿ`.
//!
//! A [`Form`] stores its coordinate matrix relative to the orthonormal basis
//! of its domain, so non-densely defined forms need no special casing:
//! `a(u, v) = (Qᴴv)ᴴ · M · (Qᴴu)`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{
    check_finite, check_square, hermitian_eigen, hermitian_eigenvalues, hermitian_part, is_psd_scaled, skew_part, spectral_norm, CMatrix,
    CVector, Subspace, Tolerance, C64,
};
use crate::serde_matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Form {
    domain: Subspace,
    matrix: CMatrix,
}

impl Form {
    pub fn new(domain: Subspace, matrix: CMatrix) -> Result<Self> {
        check_square(&matrix)?;
        check_finite(&matrix, "form matrix")?;
        if matrix.nrows() != domain.dim() {
            return Err(Error::DimensionMismatch { expected: domain.dim(), found: matrix.nrows() });
        }
        Ok(Self { domain, matrix })
    }

    /// Densely defined form on `ℂⁿ` with the given matrix.
    pub fn full(matrix: CMatrix) -> Result<Self> {
        let n = matrix.nrows();
        Self::new(Subspace::full(n), matrix)
    }

    pub fn zero(domain: Subspace) -> Self {
        let d = domain.dim();
        Self { domain, matrix: CMatrix::zeros(d, d) }
    }

    pub fn space_dim(&self) -> usize {
        self.domain.ambient_dim()
    }

    pub fn domain(&self) -> &Subspace {
        &self.domain
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// `a(u, v)` for ambient vectors; components outside the domain are
    /// discarded.
    pub fn value(&self, u: &CVector, v: &CVector) -> C64 {
        let cu = self.domain.basis().adjoint() * u;
        let cv = self.domain.basis().adjoint() * v;
        (cv.adjoint() * &self.matrix * cu)[(0, 0)]
    }

    pub fn quadratic(&self, u: &CVector) -> C64 {
        self.value(u, u)
    }

    /// `Q·M·Qᴴ`, the form written as an ambient matrix (zero off the domain).
    pub fn ambient_matrix(&self) -> CMatrix {
        self.domain.basis() * &self.matrix * self.domain.basis().adjoint()
    }

    pub fn with_matrix(&self, matrix: CMatrix) -> Result<Self> {
        Self::new(self.domain.clone(), matrix)
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { domain: self.domain.clone(), matrix: &self.matrix * c }
    }

    /// Restriction to a subspace of the domain, expressed in the basis of
    /// `sub`.
    pub fn restrict(&self, sub: &Subspace, tol: &Tolerance) -> Result<Self> {
        if sub.ambient_dim() != self.space_dim() {
            return Err(Error::DimensionMismatch { expected: self.space_dim(), found: sub.ambient_dim() });
        }
        let residual = self.domain.containment_residual(sub);
        if residual > tol.containment() {
            return Err(Error::DomainNotContained(residual));
        }
        let t = self.domain.basis().adjoint() * sub.basis();
        Ok(Self { domain: sub.clone(), matrix: t.adjoint() * &self.matrix * t })
    }

    /// `self + other`, on `dom(self)`; `dom(other)` must contain it.
    pub fn add(&self, other: &Form, tol: &Tolerance) -> Result<Self> {
        let rhs = other.restrict(&self.domain, tol)?;
        Ok(Self { domain: self.domain.clone(), matrix: &self.matrix + rhs.matrix })
    }

    pub fn is_symmetric(&self, tol: &Tolerance) -> bool {
        let scale = spectral_norm(&self.matrix);
        scale == 0.0 || spectral_norm(&(&self.matrix - self.matrix.adjoint())) <= 10.0 * tol.psd_tol * scale
    }

    /// Largest deviation between the coordinate matrices after expressing
    /// `other` in this form's basis; infinite when the domains differ.
    pub fn distance(&self, other: &Form) -> f64 {
        if self.space_dim() != other.space_dim() || self.domain.distance(&other.domain) > 1e-6 {
            return f64::INFINITY;
        }
        let t = other.domain.basis().adjoint() * self.domain.basis();
        spectral_norm(&(&self.matrix - t.adjoint() * &other.matrix * t))
    }
}

#[derive(Serialize, Deserialize)]
struct FormRepr {
    space_dim: usize,
    #[serde(with = "serde_matrix")]
    domain_basis: CMatrix,
    #[serde(with = "serde_matrix")]
    matrix: CMatrix,
}

impl Serialize for Form {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FormRepr {
            space_dim: self.space_dim(),
            domain_basis: self.domain.basis().clone(),
            matrix: self.matrix.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Form {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = FormRepr::deserialize(d)?;
        let basis = if repr.domain_basis.nrows() == 0 {
            CMatrix::zeros(repr.space_dim, 0)
        } else {
            repr.domain_basis
        };
        if basis.nrows() != repr.space_dim {
            return Err(D::Error::custom("domain_basis row count differs from space_dim"));
        }
        let matrix = if repr.matrix.nrows() == 0 { CMatrix::zeros(0, 0) } else { repr.matrix };
        let domain = Subspace::from_orthonormal(basis, &Tolerance::default()).map_err(D::Error::custom)?;
        Form::new(domain, matrix).map_err(D::Error::custom)
    }
}

/// Outcome of [`sector_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorVerdict {
    pub is_sectorial: bool,
    pub angle_theta: Option<f64>,
    pub c_bound: Option<f64>,
    /// Roundoff band on `c_bound`: entry noise amplified by the smallest
    /// kept eigenvalue of `Re M`.
    #[serde(default)]
    pub c_roundoff: f64,
}

impl SectorVerdict {
    fn sectorial(c: f64) -> Self {
        Self { is_sectorial: true, angle_theta: Some(c.atan()), c_bound: Some(c), c_roundoff: 0.0 }
    }

    fn rejected() -> Self {
        Self { is_sectorial: false, angle_theta: None, c_bound: None, c_roundoff: 0.0 }
    }

    /// Sectorial with vertex 0 and angle at most `theta`, up to the
    /// roundoff band.
    pub fn admits_angle(&self, theta: f64) -> bool {
        match self.c_bound {
            Some(c) if self.is_sectorial => c <= theta.tan() * (1.0 + 1e-9) + 1e-9 + self.c_roundoff,
            _ => false,
        }
    }
}

/// The strip `|Re z| < 1/C` on which `Re a + z·Im a` stays sectorial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoloStrip {
    pub c_bound: f64,
    pub half_width: f64,
}

impl HoloStrip {
    pub fn new(c_bound: f64) -> Result<Self> {
        if !(c_bound.is_finite() && c_bound > 0.0) {
            return Err(Error::InvalidParameter(format!("strip constant must be positive, got {c_bound}")));
        }
        Ok(Self { c_bound, half_width: 1.0 / c_bound })
    }

    pub fn contains(&self, z: C64) -> bool {
        z.re.abs() < self.half_width
    }

    pub fn contains_disk(&self, center: C64, radius: f64) -> bool {
        center.re.abs() + radius < self.half_width
    }
}

/// `a*(u, v) = conj a(v, u)`.
pub fn form_adjoint(a: &Form) -> Form {
    Form { domain: a.domain.clone(), matrix: a.matrix.adjoint() }
}

/// `Re a = (a + a*) / 2`.
pub fn real_part(a: &Form) -> Form {
    Form { domain: a.domain.clone(), matrix: hermitian_part(&a.matrix) }
}

/// `Im a = (a − a*) / (2i)`.
pub fn imag_part(a: &Form) -> Form {
    Form { domain: a.domain.clone(), matrix: skew_part(&a.matrix) }
}

pub fn sector_check(a: &Form, tol: &Tolerance) -> SectorVerdict {
    matrix_sector_check(&a.matrix, tol)
}

/// Sector verdict for the form `vᴴ·M·u` on `ℂᵈ`.
///
/// Sectorial iff `Re M ⪰ 0`, `ker Re M ⊆ ker M`; then the smallest admissible
/// `C` is `‖K‖₂` with `K = (Re M)^{†1/2}·Im M·(Re M)^{†1/2}`. Cutoffs are
/// relative to `‖M‖`.
pub fn matrix_sector_check(m: &CMatrix, tol: &Tolerance) -> SectorVerdict {
    matrix_sector_check_scaled(m, 0.0, tol)
}

/// As [`matrix_sector_check`], with cutoffs relative to `max(‖M‖, scale)`.
pub fn matrix_sector_check_scaled(m: &CMatrix, scale: f64, tol: &Tolerance) -> SectorVerdict {
    matrix_sector_check_noisy(m, scale, 0.0, tol)
}

/// As [`matrix_sector_check_scaled`] for a matrix whose entries carry
/// absolute noise up to `noise` on top of its own roundoff, as a difference
/// of two large matrices does.
pub fn matrix_sector_check_noisy(m: &CMatrix, scale: f64, noise: f64, tol: &Tolerance) -> SectorVerdict {
    if m.nrows() == 0 {
        return SectorVerdict::sectorial(0.0);
    }
    let norm = spectral_norm(m);
    let scale = norm.max(scale);
    if scale == 0.0 {
        return SectorVerdict::sectorial(0.0);
    }
    let re = hermitian_part(m);
    let im = skew_part(m);
    let eig = hermitian_eigen(&re);
    if eig.min() < -tol.psd_tol * scale {
        return SectorVerdict::rejected();
    }
    let cutoff = tol.rank_tol * scale;
    let kernel = eig.select(|l| l <= cutoff);
    if kernel.ncols() > 0 {
        // Near-kernel vectors of Re M carry |a(u, v)| ≲ √(λ‖M‖), hence the
        // square-root slack.
        let leak = spectral_norm(&(m * &kernel)).max(spectral_norm(&(m.adjoint() * &kernel)));
        if leak > tol.rank_tol.sqrt() * scale {
            return SectorVerdict::rejected();
        }
    }
    let mut weighted = eig.select(|l| l > cutoff);
    let kept: Vec<f64> = eig.values.iter().copied().filter(|&l| l > cutoff).collect();
    for (k, l) in kept.iter().enumerate() {
        let s = C64::new(1.0 / l.sqrt(), 0.0);
        weighted.column_mut(k).iter_mut().for_each(|x| *x *= s);
    }
    let k = weighted.adjoint() * im * weighted;
    let c = hermitian_eigenvalues(&k).iter().fold(0.0, |acc: f64, l| acc.max(l.abs()));
    let mut verdict = SectorVerdict::sectorial(c);
    if let Some(lmin) = kept.iter().copied().reduce(f64::min) {
        let entry = noise + 8.0 * f64::EPSILON * m.nrows() as f64 * norm;
        verdict.c_roundoff = entry * (1.0 + c) / lmin;
    }
    verdict
}

/// `e^{−iη}·a`.
pub fn rotate(a: &Form, eta: f64) -> Form {
    a.scale(C64::from_polar(1.0, -eta))
}

/// `b − a` on `dom(b)`; requires `dom(b) ⊆ dom(a)`.
pub fn form_difference(b: &Form, a: &Form, tol: &Tolerance) -> Result<Form> {
    let restricted = a.restrict(&b.domain, tol)?;
    Ok(Form { domain: b.domain.clone(), matrix: &b.matrix - restricted.matrix })
}

/// `a_z = Re a + z·Im a`.
pub fn form_at_z(a: &Form, z: C64) -> Form {
    Form { domain: a.domain.clone(), matrix: matrix_at_z(&a.matrix, z) }
}

pub fn matrix_at_z(m: &CMatrix, z: C64) -> CMatrix {
    hermitian_part(m) + skew_part(m) * z
}

/// `a ≤ b` for symmetric accretive forms: `dom(a) ⊇ dom(b)` and
/// `a(u) ≤ b(u)` on `dom(b)`.
pub fn form_order_leq(a: &Form, b: &Form, tol: &Tolerance) -> Result<bool> {
    if !a.is_symmetric(tol) || !b.is_symmetric(tol) {
        return Err(Error::NotSymmetric);
    }
    if a.space_dim() != b.space_dim() {
        return Err(Error::DimensionMismatch { expected: a.space_dim(), found: b.space_dim() });
    }
    if !a.domain.contains(&b.domain, tol.containment()) {
        return Ok(false);
    }
    let restricted = a.restrict(&b.domain, tol)?;
    let scale = spectral_norm(&restricted.matrix).max(spectral_norm(&b.matrix));
    Ok(is_psd_scaled(&hermitian_part(&(&b.matrix - restricted.matrix)), scale, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, real_diag, real_matrix, I};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn close(a: &CMatrix, b: &CMatrix, eps: f64) -> bool {
        a.shape() == b.shape() && (a - b).iter().all(|z| z.norm() <= eps)
    }

    #[test]
    fn adjoint_examples() {
        let a = Form::full(real_matrix(1, 1, &[1.0])).unwrap();
        assert_eq!(form_adjoint(&a).matrix(), a.matrix());
        let a = Form::full(diag(&[I])).unwrap();
        assert_eq!(form_adjoint(&a).matrix(), &diag(&[-I]));
        let a = Form::full(CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), I, c(0.0, 0.0), c(2.0, 0.0)])).unwrap();
        let expected = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), -I, c(2.0, 0.0)]);
        assert_eq!(form_adjoint(&a).matrix(), &expected);
    }

    #[test]
    fn real_and_imaginary_parts() {
        let a = Form::full(diag(&[c(1.0, 2.0)])).unwrap();
        assert!(close(real_part(&a).matrix(), &real_diag(&[1.0]), 1e-15));
        assert!(close(imag_part(&a).matrix(), &real_diag(&[2.0]), 1e-15));

        let h = Form::full(CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(1.0, 1.0), c(1.0, -1.0), c(3.0, 0.0)])).unwrap();
        assert!(close(real_part(&h).matrix(), h.matrix(), 0.0));
        assert!(close(imag_part(&h).matrix(), &CMatrix::zeros(2, 2), 0.0));
    }

    #[test]
    fn value_follows_the_convention() {
        // a(u, v) = vᴴ M u: linear in u, conjugate-linear in v.
        let a = Form::full(CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), I, c(0.0, 0.0), c(2.0, 0.0)])).unwrap();
        let e1 = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let e2 = CVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(a.value(&e2, &e1), I);
        assert_eq!(a.value(&(&e2 * I), &e1), c(-1.0, 0.0));
        assert_eq!(a.value(&e2, &(&e1 * I)), c(1.0, 0.0));
        assert_eq!(form_adjoint(&a).value(&e1, &e2), a.value(&e2, &e1).conj());
    }

    #[test]
    fn sector_check_examples() {
        let tol = Tolerance::default();
        let v = sector_check(&Form::full(diag(&[c(1.0, 0.0), c(1.0, 1.0)])).unwrap(), &tol);
        assert!(v.is_sectorial);
        assert!((v.c_bound.unwrap() - 1.0).abs() < 1e-12);
        assert!((v.angle_theta.unwrap() - FRAC_PI_4).abs() < 1e-12);

        assert!(!sector_check(&Form::full(real_diag(&[-1.0])).unwrap(), &tol).is_sectorial);

        // Re part vanishes but the matrix does not: kernel inclusion fails.
        let skew = Form::full(real_matrix(2, 2, &[0.0, 1.0, -1.0, 0.0])).unwrap();
        assert!(!sector_check(&skew, &tol).is_sectorial);
    }

    #[test]
    fn sector_check_degenerate_cases() {
        let tol = Tolerance::default();
        let empty = Form::zero(Subspace::zero(3));
        assert!(sector_check(&empty, &tol).admits_angle(0.0));
        // A form vanishing on a direction where Re vanishes is still sectorial.
        let f = Form::full(diag(&[c(0.0, 0.0), c(1.0, 0.5)])).unwrap();
        let v = sector_check(&f, &tol);
        assert!(v.is_sectorial && (v.c_bound.unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rotate_examples() {
        let a = Form::full(diag(&[c(1.0, 1.0)])).unwrap();
        assert_eq!(rotate(&a, 0.0), a);
        let r = rotate(&a, FRAC_PI_4);
        assert!((r.matrix()[(0, 0)] - c(2f64.sqrt(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rotated_quarter_plane_form_has_predicted_angle() {
        // Values of diag(1, 1 + i·t, i·s + ε) fill part of {0 ≤ Arg ≤ π/2};
        // with θ₀ the angle of the sectorial members, rotating by η lands in the
        // sector of half-angle max(θ₀ + η, π/2 − η).
        let tol = Tolerance::default();
        let theta0: f64 = 0.3;
        let a = Form::full(diag(&[c(1.0, 0.0), C64::from_polar(1.0, theta0)])).unwrap();
        let eta = 0.5 * (FRAC_PI_2 - theta0);
        let r = rotate(&a, eta);
        let theta = (theta0 + eta).max(FRAC_PI_2 - eta);
        assert!(sector_check(&r, &tol).admits_angle(theta));
        // A purely imaginary increment sits on the boundary ray π/2 − η.
        let inc = Form::full(diag(&[c(0.0, 1.0)])).unwrap();
        let v = sector_check(&rotate(&inc, eta), &tol);
        assert!((v.angle_theta.unwrap() - (FRAC_PI_2 - eta)).abs() < 1e-12);
    }

    #[test]
    fn difference_examples() {
        let tol = Tolerance::default();
        let a = Form::full(CMatrix::identity(2, 2)).unwrap();
        assert!(close(form_difference(&a, &a, &tol).unwrap().matrix(), &CMatrix::zeros(2, 2), 0.0));

        let b = Form::new(Subspace::coordinate(2, &[0]), real_diag(&[2.0])).unwrap();
        let d = form_difference(&b, &a, &tol).unwrap();
        assert!(close(d.matrix(), &real_diag(&[1.0]), 1e-15));
        assert!(d.domain().same_span(&Subspace::coordinate(2, &[0]), 1e-15));

        let narrow = Form::new(Subspace::coordinate(2, &[1]), real_diag(&[1.0])).unwrap();
        assert!(matches!(form_difference(&a, &narrow, &tol), Err(Error::DomainNotContained(_))));
    }

    #[test]
    fn form_at_z_examples() {
        let a = Form::full(CMatrix::from_row_slice(2, 2, &[c(1.0, 0.5), c(0.3, 0.2), c(-0.1, 0.4), c(2.0, -0.1)]))
            .unwrap();
        assert!(close(form_at_z(&a, I).matrix(), a.matrix(), 1e-15));
        assert!(close(form_at_z(&a, c(0.0, 0.0)).matrix(), real_part(&a).matrix(), 0.0));
    }

    #[test]
    fn strip_bound_on_z_family() {
        let tol = Tolerance::default();
        let a = Form::full(diag(&[c(1.0, 0.0), c(1.0, 1.0), c(2.0, -1.0)])).unwrap();
        let cb = sector_check(&a, &tol).c_bound.unwrap();
        for z in [c(0.3, 2.0), c(-0.6, 0.5), c(0.9, -1.5)] {
            let v = sector_check(&form_at_z(&a, z), &tol);
            let bound = z.im.abs() * cb / (1.0 - z.re.abs() * cb);
            assert!(v.is_sectorial && v.c_bound.unwrap() <= bound + 1e-12, "z = {z}");
        }
    }

    #[test]
    fn order_examples() {
        let tol = Tolerance::default();
        let a = Form::full(CMatrix::identity(2, 2)).unwrap();
        assert!(form_order_leq(&a, &a, &tol).unwrap());
        let b = Form::new(Subspace::coordinate(2, &[0]), real_diag(&[1.0])).unwrap();
        assert!(form_order_leq(&a, &b, &tol).unwrap());
        assert!(!form_order_leq(&b, &a, &tol).unwrap());
        for n in 1..20 {
            let an = Form::full(real_diag(&[1.0, n as f64])).unwrap();
            let an1 = Form::full(real_diag(&[1.0, n as f64 + 1.0])).unwrap();
            assert!(form_order_leq(&an, &an1, &tol).unwrap());
        }
        let nonsym = Form::full(diag(&[c(1.0, 1.0)])).unwrap();
        assert!(matches!(form_order_leq(&nonsym, &nonsym, &tol), Err(Error::NotSymmetric)));
    }

    #[test]
    fn serde_shape() {
        let f = Form::new(Subspace::coordinate(2, &[1]), real_diag(&[3.0])).unwrap();
        let v: serde_json::Value = serde_json::to_value(&f).unwrap();
        assert_eq!(v["space_dim"], 2);
        assert_eq!(v["domain_basis"], serde_json::json!([[[0.0, 0.0]], [[1.0, 0.0]]]));
        let back: Form = serde_json::from_value(v).unwrap();
        assert_eq!(back, f);
        let empty = Form::zero(Subspace::zero(2));
        let back: Form = serde_json::from_str(&serde_json::to_string(&empty).unwrap()).unwrap();
        assert_eq!(back.space_dim(), 2);
        assert_eq!(back.dim(), 0);
    }

    fn form_strategy(n: usize) -> impl Strategy<Value = Form> {
        proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n * n).prop_map(move |v| {
            Form::full(CMatrix::from_iterator(n, n, v.into_iter().map(|(a, b)| C64::new(a, b)))).unwrap()
        })
    }

    fn sectorial_strategy(n: usize) -> impl Strategy<Value = Form> {
        (form_strategy(n), form_strategy(n), 0.0f64..1.0).prop_map(move |(g, h, s)| {
            let tol = Tolerance::default();
            let re = g.matrix() * g.matrix().adjoint() + CMatrix::identity(n, n) * C64::new(0.1, 0.0);
            let root = crate::linalg::psd_sqrt(&re, &tol).unwrap();
            let herm = hermitian_part(h.matrix());
            let norm = spectral_norm(&herm).max(1e-12);
            let im = &root * herm * &root * C64::new(2.0 * s / norm, 0.0);
            Form::full(re + im * I).unwrap()
        })
    }

    proptest! {
        #[test]
        fn re_plus_i_im_recovers_form(a in form_strategy(4)) {
            let back = real_part(&a).matrix() + imag_part(&a).matrix() * I;
            prop_assert!(close(&back, a.matrix(), 1e-14));
        }

        #[test]
        fn rotation_round_trip(a in form_strategy(3), eta in -3.0f64..3.0) {
            prop_assert!(close(rotate(&rotate(&a, eta), -eta).matrix(), a.matrix(), 1e-12));
        }

        #[test]
        fn real_slices_of_sectorial_forms_stay_sectorial(a in sectorial_strategy(4)) {
            let tol = Tolerance::default();
            let v = sector_check(&a, &tol);
            prop_assert!(v.is_sectorial);
            let cb = v.c_bound.unwrap().max(1e-12);
            for k in 0..11 {
                let x = (-1.0 + 0.2 * k as f64) * 0.999 / cb;
                prop_assert!(sector_check(&form_at_z(&a, C64::new(x, 0.0)), &tol).is_sectorial, "x = {}", x);
            }
        }

        #[test]
        fn difference_re_embeds(a in form_strategy(3), b in form_strategy(2)) {
            let tol = Tolerance::default();
            let dom_b = Subspace::coordinate(3, &[0, 2]);
            let b = Form::new(dom_b, b.matrix().clone()).unwrap();
            let d = form_difference(&b, &a, &tol).unwrap();
            let rebuilt = a.restrict(b.domain(), &tol).unwrap().matrix() + d.matrix();
            prop_assert!(close(&rebuilt, b.matrix(), 1e-14));
        }
    }
}
