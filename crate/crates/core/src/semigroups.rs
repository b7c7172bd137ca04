//! Degenerate holomorphic semigroups `T(t) = T₀(t)·P₀` of m-sectorial
//! relations.
//!
//! `T₀(t) = e^{−t·A₀}` on `H₀ = dom A` and `P₀` projects onto `H₀`, so
//! `T(0) = P₀` need not be the identity. The contour route integrates
//! `e^{−tλ}·(λ − A)⁻¹` along the boundary of `Σ_{θ'} ∪ B(0, 1)`.

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use std::num::NonZeroUsize;

use crate::convergence::ConvergenceReport;
use crate::error::{Error, Result};
use crate::linalg::{matrix_exp, spectral_norm, CMatrix, Tolerance, C64, I};
use crate::par::{map_range, Execution};
use crate::relations::{m_sectorial_check, operator_part, resolvent, LinearRelation};

/// `e^{−36.84} ≈ 1e-16`: rays are cut where the exponential factor drops
/// below roundoff for the smallest time requested.
const DECAY_EXPONENT: f64 = 36.84;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub theta_prime: f64,
    #[serde(default = "unit")]
    pub arc_radius: f64,
    /// Where the rays are cut; chosen per `t` when absent.
    #[serde(default)]
    pub truncation_radius: Option<f64>,
    /// Gauss–Legendre nodes per panel.
    #[serde(default = "default_nodes")]
    pub nodes_per_panel: usize,
}

fn unit() -> f64 {
    1.0
}

fn default_nodes() -> usize {
    16
}

impl ContourSpec {
    /// `θ' = (θ + π/2)/2`, halfway between the sector and the imaginary axis.
    pub fn for_angle(theta: f64) -> Self {
        Self { theta_prime: 0.5 * (theta + FRAC_PI_2), arc_radius: 1.0, truncation_radius: None, nodes_per_panel: default_nodes() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta_prime > 0.0 && self.theta_prime < FRAC_PI_2) {
            return Err(Error::InvalidParameter(format!("theta_prime must lie in (0, π/2), got {}", self.theta_prime)));
        }
        if !(self.arc_radius.is_finite() && self.arc_radius > 0.0) {
            return Err(Error::InvalidParameter("arc_radius must be positive".into()));
        }
        if let Some(r) = self.truncation_radius {
            if !(r.is_finite() && r > self.arc_radius) {
                return Err(Error::InvalidParameter("truncation_radius must exceed arc_radius".into()));
            }
        }
        if self.nodes_per_panel == 0 {
            return Err(Error::InvalidParameter("nodes_per_panel must be positive".into()));
        }
        Ok(())
    }

    fn cut(&self, t: f64) -> f64 {
        self.truncation_radius
            .unwrap_or_else(|| (DECAY_EXPONENT / (t * self.theta_prime.cos())).max(2.0 * self.arc_radius))
    }

    /// Quadrature nodes `λ` with weights `w·dλ/ds`, in contour order.
    ///
    /// Ray panels grow with `r` (length `min(0.1·r, 1/t)`): the nearest
    /// pole sits at distance `≳ r·sin(θ' − θ)`, so panels stay well inside
    /// the region where the integrand is analytic. Arc panels span at most
    /// a quarter radian.
    pub fn nodes(&self, t: f64) -> Vec<(C64, C64)> {
        let rule = GaussLegendre::new(NonZeroUsize::new(self.nodes_per_panel).expect("validated"));
        let pairs = rule.as_node_weight_pairs();
        let (r0, cut) = (self.arc_radius, self.cut(t));
        let mut breaks = vec![r0];
        while let Some(&r) = breaks.last() {
            if r >= cut {
                break;
            }
            breaks.push((r + (0.1 * r).min(1.0 / t)).min(cut));
        }
        let panel = |a: f64, b: f64, out: &mut Vec<(f64, f64)>| {
            for &(x, w) in pairs {
                out.push((0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w));
            }
        };
        let mut radial = Vec::new();
        for w in breaks.windows(2) {
            panel(w[0], w[1], &mut radial);
        }
        let up = C64::from_polar(1.0, self.theta_prime);
        let down = up.conj();
        let mut nodes = Vec::new();
        // Upper ray, inward.
        for &(r, w) in radial.iter().rev() {
            nodes.push((up * r, -up * w));
        }
        let span = 2.0 * PI - 2.0 * self.theta_prime;
        let arcs = (span / 0.25).ceil() as usize;
        let mut angular = Vec::new();
        for k in 0..arcs {
            let a = self.theta_prime + span * k as f64 / arcs as f64;
            panel(a, a + span / arcs as f64, &mut angular);
        }
        for &(phi, w) in &angular {
            let lambda = C64::from_polar(r0, phi);
            nodes.push((lambda, I * lambda * w));
        }
        // Lower ray, outward.
        for &(r, w) in &radial {
            nodes.push((down * r, down * w));
        }
        nodes
    }
}

fn check_m_sectorial(a: &LinearRelation, tol: &Tolerance) -> Result<Option<f64>> {
    let verdict = m_sectorial_check(a, FRAC_PI_2, tol);
    if !verdict.is_m_sectorial {
        return Err(Error::NotMSectorial(format!("{:?}", verdict.reason)));
    }
    Ok(verdict.angle_theta)
}

/// `T(t) = B₀·e^{−t·A₀}·B₀ᴴ` with `B₀` an orthonormal basis of `H₀`; at
/// `t = 0` this is `P₀`.
pub fn semigroup_spectral(a: &LinearRelation, t: f64, tol: &Tolerance) -> Result<CMatrix> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameter(format!("t must be finite and nonnegative, got {t}")));
    }
    check_m_sectorial(a, tol)?;
    let (h0, a0) = operator_part(a, tol)?;
    let e = matrix_exp(&(a0 * C64::new(-t, 0.0)))?;
    Ok(h0.basis() * e * h0.basis().adjoint())
}

/// `T(t) = (1/2πi)·∫_Γ e^{−tλ}·(λ − A)⁻¹ dλ` by panel quadrature.
///
/// Node contributions are computed independently and summed in contour
/// order, so the result does not depend on `exec`.
pub fn semigroup_contour(a: &LinearRelation, t: f64, spec: &ContourSpec, tol: &Tolerance, exec: Execution) -> Result<CMatrix> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidParameter(format!("the contour integral needs t > 0, got {t}")));
    }
    spec.validate()?;
    let angle = check_m_sectorial(a, tol)?.unwrap_or(0.0);
    if angle >= spec.theta_prime {
        return Err(Error::InvalidParameter(format!(
            "sector angle {angle:.6} is not below theta_prime {:.6}",
            spec.theta_prime
        )));
    }
    let nodes = spec.nodes(t);
    let terms = map_range(nodes.len(), exec, |k| {
        let (lambda, w) = nodes[k];
        resolvent(a, lambda).map(|r| r * ((-lambda * t).exp() * w))
    });
    let n = a.dim_in();
    let mut sum = CMatrix::zeros(n, n);
    for term in terms {
        sum += term?;
    }
    Ok(sum / (2.0 * PI * I))
}

/// A semigroup sampled at several times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemigroupEval {
    pub relation: LinearRelation,
    pub times: Vec<f64>,
    #[serde(with = "matrix_list")]
    pub values: Vec<CMatrix>,
}

mod matrix_list {
    use crate::linalg::CMatrix;
    use crate::serde_matrix::JsonMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[CMatrix], s: S) -> Result<S::Ok, S::Error> {
        v.iter().cloned().map(JsonMatrix).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMatrix>, D::Error> {
        Ok(Vec::<JsonMatrix>::deserialize(d)?.into_iter().map(|m| m.0).collect())
    }
}

pub fn semigroup_eval(a: &LinearRelation, times: &[f64], tol: &Tolerance) -> Result<SemigroupEval> {
    let values = times.iter().map(|&t| semigroup_spectral(a, t, tol)).collect::<Result<_>>()?;
    Ok(SemigroupEval { relation: a.clone(), times: times.to_vec(), values })
}

/// Which of the two convergence claims to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SemigroupMode {
    /// `T_n(t) → T(t)` on compact subsets of `(0, ∞)`.
    Unrestricted,
    /// `T_n(t)·P₀ → T(t)·P₀` on compact subsets of `[0, ∞)`, with `P₀` the
    /// limit's projection onto `ran T(0)`.
    Restricted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemigroupConvergence {
    pub mode: SemigroupMode,
    pub times: Vec<f64>,
    pub n_values: Vec<u64>,
    /// `max_t ‖T_n(t) − T(t)‖` (restricted in mode (ii)) per member.
    pub max_distances: Vec<f64>,
    /// Row `n`, column `t`.
    pub distances: Vec<Vec<f64>>,
}

/// Distances between the members' semigroups and the limit semigroup.
pub fn semigroup_convergence(
    report: &ConvergenceReport,
    times: &[f64],
    mode: SemigroupMode,
    tol: &Tolerance,
    exec: Execution,
) -> Result<SemigroupConvergence> {
    let limit = report
        .limit_relation
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("report carries no limit relation".into()))?;
    if report.relations.is_empty() {
        return Err(Error::InvalidParameter("report carries no member relations".into()));
    }
    if times.is_empty() || times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidParameter("times must be finite and nonnegative".into()));
    }
    if mode == SemigroupMode::Unrestricted && times.contains(&0.0) {
        return Err(Error::InvalidParameter("t = 0 is only admissible for the restricted claim".into()));
    }
    let limit_values = times.iter().map(|&t| semigroup_spectral(limit, t, tol)).collect::<Result<Vec<_>>>()?;
    let p0 = match mode {
        SemigroupMode::Unrestricted => None,
        SemigroupMode::Restricted => Some(semigroup_spectral(limit, 0.0, tol)?),
    };
    let rows = map_range(report.relations.len(), exec, |n| {
        times
            .iter()
            .zip(&limit_values)
            .map(|(&t, lim)| {
                let diff = semigroup_spectral(&report.relations[n], t, tol)? - lim;
                Ok(match &p0 {
                    Some(p) => spectral_norm(&(diff * p)),
                    None => spectral_norm(&diff),
                })
            })
            .collect::<Result<Vec<f64>>>()
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let max_distances = rows.iter().map(|r| r.iter().copied().fold(0.0, f64::max)).collect();
    Ok(SemigroupConvergence { mode, times: times.to_vec(), n_values: report.n_values.clone(), max_distances, distances: rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::association::associate_closed;
    use crate::forms::Form;
    use crate::linalg::{real_diag, Subspace};
    use crate::random;
    use proptest::prelude::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn op(m: CMatrix) -> LinearRelation {
        LinearRelation::from_matrix(&m, &tol()).unwrap()
    }

    fn close(a: &CMatrix, b: &CMatrix, eps: f64) -> bool {
        a.shape() == b.shape() && (a - b).iter().all(|z| z.norm() <= eps)
    }

    fn e(x: f64) -> f64 {
        x.exp()
    }

    #[test]
    fn spectral_examples() {
        let t1 = semigroup_spectral(&op(real_diag(&[1.0, 2.0])), 1.0, &tol()).unwrap();
        assert!(close(&t1, &real_diag(&[e(-1.0), e(-2.0)]), 1e-15));

        let all = LinearRelation::multivalued(2, &Subspace::full(2));
        assert!(close(&semigroup_spectral(&all, 0.7, &tol()).unwrap(), &CMatrix::zeros(2, 2), 0.0));

        let half = associate_closed(&Form::new(Subspace::coordinate(2, &[0]), real_diag(&[1.0])).unwrap(), &tol()).unwrap();
        assert!(close(&semigroup_spectral(&half, 0.0, &tol()).unwrap(), &real_diag(&[1.0, 0.0]), 1e-15));

        let bad = op(real_diag(&[-1.0]));
        assert!(matches!(semigroup_spectral(&bad, 1.0, &tol()), Err(Error::NotMSectorial(_))));
    }

    #[test]
    fn contour_examples() {
        let spec = ContourSpec::for_angle(0.0);
        let t = semigroup_contour(&op(real_diag(&[1.0])), 1.0, &spec, &tol(), Execution::Sequential).unwrap();
        assert!((t[(0, 0)] - C64::new(e(-1.0), 0.0)).norm() < 1e-8);

        let all = LinearRelation::multivalued(2, &Subspace::full(2));
        let t = semigroup_contour(&all, 0.3, &spec, &tol(), Execution::Sequential).unwrap();
        assert!(t.norm() == 0.0);

        assert!(semigroup_contour(&op(real_diag(&[1.0])), 0.0, &spec, &tol(), Execution::Sequential).is_err());
        let wide = op(crate::linalg::diag(&[C64::new(1.0, 5.0)]));
        assert!(semigroup_contour(&wide, 1.0, &spec, &tol(), Execution::Sequential).is_err());
    }

    #[test]
    fn contour_handles_multivalued_parts() {
        let half = associate_closed(&Form::new(Subspace::coordinate(2, &[0]), real_diag(&[2.0])).unwrap(), &tol()).unwrap();
        for t in [0.1, 1.0, 10.0] {
            let c = semigroup_contour(&half, t, &ContourSpec::for_angle(0.0), &tol(), Execution::Sequential).unwrap();
            let s = semigroup_spectral(&half, t, &tol()).unwrap();
            assert!(close(&c, &s, 1e-12), "t = {t}");
        }
    }

    #[test]
    fn penalization_dichotomy_at_zero() {
        use crate::convergence::{run_convergence, FamilyDescriptor, FormSequence, Member, Term};
        let family = FamilyDescriptor {
            base: Member::Closed(Form::full(real_diag(&[1.0, 0.0])).unwrap()),
            penalty: Some(Term { form: Form::full(real_diag(&[0.0, 1.0])).unwrap(), coeffs: (1..=30).map(f64::from).collect() }),
            drift: None,
        };
        let seq = FormSequence::from_family(family, 0.0, &tol()).unwrap();
        let report = run_convergence(&seq, &[], None, &tol(), Execution::Sequential).unwrap();

        let at_zero = semigroup_convergence(&report, &[0.0], SemigroupMode::Restricted, &tol(), Execution::Sequential).unwrap();
        assert!(at_zero.max_distances.iter().all(|&d| d < 1e-14));
        let full = semigroup_convergence(&report, &[1e-300, 0.5], SemigroupMode::Unrestricted, &tol(), Execution::Sequential).unwrap();
        assert!(full.max_distances.iter().all(|&d| d > 0.99));
        assert!(semigroup_convergence(&report, &[0.0], SemigroupMode::Unrestricted, &tol(), Execution::Sequential).is_err());

        // On [0.5, 10] the distance is e^{−n·0.5} exactly.
        let times: Vec<f64> = (0..50).map(|k| 0.5 + 9.5 * k as f64 / 49.0).collect();
        let mode_i = semigroup_convergence(&report, &times, SemigroupMode::Unrestricted, &tol(), Execution::Sequential).unwrap();
        for (k, d) in mode_i.max_distances.iter().enumerate() {
            let n = (k + 1) as f64;
            assert!((d - e(-0.5 * n)).abs() < 1e-14);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn semigroup_law_and_contractivity(seed in any::<u64>(), n in 1usize..6, k in 0usize..6, c in 0.0f64..1.7, s in 0.01f64..5.0, t in 0.01f64..5.0) {
            let mut rng = random::seeded(seed);
            let k = k.min(n);
            let form = Form::new(random::subspace(&mut rng, n, k), random::sectorial(&mut rng, k, 0.05, c)).unwrap();
            let a = associate_closed(&form, &tol()).unwrap();
            let ts = semigroup_spectral(&a, s, &tol()).unwrap();
            let tt = semigroup_spectral(&a, t, &tol()).unwrap();
            let tst = semigroup_spectral(&a, s + t, &tol()).unwrap();
            prop_assert!(close(&tst, &(&ts * &tt), 1e-10));
            prop_assert!(spectral_norm(&ts) <= 1.0 + 1e-10);
        }

        #[test]
        fn strong_continuity_toward_p0(seed in any::<u64>(), n in 1usize..6, k in 0usize..6) {
            let mut rng = random::seeded(seed);
            let k = k.min(n);
            let form = Form::new(random::subspace(&mut rng, n, k), random::sectorial(&mut rng, k, 0.05, 1.0)).unwrap();
            let a = associate_closed(&form, &tol()).unwrap();
            let p0 = semigroup_spectral(&a, 0.0, &tol()).unwrap();
            prop_assert!(close(&p0, &form.domain().projector(), 1e-12));
            let gaps: Vec<f64> = (0..30).map(|j| spectral_norm(&(semigroup_spectral(&a, 0.5f64.powi(j), &tol()).unwrap() - &p0))).collect();
            prop_assert!(gaps[29] < 1e-6 * (1.0 + spectral_norm(form.matrix())));
        }

        #[test]
        fn contour_matches_spectral(seed in any::<u64>(), n in 1usize..5, k in 0usize..5, theta in 0.0f64..1.047, t in 0.1f64..10.0) {
            let mut rng = random::seeded(seed);
            let k = k.min(n);
            let form = Form::new(random::subspace(&mut rng, n, k), random::sectorial(&mut rng, k, 0.05, theta.tan())).unwrap();
            let a = associate_closed(&form, &tol()).unwrap();
            let spec = ContourSpec::for_angle(theta);
            let c = semigroup_contour(&a, t, &spec, &tol(), Execution::Sequential).unwrap();
            let s = semigroup_spectral(&a, t, &tol()).unwrap();
            prop_assert!(spectral_norm(&(c - s)) < 1e-6);
        }
    }
}
