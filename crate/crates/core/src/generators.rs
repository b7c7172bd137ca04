//! Sequence and instance generators: the rank-one `L₂(0, 1)` example on a
//! grid, penalization families, and the seeded random families behind the
//! property suites.
//!
//! The grid model keeps the example's algebra exact. `H = ℂᴺ` in the basis
//! of normalized cell indicators, so `∫u = ⟨u, w⟩` with `w = (1,…,1)/√N`
//! the unit-norm constant function, and `V = ℂᴺ ⊕ ℂ` where the extra
//! coordinate `α` plays `u(0)`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use crate::association::{associate_jelliptic, associated_closed_form, JEllipticPresentation};
use crate::convergence::{Drift, FamilyDescriptor, FormSequence, Member, Term};
use crate::error::{Error, Result};
use crate::forms::{form_at_z, sector_check, Form};
use crate::linalg::{hermitian_eigen, hstack, is_psd, real_diag, vstack, CMatrix, Subspace, Tolerance, C64, I};
use crate::random::{self, SeededRng};
use crate::relations::LinearRelation;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example45Config {
    pub grid_size: usize,
    pub n_values: Vec<u64>,
}

impl Example45Config {
    pub fn new(grid_size: usize, n_values: Vec<u64>) -> Result<Self> {
        let cfg = Self { grid_size, n_values };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_size == 0 {
            return Err(Error::InvalidParameter("grid_size must be at least 1".into()));
        }
        if self.n_values.is_empty() || self.n_values[0] == 0 || self.n_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("n_values must be positive and increasing".into()));
        }
        Ok(())
    }
}

/// `w = (1, …, 1)/√N`.
pub fn unit_constant(grid_size: usize) -> CMatrix {
    CMatrix::from_element(grid_size, 1, C64::new(1.0 / (grid_size as f64).sqrt(), 0.0))
}

fn example45_j(grid_size: usize) -> CMatrix {
    hstack(&CMatrix::identity(grid_size, grid_size), &CMatrix::zeros(grid_size, 1))
}

/// `ã_n((u, α), (v, β)) = ⟨u, v⟩ + n·α·β̄ + i·(α·⟨1, v⟩ + ⟨u, 1⟩·β̄)`, so
/// `M = [[I, i·w], [i·wᴴ, n]]` and `j(u, α) = u`.
pub fn example45_matrix(grid_size: usize, n: f64) -> CMatrix {
    let w = unit_constant(grid_size);
    let top = hstack(&CMatrix::identity(grid_size, grid_size), &(&w * I));
    let bottom = hstack(&(w.adjoint() * I), &real_diag(&[n]));
    vstack(&top, &bottom)
}

pub fn example45_member(grid_size: usize, n: u64, tol: &Tolerance) -> Result<JEllipticPresentation> {
    if grid_size == 0 || n == 0 {
        return Err(Error::InvalidParameter("grid_size and n must be positive".into()));
    }
    JEllipticPresentation::with_unit_shift(example45_j(grid_size), example45_matrix(grid_size, n as f64), tol)
}

/// The example as a non-closable sequence with angle `π/4`.
///
/// It is the penalization `ã_1 + (n − 1)·|α|²` on `V`, and carries that
/// family as its limit descriptor: the limit lives on `ker |α|² = ℂᴺ ⊕ 0`,
/// where `j` is the identity and `ã` is `⟨u, v⟩`, so `A = I`.
pub fn example45(cfg: &Example45Config, tol: &Tolerance) -> Result<FormSequence> {
    cfg.validate()?;
    let n = cfg.grid_size;
    let base = Member::NonClosable(example45_member(n, 1, tol)?);
    let mut corner = CMatrix::zeros(n + 1, n + 1);
    corner[(n, n)] = C64::new(1.0, 0.0);
    let family = FamilyDescriptor {
        base,
        penalty: Some(Term { form: Form::full(corner)?, coeffs: cfg.n_values.iter().map(|&k| (k - 1) as f64).collect() }),
        drift: None,
    };
    FormSequence::from_family(family, FRAC_PI_4, tol)?.with_n_values(cfg.n_values.clone())
}

/// The strip family at one `z`, together with the contrast case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example45Z {
    pub z: C64,
    /// `A_{n,z} = I − (z²/n)·w·wᴴ`, associated with `ã_{n,z}`.
    pub relation: LinearRelation,
    /// `â_{n,z}`, the closed form of `A_{n,z}`.
    pub closed_form: Form,
    /// `(â_n)_z`, which equals `â_n` because `â_n` is symmetric.
    pub hat_then_z: Form,
}

pub fn example45_z_family(grid_size: usize, n: u64, z: C64, tol: &Tolerance) -> Result<Example45Z> {
    if z.re.abs() >= 1.0 {
        return Err(Error::OutsideStrip(format!("z = {z}"), 1.0));
    }
    let p = example45_member(grid_size, n, tol)?;
    let relation = associate_jelliptic(&p.at_z(z, tol)?, tol)?;
    let closed_form = associated_closed_form(&relation, tol)?;
    let hat = associated_closed_form(&associate_jelliptic(&p, tol)?, tol)?;
    Ok(Example45Z { z, relation, closed_form, hat_then_z: form_at_z(&hat, z) })
}

/// `a_n = q + c_n·p` on `dom q`, for symmetric accretive `p` and increasing
/// `c`. The declared angle is that of `q`.
pub fn penalization_family(q: &Form, p: &Form, c_values: &[f64], tol: &Tolerance) -> Result<FormSequence> {
    if c_values.is_empty() || c_values.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
        return Err(Error::InvalidParameter("c_values must be positive and finite".into()));
    }
    if c_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("c_values must be increasing".into()));
    }
    if !p.is_symmetric(tol) || !is_psd(&crate::linalg::hermitian_part(p.matrix()), tol) {
        return Err(Error::InvalidParameter("p must be symmetric and accretive".into()));
    }
    let verdict = sector_check(q, tol);
    let theta = match verdict.angle_theta {
        Some(a) if verdict.is_sectorial => a,
        _ => return Err(Error::NotSectorial),
    };
    let family = FamilyDescriptor {
        base: Member::Closed(q.clone()),
        penalty: Some(Term { form: p.clone(), coeffs: c_values.to_vec() }),
        drift: None,
    };
    FormSequence::from_family(family, theta, tol)
}

/// A seeded sequence satisfying the monotonicity hypotheses by construction.
///
/// `a_1` is sectorial with angle at most `θ` on a random domain; each step
/// restricts to a domain that may lose one dimension (first half only) and
/// adds `4^{−k}` times a fresh sectorial form of angle at most `θ`, so the
/// tail settles and the explicit-list limit applies for long sequences.
pub fn random_sectorial_sequence(seed: u64, dim: usize, length: usize, theta: f64) -> Result<FormSequence> {
    if dim == 0 || length == 0 {
        return Err(Error::InvalidParameter("dim and length must be positive".into()));
    }
    if !(0.0..FRAC_PI_2).contains(&theta) {
        return Err(Error::InvalidParameter(format!("theta must lie in [0, π/2), got {theta}")));
    }
    let tol = Tolerance::default();
    let mut rng = random::seeded(seed);
    let c = theta.tan();
    let k0 = rng.random_range(1..=dim);
    let dom = random::subspace(&mut rng, dim, k0);
    let c0 = c * rng.random_range(0.0..=1.0);
    let first = random::sectorial(&mut rng, k0, 0.1, c0);
    let mut current = Form::new(dom, first)?;
    let mut members = vec![Member::Closed(current.clone())];
    for k in 1..length {
        let shrink = 2 * k <= length && current.dim() > 1 && rng.random_bool(0.3);
        let next_dom = if shrink {
            let coords = random::subspace(&mut rng, current.dim(), current.dim() - 1);
            Subspace::from_orthonormal(current.domain().basis() * coords.basis(), &tol)?
        } else {
            current.domain().clone()
        };
        let restricted = current.restrict(&next_dom, &tol)?;
        let d = next_dom.dim();
        let ck = c * rng.random_range(0.0..=1.0);
        let step = random::sectorial(&mut rng, d, 0.0, ck) * C64::new(0.25f64.powi(k as i32), 0.0);
        current = restricted.with_matrix(restricted.matrix() + step)?;
        members.push(Member::Closed(current.clone()));
    }
    FormSequence::new(members, theta)
}

/// A relation spanned by `k` Gaussian pairs in `ℂᵍ ⊕ ℂʰ`.
pub fn random_relation(rng: &mut SeededRng, g: usize, h: usize, k: usize) -> LinearRelation {
    LinearRelation::from_pairs(g, h, &random::gaussian(rng, g + h, k), &Tolerance::default()).expect("finite gaussian pairs")
}

/// A pair of symmetric accretive forms with invertible operator parts,
/// drawn so that `a ≤ b` holds in roughly half the cases and both outcomes
/// keep a margin of at least `0.05·λ`.
///
/// Cases: `b = a|dom b + E` with `E ≻ 0`; the same with `E` indefinite;
/// `dom b` not inside `dom a`.
pub fn random_order_pair(rng: &mut SeededRng, max_dim: usize) -> (Form, Form) {
    let tol = Tolerance::default();
    let n = rng.random_range(1..=max_dim);
    let ka = rng.random_range(1..=n);
    let dom_a = random::subspace(rng, n, ka);
    let a = Form::new(dom_a.clone(), random::hermitian_with_spectrum(rng, ka, 0.2, 2.0)).expect("square");
    let case = rng.random_range(0..4);
    if case == 3 {
        let kb = rng.random_range(1..=n);
        let dom_b = random::subspace(rng, n, kb);
        let b = Form::new(dom_b, random::hermitian_with_spectrum(rng, kb, 0.2, 2.0)).expect("square");
        return (a, b);
    }
    let kb = rng.random_range(1..=ka);
    let coords = random::subspace(rng, ka, kb);
    let dom_b = Subspace::from_orthonormal(dom_a.basis() * coords.basis(), &tol).expect("orthonormal product");
    let base = a.restrict(&dom_b, &tol).expect("nested domain");
    let e = if case < 2 {
        random::hermitian_with_spectrum(rng, kb, 0.05, 1.0)
    } else {
        // One eigenvalue in [−0.15, −0.05], the rest arbitrary.
        let u = random::unitary(rng, kb);
        let mut spec: Vec<f64> = (0..kb).map(|_| rng.random_range(-0.15..1.0)).collect();
        spec[0] = rng.random_range(-0.15..-0.05);
        let d = real_diag(&spec);
        &u * d * u.adjoint()
    };
    // B ⪰ 0.2 − 0.15 on dom b, so it stays invertible.
    let b_matrix = base.matrix() + e;
    (a, base.with_matrix(b_matrix).expect("square"))
}

/// A pair `(D, C)` of relations in `ℂᵍ × ℂʰ`, mixing operators and
/// multivalued relations; `D` is a perturbed rescaling of `C` most of the
/// time so that both domination outcomes occur. Neither graph is the whole
/// space, where the selections vanish and every margin is an exact tie.
pub fn random_domination_pair(rng: &mut SeededRng, g: usize, h: usize) -> (LinearRelation, LinearRelation) {
    let tol = Tolerance::default();
    let kc = rng.random_range(1..g + h);
    let c = random_relation(rng, g, h, kc);
    let d = if rng.random_bool(0.75) {
        // Same pairs' first components, so dom D = dom C.
        let s = rng.random_range(0.5..1.5);
        let pert = random::gaussian(rng, h, c.graph_dim()) * C64::new(0.1, 0.0);
        let pairs = vstack(&c.top(), &(c.bottom() * C64::new(s, 0.0) + pert));
        LinearRelation::from_pairs(g, h, &pairs, &tol).expect("finite pairs")
    } else {
        let kd = rng.random_range(1..g + h);
        random_relation(rng, g, h, kd)
    };
    (d, c)
}

/// `q + c_n·p` with `c_n = n³`, `n = 1..=len`, on a random domain; `q` has
/// angle at most `θ` and `p` is symmetric with nonzero eigenvalues in
/// `[0.5, 2]` and a nontrivial kernel in `dom q` when `dim q > 1`.
pub fn random_penalization(seed: u64, max_dim: usize, theta: f64, len: usize, tol: &Tolerance) -> Result<FormSequence> {
    let mut rng = random::seeded(seed);
    let n = rng.random_range(1..=max_dim);
    let k = rng.random_range(1..=n);
    let dom = random::subspace(&mut rng, n, k);
    let q = Form::new(dom.clone(), random::sectorial(&mut rng, k, 0.1, theta.tan()))?;
    let rank = if k == 1 { rng.random_range(0..=1) } else { rng.random_range(1..k) };
    let u = random::unitary(&mut rng, k);
    let spec: Vec<f64> = (0..k).map(|i| if i < rank { rng.random_range(0.5..=2.0) } else { 0.0 }).collect();
    let p = Form::new(dom, &u * real_diag(&spec) * u.adjoint())?;
    let c: Vec<f64> = (1..=len).map(|i| (i as f64).powi(3)).collect();
    let family = FamilyDescriptor { base: Member::Closed(q), penalty: Some(Term { form: p, coeffs: c }), drift: None };
    FormSequence::from_family(family, theta, tol)
}

/// A j-elliptic presentation family `M + c_n·P + d_n·R` on `V`.
///
/// With `injective = false`, `j: ℂᵛ → ℂⁿ` has a nontrivial kernel; `c_n`
/// grows geometrically to `1e7` against a penalty with nonzero eigenvalues
/// in `[0.5, 2]`, and `d_n = 1 − 2^{−n}`. With
/// `injective = true`, `j` is injective and only the drift is present, so
/// the sequence settles to roundoff.
pub fn random_nonclosable(seed: u64, max_dim: usize, len: usize, injective: bool, tol: &Tolerance) -> Result<FormSequence> {
    let mut rng = random::seeded(seed);
    let n = rng.random_range(1..=max_dim);
    let (v, rank) = if injective {
        let v = rng.random_range(1..=n);
        (v, v)
    } else {
        let v = rng.random_range(2..=max_dim.max(2));
        (v, rng.random_range(0..v.min(n)))
    };
    // Singular values in [0.5, 2] on a random rank-`rank` part.
    let sv: Vec<f64> = (0..rank).map(|_| rng.random_range(0.5..=2.0)).collect();
    let left = random::unitary(&mut rng, n).columns(0, rank).into_owned();
    let right = random::unitary(&mut rng, v).columns(0, rank).into_owned();
    let j = left * real_diag(&sv) * right.adjoint();
    let theta = rng.random_range(0.0..1.0f64);
    let m = random::sectorial(&mut rng, v, 0.2, theta.tan());
    let cr = theta.tan() * rng.random_range(0.0..=1.0);
    let r = random::sectorial(&mut rng, v, 0.0, cr);
    let drift = Drift { form: Form::full(r)?, coeffs: (1..=len).map(|k| 1.0 - 0.5f64.powi(k as i32)).collect(), limit: 1.0 };
    let penalty = if injective {
        None
    } else {
        let prank = rng.random_range(1..=v);
        let u = random::unitary(&mut rng, v);
        let spec: Vec<f64> = (0..v).map(|i| if i < prank { rng.random_range(0.5..=2.0) } else { 0.0 }).collect();
        let p = &u * real_diag(&spec) * u.adjoint();
        let coeffs = (1..=len).map(|k| 10f64.powf(7.0 * k as f64 / len as f64)).collect();
        Some(Term { form: Form::full(p)?, coeffs })
    };
    let base = Member::NonClosable(JEllipticPresentation::with_unit_shift(j, m, tol)?);
    FormSequence::from_family(FamilyDescriptor { base, penalty, drift: Some(drift) }, theta, tol)
}

/// `a_n = q + c_n·(1 + i·s)·P + i·d_n·K` with values in the quarter plane
/// and increasing imaginary parts.
///
/// `Q = Re q`, `Im q = Q^{1/2}·S₁·Q^{1/2}` with `0 ⪯ S₁`, `‖S₁‖ = τ`, and
/// `K = Q^{1/2}·S₂·Q^{1/2}` with `‖S₂‖ = κ`; `c_n = n³`, `d_n = 1 − 2^{−n}`.
/// The member angle is at most `θ₀ = atan(max(τ + κ, s))`, returned with
/// the sequence. The increments `i·(d_{n+1} − d_n)·K` are not sectorial, so
/// the plain hypotheses fail whenever `K ≠ 0`.
pub fn random_ouhabaz_family(seed: u64, max_dim: usize, len: usize, tol: &Tolerance) -> Result<(FormSequence, f64)> {
    let mut rng = random::seeded(seed);
    let n = rng.random_range(2..=max_dim.max(2));
    let re = random::hermitian_with_spectrum(&mut rng, n, 0.2, 2.0);
    let root = hermitian_eigen(&re).apply(f64::sqrt);
    let psd_with_norm = |rng: &mut SeededRng, norm: f64| {
        let g = random::psd(rng, n, n);
        let s = crate::linalg::spectral_norm(&g);
        &root * (g * C64::new(norm / s, 0.0)) * &root
    };
    let (tau, kappa, s) = (rng.random_range(0.0..0.8), rng.random_range(0.1..0.8), rng.random_range(0.0..1.5));
    let q = &re + psd_with_norm(&mut rng, tau) * I;
    let k = psd_with_norm(&mut rng, kappa);
    let prank = rng.random_range(1..n);
    let u = random::unitary(&mut rng, n);
    let spec: Vec<f64> = (0..n).map(|i| if i < prank { rng.random_range(0.5..=2.0) } else { 0.0 }).collect();
    let p = &u * real_diag(&spec) * u.adjoint() * C64::new(1.0, s);
    let theta0 = (tau + kappa).max(s).atan();
    let family = FamilyDescriptor {
        base: Member::Closed(Form::full(q)?),
        penalty: Some(Term { form: Form::full(p)?, coeffs: (1..=len).map(|i| (i as f64).powi(3)).collect() }),
        drift: Some(Drift {
            form: Form::full(k * I)?,
            coeffs: (1..=len).map(|i| 1.0 - 0.5f64.powi(i as i32)).collect(),
            limit: 1.0,
        }),
    };
    // The plain sequence only satisfies the sector bound, not monotonicity.
    let family_seq = FormSequence::from_family(family, theta0.min(FRAC_PI_2 - 1e-9), tol)?;
    Ok((family_seq, theta0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convergence::{limit_form, run_convergence, uniform_c_bound, validate_hypotheses};
    use crate::forms::{form_adjoint, form_order_leq};
    use crate::linalg::{real_matrix, spectral_norm};
    use crate::par::Execution;
    use crate::relations::inv_one_plus;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn rank_one(grid: usize, scale: C64) -> CMatrix {
        let w = unit_constant(grid);
        CMatrix::identity(grid, grid) + &w * w.adjoint() * scale
    }

    #[test]
    fn example45_small_case() {
        let p = example45_member(2, 1, &tol()).unwrap();
        let a = associate_jelliptic(&p, &tol()).unwrap().to_operator(&tol()).unwrap();
        assert!((a - real_matrix(2, 2, &[1.5, 0.5, 0.5, 1.5])).norm() < 1e-14);
    }

    #[test]
    fn example45_sequence_hypotheses_and_limit() {
        for grid in [1, 3, 16, 64] {
            let cfg = Example45Config::new(grid, vec![1, 2, 5, 10, 100, 1000, 10000]).unwrap();
            let seq = example45(&cfg, &tol()).unwrap();
            let report = validate_hypotheses(&seq, &tol());
            assert!(report.ok, "{:?}", report.first_violation);
            assert!((uniform_c_bound(&seq, &tol()).unwrap() - 1.0).abs() < 1e-12);
            for (m, &n) in seq.members().iter().zip(&cfg.n_values) {
                let Member::NonClosable(p) = m else { panic!() };
                let a = associate_jelliptic(p, &tol()).unwrap().to_operator(&tol()).unwrap();
                assert!(spectral_norm(&(a - rank_one(grid, C64::new(1.0 / n as f64, 0.0)))) < 1e-12);
            }
        }
    }

    #[test]
    fn example45_convergence_run() {
        let cfg = Example45Config::new(4, (1..=50).collect()).unwrap();
        let seq = example45(&cfg, &tol()).unwrap();
        let report = run_convergence(&seq, &[], None, &tol(), Execution::Sequential).unwrap();
        let limit = report.limit_relation.unwrap().to_operator(&tol()).unwrap();
        assert!((limit - CMatrix::identity(4, 4)).norm() < 1e-13);
        for (k, d) in report.resolvent_distances.iter().enumerate() {
            let n = (k + 1) as f64;
            assert!((d - (0.5 - 1.0 / (2.0 + 1.0 / n))).abs() < 1e-13);
        }
        assert!(report.holomorphy_residuals.iter().all(|h| h.residual < 1e-10));
        assert!(limit_form(&seq, &tol()).is_err());
    }

    #[test]
    fn example45_hat_forms_decrease() {
        let mut prev: Option<Form> = None;
        for n in 1..=20 {
            let p = example45_member(3, n, &tol()).unwrap();
            let hat = associated_closed_form(&associate_jelliptic(&p, &tol()).unwrap(), &tol()).unwrap();
            assert!(spectral_norm(&(form_adjoint(&hat).matrix() - hat.matrix())) < 1e-13);
            if let Some(prev) = prev {
                assert!(form_order_leq(&hat, &prev, &tol()).unwrap());
                assert!(!form_order_leq(&prev, &hat, &tol()).unwrap());
            }
            prev = Some(hat);
        }
    }

    #[test]
    fn example45_strip_family() {
        let n = 3;
        for z in [C64::new(0.0, 1.0), C64::new(0.0, -1.0), C64::new(0.0, 0.0), C64::new(0.5, 0.0), C64::new(0.4, -2.0)] {
            let ex = example45_z_family(5, n, z, &tol()).unwrap();
            let expected = rank_one(5, -z * z / n as f64);
            assert!(spectral_norm(&(ex.relation.to_operator(&tol()).unwrap() - &expected)) < 1e-12);
            assert!(spectral_norm(&(ex.closed_form.ambient_matrix() - &expected)) < 1e-12);
            assert!(spectral_norm(&(ex.hat_then_z.ambient_matrix() - rank_one(5, C64::new(1.0 / n as f64, 0.0)))) < 1e-12);
            let gap = spectral_norm(&(ex.closed_form.ambient_matrix() - ex.hat_then_z.ambient_matrix()));
            if z.re == 0.0 && z.im.abs() == 1.0 {
                assert!(gap < 1e-12);
            } else {
                assert!(gap > 0.1 / n as f64);
            }
        }
        assert!(example45_z_family(5, 1, C64::new(1.0, 0.0), &tol()).is_err());
    }

    #[test]
    fn penalization_examples() {
        let q = Form::full(real_diag(&[1.0, 1.0])).unwrap();
        let p = Form::full(real_diag(&[0.0, 1.0])).unwrap();
        let c: Vec<f64> = (1..=50).map(f64::from).collect();
        let seq = penalization_family(&q, &p, &c, &tol()).unwrap();
        assert!(validate_hypotheses(&seq, &tol()).ok);
        let report = run_convergence(&seq, &[], None, &tol(), Execution::Sequential).unwrap();
        let lim = inv_one_plus(report.limit_relation.as_ref().unwrap()).unwrap();
        assert!((lim - real_diag(&[0.5, 0.0])).norm() < 1e-14);

        let zero = Form::full(CMatrix::zeros(2, 2)).unwrap();
        let seq = penalization_family(&q, &zero, &c, &tol()).unwrap();
        assert!(seq.members().windows(2).all(|w| w[0] == w[1]));

        let mut rng = random::seeded(3);
        let q = Form::full(random::sectorial(&mut rng, 4, 0.1, 0.5)).unwrap();
        let p = Form::full(random::psd(&mut rng, 4, 1)).unwrap();
        let seq = penalization_family(&q, &p, &c, &tol()).unwrap();
        assert_eq!(limit_form(&seq, &tol()).unwrap().dim(), 3);

        assert!(penalization_family(&q, &p, &[2.0, 1.0], &tol()).is_err());
        let skew = Form::full(crate::linalg::diag(&[C64::new(1.0, 1.0)])).unwrap();
        assert!(penalization_family(&Form::full(real_diag(&[1.0])).unwrap(), &skew, &c, &tol()).is_err());
    }

    #[test]
    fn random_sequences_satisfy_hypotheses() {
        for seed in 0..40 {
            let theta = (seed % 5) as f64 * 0.3;
            let seq = random_sectorial_sequence(seed, 1 + seed as usize % 6, 1 + seed as usize % 30, theta).unwrap();
            let report = validate_hypotheses(&seq, &tol());
            assert!(report.ok, "seed {seed}: {:?}", report.first_violation);
            if theta == 0.0 {
                for m in seq.members() {
                    assert!(crate::linalg::skew_part(m.matrix()).norm() < 1e-14);
                }
            }
        }
        let a = random_sectorial_sequence(7, 4, 10, 0.5).unwrap();
        let b = random_sectorial_sequence(7, 4, 10, 0.5).unwrap();
        assert_eq!(a, b);
        let single = random_sectorial_sequence(9, 3, 1, 0.4).unwrap();
        assert!(sector_check(match &single.members()[0] {
            Member::Closed(f) => f,
            _ => unreachable!(),
        }, &tol())
        .admits_angle(0.4));
    }

    #[test]
    fn long_random_sequences_have_numerical_limits() {
        for seed in 0..10 {
            let seq = random_sectorial_sequence(seed, 4, 30, 0.6).unwrap();
            let report = run_convergence(&seq, &[], None, &tol(), Execution::Sequential).unwrap();
            assert!(report.hypothesis_ok);
            assert!(*report.resolvent_distances.last().unwrap() < 1e-15);
        }
    }

    #[test]
    fn order_pairs_cover_both_outcomes() {
        let mut rng = random::seeded(11);
        let (mut yes, mut no) = (0, 0);
        for _ in 0..100 {
            let (a, b) = random_order_pair(&mut rng, 6);
            if form_order_leq(&a, &b, &tol()).unwrap() {
                yes += 1;
            } else {
                no += 1;
            }
            assert!(hermitian_eigen(b.matrix()).min() > 0.0 && hermitian_eigen(a.matrix()).min() > 0.0);
        }
        assert!(yes > 25 && no > 25, "{yes} / {no}");
    }

    #[test]
    fn generated_families_pass_their_checks() {
        for seed in 0..10 {
            let seq = random_penalization(seed, 6, 1.0, 50, &tol()).unwrap();
            assert!(validate_hypotheses(&seq, &tol()).ok);
            for injective in [false, true] {
                let seq = random_nonclosable(seed, 6, 50, injective, &tol()).unwrap();
                assert!(validate_hypotheses(&seq, &tol()).ok, "seed {seed} injective {injective}");
                let Member::NonClosable(p) = &seq.members()[0] else { panic!() };
                assert_eq!(p.is_injective(&tol()), injective || p.v_dim() == 0);
            }
            let (seq, theta0) = random_ouhabaz_family(seed, 6, 50, &tol()).unwrap();
            for m in seq.members() {
                assert!(m.sector(&tol()).admits_angle(theta0));
            }
        }
    }
}
