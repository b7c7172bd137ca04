//! Seeded randomized property suite.
//!
//! Every instance draws from its own substream of the seed, so the
//! transcript is identical across runs and execution modes. Instances whose
//! verdict sits within roundoff of a decision boundary are counted as
//! skipped instead of checked.

use rand::Rng;
use serde::Serialize;
use serde_json::json;
use std::f64::consts::FRAC_PI_3;

use crate::association::{associate_closed, associated_closed_form};
use crate::forms::{form_order_leq, Form};
use crate::generators::{random_domination_pair, random_order_pair};
use crate::linalg::{psd_order, spectral_norm, vstack, CMatrix, Tolerance, C64};
use crate::par::{map_range, Execution};
use crate::random::{self, SeededRng};
use crate::relations::{
    domination_margin, dominates, inv_one_plus, least_norm_selection, m_sectorial_check, rel_from_resolvent, rel_inverse,
    LinearRelation,
};
use crate::semigroups::{semigroup_contour, semigroup_spectral, ContourSpec};
use crate::serde_matrix::to_rows;

enum Outcome {
    Pass,
    Skip,
    Fail { size: usize, instance: serde_json::Value, detail: String },
}

fn fail(size: usize, instance: serde_json::Value, detail: impl Into<String>) -> Outcome {
    Outcome::Fail { size, instance, detail: detail.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailingInstance {
    pub index: usize,
    pub size: usize,
    pub detail: String,
    pub instance: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub checked: usize,
    pub skipped: usize,
    pub failures: usize,
    /// Smallest failing instance by total dimension, earliest on ties.
    pub minimal_failure: Option<FailingInstance>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub instances: usize,
    pub properties: Vec<PropertyResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(|p| p.failures == 0)
    }

    pub fn transcript(&self) -> String {
        let mut out = format!("selftest seed={} instances={}\n", self.seed, self.instances);
        for p in &self.properties {
            let status = if p.failures == 0 { "ok" } else { "FAIL" };
            out += &format!("{status:4} {:<34} checked={} skipped={} failures={}\n", p.name, p.checked, p.skipped, p.failures);
            if let Some(f) = &p.minimal_failure {
                out += &format!("     minimal failing instance #{} (size {}): {}\n     {}\n", f.index, f.size, f.detail, f.instance);
            }
        }
        out += if self.passed() { "all properties hold\n" } else { "property failures detected\n" };
        out
    }
}

fn run_property(name: &str, seed: u64, stream: u64, instances: usize, exec: Execution, f: impl Fn(&mut SeededRng) -> Outcome + Sync) -> PropertyResult {
    let outcomes = map_range(instances, exec, |i| {
        let mut rng = random::substream(seed, stream * 1_000_000 + i as u64);
        f(&mut rng)
    });
    let mut result = PropertyResult { name: name.into(), checked: 0, skipped: 0, failures: 0, minimal_failure: None };
    for (index, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Outcome::Pass => result.checked += 1,
            Outcome::Skip => result.skipped += 1,
            Outcome::Fail { size, instance, detail } => {
                result.checked += 1;
                result.failures += 1;
                if result.minimal_failure.as_ref().is_none_or(|m| size < m.size) {
                    result.minimal_failure = Some(FailingInstance { index, size, detail, instance });
                }
            }
        }
    }
    result
}

fn relation_json(a: &LinearRelation) -> serde_json::Value {
    json!({ "dim_in": a.dim_in(), "dim_out": a.dim_out(), "pairs": to_rows(a.graph().basis()) })
}

fn form_json(a: &Form) -> serde_json::Value {
    serde_json::to_value(a).unwrap_or(serde_json::Value::Null)
}

fn random_m_sectorial(rng: &mut SeededRng, max_dim: usize, c: f64) -> LinearRelation {
    let n = rng.random_range(1..=max_dim);
    let k = rng.random_range(0..=n);
    let h0 = random::subspace(rng, n, k);
    let a0 = random::sectorial(rng, k, 0.0, c);
    LinearRelation::from_operator_part(&h0, &a0, &Tolerance::default()).expect("square operator part")
}

/// `a ≤ b` exactly when `B⁻¹ ⪯ A⁻¹`.
fn order_vs_inverse(rng: &mut SeededRng) -> Outcome {
    let tol = Tolerance::default();
    let (a, b) = random_order_pair(rng, 6);
    let inv = |f: &Form| -> crate::Result<CMatrix> { rel_inverse(&associate_closed(f, &tol)?).to_operator(&tol) };
    let instance = json!({ "a": form_json(&a), "b": form_json(&b) });
    let size = a.space_dim();
    match (form_order_leq(&a, &b, &tol), inv(&a), inv(&b)) {
        (Ok(forms), Ok(ia), Ok(ib)) => match psd_order(&ib, &ia, &tol) {
            Ok(inverses) if inverses == forms => Outcome::Pass,
            Ok(inverses) => fail(size, instance, format!("a ≤ b is {forms} but B⁻¹ ⪯ A⁻¹ is {inverses}")),
            Err(e) => fail(size, instance, e.to_string()),
        },
        (f, ia, ib) => fail(size, instance, format!("{:?}", (f.err(), ia.err(), ib.err()))),
    }
}

/// `D` dominates `C` exactly when `C⊥` dominates `D⊥`.
fn domination_duality(rng: &mut SeededRng) -> Outcome {
    let tol = Tolerance::default();
    let g = rng.random_range(1..=4);
    let h = rng.random_range(1..=4);
    let (d, c) = random_domination_pair(rng, g, h);
    let (cp, dp) = (c.orthogonal_complement(), d.orthogonal_complement());
    // Margins at roundoff level are exact ties, e.g. both selections
    // vanishing on (dom C)⊥; only the band above that is ambiguous.
    let near = |m: Option<f64>| m.is_some_and(|m| m.abs() > 1e-12 && m.abs() <= 1e-6);
    if near(domination_margin(&d, &c, &tol)) || near(domination_margin(&cp, &dp, &tol)) {
        return Outcome::Skip;
    }
    let lhs = dominates(&d, &c, &tol);
    let rhs = dominates(&cp, &dp, &tol);
    if lhs == rhs {
        Outcome::Pass
    } else {
        fail(g + h, json!({ "d": relation_json(&d), "c": relation_json(&c) }), format!("D dominates C is {lhs}, C⊥ dominates D⊥ is {rhs}"))
    }
}

/// Least norm over `{y : (x, y) ∈ C}` by a weighted least-squares solve in
/// graph coefficients; `None` when `x ∉ dom C`.
pub fn brute_min_norm(c: &LinearRelation, x: &CMatrix) -> Option<f64> {
    let (t, b) = (c.top(), c.bottom());
    if c.graph_dim() == 0 {
        return (x.norm() < 1e-12).then_some(0.0);
    }
    let w = C64::new(1e6, 0.0);
    let lhs = vstack(&(&t * w), &b);
    let rhs = vstack(&(x * w), &CMatrix::zeros(c.dim_out(), 1));
    let qr = lhs.qr();
    let coeff = qr.r().solve_upper_triangular(&(qr.q().adjoint() * rhs))?;
    if (&t * &coeff - x).norm() > 1e-6 * (1.0 + x.norm()) {
        return None;
    }
    Some((b * coeff).norm())
}

/// The least-norm selection lies in `C x`, is no longer than any sampled
/// element of `C x`, and matches the least-squares minimum.
pub fn least_norm_against_samples(c: &LinearRelation, rng: &mut SeededRng, samples: usize) -> Result<(), String> {
    let (dom, cmin) = least_norm_selection(c);
    if dom.is_zero() {
        return Ok(());
    }
    let mul = c.mul();
    for s in 0..samples {
        let coords = random::gaussian(rng, dom.dim(), 1);
        let x = dom.basis() * &coords;
        let y = &cmin * &coords;
        let pair = vstack(&x, &y);
        let residual = (&pair - c.graph().basis() * (c.graph().basis().adjoint() * &pair)).norm();
        if residual > 1e-9 * (1.0 + pair.norm()) {
            return Err(format!("sample {s}: selection leaves the graph by {residual:e}"));
        }
        let other = &y + mul.basis() * random::gaussian(rng, mul.dim(), 1);
        if y.norm() > other.norm() * (1.0 + 1e-12) + 1e-12 {
            return Err(format!("sample {s}: {} exceeds a sampled element of norm {}", y.norm(), other.norm()));
        }
        match brute_min_norm(c, &x) {
            Some(best) if (best - y.norm()).abs() <= 1e-8 * (1.0 + best) => {}
            Some(best) => return Err(format!("sample {s}: selection norm {} vs least squares {best}", y.norm())),
            None => return Err(format!("sample {s}: least squares finds x outside dom C")),
        }
    }
    Ok(())
}

fn least_norm_property(rng: &mut SeededRng) -> Outcome {
    let g = rng.random_range(1..=4);
    let h = rng.random_range(1..=4);
    let k = rng.random_range(0..=g + h);
    let c = crate::generators::random_relation(rng, g, h, k);
    match least_norm_against_samples(&c, rng, 20) {
        Ok(()) => Outcome::Pass,
        Err(e) => fail(g + h, relation_json(&c), e),
    }
}

/// Sectorial form → relation → closed form is the identity.
fn closed_form_round_trip(rng: &mut SeededRng) -> Outcome {
    let tol = Tolerance::default();
    let n = rng.random_range(1..=6);
    let k = rng.random_range(0..=n);
    let dom = random::subspace(rng, n, k);
    let c = rng.random_range(0.0..2.0);
    let a = Form::new(dom, random::sectorial(rng, k, 0.05, c)).expect("square");
    let back = associate_closed(&a, &tol).and_then(|rel| associated_closed_form(&rel, &tol));
    match back {
        Ok(b) if a.distance(&b) <= 1e-9 * (1.0 + spectral_norm(a.matrix())) => Outcome::Pass,
        Ok(b) => fail(n, form_json(&a), format!("round trip moved the form by {:e}", a.distance(&b))),
        Err(e) => fail(n, form_json(&a), e.to_string()),
    }
}

/// `A ↦ (I + A)⁻¹ ↦ A` on m-sectorial relations.
fn resolvent_round_trip(rng: &mut SeededRng) -> Outcome {
    let tol = Tolerance::default();
    let a = random_m_sectorial(rng, 6, 1.0);
    let back = inv_one_plus(&a).and_then(|r| rel_from_resolvent(&r, &tol));
    match back {
        Ok(b) if b.approx_eq(&a, 1e-9) && m_sectorial_check(&b, 1.0f64.atan() + 1e-6, &tol).is_m_sectorial => Outcome::Pass,
        Ok(b) => fail(a.dim_in(), relation_json(&a), format!("round trip gap {:e}", a.distance(&b))),
        Err(e) => fail(a.dim_in(), relation_json(&a), e.to_string()),
    }
}

/// Serialization preserves forms and relations; relations come back with
/// a re-orthonormalized basis of the same graph.
fn serde_round_trip(rng: &mut SeededRng) -> Outcome {
    let a = random_m_sectorial(rng, 5, 1.0);
    let n = a.dim_in();
    let form = Form::new(random::subspace(rng, n, n.min(2)), random::gaussian(rng, n.min(2), n.min(2))).expect("square");
    let rel_ok = serde_json::to_string(&a).ok().and_then(|s| serde_json::from_str::<LinearRelation>(&s).ok()).is_some_and(|b| b.approx_eq(&a, 1e-12));
    let form_ok = serde_json::to_string(&form).ok().and_then(|s| serde_json::from_str::<Form>(&s).ok()).is_some_and(|b| b.distance(&form) < 1e-12);
    if rel_ok && form_ok {
        Outcome::Pass
    } else {
        fail(n, json!({ "relation": relation_json(&a), "form": form_json(&form) }), format!("relation {rel_ok}, form {form_ok}"))
    }
}

/// `T(s)·T(t) = T(s + t)` and `‖T(t)‖ ≤ 1`.
fn semigroup_law(rng: &mut SeededRng) -> Outcome {
    let tol = Tolerance::default();
    let a = random_m_sectorial(rng, 6, FRAC_PI_3.tan());
    let s = rng.random_range(0.0..3.0);
    let t = rng.random_range(0.0..3.0);
    let eval = |t| semigroup_spectral(&a, t, &tol);
    let (ts, tt, tst) = match (eval(s), eval(t), eval(s + t)) {
        (Ok(x), Ok(y), Ok(z)) => (x, y, z),
        (x, y, z) => return fail(a.dim_in(), relation_json(&a), format!("{:?}", (x.err(), y.err(), z.err()))),
    };
    let law = spectral_norm(&(&ts * &tt - &tst));
    let norm = spectral_norm(&tst);
    if law <= 1e-10 && norm <= 1.0 + 1e-10 {
        Outcome::Pass
    } else {
        fail(a.dim_in(), json!({ "relation": relation_json(&a), "s": s, "t": t }), format!("law defect {law:e}, ‖T(s + t)‖ = {norm}"))
    }
}

/// Contour quadrature against the spectral evaluation.
fn contour_vs_spectral(rng: &mut SeededRng) -> Outcome {
    let tol = Tolerance::default();
    let a = random_m_sectorial(rng, 4, FRAC_PI_3.tan());
    let t = 10f64.powf(rng.random_range(-0.5..1.0));
    let spec = ContourSpec::for_angle(FRAC_PI_3);
    match (semigroup_contour(&a, t, &spec, &tol, Execution::Sequential), semigroup_spectral(&a, t, &tol)) {
        (Ok(x), Ok(y)) if spectral_norm(&(&x - &y)) < 1e-6 => Outcome::Pass,
        (Ok(x), Ok(y)) => fail(a.dim_in(), json!({ "relation": relation_json(&a), "t": t }), format!("gap {:e}", spectral_norm(&(x - y)))),
        (x, y) => fail(a.dim_in(), relation_json(&a), format!("{:?}", (x.err(), y.err()))),
    }
}

/// Runs the suite with `instances` draws per property (a tenth of that,
/// at least one, for the contour comparison).
pub fn run_selftest(seed: u64, instances: usize, exec: Execution) -> SelftestReport {
    let few = instances.div_ceil(10);
    let properties = vec![
        run_property("form order vs inverse order", seed, 1, instances, exec, order_vs_inverse),
        run_property("domination duality", seed, 2, instances, exec, domination_duality),
        run_property("least-norm selection", seed, 3, instances, exec, least_norm_property),
        run_property("closed form round trip", seed, 4, instances, exec, closed_form_round_trip),
        run_property("resolvent round trip", seed, 5, instances, exec, resolvent_round_trip),
        run_property("serialization round trip", seed, 6, instances, exec, serde_round_trip),
        run_property("semigroup law and contraction", seed, 7, instances, exec, semigroup_law),
        run_property("contour vs spectral semigroup", seed, 8, few, exec, contour_vs_spectral),
    ];
    SelftestReport { seed, instances, properties }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_and_is_deterministic() {
        let a = run_selftest(0, 60, Execution::Parallel);
        assert!(a.passed(), "{}", a.transcript());
        let b = run_selftest(0, 60, Execution::Sequential);
        assert_eq!(a.transcript(), b.transcript());
        for p in &a.properties {
            assert!(p.skipped * 10 <= p.checked + p.skipped, "{}", a.transcript());
        }
    }

    #[test]
    fn failures_report_the_smallest_instance() {
        let draw = |rng: &mut SeededRng| rng.random_range(1..10usize);
        let r = run_property("synthetic", 3, 9, 20, Execution::Sequential, |rng| {
            let size = draw(rng);
            if size > 4 { fail(size, json!(size), "too big") } else { Outcome::Pass }
        });
        let sizes: Vec<usize> = (0..20).map(|i| draw(&mut random::substream(3, 9_000_000 + i))).collect();
        let failing: Vec<usize> = sizes.iter().copied().filter(|&s| s > 4).collect();
        assert_eq!(r.failures, failing.len());
        let m = r.minimal_failure.unwrap();
        assert_eq!(m.size, *failing.iter().min().unwrap());
        assert_eq!(sizes[m.index], m.size);
        assert_eq!(sizes.iter().position(|&s| s == m.size), Some(m.index));
    }

    #[test]
    fn least_norm_check_catches_a_bad_selection() {
        let tol = Tolerance::default();
        // Graph of {(x, x + m) : m ∈ span e₂}, least norm selection x ↦ P₁x.
        let pairs = crate::linalg::real_matrix(4, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let c = LinearRelation::from_pairs(2, 2, &pairs, &tol).unwrap();
        let mut rng = random::seeded(1);
        assert!(least_norm_against_samples(&c, &mut rng, 50).is_ok());
        assert!(brute_min_norm(&c, &crate::linalg::real_matrix(2, 1, &[0.0, 1.0])).is_none());
        assert!((brute_min_norm(&c, &crate::linalg::real_matrix(2, 1, &[2.0, 0.0])).unwrap() - 2.0).abs() < 1e-9);
    }
}
