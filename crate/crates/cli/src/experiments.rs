//! One runner per experiment kind. Each returns a status, a JSON result and
//! the CSV series it produced.

use std::f64::consts::FRAC_PI_2;

use anyhow::bail;
use serde::Serialize;
use serde_json::{json, Value};

use sectorial::association::{associate_closed, associated_closed_form};
use sectorial::convergence::{holomorphy_test, run_convergence, ConvergenceReport, LimitSource, Member};
use sectorial::forms::{form_adjoint, form_order_leq, Form};
use sectorial::generators::unit_constant;
use sectorial::linalg::{psd_order, spectral_norm};
use sectorial::relations::{domination_margin, dominates, inv_one_plus, m_sectorial_check, operator_part, rel_inverse, LinearRelation};
use sectorial::semigroups::{semigroup_contour, semigroup_convergence, semigroup_spectral, ContourSpec, SemigroupMode};
use sectorial::serde_matrix::to_rows;
use sectorial::{CMatrix, Error, Execution, Tolerance, C64};

use crate::config::{ContourInput, Experiment, ExperimentConfig, ModeInput};
use crate::inputs::{Example45Input, FormInput, RelationInput, SequenceInput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    HypothesisViolation,
    NumericalFailure,
    ConfigError,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::HypothesisViolation => 1,
            Status::NumericalFailure => 2,
            Status::ConfigError => 3,
        }
    }
}

/// Exit status for a failed computation.
pub fn classify(e: &anyhow::Error) -> Status {
    use Error::*;
    match e.downcast_ref::<Error>() {
        Some(
            NotSectorial | NotSymmetric | NotSelfAdjoint | NotMSectorial(_) | NotCoercive(_) | DomainNotContained(_)
            | HypothesisViolated { .. } | OutsideStrip(..),
        ) => Status::HypothesisViolation,
        Some(Singular(_) | NotDecomposable | NotAnOperator | LimitUndetermined(_) | NonFinite(_)) => Status::NumericalFailure,
        Some(NotPositiveSemidefinite(_) | NotHermitian(_) | InvalidParameter(_) | DimensionMismatch { .. } | NotSquare(..)) => {
            Status::ConfigError
        }
        None => Status::ConfigError,
    }
}

/// A CSV series with a header row.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &'static str, header: &[&'static str]) -> Self {
        Self { name, header: header.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Shortest round-trip text, exponent form for small and large values.
fn num(x: f64) -> String {
    if x.is_finite() {
        serde_json::Number::from_f64(x).map_or_else(|| x.to_string(), |n| n.to_string())
    } else {
        x.to_string()
    }
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn opt_flag(x: Option<bool>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub diagnostics: Vec<String>,
    pub result: Value,
    pub tables: Vec<Table>,
}

impl Outcome {
    fn ok(result: Value) -> Self {
        Self { status: Status::Ok, diagnostics: Vec::new(), result, tables: Vec::new() }
    }

    pub fn failed(status: Status, msg: String) -> Self {
        Self { status, diagnostics: vec![msg], result: Value::Null, tables: Vec::new() }
    }

    /// Records a failure; the first one decides the status.
    fn flag(&mut self, status: Status, msg: impl Into<String>) {
        if self.status == Status::Ok {
            self.status = status;
        }
        self.diagnostics.push(msg.into());
    }
}

pub fn run(cfg: &ExperimentConfig, exec: Execution) -> anyhow::Result<Outcome> {
    let base = cfg.base_dir.as_path();
    let tol = &cfg.tol;
    match &cfg.experiment {
        Experiment::CheckSectorial { form, theta } => check_sectorial(&form.member(base, tol)?, *theta, tol),
        Experiment::Associate { form } => associate(&form.member(base, tol)?, tol),
        Experiment::Order { a, b } => order(&a.form(base, tol)?, &b.form(base, tol)?, tol),
        Experiment::Dominate { d, c } => dominate(&d.relation(base, tol)?, &c.relation(base, tol)?, tol),
        Experiment::Converge { sequence, z_samples, real_samples } => converge(cfg, sequence, z_samples, real_samples.as_deref(), exec),
        Experiment::Semigroup { relation, sequence, times, mode, contour } => match (relation, sequence) {
            (Some(r), None) => semigroup_relation(r, times, contour, cfg, exec),
            (None, Some(s)) => semigroup_sequence(s, times, mode.unwrap_or(ModeInput::Both), cfg, exec),
            _ => bail!("semigroup needs exactly one of `relation` and `sequence`"),
        },
        Experiment::Example45 { grid_size, n_values, n_max, z_samples } => {
            let grid = Example45Input { grid_size: *grid_size, n_values: n_values.clone(), n_max: *n_max };
            example45_run(&grid, z_samples, cfg, exec)
        }
        Experiment::Holomorphy { member, centers, radius, nodes } => holomorphy(member, centers, *radius, *nodes, cfg),
    }
}

fn check_sectorial(member: &Member, theta: Option<f64>, tol: &Tolerance) -> anyhow::Result<Outcome> {
    if let Some(t) = theta {
        if !(0.0..FRAC_PI_2).contains(&t) {
            bail!("theta must lie in [0, π/2), got {t}");
        }
    }
    let verdict = member.sector(tol);
    let admits = theta.map(|t| verdict.admits_angle(t));
    let half_width = verdict.c_bound.filter(|&c| verdict.is_sectorial && c > 0.0).map(|c| 1.0 / c);
    let mut out = Outcome::ok(json!({
        "verdict": verdict,
        "theta": theta,
        "admits_theta": admits,
        "strip_half_width": half_width,
    }));
    if !verdict.is_sectorial {
        out.flag(Status::HypothesisViolation, "form is not sectorial");
    } else if admits == Some(false) {
        let angle = verdict.angle_theta.unwrap_or(f64::NAN);
        out.flag(Status::HypothesisViolation, format!("sector angle {angle:.6} exceeds theta {:.6}", theta.unwrap_or(0.0)));
    }
    Ok(out)
}

fn associate(member: &Member, tol: &Tolerance) -> anyhow::Result<Outcome> {
    let rel = member.associate(tol)?;
    let verdict = m_sectorial_check(&rel, FRAC_PI_2, tol);
    let (h0, a0) = operator_part(&rel, tol)?;
    let closed = associated_closed_form(&rel, tol)?;
    let symmetric = closed.is_symmetric(tol) && closed.distance(&form_adjoint(&closed)) <= 1e3 * tol.psd_tol * spectral_norm(closed.matrix()).max(1.0);
    let mut out = Outcome::ok(json!({
        "relation": rel,
        "m_sectorial": verdict,
        "dom_dim": h0.dim(),
        "mul_dim": rel.mul().dim(),
        "operator_part": { "domain_basis": to_rows(h0.basis()), "matrix": to_rows(&a0) },
        "operator": rel.to_operator(tol).ok().map(|m| to_rows(&m)),
        "resolvent_at_minus_one": to_rows(&inv_one_plus(&rel)?),
        "closed_form": closed,
        "closed_form_symmetric": symmetric,
    }));
    if !verdict.is_m_sectorial {
        out.flag(Status::NumericalFailure, format!("associated relation fails the m-sectorial check: {:?}", verdict.reason));
    }
    Ok(out)
}

fn order(a: &Form, b: &Form, tol: &Tolerance) -> anyhow::Result<Outcome> {
    let a_leq_b = form_order_leq(a, b, tol)?;
    let b_leq_a = form_order_leq(b, a, tol)?;
    let inv = |f: &Form| -> sectorial::Result<CMatrix> { rel_inverse(&associate_closed(f, tol)?).to_operator(tol) };
    let inverse_order = match (inv(a), inv(b)) {
        (Ok(ia), Ok(ib)) => Some(psd_order(&ib, &ia, tol)?),
        _ => None,
    };
    let mut out = Outcome::ok(json!({
        "a_leq_b": a_leq_b,
        "b_leq_a": b_leq_a,
        "inverse_order": inverse_order,
    }));
    if inverse_order.is_some_and(|io| io != a_leq_b) {
        out.flag(Status::NumericalFailure, format!("a ≤ b is {a_leq_b} but B⁻¹ ⪯ A⁻¹ is {}", !a_leq_b));
    }
    Ok(out)
}

fn dominate(d: &LinearRelation, c: &LinearRelation, tol: &Tolerance) -> anyhow::Result<Outcome> {
    if (d.dim_in(), d.dim_out()) != (c.dim_in(), c.dim_out()) {
        bail!("d and c live in different spaces");
    }
    let (cp, dp) = (c.orthogonal_complement(), d.orthogonal_complement());
    let forward = dominates(d, c, tol);
    let dual = dominates(&cp, &dp, tol);
    let mut out = Outcome::ok(json!({
        "d_dominates_c": forward,
        "complement_dominates": dual,
        "margin": domination_margin(d, c, tol),
        "complement_margin": domination_margin(&cp, &dp, tol),
    }));
    if forward != dual {
        out.flag(Status::NumericalFailure, "domination and its complement dual disagree; the pair sits on the decision boundary");
    }
    Ok(out)
}

/// Status of a convergence run: hypotheses first, then the guarantees the
/// theory gives once they hold.
fn convergence_checks(out: &mut Outcome, report: &ConvergenceReport) {
    if !report.hypothesis_ok {
        match &report.hypotheses.first_violation {
            Some(v) => {
                let check = serde_json::to_value(v.check).ok().and_then(|c| c.as_str().map(String::from)).unwrap_or_default();
                out.flag(Status::HypothesisViolation, format!("hypothesis violated at n = {}: {check}: {}", v.n, v.detail));
            }
            None => out.flag(Status::HypothesisViolation, "hypotheses rejected"),
        }
        return;
    }
    if let Some(norm) = report.max_resolvent_norm.filter(|&m| m > 1.0 + 1e-9) {
        out.flag(Status::NumericalFailure, format!("resolvent norm {norm} exceeds 1"));
    }
    if let Some(f) = report.slice_failures.first() {
        out.flag(Status::NumericalFailure, format!("symmetric slice order fails at n = {}, x = {}", f.n, f.x));
    }
    if report.limit_source == Some(LimitSource::ResolventExtraction) && report.cauchy == Some(false) {
        out.flag(
            Status::NumericalFailure,
            format!("no convergence at tolerance: last resolvent step {:.3e}", report.cauchy_defect.unwrap_or(f64::NAN)),
        );
    }
    out.diagnostics.extend(report.warnings.iter().cloned());
}

fn convergence_tables(report: &ConvergenceReport) -> Vec<Table> {
    let mut dist = Table::new("distances", &["n", "z_re", "z_im", "distance"]);
    for series in &report.distances_by_z {
        for (k, d) in series.distances.iter().enumerate() {
            dist.push(vec![report.n_values[k].to_string(), num(series.z.re), num(series.z.im), num(*d)]);
        }
    }
    let mut hyp = Table::new("hypotheses", &["n", "member_angle", "domain_contained", "increment_angle"]);
    for d in &report.hypotheses.diagnostics {
        hyp.push(vec![d.n.to_string(), opt_num(d.member_angle), opt_flag(d.domain_contained), opt_num(d.increment_angle)]);
    }
    vec![dist, hyp]
}

fn converge(
    cfg: &ExperimentConfig,
    sequence: &SequenceInput,
    z_samples: &[C64],
    real_samples: Option<&[f64]>,
    exec: Execution,
) -> anyhow::Result<Outcome> {
    let seq = sequence.sequence(&cfg.base_dir, cfg.seed, &cfg.tol)?;
    let report = run_convergence(&seq, z_samples, real_samples, &cfg.tol, exec)?;
    let mut out = Outcome::ok(serde_json::to_value(&report)?);
    convergence_checks(&mut out, &report);
    out.tables = convergence_tables(&report);
    Ok(out)
}

fn contour_spec(theta: f64, input: &ContourInput) -> anyhow::Result<ContourSpec> {
    let mut spec = ContourSpec::for_angle(theta);
    if let Some(tp) = input.theta_prime {
        if tp <= theta {
            bail!("contour theta_prime {tp} must exceed the relation's sector angle {theta}");
        }
        spec.theta_prime = tp;
    }
    if let Some(n) = input.nodes {
        spec.nodes_per_panel = n;
    }
    if let Some(r) = input.arc_radius {
        spec.arc_radius = r;
    }
    spec.validate()?;
    Ok(spec)
}

fn check_times(times: &[f64]) -> anyhow::Result<()> {
    if times.is_empty() || times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        bail!("times must be a nonempty list of finite nonnegative numbers");
    }
    Ok(())
}

fn semigroup_relation(
    input: &RelationInput,
    times: &[f64],
    contour: &ContourInput,
    cfg: &ExperimentConfig,
    exec: Execution,
) -> anyhow::Result<Outcome> {
    check_times(times)?;
    let tol = &cfg.tol;
    let rel = input.relation(&cfg.base_dir, tol)?;
    let verdict = m_sectorial_check(&rel, FRAC_PI_2, tol);
    let theta = match verdict.angle_theta {
        Some(t) if verdict.is_m_sectorial => t,
        _ => {
            let mut out = Outcome::ok(json!({ "m_sectorial": verdict }));
            out.flag(Status::HypothesisViolation, format!("relation is not m-sectorial: {:?}", verdict.reason));
            return Ok(out);
        }
    };
    let spec = contour_spec(theta, contour)?;
    let mut table = Table::new("semigroup", &["t", "norm", "contour_gap", "law_defect"]);
    let (mut values, mut norms, mut gaps, mut laws) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for &t in times {
        let s = semigroup_spectral(&rel, t, tol)?;
        let gap = if t > 0.0 { Some(spectral_norm(&(semigroup_contour(&rel, t, &spec, tol, exec)? - &s))) } else { None };
        let law = spectral_norm(&(semigroup_spectral(&rel, 2.0 * t, tol)? - &s * &s));
        let norm = spectral_norm(&s);
        table.push(vec![num(t), num(norm), opt_num(gap), num(law)]);
        values.push(to_rows(&s));
        norms.push(norm);
        gaps.push(gap);
        laws.push(law);
    }
    let mut out = Outcome::ok(json!({
        "m_sectorial": verdict,
        "contour": spec,
        "times": times,
        "values": values,
        "norms": norms,
        "contour_gaps": gaps,
        "law_defects": laws,
    }));
    for (k, &t) in times.iter().enumerate() {
        if norms[k] > 1.0 + 1e-10 {
            out.flag(Status::NumericalFailure, format!("‖T({t})‖ = {} exceeds 1", norms[k]));
        }
        if gaps[k].is_some_and(|g| g > 1e-6) {
            out.flag(Status::NumericalFailure, format!("contour and spectral T({t}) differ by {:.3e}", gaps[k].unwrap_or(0.0)));
        }
        if laws[k] > 1e-10 {
            out.flag(Status::NumericalFailure, format!("T(2t) − T(t)² = {:.3e} at t = {t}", laws[k]));
        }
    }
    out.tables.push(table);
    Ok(out)
}

fn semigroup_sequence(
    input: &SequenceInput,
    times: &[f64],
    mode: ModeInput,
    cfg: &ExperimentConfig,
    exec: Execution,
) -> anyhow::Result<Outcome> {
    check_times(times)?;
    let seq = input.sequence(&cfg.base_dir, cfg.seed, &cfg.tol)?;
    let report = run_convergence(&seq, &[], None, &cfg.tol, exec)?;
    let mut out = Outcome::ok(Value::Null);
    convergence_checks(&mut out, &report);
    let mut runs = Vec::new();
    let mut table = Table::new("semigroup", &["mode", "n", "t", "distance"]);
    if report.hypothesis_ok {
        for m in mode.modes() {
            // The unrestricted claim lives on (0, ∞).
            let ts: Vec<f64> = match m {
                SemigroupMode::Unrestricted => times.iter().copied().filter(|&t| t > 0.0).collect(),
                SemigroupMode::Restricted => times.to_vec(),
            };
            if ts.len() < times.len() {
                out.diagnostics.push("t = 0 skipped for the unrestricted claim".into());
            }
            if ts.is_empty() {
                continue;
            }
            let sc = semigroup_convergence(&report, &ts, m, &cfg.tol, exec)?;
            let label = serde_json::to_value(m)?.as_str().unwrap_or_default().to_string();
            for (k, row) in sc.distances.iter().enumerate() {
                for (t, d) in ts.iter().zip(row) {
                    table.push(vec![label.clone(), sc.n_values[k].to_string(), num(*t), num(*d)]);
                }
            }
            runs.push(sc);
        }
    }
    out.result = json!({ "convergence": report, "semigroups": runs });
    out.tables.push(table);
    Ok(out)
}

fn example45_run(grid: &Example45Input, z_samples: &[C64], cfg: &ExperimentConfig, exec: Execution) -> anyhow::Result<Outcome> {
    let tol = &cfg.tol;
    let seq = sectorial::generators::example45(&grid.config()?, tol)?;
    let report = run_convergence(&seq, z_samples, None, tol, exec)?;
    let mut out = Outcome::ok(Value::Null);
    convergence_checks(&mut out, &report);
    let mut tables = convergence_tables(&report);
    let n = grid.grid_size;
    let id = CMatrix::identity(n, n);
    let ww = unit_constant(n) * unit_constant(n).adjoint();
    let mut table = Table::new("operators", &["n", "distance_to_identity", "one_over_n", "rank_one_defect"]);
    let mut worst_defect: f64 = 0.0;
    for (rel, &k) in report.relations.iter().zip(&report.n_values) {
        let a = rel.to_operator(tol)?;
        let dist = spectral_norm(&(&a - &id));
        let defect = spectral_norm(&(&a - &id - &ww / C64::new(k as f64, 0.0)));
        worst_defect = worst_defect.max(defect);
        table.push(vec![k.to_string(), num(dist), num(1.0 / k as f64), num(defect)]);
    }
    tables.push(table);
    let limit_is_identity = match &report.limit_relation {
        Some(l) => l.to_operator(tol).map(|a| spectral_norm(&(a - &id)) <= 1e-10).unwrap_or(false),
        None => false,
    };
    if report.hypothesis_ok {
        if !limit_is_identity {
            out.flag(Status::NumericalFailure, "limit relation is not the identity");
        }
        if worst_defect > 1e-10 {
            out.flag(Status::NumericalFailure, format!("A_n − I − ww*/n reaches {worst_defect:.3e}"));
        }
    }
    out.result = json!({
        "grid_size": n,
        "limit_relation": report.limit_relation,
        "limit_is_identity": limit_is_identity,
        "worst_rank_one_defect": worst_defect,
        "convergence": report,
    });
    out.tables = tables;
    Ok(out)
}

fn holomorphy(input: &FormInput, centers: &[C64], radius: Option<f64>, nodes: Option<usize>, cfg: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let tol = &cfg.tol;
    if centers.is_empty() {
        bail!("holomorphy needs at least one center");
    }
    let member = input.member(&cfg.base_dir, tol)?;
    let verdict = member.sector(tol);
    let c = match verdict.c_bound {
        Some(c) if verdict.is_sectorial => c.max(1e-12),
        _ => {
            let mut out = Outcome::ok(json!({ "verdict": verdict }));
            out.flag(Status::HypothesisViolation, "form is not sectorial");
            return Ok(out);
        }
    };
    let half_width = 1.0 / c;
    let nodes = nodes.unwrap_or(32);
    let mut table = Table::new("holomorphy", &["center_re", "center_im", "radius", "residual"]);
    let mut rows = Vec::new();
    for &z in centers {
        let r = radius.unwrap_or_else(|| (0.25 * (half_width - z.re.abs())).min(0.5));
        let residual = holomorphy_test(&member, z, r, nodes, tol)?;
        table.push(vec![num(z.re), num(z.im), num(r), num(residual)]);
        rows.push(json!({ "center": z, "radius": r, "residual": residual }));
    }
    let mut out = Outcome::ok(json!({ "verdict": verdict, "strip_half_width": half_width, "nodes": nodes, "residuals": rows }));
    for row in &rows {
        let residual = row["residual"].as_f64().unwrap_or(f64::INFINITY);
        if residual > tol.conv_tol {
            out.flag(Status::NumericalFailure, format!("mean-value residual {residual:.3e} at {} above {:.1e}", row["center"], tol.conv_tol));
        }
    }
    out.tables.push(table);
    Ok(out)
}
