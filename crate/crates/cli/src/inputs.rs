//! Config-side descriptions of forms, relations and sequences.
//!
//! Every input is either inline or a `file` reference to the JSON the
//! library serializes (what `sectorial generate` writes). Matrices are
//! row-major nested arrays; an entry is a real number or an `[re, im]` pair.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use sectorial::association::JEllipticPresentation;
use sectorial::convergence::{FormSequence, LimitDescriptor, Member};
use sectorial::forms::Form;
use sectorial::generators::{example45, penalization_family, random_sectorial_sequence, Example45Config};
use sectorial::linalg::orthonormalize;
use sectorial::relations::LinearRelation;
use sectorial::{CMatrix, Tolerance, C64};

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Pair(C64),
}

impl Entry {
    fn value(self) -> C64 {
        match self {
            Entry::Real(x) => C64::new(x, 0.0),
            Entry::Pair(z) => z,
        }
    }
}

pub type Rows = Vec<Vec<Entry>>;

pub fn matrix(rows: &Rows, what: &str) -> anyhow::Result<CMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        bail!("{what}: ragged rows");
    }
    let m = CMatrix::from_fn(r, c, |i, j| rows[i][j].value());
    if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        bail!("{what}: non-finite entry");
    }
    Ok(m)
}

fn square(rows: &Rows, what: &str) -> anyhow::Result<CMatrix> {
    let m = matrix(rows, what)?;
    if m.nrows() != m.ncols() {
        bail!("{what}: expected a square matrix, got {}x{}", m.nrows(), m.ncols());
    }
    Ok(m)
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// A closed form or a j-elliptic presentation.
///
/// - `{"matrix": M}`: densely defined form with matrix `M`.
/// - `{"matrix": M, "domain": D}`: `M` is an ambient matrix, restricted to
///   the span of the columns of `D`.
/// - `{"matrix": M, "j": J, "omega": w}`: presentation on `V`.
/// - `{"file": path}`: a serialized form (or presentation, with `"j"`).
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormInput {
    #[serde(default)]
    pub matrix: Option<Rows>,
    #[serde(default)]
    pub domain: Option<Rows>,
    #[serde(default)]
    pub j: Option<Rows>,
    #[serde(default)]
    pub omega: Option<f64>,
    #[serde(default)]
    pub file: Option<PathBuf>,
}

impl FormInput {
    pub fn member(&self, base: &Path, tol: &Tolerance) -> anyhow::Result<Member> {
        if let Some(file) = &self.file {
            if self.matrix.is_some() || self.domain.is_some() || self.j.is_some() {
                bail!("form input: `file` excludes inline fields");
            }
            let value: serde_json::Value = load_json(&base.join(file))?;
            return if value.get("j").is_some() {
                Ok(Member::NonClosable(serde_json::from_value(value)?))
            } else {
                Ok(Member::Closed(serde_json::from_value(value)?))
            };
        }
        let m = square(self.matrix.as_ref().ok_or_else(|| anyhow!("form input needs `matrix` or `file`"))?, "matrix")?;
        if let Some(j) = &self.j {
            if self.domain.is_some() {
                bail!("form input: `domain` and `j` are exclusive");
            }
            let j = matrix(j, "j")?;
            let p = JEllipticPresentation::new(j, m, self.omega.unwrap_or(1.0), tol)?;
            return Ok(Member::NonClosable(p));
        }
        if self.omega.is_some() {
            bail!("form input: `omega` needs `j`");
        }
        match &self.domain {
            None => Ok(Member::Closed(Form::full(m)?)),
            Some(d) => {
                let d = matrix(d, "domain")?;
                if d.nrows() != m.nrows() {
                    bail!("domain vectors have {} entries, matrix is {}x{}", d.nrows(), m.nrows(), m.nrows());
                }
                let q = orthonormalize(&d, tol)?;
                let coords = q.basis().adjoint() * &m * q.basis();
                Ok(Member::Closed(Form::new(q, coords)?))
            }
        }
    }

    pub fn form(&self, base: &Path, tol: &Tolerance) -> anyhow::Result<Form> {
        match self.member(base, tol)? {
            Member::Closed(f) => Ok(f),
            Member::NonClosable(_) => bail!("a closed form is required here, not a presentation"),
        }
    }
}

/// A linear relation.
///
/// - `{"operator": M}`: graph of `M`.
/// - `{"pairs": P, "dim_in": g}`: span of the columns `(x; y)` of `P`.
/// - `{"form": F}`: the relation associated with a form or presentation.
/// - `{"file": path}`: a serialized relation.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationInput {
    #[serde(default)]
    pub operator: Option<Rows>,
    #[serde(default)]
    pub pairs: Option<Rows>,
    #[serde(default)]
    pub dim_in: Option<usize>,
    #[serde(default)]
    pub form: Option<FormInput>,
    #[serde(default)]
    pub file: Option<PathBuf>,
}

impl RelationInput {
    pub fn relation(&self, base: &Path, tol: &Tolerance) -> anyhow::Result<LinearRelation> {
        let given = [self.operator.is_some(), self.pairs.is_some(), self.form.is_some(), self.file.is_some()];
        if given.iter().filter(|&&g| g).count() != 1 {
            bail!("relation input needs exactly one of `operator`, `pairs`, `form`, `file`");
        }
        if self.dim_in.is_some() && self.pairs.is_none() {
            bail!("relation input: `dim_in` goes with `pairs`");
        }
        if let Some(op) = &self.operator {
            return Ok(LinearRelation::from_matrix(&matrix(op, "operator")?, tol)?);
        }
        if let Some(pairs) = &self.pairs {
            let p = matrix(pairs, "pairs")?;
            let g = self.dim_in.ok_or_else(|| anyhow!("`pairs` needs `dim_in`"))?;
            if g > p.nrows() {
                bail!("dim_in = {g} exceeds the {} rows of `pairs`", p.nrows());
            }
            return Ok(LinearRelation::from_pairs(g, p.nrows() - g, &p, tol)?);
        }
        if let Some(form) = &self.form {
            return Ok(form.member(base, tol)?.associate(tol)?);
        }
        let file = self.file.as_ref().expect("checked above");
        load_json(&base.join(file))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MembersInput {
    pub theta: f64,
    pub members: Vec<FormInput>,
    #[serde(default)]
    pub n_values: Option<Vec<u64>>,
    /// A known limit, used instead of a numerical one.
    #[serde(default)]
    pub limit: Option<FormInput>,
}

/// `a_n = q + c_n·p`, with `c_n` listed or `c_n = n^power` for
/// `n = 1..=length`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenalizationInput {
    pub q: FormInput,
    pub p: FormInput,
    #[serde(default)]
    pub c_values: Option<Vec<f64>>,
    #[serde(default)]
    pub c_power: Option<f64>,
    #[serde(default)]
    pub length: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomInput {
    pub dim: usize,
    pub length: usize,
    pub theta: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example45Input {
    pub grid_size: usize,
    #[serde(default)]
    pub n_values: Option<Vec<u64>>,
    #[serde(default)]
    pub n_max: Option<u64>,
}

impl Example45Input {
    pub fn config(&self) -> anyhow::Result<Example45Config> {
        let n_values = match (&self.n_values, self.n_max) {
            (Some(v), None) => v.clone(),
            (None, Some(m)) => (1..=m).collect(),
            (None, None) => (1..=50).collect(),
            (Some(_), Some(_)) => bail!("give `n_values` or `n_max`, not both"),
        };
        let cfg = Example45Config::new(self.grid_size, n_values)?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum SequenceInput {
    File(PathBuf),
    Inline(Box<FormSequence>),
    Members(MembersInput),
    Penalization(PenalizationInput),
    Random(RandomInput),
    Example45(Example45Input),
}

impl SequenceInput {
    pub fn sequence(&self, base: &Path, seed: u64, tol: &Tolerance) -> anyhow::Result<FormSequence> {
        Ok(match self {
            SequenceInput::File(path) => load_json(&base.join(path))?,
            SequenceInput::Inline(seq) => (**seq).clone(),
            SequenceInput::Members(m) => {
                let members = m.members.iter().map(|f| f.member(base, tol)).collect::<anyhow::Result<Vec<_>>>()?;
                let mut seq = FormSequence::new(members, m.theta)?;
                if let Some(n) = &m.n_values {
                    seq = seq.with_n_values(n.clone())?;
                }
                if let Some(limit) = &m.limit {
                    seq = seq.with_descriptor(LimitDescriptor::UserSupplied { limit: limit.member(base, tol)? })?;
                }
                seq
            }
            SequenceInput::Penalization(p) => {
                let c = match (&p.c_values, p.c_power, p.length) {
                    (Some(c), None, None) => c.clone(),
                    (None, power, Some(len)) => (1..=len).map(|n| (n as f64).powf(power.unwrap_or(1.0))).collect(),
                    _ => bail!("penalization needs `c_values`, or `length` with an optional `c_power`"),
                };
                penalization_family(&p.q.form(base, tol)?, &p.p.form(base, tol)?, &c, tol)?
            }
            SequenceInput::Random(r) => random_sectorial_sequence(seed, r.dim, r.length, r.theta)?,
            SequenceInput::Example45(e) => example45(&e.config()?, tol)?,
        })
    }
}
