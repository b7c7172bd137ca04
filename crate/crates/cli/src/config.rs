//! Experiment configuration: common fields plus one kind-tagged body.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Deserialize;

use sectorial::semigroups::SemigroupMode;
use sectorial::{Tolerance, C64};

use crate::inputs::{FormInput, RelationInput, SequenceInput};

pub const DEFAULT_SEED: u64 = 20240917;

/// Partial tolerance override; absent fields keep their defaults.
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceInput {
    pub rank_tol: Option<f64>,
    pub psd_tol: Option<f64>,
    pub conv_tol: Option<f64>,
}

impl ToleranceInput {
    pub fn resolve(&self) -> anyhow::Result<Tolerance> {
        let d = Tolerance::default();
        Ok(Tolerance::new(
            self.rank_tol.unwrap_or(d.rank_tol),
            self.psd_tol.unwrap_or(d.psd_tol),
            self.conv_tol.unwrap_or(d.conv_tol),
        )?)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourInput {
    #[serde(default)]
    pub theta_prime: Option<f64>,
    #[serde(default)]
    pub nodes: Option<usize>,
    #[serde(default)]
    pub arc_radius: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeInput {
    Unrestricted,
    Restricted,
    Both,
}

impl ModeInput {
    pub fn modes(self) -> Vec<SemigroupMode> {
        match self {
            ModeInput::Unrestricted => vec![SemigroupMode::Unrestricted],
            ModeInput::Restricted => vec![SemigroupMode::Restricted],
            ModeInput::Both => vec![SemigroupMode::Unrestricted, SemigroupMode::Restricted],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    CheckSectorial {
        form: FormInput,
        #[serde(default)]
        theta: Option<f64>,
    },
    Associate {
        form: FormInput,
    },
    Order {
        a: FormInput,
        b: FormInput,
    },
    Dominate {
        d: RelationInput,
        c: RelationInput,
    },
    Converge {
        sequence: SequenceInput,
        #[serde(default)]
        z_samples: Vec<C64>,
        #[serde(default)]
        real_samples: Option<Vec<f64>>,
    },
    Semigroup {
        #[serde(default)]
        relation: Option<RelationInput>,
        #[serde(default)]
        sequence: Option<SequenceInput>,
        times: Vec<f64>,
        #[serde(default)]
        mode: Option<ModeInput>,
        #[serde(default)]
        contour: ContourInput,
    },
    Example45 {
        grid_size: usize,
        #[serde(default)]
        n_values: Option<Vec<u64>>,
        #[serde(default)]
        n_max: Option<u64>,
        #[serde(default)]
        z_samples: Vec<C64>,
    },
    Holomorphy {
        member: FormInput,
        centers: Vec<C64>,
        #[serde(default)]
        radius: Option<f64>,
        #[serde(default)]
        nodes: Option<usize>,
    },
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::CheckSectorial { .. } => "check-sectorial",
            Experiment::Associate { .. } => "associate",
            Experiment::Order { .. } => "order",
            Experiment::Dominate { .. } => "dominate",
            Experiment::Converge { .. } => "converge",
            Experiment::Semigroup { .. } => "semigroup",
            Experiment::Example45 { .. } => "example45",
            Experiment::Holomorphy { .. } => "holomorphy",
        }
    }
}

/// Fields shared by every kind.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Common {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    tolerance: ToleranceInput,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    out_dir: Option<PathBuf>,
}

const COMMON_KEYS: [&str; 4] = ["name", "tolerance", "seed", "out_dir"];

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub contour_theta_prime: Option<f64>,
    pub nodes: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub name: String,
    pub tol: Tolerance,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Directory that relative file references resolve against.
    pub base_dir: PathBuf,
    pub experiment: Experiment,
}

impl ExperimentConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("experiment").to_string();
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &stem, base_dir, overrides)
    }

    pub fn parse(text: &str, stem: &str, base_dir: PathBuf, overrides: &Overrides) -> anyhow::Result<Self> {
        let mut value: serde_json::Value = serde_json::from_str(text).context("config is not valid JSON")?;
        let map = match value.as_object_mut() {
            Some(m) => m,
            None => bail!("config must be a JSON object"),
        };
        if !map.contains_key("kind") {
            bail!("config lacks `kind`");
        }
        let mut common = serde_json::Map::new();
        for key in COMMON_KEYS {
            if let Some(v) = map.remove(key) {
                common.insert(key.to_string(), v);
            }
        }
        let common: Common = serde_json::from_value(common.into()).context("invalid common fields")?;
        let mut experiment: Experiment = serde_json::from_value(value).context("invalid experiment body")?;

        let mut tol = common.tolerance.resolve()?;
        if let Some(t) = overrides.tol {
            tol = Tolerance::new(t, t, t).context("--tol")?;
        }
        if let Experiment::Semigroup { contour, .. } = &mut experiment {
            if let Some(tp) = overrides.contour_theta_prime {
                contour.theta_prime = Some(tp);
            }
            if let Some(n) = overrides.nodes {
                contour.nodes = Some(n);
            }
        }
        if let Experiment::Holomorphy { nodes, .. } = &mut experiment {
            if let Some(n) = overrides.nodes {
                *nodes = Some(n);
            }
        }
        let name = common.name.unwrap_or_else(|| stem.to_string());
        if name.is_empty() || name.contains(['/', '\\']) {
            bail!("name must be a nonempty file stem");
        }
        Ok(Self {
            name,
            tol,
            seed: overrides.seed.or(common.seed).unwrap_or(DEFAULT_SEED),
            out_dir: overrides.out_dir.clone().or(common.out_dir).unwrap_or_else(|| PathBuf::from("sectorial-out")),
            base_dir,
            experiment,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inputs::Example45Input;

    fn parse(text: &str, o: &Overrides) -> anyhow::Result<ExperimentConfig> {
        ExperimentConfig::parse(text, "cfg", PathBuf::new(), o)
    }

    #[test]
    fn flags_override_file_fields() {
        let text = r#"{"kind": "semigroup", "seed": 3, "tolerance": {"psd_tol": 1e-7},
                       "relation": {"operator": [[1]]}, "times": [1], "contour": {"theta_prime": 1.0, "nodes": 8}}"#;
        let cfg = parse(text, &Overrides::default()).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.tol.psd_tol, 1e-7);
        let o = Overrides { tol: Some(1e-6), seed: Some(9), contour_theta_prime: Some(1.2), nodes: Some(20), ..Default::default() };
        let cfg = parse(text, &o).unwrap();
        assert_eq!((cfg.seed, cfg.tol.rank_tol, cfg.tol.conv_tol), (9, 1e-6, 1e-6));
        match cfg.experiment {
            Experiment::Semigroup { contour, .. } => assert_eq!((contour.theta_prime, contour.nodes), (Some(1.2), Some(20))),
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn schema_errors() {
        let o = Overrides::default();
        assert!(parse(r#"{"form": {"matrix": [[1]]}}"#, &o).is_err());
        assert!(parse(r#"{"kind": "check-sectorial"}"#, &o).is_err());
        assert!(parse(r#"{"kind": "check-sectorial", "form": {"matrix": [[1]]}, "extra": 1}"#, &o).is_err());
        assert!(parse(r#"{"kind": "bogus"}"#, &o).is_err());
        assert!(parse(r#"{"kind": "order", "a": {"matrix": [[1]]}, "b": {"matrix": [[1]]}, "tolerance": {"rank_tol": -1}}"#, &o).is_err());
        assert!(parse(r#"[1, 2]"#, &o).is_err());
    }

    #[test]
    fn example45_grid_from_n_max() {
        let cfg = parse(r#"{"kind": "example45", "grid_size": 2, "n_max": 5}"#, &Overrides::default()).unwrap();
        match cfg.experiment {
            Experiment::Example45 { grid_size, n_values, n_max, .. } => {
                let grid = Example45Input { grid_size, n_values, n_max };
                assert_eq!(grid.config().unwrap().n_values, vec![1, 2, 3, 4, 5]);
            }
            _ => panic!("wrong kind"),
        }
    }
}
