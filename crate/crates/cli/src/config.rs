//! Run configuration: built-in defaults, then a TOML file, then flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use hybridcf::candidates::CandidateConfig;
use hybridcf::explain::{Method, TargetSelection};
use hybridcf::gnn::TrainConfig;
use hybridcf::optimizer::OptimizerConfig;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    BaShapes,
    TreeCycles,
    LoanDecision,
    /// Read `edges.txt`, `features.txt`, `labels.txt` from `dataset.path`.
    Files,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSpec {
    pub generator: Generator,
    /// Generator seed; each run seed is used when unset.
    pub seed: Option<u64>,
    pub base_nodes: usize,
    pub attach: usize,
    pub motifs: usize,
    pub tree_depth: usize,
    pub cycles: usize,
    pub cycle_len: usize,
    pub applicants: usize,
    pub train_fraction: f64,
    pub path: Option<PathBuf>,
    pub num_classes: Option<usize>,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec {
            generator: Generator::BaShapes,
            seed: None,
            base_nodes: 300,
            attach: 5,
            motifs: 80,
            tree_depth: 8,
            cycles: 80,
            cycle_len: 6,
            applicants: 500,
            train_fraction: 0.8,
            path: None,
            num_classes: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSpec {
    /// Hidden widths; one entry gives a 2-layer GCN.
    pub hidden: Vec<usize>,
    /// Pre-trained weights; training is skipped when set.
    pub path: Option<PathBuf>,
    pub train: TrainConfig,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            hidden: vec![20],
            path: None,
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplainSpec {
    pub methods: Vec<Method>,
    pub prune: bool,
}

impl Default for ExplainSpec {
    fn default() -> Self {
        ExplainSpec {
            methods: vec![Method::Hybrid],
            prune: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub jobs: usize,
    pub dataset: DatasetSpec,
    pub model: ModelSpec,
    pub explain: ExplainSpec,
    pub optimizer: OptimizerConfig,
    pub candidates: CandidateConfig,
    pub targets: TargetSelection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seeds: vec![102, 103, 104],
            out: PathBuf::from("runs/latest"),
            jobs: 1,
            dataset: DatasetSpec::default(),
            model: ModelSpec::default(),
            explain: ExplainSpec::default(),
            optimizer: OptimizerConfig::default(),
            candidates: CandidateConfig::default(),
            targets: TargetSelection::AllCorrect,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.seeds.is_empty() {
            return Err(CliError::Config("seeds must be nonempty".into()));
        }
        if self.explain.methods.is_empty() {
            return Err(CliError::Config("at least one method is required".into()));
        }
        if self.dataset.generator == Generator::Files {
            let dir = self.dataset.path.as_ref().ok_or_else(|| {
                CliError::Config("dataset.path is required with generator = \"files\"".into())
            })?;
            for f in ["edges.txt", "labels.txt"] {
                if !dir.join(f).is_file() {
                    return Err(CliError::Config(format!(
                        "missing {}",
                        dir.join(f).display()
                    )));
                }
            }
        }
        if let Some(p) = &self.model.path {
            if !p.is_file() {
                return Err(CliError::Config(format!(
                    "model file {} not found",
                    p.display()
                )));
            }
        }
        self.optimizer
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Parses `correct`, `misclassified`, `ids:1,2,3` or `sample:N[:SEED]`.
pub fn parse_targets(s: &str) -> Result<TargetSelection, String> {
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    match kind {
        "correct" | "all-correct" if rest.is_empty() => Ok(TargetSelection::AllCorrect),
        "misclassified" if rest.is_empty() => Ok(TargetSelection::Misclassified),
        "ids" => rest
            .split(',')
            .map(|x| x.trim().parse().map_err(|_| format!("bad node id {x:?}")))
            .collect::<Result<Vec<_>, _>>()
            .map(|ids| TargetSelection::Ids { ids }),
        "sample" => {
            let (n, seed) = rest.split_once(':').unwrap_or((rest, "0"));
            Ok(TargetSelection::Sampled {
                n: n.parse().map_err(|_| format!("bad sample size {n:?}"))?,
                seed: seed
                    .parse()
                    .map_err(|_| format!("bad sample seed {seed:?}"))?,
            })
        }
        _ => Err(format!("unknown target selection {s:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_overrides_defaults() {
        let cfg: RunConfig = toml::from_str(
            "seeds = [7]\n[optimizer]\nkappa = 3\n[dataset]\nmotifs = 10\n[targets]\nkind = \"ids\"\nids = [1, 2]\n",
        )
        .unwrap();
        assert_eq!(cfg.seeds, vec![7]);
        assert_eq!(cfg.optimizer.kappa, 3);
        assert_eq!(cfg.optimizer.lambda_pred, 1.5);
        assert_eq!(cfg.dataset.motifs, 10);
        assert_eq!(cfg.dataset.base_nodes, 300);
        assert_eq!(cfg.targets, TargetSelection::Ids { ids: vec![1, 2] });
        let back: RunConfig = toml::from_str(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("[dataset]\nmotif = 3\n").is_err());
    }

    #[test]
    fn target_strings() {
        assert_eq!(
            parse_targets("correct").unwrap(),
            TargetSelection::AllCorrect
        );
        assert_eq!(
            parse_targets("ids:3,4").unwrap(),
            TargetSelection::Ids { ids: vec![3, 4] }
        );
        assert_eq!(
            parse_targets("sample:10:5").unwrap(),
            TargetSelection::Sampled { n: 10, seed: 5 }
        );
        assert!(parse_targets("ids:x").is_err());
        assert!(parse_targets("everything").is_err());
    }
}
