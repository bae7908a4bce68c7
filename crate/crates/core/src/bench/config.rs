use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::ansatz::{AnsatzSpec, Entangler};
use crate::cluster_tree::TreeConfig;
use crate::error::{Error, Result};
use crate::optimizer::OptimizerConfig;
use crate::transfer::{StrategyKind, TransferStrategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    WarmStartBench,
    EstimatorBench,
    TreeBench,
    DistanceStudy,
    SingleOptimize,
}

impl Experiment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::WarmStartBench => "warm_start_bench",
            Experiment::EstimatorBench => "estimator_bench",
            Experiment::TreeBench => "tree_bench",
            Experiment::DistanceStudy => "distance_study",
            Experiment::SingleOptimize => "single_optimize",
        }
    }
}

/// Number of ansatz layers as a function of the qubit count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LayerRule {
    /// `L = n`.
    #[default]
    EqualsQubits,
    Fixed(usize),
}

impl LayerRule {
    pub fn layers(&self, n: usize) -> usize {
        match self {
            LayerRule::EqualsQubits => n,
            LayerRule::Fixed(l) => *l,
        }
    }
}

impl fmt::Display for LayerRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LayerRule::EqualsQubits => f.write_str("n"),
            LayerRule::Fixed(l) => write!(f, "{l}"),
        }
    }
}

impl std::str::FromStr for LayerRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "n" | "L=n" | "L = n" => Ok(LayerRule::EqualsQubits),
            other => other.parse::<usize>().map(LayerRule::Fixed).map_err(|_| {
                Error::InvalidConfig(format!("layers must be \"n\" or an integer, got '{other}'"))
            }),
        }
    }
}

impl Serialize for LayerRule {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            LayerRule::EqualsQubits => s.serialize_str("n"),
            LayerRule::Fixed(l) => s.serialize_u64(*l as u64),
        }
    }
}

impl<'de> Deserialize<'de> for LayerRule {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Count(usize),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Count(l) => Ok(LayerRule::Fixed(l)),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistanceConfig {
    pub k_values: Vec<usize>,
    pub trials: usize,
    /// Fresh query targets per trial (the B set averaged over).
    pub queries: usize,
}

impl Default for DistanceConfig {
    fn default() -> Self {
        Self {
            k_values: vec![1, 2, 5, 10, 20, 50, 100, 200],
            trials: 100,
            queries: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n_values: Vec<usize>,
    pub layers: LayerRule,
    pub entangler: Entangler,
    /// Size of the pre-optimized set A.
    pub k_a: usize,
    /// Number of evaluation targets B.
    pub k_b: usize,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub optimizer: OptimizerConfig,
    pub strategy: TransferStrategy,
    pub tree: TreeConfig,
    pub distance: DistanceConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::SingleOptimize,
            n_values: vec![2],
            layers: LayerRule::EqualsQubits,
            entangler: Entangler::default(),
            k_a: 50,
            k_b: 20,
            master_seed: 0,
            output_dir: PathBuf::from("out"),
            optimizer: OptimizerConfig::default(),
            strategy: TransferStrategy::default(),
            tree: TreeConfig::default(),
            distance: DistanceConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Defaults appropriate for `experiment`.
    pub fn for_experiment(experiment: Experiment) -> Self {
        let mut config = Self {
            experiment,
            ..Self::default()
        };
        match experiment {
            Experiment::EstimatorBench => config.k_b = 50,
            Experiment::TreeBench => config.n_values = vec![3],
            Experiment::DistanceStudy => config.n_values = (2..=8).collect(),
            _ => {}
        }
        config
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_config(path)?;
        Self::from_toml(&text)
    }

    /// Parses `text` on top of [`Self::for_experiment`] defaults. A file that
    /// names a different experiment is rejected.
    pub fn from_toml_for(experiment: Experiment, text: &str) -> Result<Self> {
        let cfg_err = |e: &dyn fmt::Display| Error::InvalidConfig(e.to_string());
        let file: toml::Table = text.parse().map_err(|e| cfg_err(&e))?;
        if let Some(named) = file.get("experiment") {
            if named.as_str() != Some(experiment.as_str()) {
                return Err(Error::InvalidConfig(format!(
                    "config names experiment {named}, but {} was requested",
                    experiment.as_str()
                )));
            }
        }
        let mut merged =
            toml::Table::try_from(Self::for_experiment(experiment)).map_err(|e| cfg_err(&e))?;
        overlay(&mut merged, file);
        merged.try_into().map_err(|e| cfg_err(&e))
    }

    pub fn load_for(experiment: Experiment, path: &Path) -> Result<Self> {
        let text = read_config(path)?;
        Self::from_toml_for(experiment, &text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn ansatz_for(&self, n: usize) -> Result<AnsatzSpec> {
        AnsatzSpec::with_entangler(n, self.layers.layers(n), self.entangler)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n_values.is_empty() {
            return bad("n_values must not be empty".into());
        }
        let mut sorted = self.n_values.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.n_values.len() {
            return bad("n_values must not repeat".into());
        }
        if self.experiment == Experiment::DistanceStudy {
            if self
                .n_values
                .iter()
                .any(|&n| n == 0 || n > crate::statevector::MAX_QUBITS)
            {
                return bad("distance study qubit counts must lie in 1..=24".into());
            }
            if self.distance.trials == 0 || self.distance.queries == 0 {
                return bad("trials and queries must be >= 1".into());
            }
            if self.distance.k_values.is_empty() || self.distance.k_values.contains(&0) {
                return bad("distance k_values must be non-empty and >= 1".into());
            }
            return Ok(());
        }
        self.optimizer.validate()?;
        self.strategy.validate()?;
        for &n in &self.n_values {
            self.ansatz_for(n)?;
        }
        match self.experiment {
            Experiment::WarmStartBench => {
                if self.k_a < 1 || self.k_b < 1 {
                    return bad(format!(
                        "warm-start bench needs k_a >= 1 and k_b >= 1 (got {}, {})",
                        self.k_a, self.k_b
                    ));
                }
            }
            Experiment::EstimatorBench => {
                if self.k_b < 2 {
                    return bad(format!("estimator bench needs k_b >= 2 (got {})", self.k_b));
                }
                if self.strategy.kind != StrategyKind::Estimator {
                    return bad("estimator bench needs strategy.kind = estimator".into());
                }
            }
            Experiment::TreeBench => {
                if self.k_b < 2 {
                    return bad(format!("tree bench needs k_b >= 2 (got {})", self.k_b));
                }
                self.tree.validate()?;
            }
            Experiment::SingleOptimize => {
                if self.k_b < 1 {
                    return bad("single optimize needs k_b >= 1".into());
                }
            }
            Experiment::DistanceStudy => unreachable!(),
        }
        Ok(())
    }
}

fn read_config(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read config {}: {e}", path.display())))
}

fn overlay(base: &mut toml::Table, top: toml::Table) {
    for (key, value) in top {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => overlay(b, t),
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
}
