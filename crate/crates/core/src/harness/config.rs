use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::benchmarks::{build_model, ModelId};
use crate::error::{Error, Result};
use crate::petrinet::PetriNet;
use crate::predictor::{PredictorConfig, GRID_DROPOUT, GRID_HIDDEN, GRID_L1_L2, GRID_N_LAYERS};

/// Environment variable that, when set, is prepended to relative output
/// directories.
pub const OUTPUT_ROOT_ENV: &str = "PROCBENCH_OUTPUT_ROOT";

pub const DEFAULT_N_TRACES: usize = 12_000;
pub const DEFAULT_PLAYOUT_VISIT_BOUND: usize = 1_000;
pub const DEFAULT_VALIDATION_FRACTION: f64 = 0.2;
pub const CYCLIC_SIM_MAX_LEN: usize = 100;

fn default_n_traces() -> usize {
    DEFAULT_N_TRACES
}
fn default_playout_visit_bound() -> usize {
    DEFAULT_PLAYOUT_VISIT_BOUND
}
fn default_validation_fraction() -> f64 {
    DEFAULT_VALIDATION_FRACTION
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SplitMode {
    /// One fold per eligible variant.
    LovocvExhaustive,
    /// `k` single-variant folds drawn from the eligible variants.
    LovocvKFolds { k: usize },
    /// `repeats` folds, each holding out `fraction` of the eligible variants.
    LeaveFraction { fraction: f64, repeats: usize },
}

impl SplitMode {
    /// Short label used in aggregate rows and tables.
    pub fn setting(&self) -> String {
        match self {
            SplitMode::LovocvExhaustive => "lovocv".into(),
            SplitMode::LovocvKFolds { k } => format!("lovocv-k{k}"),
            SplitMode::LeaveFraction { fraction, repeats } => {
                format!("leave-{}%-x{repeats}", fraction * 100.0)
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    #[serde(default)]
    pub playout: u64,
    #[serde(default)]
    pub split: u64,
    #[serde(default)]
    pub training: u64,
    #[serde(default)]
    pub simulation: u64,
}

/// Order of the Markov baseline: a number or `"full"` (whole history).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MarkovOrder {
    Fixed(usize),
    Full(FullContext),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FullContext {
    Full,
}

/// Grid over the five searched dimensions. Missing dimensions take every
/// allowed value; `base` supplies the remaining training settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "all_embedding")]
    pub use_embedding: Vec<bool>,
    #[serde(default = "all_layers")]
    pub n_layers: Vec<usize>,
    #[serde(default = "all_hidden")]
    pub hidden_size: Vec<usize>,
    #[serde(default = "all_l1_l2")]
    pub l1_l2: Vec<f64>,
    #[serde(default = "all_dropout")]
    pub dropout: Vec<f64>,
    #[serde(default)]
    pub base: Option<PredictorConfig>,
}

fn all_embedding() -> Vec<bool> {
    vec![false, true]
}
fn all_layers() -> Vec<usize> {
    GRID_N_LAYERS.to_vec()
}
fn all_hidden() -> Vec<usize> {
    GRID_HIDDEN.to_vec()
}
fn all_l1_l2() -> Vec<f64> {
    GRID_L1_L2.to_vec()
}
fn all_dropout() -> Vec<f64> {
    GRID_DROPOUT.to_vec()
}

impl Default for GridSpec {
    /// The full 2·2·3·5·3 grid.
    fn default() -> Self {
        GridSpec {
            use_embedding: all_embedding(),
            n_layers: all_layers(),
            hidden_size: all_hidden(),
            l1_l2: all_l1_l2(),
            dropout: all_dropout(),
            base: None,
        }
    }
}

impl GridSpec {
    /// Cartesian product in declaration order (embedding outermost).
    pub fn configs(&self) -> Vec<PredictorConfig> {
        let base = self.base.clone().unwrap_or_default();
        let mut out = Vec::new();
        for &use_embedding in &self.use_embedding {
            for &n_layers in &self.n_layers {
                for &hidden_size in &self.hidden_size {
                    for &l1_l2 in &self.l1_l2 {
                        for &dropout in &self.dropout {
                            out.push(PredictorConfig {
                                use_embedding,
                                n_layers,
                                hidden_size,
                                l1_l2,
                                dropout,
                                ..base.clone()
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let configs = self.configs();
        if configs.is_empty() {
            return Err(Error::InvalidConfig("grid is empty".into()));
        }
        configs
            .iter()
            .try_for_each(PredictorConfig::validate_grid_domain)
    }
}

/// One experiment, read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub net_file: Option<PathBuf>,
    #[serde(default = "default_n_traces")]
    pub n_traces: usize,
    pub split: SplitMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predictor: Option<PredictorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    /// Use the count-based Markov predictor instead of the network.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub markov_order: Option<MarkovOrder>,
    #[serde(default)]
    pub seeds: Seeds,
    pub output_dir: PathBuf,
    /// Per-run marking visit cap during play-out.
    #[serde(default = "default_playout_visit_bound")]
    pub playout_visit_bound: usize,
    /// Restricts fold variants to those enumerable under this visit bound.
    /// Defaults to 3 for the looped benchmark model and to none otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis_visit_bound: Option<usize>,
    /// Simulation length cap; defaults to 100 for looped models and to twice
    /// the longest training trace otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim_max_len: Option<usize>,
    #[serde(default = "default_validation_fraction")]
    pub validation_fraction: f64,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        // Net files are resolved relative to the config file.
        if let (Some(net), Some(dir)) = (&cfg.net_file, path.parent()) {
            if net.is_relative() {
                cfg.net_file = Some(dir.join(net));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.model.is_some() == self.net_file.is_some() {
            return bad("exactly one of `model` and `net_file` must be given".into());
        }
        let sources = [
            self.predictor.is_some(),
            self.grid.is_some(),
            self.markov_order.is_some(),
        ];
        if sources.iter().filter(|&&b| b).count() != 1 {
            return bad(
                "exactly one of `predictor`, `grid` and `markov_order` must be given".into(),
            );
        }
        if self.n_traces < 2 {
            return bad(format!(
                "n_traces must be at least 2, got {}",
                self.n_traces
            ));
        }
        if self.playout_visit_bound == 0 || self.analysis_visit_bound == Some(0) {
            return bad("visit bounds must be positive".into());
        }
        if self.sim_max_len == Some(0) {
            return bad("sim_max_len must be positive".into());
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return bad(format!(
                "validation_fraction {} outside (0, 1)",
                self.validation_fraction
            ));
        }
        match &self.split {
            SplitMode::LovocvKFolds { k } if *k == 0 => return bad("k must be positive".into()),
            SplitMode::LeaveFraction { fraction, repeats }
                if *repeats == 0 || !(0.0..1.0).contains(fraction) || *fraction == 0.0 =>
            {
                return bad(format!("invalid leave-fraction ({fraction}, {repeats})"));
            }
            _ => {}
        }
        if let Some(p) = &self.predictor {
            p.validate()?;
        }
        if let Some(g) = &self.grid {
            g.validate()?;
        }
        if self.markov_order == Some(MarkovOrder::Fixed(0)) {
            return bad("markov_order must be positive or \"full\"".into());
        }
        Ok(())
    }

    pub fn net(&self) -> Result<PetriNet> {
        match (&self.model, &self.net_file) {
            (Some(id), _) => Ok(build_model(*id)),
            (None, Some(path)) => PetriNet::load(path),
            (None, None) => Err(Error::InvalidConfig("no model source".into())),
        }
    }

    /// Name used in the `model` column.
    pub fn model_name(&self) -> String {
        match (&self.model, &self.net_file) {
            (Some(id), _) => id.to_string(),
            (None, Some(path)) => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "net".into()),
            (None, None) => "net".into(),
        }
    }

    pub fn effective_analysis_bound(&self) -> Option<usize> {
        self.analysis_visit_bound.or_else(|| {
            self.model
                .filter(|id| id.is_cyclic())
                .map(|id| id.analysis_visit_bound())
        })
    }

    /// Output directory after applying [`OUTPUT_ROOT_ENV`].
    pub fn resolved_output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_ROOT_ENV) {
            Some(root) if self.output_dir.is_relative() => {
                PathBuf::from(root).join(&self.output_dir)
            }
            _ => self.output_dir.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
model = 2
n_traces = 2000
output_dir = "runs/model2"
split = { mode = "lovocv-k-folds", k = 8 }

[predictor]
use_embedding = false
n_layers = 1
hidden_size = 32
l1_l2 = 0.001
dropout = 0.4

[seeds]
playout = 1
split = 2
"#;

    #[test]
    fn parses_example() {
        let c = ExperimentConfig::from_toml(EXAMPLE).unwrap();
        assert_eq!(c.model, Some(ModelId::new(2).unwrap()));
        assert_eq!(c.split, SplitMode::LovocvKFolds { k: 8 });
        assert_eq!(c.predictor.as_ref().unwrap().window, 10);
        assert_eq!(c.seeds.training, 0);
        assert_eq!(c.playout_visit_bound, DEFAULT_PLAYOUT_VISIT_BOUND);
        let again = ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn split_modes_parse() {
        for (text, mode) in [
            (
                r#"{ mode = "lovocv-exhaustive" }"#,
                SplitMode::LovocvExhaustive,
            ),
            (
                r#"{ mode = "leave-fraction", fraction = 0.2, repeats = 3 }"#,
                SplitMode::LeaveFraction {
                    fraction: 0.2,
                    repeats: 3,
                },
            ),
        ] {
            let c = ExperimentConfig::from_toml(
                &EXAMPLE.replace(r#"{ mode = "lovocv-k-folds", k = 8 }"#, text),
            )
            .unwrap();
            assert_eq!(c.split, mode);
        }
    }

    #[test]
    fn rejects_ambiguous_sources() {
        let both = EXAMPLE.replace("model = 2", "model = 2\nnet_file = \"x.json\"");
        assert!(ExperimentConfig::from_toml(&both).is_err());
        let two = format!("markov_order = \"full\"\n{EXAMPLE}");
        assert!(ExperimentConfig::from_toml(&two).is_err());
        assert!(ExperimentConfig::from_toml(&EXAMPLE.replace("n_traces", "n_trace")).is_err());
    }

    #[test]
    fn markov_order_forms() {
        let base = EXAMPLE.split("[predictor]").next().unwrap();
        let c = ExperimentConfig::from_toml(&format!("markov_order = \"full\"\n{base}")).unwrap();
        assert_eq!(c.markov_order, Some(MarkovOrder::Full(FullContext::Full)));
        let c = ExperimentConfig::from_toml(&format!("markov_order = 3\n{base}")).unwrap();
        assert_eq!(c.markov_order, Some(MarkovOrder::Fixed(3)));
    }

    #[test]
    fn full_grid_has_180_points() {
        let g = GridSpec::default();
        g.validate().unwrap();
        assert_eq!(g.configs().len(), 180);
        let off = GridSpec {
            hidden_size: vec![48],
            ..GridSpec::default()
        };
        assert!(off.validate().is_err());
    }

    #[test]
    fn settings() {
        assert_eq!(SplitMode::LovocvKFolds { k: 8 }.setting(), "lovocv-k8");
        assert_eq!(
            SplitMode::LeaveFraction {
                fraction: 0.2,
                repeats: 3
            }
            .setting(),
            "leave-20%-x3"
        );
    }
}
