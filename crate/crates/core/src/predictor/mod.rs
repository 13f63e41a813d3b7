//! Next-event predictors behind one interface: the recurrent network and an
//! order-k Markov baseline, plus autoregressive log simulation.

mod markov;
mod simulate;
mod train;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eventlog::Vocabulary;
use crate::neural::{Mode, NetworkParams};

pub use markov::{full_context_order, markov_baseline, MarkovModel};
pub use simulate::{simulate_log, SimulationReport};
pub use train::{train, train_observed};

/// Values allowed by the hyperparameter grid.
pub const GRID_N_LAYERS: [usize; 2] = [1, 2];
pub const GRID_HIDDEN: [usize; 3] = [16, 32, 64];
pub const GRID_L1_L2: [f64; 5] = [0.0, 1e-5, 1e-4, 1e-3, 1e-2];
pub const GRID_DROPOUT: [f64; 3] = [0.0, 0.2, 0.4];

fn default_window() -> usize {
    10
}
fn default_batch_size() -> usize {
    128
}
fn default_lr_start() -> f64 {
    0.005
}
fn default_lr_patience() -> usize {
    10
}
fn default_stop_patience() -> usize {
    30
}
fn default_max_epochs() -> usize {
    600
}
fn default_lr_decay() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictorConfig {
    pub use_embedding: bool,
    pub n_layers: usize,
    pub hidden_size: usize,
    /// Shared coefficient for the L1 and the L2 penalty.
    pub l1_l2: f64,
    pub dropout: f64,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_lr_start")]
    pub lr_start: f64,
    #[serde(default = "default_lr_patience")]
    pub lr_patience: usize,
    #[serde(default = "default_stop_patience")]
    pub stop_patience: usize,
    #[serde(default = "default_max_epochs")]
    pub max_epochs: usize,
    #[serde(default = "default_lr_decay")]
    pub lr_decay: f64,
    #[serde(default)]
    pub checkpoint: CheckpointRule,
    #[serde(default)]
    pub seed: u64,
}

/// Which epoch's parameters training returns. Early stopping and the
/// learning-rate schedule always follow validation accuracy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckpointRule {
    /// Lowest validation crossentropy.
    #[default]
    ValLoss,
    /// Highest validation accuracy, ties broken by validation loss.
    ValAccuracy,
    /// The final epoch.
    Last,
}

impl Default for PredictorConfig {
    /// One LSTM layer of 32 units, one-hot input, l1/l2 0.001, dropout 0.4.
    fn default() -> Self {
        PredictorConfig {
            use_embedding: false,
            n_layers: 1,
            hidden_size: 32,
            l1_l2: 1e-3,
            dropout: 0.4,
            window: default_window(),
            batch_size: default_batch_size(),
            lr_start: default_lr_start(),
            lr_patience: default_lr_patience(),
            stop_patience: default_stop_patience(),
            max_epochs: default_max_epochs(),
            lr_decay: default_lr_decay(),
            checkpoint: CheckpointRule::default(),
            seed: 0,
        }
    }
}

impl PredictorConfig {
    /// Structural sanity; any positive sizes are accepted.
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(format!("predictor {what}")));
        if self.n_layers == 0 || self.hidden_size == 0 {
            return bad("needs at least one layer of positive size");
        }
        if !(self.l1_l2 >= 0.0 && self.l1_l2.is_finite()) {
            return bad("l1_l2 must be non-negative");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must lie in [0, 1)");
        }
        if self.window == 0 || self.batch_size == 0 || self.max_epochs == 0 {
            return bad("window, batch_size and max_epochs must be positive");
        }
        if !(self.lr_start > 0.0 && self.lr_start.is_finite()) {
            return bad("lr_start must be positive");
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return bad("lr_decay must lie in (0, 1]");
        }
        if self.lr_patience == 0 || self.stop_patience == 0 {
            return bad("patience values must be positive");
        }
        Ok(())
    }

    /// Checks the five grid dimensions against their allowed values.
    pub fn validate_grid_domain(&self) -> Result<()> {
        self.validate()?;
        let ok = GRID_N_LAYERS.contains(&self.n_layers)
            && GRID_HIDDEN.contains(&self.hidden_size)
            && GRID_L1_L2.contains(&self.l1_l2)
            && GRID_DROPOUT.contains(&self.dropout);
        if !ok {
            return Err(Error::InvalidConfig(format!(
                "configuration {} is outside the hyperparameter grid",
                self.key()
            )));
        }
        Ok(())
    }

    /// Compact, sortable description of the grid dimensions.
    pub fn key(&self) -> String {
        format!(
            "emb={} layers={} hidden={:02} l1l2={:e} dropout={:.1}",
            u8::from(self.use_embedding),
            self.n_layers,
            self.hidden_size,
            self.l1_l2,
            self.dropout
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean regularized training loss over the epoch's batches.
    pub loss: f64,
    pub val_accuracy: f64,
    /// Mean validation crossentropy.
    pub val_loss: f64,
    /// Learning rate used during the epoch.
    pub lr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
#[allow(clippy::large_enum_variant)]
pub enum PredictorModel {
    Recurrent {
        config: PredictorConfig,
        params: NetworkParams,
        history: Vec<EpochRecord>,
        best_epoch: usize,
    },
    Markov(MarkovModel),
}

/// A fitted predictor together with the vocabulary its token indices refer to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedPredictor {
    pub vocabulary: Vocabulary,
    pub model: PredictorModel,
}

impl TrainedPredictor {
    pub fn history(&self) -> &[EpochRecord] {
        match &self.model {
            PredictorModel::Recurrent { history, .. } => history,
            PredictorModel::Markov(_) => &[],
        }
    }

    /// Context key under which [`Self::distribution`] is a pure function.
    pub(crate) fn context(&self, history: &[usize]) -> Vec<usize> {
        match &self.model {
            PredictorModel::Recurrent { config, .. } => {
                self.vocabulary.window(history, config.window)
            }
            PredictorModel::Markov(m) => history[history.len().saturating_sub(m.order)..].to_vec(),
        }
    }

    /// Distribution over all tokens after a BOS-led token history, BOS and
    /// PAD masked out and the rest renormalized.
    pub(crate) fn distribution(&self, history: &[usize]) -> Result<Vec<f64>> {
        let mut p = match &self.model {
            PredictorModel::Recurrent { params, .. } => {
                params.forward(&self.context(history), Mode::Infer, 0)?
            }
            PredictorModel::Markov(m) => m.distribution(history, self.vocabulary.len()),
        };
        p[self.vocabulary.bos()] = 0.0;
        p[self.vocabulary.pad()] = 0.0;
        let total: f64 = p.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::NonFiniteLoss);
        }
        p.iter_mut().for_each(|x| *x /= total);
        Ok(p)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let p: TrainedPredictor = serde_json::from_str(&text)?;
        if let PredictorModel::Recurrent { params, .. } = &p.model {
            if params.shape().vocab != p.vocabulary.len() {
                return Err(Error::Shape(
                    "checkpoint vocabulary does not match parameters".into(),
                ));
            }
        }
        Ok(p)
    }
}

/// Probability of every token (activities, BOS, EOS, PAD order) following
/// the activity sequence `prefix`; BOS and PAD are always 0.
pub fn predict_next(p: &TrainedPredictor, prefix: &[String]) -> Result<Vec<f64>> {
    let history = p.vocabulary.encode_history(prefix)?;
    p.distribution(&history)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_inside_grid() {
        PredictorConfig::default().validate_grid_domain().unwrap();
        let off = PredictorConfig {
            hidden_size: 8,
            ..PredictorConfig::default()
        };
        off.validate().unwrap();
        assert!(off.validate_grid_domain().is_err());
    }

    #[test]
    fn config_toml_defaults() {
        let c: PredictorConfig = toml::from_str(
            "use_embedding = true\nn_layers = 2\nhidden_size = 16\nl1_l2 = 0.0001\ndropout = 0.2\n",
        )
        .unwrap();
        assert_eq!(c.window, 10);
        assert_eq!(c.batch_size, 128);
        assert_eq!(c.lr_start, 0.005);
        assert_eq!(
            (c.lr_patience, c.stop_patience, c.max_epochs),
            (10, 30, 600)
        );

        let c: PredictorConfig = toml::from_str("hidden_size = 64\n").unwrap();
        assert_eq!(
            c,
            PredictorConfig {
                hidden_size: 64,
                ..PredictorConfig::default()
            }
        );
        assert!(toml::from_str::<PredictorConfig>("hidden = 64\n").is_err());
    }

    #[test]
    fn keys_sort_by_dimension() {
        let a = PredictorConfig {
            l1_l2: 0.0,
            ..PredictorConfig::default()
        };
        let b = PredictorConfig {
            l1_l2: 1e-2,
            ..PredictorConfig::default()
        };
        assert_ne!(a.key(), b.key());
    }
}
