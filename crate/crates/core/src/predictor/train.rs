use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::RngCore;

use super::{CheckpointRule, EpochRecord, PredictorConfig, PredictorModel, TrainedPredictor};
use crate::error::{Error, Result};
use crate::eventlog::{PrefixSample, Vocabulary};
use crate::neural::{
    argmax, embedding_dim_for, NetShape, NetworkParams, OptimizerState, RegularizationSpec,
};
use crate::rng;

const STREAM_INIT: u64 = 1;
const STREAM_SHUFFLE: u64 = 2;
const STREAM_DROPOUT: u64 = 3;

/// Validation windows collapsed to distinct prefixes with per-target counts.
struct ValidationSet {
    prefixes: Vec<Vec<usize>>,
    targets: Vec<Vec<(usize, usize)>>,
    total: usize,
}

impl ValidationSet {
    fn new(samples: &[PrefixSample]) -> Self {
        let mut index: HashMap<&[usize], usize> = HashMap::new();
        let mut prefixes = Vec::new();
        let mut targets: Vec<BTreeMap<usize, usize>> = Vec::new();
        for s in samples {
            let i = *index.entry(&s.prefix).or_insert_with(|| {
                prefixes.push(s.prefix.clone());
                targets.push(BTreeMap::new());
                prefixes.len() - 1
            });
            *targets[i].entry(s.target).or_default() += 1;
        }
        ValidationSet {
            prefixes,
            targets: targets
                .into_iter()
                .map(|m| m.into_iter().collect())
                .collect(),
            total: samples.len(),
        }
    }

    /// Argmax accuracy and mean crossentropy.
    fn score(&self, params: &NetworkParams) -> Result<(f64, f64)> {
        let outputs = params.forward_batch(&self.prefixes)?;
        let mut hits = 0usize;
        let mut crossentropy = 0.0;
        for (p, targets) in outputs.iter().zip(&self.targets) {
            let best = argmax(p);
            for &(t, c) in targets {
                if t == best {
                    hits += c;
                }
                crossentropy -= c as f64 * p[t].ln();
            }
        }
        let n = self.total as f64;
        Ok((hits as f64 / n, crossentropy / n))
    }
}

pub fn train(
    config: &PredictorConfig,
    train_samples: &[PrefixSample],
    val_samples: &[PrefixSample],
    vocab: &Vocabulary,
) -> Result<TrainedPredictor> {
    train_observed(config, train_samples, val_samples, vocab, |_| {})
}

/// [`train`] with a callback after every epoch.
pub fn train_observed(
    config: &PredictorConfig,
    train_samples: &[PrefixSample],
    val_samples: &[PrefixSample],
    vocab: &Vocabulary,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainedPredictor> {
    config.validate()?;
    if train_samples.is_empty() || val_samples.is_empty() {
        return Err(Error::InvalidConfig(
            "training and validation samples must be non-empty".into(),
        ));
    }
    let shape = NetShape {
        vocab: vocab.len(),
        pad: vocab.pad(),
        embedding_dim: config
            .use_embedding
            .then(|| embedding_dim_for(vocab.n_activities())),
        hidden: config.hidden_size,
        layers: config.n_layers,
    };
    let reg = RegularizationSpec {
        l1: config.l1_l2,
        l2: config.l1_l2,
        dropout: config.dropout,
    };
    let mut params = NetworkParams::init(shape, rng::mix(config.seed, STREAM_INIT))?;
    let mut opt = OptimizerState::new(params.len(), config.lr_start)?;
    let mut shuffle_rng = rng::seeded(rng::mix(config.seed, STREAM_SHUFFLE));
    let mut dropout_rng = rng::seeded(rng::mix(config.seed, STREAM_DROPOUT));
    let val = ValidationSet::new(val_samples);

    let mut order: Vec<usize> = (0..train_samples.len()).collect();
    let mut batch: Vec<PrefixSample> = Vec::with_capacity(config.batch_size);
    let mut history = Vec::new();
    let mut best_accuracy: Option<f64> = None;
    // (accuracy, validation loss, epoch, parameters)
    let mut kept: Option<(f64, f64, usize, NetworkParams)> = None;
    let mut since_best = 0usize;
    let mut since_decay = 0usize;

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut shuffle_rng);
        let lr = opt.lr;
        let mut weighted_loss = 0.0;
        for chunk in order.chunks(config.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| train_samples[i].clone()));
            let (loss, grads) = params
                .loss_and_gradients(&batch, &reg, dropout_rng.next_u64())
                .map_err(|e| match e {
                    Error::NonFiniteLoss => Error::Diverged { epoch },
                    e => e,
                })?;
            weighted_loss += loss * chunk.len() as f64;
            opt.step(params.values_mut(), &grads)?;
        }
        if params.values().iter().any(|w| !w.is_finite()) {
            return Err(Error::Diverged { epoch });
        }
        let (val_accuracy, val_loss) = val.score(&params)?;
        let record = EpochRecord {
            epoch,
            loss: weighted_loss / train_samples.len() as f64,
            val_accuracy,
            val_loss,
            lr,
        };
        on_epoch(&record);
        history.push(record);

        let improved = best_accuracy.is_none_or(|b| val_accuracy > b);
        if improved {
            best_accuracy = Some(val_accuracy);
        }
        let keep = match (&kept, config.checkpoint) {
            (None, _) | (_, CheckpointRule::Last) => true,
            (Some(k), CheckpointRule::ValLoss) => val_loss < k.1,
            // Equal accuracy with lower validation loss also replaces the
            // kept parameters, without resetting the patience counters.
            (Some(k), CheckpointRule::ValAccuracy) => {
                improved || (val_accuracy == k.0 && val_loss < k.1)
            }
        };
        if keep {
            kept = Some((val_accuracy, val_loss, epoch, params.clone()));
        }
        if improved {
            since_best = 0;
            since_decay = 0;
        } else {
            since_best += 1;
            since_decay += 1;
            if since_best >= config.stop_patience {
                break;
            }
            if since_decay >= config.lr_patience {
                opt.lr *= config.lr_decay;
                since_decay = 0;
            }
        }
    }

    let (_, _, best_epoch, params) = kept.expect("at least one epoch");
    Ok(TrainedPredictor {
        vocabulary: vocab.clone(),
        model: PredictorModel::Recurrent {
            config: config.clone(),
            params,
            history,
            best_epoch,
        },
    })
}
