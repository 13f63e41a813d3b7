//! Benchmark framework for measuring whether autoregressive next-event
//! predictors learn the control-flow structure of a process model.
//!
//! The pipeline: build (or load) a Petri net, play it out into an event log,
//! resample the log at variant level, train a predictor on the training
//! prefixes, simulate a log from the predictor and score it with variant-level
//! fitness, precision and generalisation.

pub mod benchmarks;
pub mod error;
pub mod eventlog;
pub mod harness;
pub mod metrics;
pub mod neural;
pub mod petrinet;
pub mod predictor;
mod rng;
pub mod split;

pub use error::{Error, Result};
pub use eventlog::{EventLog, PrefixSample, Trace, Variant, Vocabulary};
pub use metrics::MetricsReport;
pub use petrinet::{Marking, PetriNet, PlayoutConfig};
pub use predictor::{PredictorConfig, TrainedPredictor};
