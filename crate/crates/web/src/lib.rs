//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each export takes plain numbers and returns a JSON string, so the page
//! needs nothing beyond `JSON.parse`. The same functions are callable from
//! native Rust, which is how they are tested.

use std::collections::BTreeSet;

use serde::Serialize;
use wasm_bindgen::prelude::*;

use procbench::benchmarks::{build_model, ModelId};
use procbench::eventlog::{build_vocabulary, prefixes, EventLog, Variant};
use procbench::metrics::{self, MetricsReport};
use procbench::petrinet::{enumerate_variants, playout, PlayoutConfig};
use procbench::predictor::{
    full_context_order, markov_baseline, simulate_log, train, PredictorConfig,
};
use procbench::split::{self, LogPartition, SplitSpec};

// The page is meant to stay responsive, so sizes are capped.
const MAX_TRACES: usize = 20_000;
const MAX_EPOCHS: usize = 200;

#[derive(Serialize)]
struct VariantRow {
    trace: String,
    count: usize,
}

#[derive(Serialize)]
struct PlayoutSummary {
    model: u8,
    traces: usize,
    distinct: usize,
    enumerated: usize,
    variants: Vec<VariantRow>,
}

#[derive(Serialize)]
struct FoldSummary {
    model: u8,
    predictor: String,
    test_variants: Vec<String>,
    train_traces: usize,
    test_traces: usize,
    truncated: usize,
    metrics: MetricsReport,
    epochs: Option<usize>,
}

fn to_js(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn json(v: &impl Serialize) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

fn model_log(model: u8, traces: usize, seed: u64) -> Result<EventLog, String> {
    if traces == 0 || traces > MAX_TRACES {
        return Err(format!("trace count must be in 1..={MAX_TRACES}"));
    }
    let id = ModelId::new(model).map_err(|e| e.to_string())?;
    playout(&build_model(id), &PlayoutConfig::new(traces, 1000, seed)).map_err(|e| e.to_string())
}

fn label(v: &Variant) -> String {
    if v.0.is_empty() {
        "(empty)".into()
    } else {
        v.0.join(" ")
    }
}

/// Holds out about a fifth of the observed variants.
fn holdout(log: &EventLog, seed: u64) -> Result<LogPartition, String> {
    let eligible: BTreeSet<Variant> = log.variants().into_keys().collect();
    let fraction = if eligible.len() < 5 { 0.5 } else { 0.2 };
    let spec: SplitSpec =
        split::select_fraction(&eligible, fraction, seed).map_err(|e| e.to_string())?;
    split::apply(log, &spec).map_err(|e| e.to_string())
}

fn sim_len(model: u8, tr: &EventLog) -> usize {
    if model == 6 {
        100
    } else {
        2 * tr.max_trace_len().max(1)
    }
}

pub fn playout_summary(model: u8, traces: usize, seed: u64) -> Result<String, String> {
    let log = model_log(model, traces, seed)?;
    let id = ModelId::new(model).map_err(|e| e.to_string())?;
    let enumerated = enumerate_variants(&build_model(id), id.analysis_visit_bound())
        .map_err(|e| e.to_string())?
        .len();
    let mut variants: Vec<VariantRow> = log
        .variants()
        .into_iter()
        .map(|(v, count)| VariantRow {
            trace: label(&v),
            count,
        })
        .collect();
    variants.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.trace.cmp(&b.trace)));
    json(&PlayoutSummary {
        model,
        traces: log.len(),
        distinct: variants.len(),
        enumerated,
        variants,
    })
}

fn finish(
    model: u8,
    predictor: String,
    part: &LogPartition,
    p: &procbench::TrainedPredictor,
    seed: u64,
    epochs: Option<usize>,
) -> Result<String, String> {
    let (sim, report) = simulate_log(p, part.full.len(), sim_len(model, &part.train), seed)
        .map_err(|e| e.to_string())?;
    let metrics = metrics::evaluate(&sim, &part.train, &part.test).map_err(|e| e.to_string())?;
    json(&FoldSummary {
        model,
        predictor,
        test_variants: part.test.variants().keys().map(label).collect(),
        train_traces: part.train.len(),
        test_traces: part.test.len(),
        truncated: report.truncated.len(),
        metrics,
        epochs,
    })
}

/// `order` of 0 means the full-context order for the training log.
pub fn markov_fold_summary(
    model: u8,
    traces: usize,
    order: usize,
    seed: u64,
) -> Result<String, String> {
    let log = model_log(model, traces, seed)?;
    let part = holdout(&log, seed)?;
    let order = if order == 0 {
        full_context_order(&part.train)
    } else {
        order
    };
    let p = markov_baseline(&part.train, order).map_err(|e| e.to_string())?;
    finish(
        model,
        format!("markov order {order}"),
        &part,
        &p,
        seed,
        None,
    )
}

pub fn lstm_fold_summary(
    model: u8,
    traces: usize,
    hidden: usize,
    max_epochs: usize,
    seed: u64,
) -> Result<String, String> {
    if max_epochs == 0 || max_epochs > MAX_EPOCHS {
        return Err(format!("epochs must be in 1..={MAX_EPOCHS}"));
    }
    let log = model_log(model, traces, seed)?;
    let part = holdout(&log, seed)?;
    let cfg = PredictorConfig {
        hidden_size: hidden,
        max_epochs,
        seed,
        window: if model == 3 {
            log.max_trace_len().saturating_sub(1).max(1)
        } else {
            10
        },
        ..PredictorConfig::default()
    };
    cfg.validate().map_err(|e| e.to_string())?;
    let vocab = build_vocabulary(&part.full);
    let samples = prefixes(&part.train, &vocab, cfg.window).map_err(|e| e.to_string())?;
    let (tr, val) = split::validation_split(&samples, 0.2, seed).map_err(|e| e.to_string())?;
    let p = train(&cfg, &tr, &val, &vocab).map_err(|e| e.to_string())?;
    let epochs = p.history().len();
    finish(
        model,
        format!("lstm hidden {hidden}"),
        &part,
        &p,
        seed,
        Some(epochs),
    )
}

/// Variant histogram of a play-out, most frequent first.
#[wasm_bindgen(js_name = playoutVariants)]
pub fn playout_variants(model: u8, traces: u32, seed: u32) -> Result<String, JsValue> {
    playout_summary(model, traces as usize, seed as u64).map_err(to_js)
}

/// Fits the Markov baseline on one held-out fold and scores a simulated log.
#[wasm_bindgen(js_name = markovFold)]
pub fn markov_fold(model: u8, traces: u32, order: u32, seed: u32) -> Result<String, JsValue> {
    markov_fold_summary(model, traces as usize, order as usize, seed as u64).map_err(to_js)
}

/// Trains a small LSTM on one held-out fold and scores a simulated log.
#[wasm_bindgen(js_name = lstmFold)]
pub fn lstm_fold(
    model: u8,
    traces: u32,
    hidden: u32,
    epochs: u32,
    seed: u32,
) -> Result<String, JsValue> {
    lstm_fold_summary(
        model,
        traces as usize,
        hidden as usize,
        epochs as usize,
        seed as u64,
    )
    .map_err(to_js)
}
