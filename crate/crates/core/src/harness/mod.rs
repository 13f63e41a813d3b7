//! Experiment driver: play-out, variant-level folds, training, simulation,
//! scoring and persisted reports.

mod config;
mod report;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use config::{
    ExperimentConfig, FullContext, GridSpec, MarkovOrder, Seeds, SplitMode, CYCLIC_SIM_MAX_LEN,
    DEFAULT_N_TRACES, DEFAULT_PLAYOUT_VISIT_BOUND, DEFAULT_VALIDATION_FRACTION, OUTPUT_ROOT_ENV,
};
pub use report::{
    aggregate, markdown_table, read_folds_csv, write_aggregate_csv, write_folds_csv, AggregateRow,
    FoldRow, MeanStd,
};

use crate::error::{Error, Result};
use crate::eventlog::{build_vocabulary, prefixes, EventLog, Variant};
use crate::metrics::{evaluate, MetricsReport};
use crate::petrinet::{enumerate_variants, playout, PetriNet, PlayoutConfig};
use crate::predictor::{
    full_context_order, markov_baseline, simulate_log, train, PredictorConfig, PredictorModel,
    TrainedPredictor,
};
use crate::rng;
use crate::split::{self, SplitSpec};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldError {
    pub fold: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutcome {
    pub output_dir: PathBuf,
    pub folds: Vec<FoldRow>,
    pub aggregate: Vec<AggregateRow>,
    pub errors: Vec<FoldError>,
}

/// Log and folds shared by every configuration of one experiment.
pub struct Prepared {
    pub net: PetriNet,
    pub log: EventLog,
    pub folds: Vec<SplitSpec>,
}

enum Learner<'a> {
    Network(&'a PredictorConfig),
    Markov(MarkovOrder),
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// `a;b;c | d;e` for a set of variants.
pub fn describe_variants(set: &BTreeSet<Variant>) -> String {
    set.iter()
        .map(|v| v.0.join(";"))
        .collect::<Vec<_>>()
        .join(" | ")
}

/// Play-out plus fold selection. Only variants that occur in the log (and,
/// with an analysis bound, are enumerable under it) are eligible test sets.
pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    cfg.validate()?;
    let net = cfg.net()?;
    let log = playout(
        &net,
        &PlayoutConfig::new(cfg.n_traces, cfg.playout_visit_bound, cfg.seeds.playout),
    )?;
    let mut eligible: BTreeSet<Variant> = log.variants().into_keys().collect();
    if let Some(bound) = cfg.effective_analysis_bound() {
        let bounded = enumerate_variants(&net, bound)?;
        eligible.retain(|v| bounded.contains(v));
    }
    if eligible.len() < 2 {
        return Err(Error::InvalidSplit(format!(
            "only {} eligible variants in the played-out log",
            eligible.len()
        )));
    }
    let folds = match &cfg.split {
        SplitMode::LovocvExhaustive => split::single_variant_folds(&eligible, cfg.seeds.split),
        SplitMode::LovocvKFolds { k } => {
            split::sample_single_variant_folds(&eligible, *k, cfg.seeds.split)?
        }
        SplitMode::LeaveFraction { fraction, repeats } => {
            split::repeated_fraction_folds(&eligible, *fraction, *repeats, cfg.seeds.split)?
        }
    };
    Ok(Prepared { net, log, folds })
}

fn fold_window(cfg: &ExperimentConfig, base: usize, log: &EventLog) -> usize {
    // The long-term-dependency model gets a window one short of its traces.
    if cfg.model.is_some_and(|m| m.get() == 3) {
        log.max_trace_len().saturating_sub(1).max(1)
    } else {
        base
    }
}

fn sim_max_len(cfg: &ExperimentConfig, train: &EventLog) -> usize {
    cfg.sim_max_len.unwrap_or_else(|| {
        if cfg.model.is_some_and(|m| m.is_cyclic()) {
            CYCLIC_SIM_MAX_LEN
        } else {
            (2 * train.max_trace_len()).max(1)
        }
    })
}

fn history_csv(p: &TrainedPredictor) -> String {
    let mut out = String::from("epoch,loss,val_accuracy,val_loss,lr\n");
    for r in p.history() {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.epoch, r.loss, r.val_accuracy, r.val_loss, r.lr
        )
        .expect("write to string");
    }
    out
}

fn run_fold(
    cfg: &ExperimentConfig,
    prepared: &Prepared,
    learner: &Learner<'_>,
    index: usize,
    dir: &Path,
) -> Result<MetricsReport> {
    let part = split::apply(&prepared.log, &prepared.folds[index])?;
    if part.train.is_empty() {
        return Err(Error::EmptyLog("training"));
    }
    create_dir(dir)?;
    let fold_seed = index as u64;
    let predictor = match learner {
        Learner::Network(base) => {
            let vocab = build_vocabulary(&part.full);
            let config = PredictorConfig {
                window: fold_window(cfg, base.window, &prepared.log),
                seed: rng::mix(rng::mix(cfg.seeds.training, base.seed), fold_seed),
                ..(*base).clone()
            };
            let samples = prefixes(&part.train, &vocab, config.window)?;
            let (tr, val) = split::validation_split(
                &samples,
                cfg.validation_fraction,
                rng::mix(cfg.seeds.split, 1_000_000 + fold_seed),
            )?;
            let p = train(&config, &tr, &val, &vocab)?;
            write(&dir.join("history.csv"), history_csv(&p))?;
            p
        }
        Learner::Markov(order) => {
            let order = match order {
                MarkovOrder::Fixed(k) => *k,
                MarkovOrder::Full(_) => full_context_order(&part.train),
            };
            markov_baseline(&part.train, order)?
        }
    };
    predictor.save(dir.join("checkpoint.json"))?;
    let (sim, sim_report) = simulate_log(
        &predictor,
        part.full.len(),
        sim_max_len(cfg, &part.train),
        rng::mix(cfg.seeds.simulation, fold_seed),
    )?;
    write(&dir.join("sim.log"), sim.to_text()?)?;
    write(&dir.join("sim_report.txt"), sim_report.to_string())?;
    let metrics = evaluate(&sim, &part.train, &part.test)?;
    write(
        &dir.join("metrics.json"),
        serde_json::to_string_pretty(&metrics)?,
    )?;
    if let PredictorModel::Recurrent { best_epoch, .. } = &predictor.model {
        write(&dir.join("best_epoch.txt"), format!("{best_epoch}\n"))?;
    }
    Ok(metrics)
}

fn run_prepared(
    cfg: &ExperimentConfig,
    prepared: &Prepared,
    learner: &Learner<'_>,
    out: &Path,
    progress: &mut dyn FnMut(&str),
) -> Result<ExperimentOutcome> {
    create_dir(out)?;
    write(&out.join("config.toml"), cfg.to_toml()?)?;
    write(&out.join("log.txt"), prepared.log.to_text()?)?;
    write(&out.join("splits.tsv"), split::manifest(&prepared.folds))?;

    let model = cfg.model_name();
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (i, spec) in prepared.folds.iter().enumerate() {
        let dir = out.join(format!("fold_{i:03}"));
        match run_fold(cfg, prepared, learner, i, &dir) {
            Ok(m) => {
                progress(&format!(
                    "fold {i}: fitness {:.4} precision {:.4} generalisation {:.4}",
                    m.fitness, m.precision, m.generalisation
                ));
                rows.push(FoldRow::new(
                    &model,
                    i,
                    describe_variants(&spec.test_variants),
                    &m,
                ));
            }
            Err(e) => {
                progress(&format!("fold {i}: error: {e}"));
                errors.push(FoldError {
                    fold: i,
                    message: e.to_string(),
                });
            }
        }
    }

    write_folds_csv(&rows, &out.join("folds.csv"))?;
    let agg = if rows.is_empty() {
        Vec::new()
    } else {
        aggregate(&rows, &cfg.split.setting())
    };
    write_aggregate_csv(&agg, &out.join("aggregate.csv"))?;
    write(&out.join("table.md"), markdown_table(&agg))?;
    let errors_path = out.join("errors.txt");
    if errors.is_empty() {
        if errors_path.exists() {
            fs::remove_file(&errors_path).map_err(|e| Error::io(&errors_path, e))?;
        }
    } else {
        let text: String = errors
            .iter()
            .map(|e| format!("fold {}: {}\n", e.fold, e.message))
            .collect();
        write(&errors_path, text)?;
    }
    Ok(ExperimentOutcome {
        output_dir: out.to_path_buf(),
        folds: rows,
        aggregate: agg,
        errors,
    })
}

/// Runs every fold of a single-predictor experiment and writes `folds.csv`,
/// `aggregate.csv`, `table.md` and per-fold artifacts. Fold failures are
/// recorded in `errors.txt` and the outcome; remaining folds still run.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    run_experiment_with_progress(cfg, &mut |_| {})
}

pub fn run_experiment_with_progress(
    cfg: &ExperimentConfig,
    progress: &mut dyn FnMut(&str),
) -> Result<ExperimentOutcome> {
    let learner = match (&cfg.predictor, cfg.markov_order) {
        (Some(p), _) => Learner::Network(p),
        (None, Some(order)) => Learner::Markov(order),
        (None, None) => {
            return Err(Error::InvalidConfig(
                "run needs `predictor` or `markov_order`; use grid search for `grid`".into(),
            ))
        }
    };
    let prepared = prepare(cfg)?;
    run_prepared(
        cfg,
        &prepared,
        &learner,
        &cfg.resolved_output_dir(),
        progress,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedConfig {
    pub rank: usize,
    pub key: String,
    pub mean_score: f64,
    pub fitness: f64,
    pub precision: f64,
    pub generalisation: f64,
    pub config: PredictorConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridOutcome {
    pub output_dir: PathBuf,
    pub ranking: Vec<RankedConfig>,
    /// Configurations left out of the ranking, with the reason.
    pub failures: Vec<(String, String)>,
}

/// Orders by mean score, best first; equal scores by configuration key.
pub fn rank(mut entries: Vec<RankedConfig>) -> Vec<RankedConfig> {
    entries.sort_by(|a, b| {
        b.mean_score
            .total_cmp(&a.mean_score)
            .then_with(|| a.key.cmp(&b.key))
    });
    for (i, e) in entries.iter_mut().enumerate() {
        e.rank = i + 1;
    }
    entries
}

/// Evaluates every grid point on the same play-out and folds, then ranks the
/// configurations by the unweighted mean of the three fold-averaged metrics.
/// Results go to `<output>/config_XXX/` and `<output>/ranking.csv`.
pub fn grid_search(cfg: &ExperimentConfig) -> Result<GridOutcome> {
    grid_search_with_progress(cfg, &mut |_| {})
}

pub fn grid_search_with_progress(
    cfg: &ExperimentConfig,
    progress: &mut dyn FnMut(&str),
) -> Result<GridOutcome> {
    let grid = cfg
        .grid
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("grid search needs a `grid` table".into()))?;
    let prepared = prepare(cfg)?;
    let out = cfg.resolved_output_dir();
    create_dir(&out)?;
    write(&out.join("config.toml"), cfg.to_toml()?)?;

    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for (j, pc) in grid.configs().into_iter().enumerate() {
        let key = pc.key();
        progress(&format!("config {j}: {key}"));
        let sub = ExperimentConfig {
            predictor: Some(pc.clone()),
            grid: None,
            output_dir: out.join(format!("config_{j:03}")),
            ..cfg.clone()
        };
        let outcome = run_prepared(
            &sub,
            &prepared,
            &Learner::Network(&pc),
            &sub.output_dir,
            progress,
        );
        match outcome {
            Ok(o) if o.errors.is_empty() && o.aggregate.len() == 1 => {
                let a = &o.aggregate[0];
                entries.push(RankedConfig {
                    rank: 0,
                    key,
                    mean_score: a.mean_score(),
                    fitness: a.fitness.mean,
                    precision: a.precision.mean,
                    generalisation: a.generalisation.mean,
                    config: pc,
                });
            }
            Ok(o) => {
                let reasons: Vec<String> = o
                    .errors
                    .iter()
                    .map(|e| format!("fold {}: {}", e.fold, e.message))
                    .collect();
                failures.push((key, reasons.join("; ")));
            }
            Err(e) => failures.push((key, e.to_string())),
        }
    }
    let ranking = rank(entries);

    let mut csv = String::from("rank,config,mean_score,fitness,precision,generalisation\n");
    for r in &ranking {
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.rank, r.key, r.mean_score, r.fitness, r.precision, r.generalisation
        )
        .expect("write to string");
    }
    write(&out.join("ranking.csv"), csv)?;
    if !failures.is_empty() {
        let text: String = failures
            .iter()
            .map(|(k, m)| format!("{k}: {m}\n"))
            .collect();
        write(&out.join("errors.txt"), text)?;
    }
    Ok(GridOutcome {
        output_dir: out,
        ranking,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(key: &str, score: f64) -> RankedConfig {
        RankedConfig {
            rank: 0,
            key: key.into(),
            mean_score: score,
            fitness: score,
            precision: score,
            generalisation: score,
            config: PredictorConfig::default(),
        }
    }

    #[test]
    fn ranking_sorts_and_breaks_ties_by_key() {
        let r = rank(vec![entry("b", 0.5), entry("c", 0.9), entry("a", 0.5)]);
        let keys: Vec<&str> = r.iter().map(|e| e.key.as_str()).collect();
        assert_eq!(keys, ["c", "a", "b"]);
        assert_eq!(r.iter().map(|e| e.rank).collect::<Vec<_>>(), [1, 2, 3]);
    }

    #[test]
    fn model6_folds_come_from_bounded_variants() {
        let cfg = ExperimentConfig::from_toml(
            "model = 6\nn_traces = 400\noutput_dir = \"x\"\nmarkov_order = \"full\"\nsplit = { mode = \"lovocv-exhaustive\" }\n",
        )
        .unwrap();
        let p = prepare(&cfg).unwrap();
        let bounded = enumerate_variants(&p.net, 3).unwrap();
        assert!(!p.folds.is_empty() && p.folds.len() <= 27);
        for f in &p.folds {
            assert!(f.test_variants.iter().all(|v| bounded.contains(v)));
        }
        // Unbounded play-out produces longer traces too.
        assert!(p.log.max_trace_len() > 18);
    }
}
