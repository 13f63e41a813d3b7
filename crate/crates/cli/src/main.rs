use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use procbench::benchmarks::{self, build_model, ModelId};
use procbench::eventlog::{build_vocabulary, prefixes, read_log, write_log, Variant};
use procbench::harness::{self, ExperimentConfig};
use procbench::metrics;
use procbench::petrinet::{self, enumerate_variants, PetriNet, PlayoutConfig};
use procbench::predictor::{
    full_context_order, markov_baseline, simulate_log, train_observed, PredictorConfig,
    TrainedPredictor,
};
use procbench::split::{self, SplitSpec};

#[derive(Parser)]
#[command(
    name = "procbench",
    version,
    about = "Process-model benchmark for next-event predictors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the six benchmark nets and a manifest of variant counts.
    Models {
        #[arg(long, default_value = "models")]
        out: PathBuf,
    },
    /// List the variants of a net under a marking visit bound.
    Variants {
        #[command(flatten)]
        source: NetSource,
        #[arg(long, default_value_t = 3)]
        bound: usize,
    },
    /// Play a net out into an event log.
    Playout {
        #[command(flatten)]
        source: NetSource,
        #[arg(long, default_value_t = harness::DEFAULT_N_TRACES)]
        traces: usize,
        #[arg(long, default_value_t = harness::DEFAULT_PLAYOUT_VISIT_BOUND)]
        visit_bound: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Partition a log by variants into train/test logs, one directory per fold.
    Split {
        #[arg(long)]
        log: PathBuf,
        #[command(flatten)]
        mode: SplitArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Train a predictor on a training log and write a checkpoint.
    Train {
        #[arg(long)]
        train: PathBuf,
        /// Log whose labels extend the vocabulary (usually the test log).
        #[arg(long)]
        extra_labels: Option<PathBuf>,
        /// TOML file with predictor settings; defaults to the selected configuration.
        #[arg(long, conflicts_with = "markov")]
        config: Option<PathBuf>,
        /// Fit the Markov baseline instead: an order or `full`.
        #[arg(long)]
        markov: Option<String>,
        #[arg(long, default_value_t = harness::DEFAULT_VALIDATION_FRACTION)]
        validation_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
        /// Print one line per epoch.
        #[arg(long)]
        verbose: bool,
    },
    /// Sample a log from a checkpoint.
    Simulate {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        traces: usize,
        #[arg(long, default_value_t = 100)]
        max_len: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
        /// Where to write the truncation report (default: `<out>.report.txt`).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Score a simulated log against training and test logs.
    Evaluate {
        #[arg(long)]
        sim: PathBuf,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run an experiment described by a TOML file.
    Run {
        config: PathBuf,
        #[arg(long)]
        quiet: bool,
    },
    /// Run a hyperparameter grid described by a TOML file and rank the configurations.
    Grid {
        config: PathBuf,
        #[arg(long)]
        quiet: bool,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct NetSource {
    /// Benchmark model id (1-6).
    #[arg(long)]
    model: Option<u8>,
    /// Petri net JSON file.
    #[arg(long)]
    net: Option<PathBuf>,
}

impl NetSource {
    fn load(&self) -> Result<PetriNet> {
        match (self.model, &self.net) {
            (Some(id), _) => Ok(build_model(ModelId::new(id)?)),
            (None, Some(p)) => Ok(PetriNet::load(p)?),
            _ => bail!("give --model or --net"),
        }
    }
}

#[derive(Args)]
struct SplitArgs {
    /// Draw k single-variant folds instead of one per variant.
    #[arg(long, conflicts_with = "fraction")]
    k: Option<usize>,
    /// Hold out this fraction of the variants per fold.
    #[arg(long)]
    fraction: Option<f64>,
    #[arg(long, default_value_t = 1, requires = "fraction")]
    repeats: usize,
}

fn split_specs(log: &procbench::EventLog, args: &SplitArgs, seed: u64) -> Result<Vec<SplitSpec>> {
    let eligible: BTreeSet<Variant> = log.variants().into_keys().collect();
    Ok(match (args.k, args.fraction) {
        (Some(k), _) => split::sample_single_variant_folds(&eligible, k, seed)?,
        (None, Some(f)) => split::repeated_fraction_folds(&eligible, f, args.repeats, seed)?,
        (None, None) => split::single_variant_folds(&eligible, seed),
    })
}

fn load_predictor_config(path: Option<&Path>) -> Result<PredictorConfig> {
    match path {
        None => Ok(PredictorConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let c: PredictorConfig =
                toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
            c.validate()?;
            Ok(c)
        }
    }
}

fn train_command(
    train: &Path,
    extra: Option<&Path>,
    config: Option<&Path>,
    markov: Option<&str>,
    validation_fraction: f64,
    seed: u64,
    verbose: bool,
) -> Result<TrainedPredictor> {
    let log = read_log(train)?;
    if let Some(order) = markov {
        let order = match order {
            "full" => full_context_order(&log),
            n => n
                .parse()
                .with_context(|| format!("invalid Markov order `{n}`"))?,
        };
        return Ok(markov_baseline(&log, order)?);
    }
    let mut labels_from = log.clone();
    if let Some(p) = extra {
        labels_from = labels_from.concat(&read_log(p)?);
    }
    let vocab = build_vocabulary(&labels_from);
    let cfg = load_predictor_config(config)?;
    let samples = prefixes(&log, &vocab, cfg.window)?;
    let (tr, val) = split::validation_split(&samples, validation_fraction, seed)?;
    Ok(train_observed(&cfg, &tr, &val, &vocab, |r| {
        if verbose {
            eprintln!(
                "epoch {:>3}  loss {:.5}  val_acc {:.4}  val_loss {:.5}  lr {}",
                r.epoch, r.loss, r.val_accuracy, r.val_loss, r.lr
            );
        }
    })?)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Models { out } => {
            let rows = benchmarks::export_all(&out)?;
            for r in rows {
                println!(
                    "{}\t{}\treported {}\tenumerated {}",
                    r.model, r.net_file, r.reported_variants, r.enumerated_variants
                );
            }
        }
        Command::Variants { source, bound } => {
            for v in enumerate_variants(&source.load()?, bound)? {
                println!("{v}");
            }
        }
        Command::Playout {
            source,
            traces,
            visit_bound,
            seed,
            out,
        } => {
            let log = petrinet::playout(
                &source.load()?,
                &PlayoutConfig::new(traces, visit_bound, seed),
            )?;
            write_log(&log, &out)?;
            eprintln!(
                "{} traces, {} variants -> {}",
                log.len(),
                log.variants().len(),
                out.display()
            );
        }
        Command::Split {
            log,
            mode,
            seed,
            out,
        } => {
            let log = read_log(&log)?;
            let specs = split_specs(&log, &mode, seed)?;
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            for (i, spec) in specs.iter().enumerate() {
                let part = split::apply(&log, spec)?;
                let dir = out.join(format!("fold_{i:03}"));
                fs::create_dir_all(&dir)?;
                write_log(&part.train, dir.join("train.log"))?;
                write_log(&part.test, dir.join("test.log"))?;
            }
            fs::write(out.join("splits.tsv"), split::manifest(&specs))?;
            eprintln!("{} folds -> {}", specs.len(), out.display());
        }
        Command::Train {
            train,
            extra_labels,
            config,
            markov,
            validation_fraction,
            seed,
            out,
            verbose,
        } => {
            let p = train_command(
                &train,
                extra_labels.as_deref(),
                config.as_deref(),
                markov.as_deref(),
                validation_fraction,
                seed,
                verbose,
            )?;
            p.save(&out)?;
            eprintln!("checkpoint -> {}", out.display());
        }
        Command::Simulate {
            checkpoint,
            traces,
            max_len,
            seed,
            out,
            report,
        } => {
            let p = TrainedPredictor::load(&checkpoint)?;
            let (log, rep) = simulate_log(&p, traces, max_len, seed)?;
            write_log(&log, &out)?;
            let report = report.unwrap_or_else(|| {
                let mut name = out.as_os_str().to_owned();
                name.push(".report.txt");
                PathBuf::from(name)
            });
            fs::write(&report, rep.to_string())?;
            eprintln!(
                "{} traces ({} truncated) -> {}",
                log.len(),
                rep.truncated.len(),
                out.display()
            );
        }
        Command::Evaluate {
            sim,
            train,
            test,
            json,
        } => {
            let r = metrics::evaluate(&read_log(&sim)?, &read_log(&train)?, &read_log(&test)?)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&r)?);
            } else {
                println!("fitness\t{}", r.fitness);
                println!("precision\t{}", r.precision);
                println!("generalisation\t{}", r.generalisation);
                println!(
                    "size_tr\t{}\nsize_te\t{}\nsize_sim\t{}",
                    r.size_tr, r.size_te, r.size_sim
                );
                println!("correction\t{}", r.correction);
            }
        }
        Command::Run { config, quiet } => {
            let cfg = ExperimentConfig::load(&config)?;
            let o = harness::run_experiment_with_progress(&cfg, &mut |m| {
                if !quiet {
                    eprintln!("{m}");
                }
            })?;
            print!("{}", harness::markdown_table(&o.aggregate));
            eprintln!("results -> {}", o.output_dir.display());
            if !o.errors.is_empty() {
                bail!(
                    "{} of {} folds failed; see errors.txt",
                    o.errors.len(),
                    o.errors.len() + o.folds.len()
                );
            }
        }
        Command::Grid { config, quiet } => {
            let cfg = ExperimentConfig::load(&config)?;
            let o = harness::grid_search_with_progress(&cfg, &mut |m| {
                if !quiet {
                    eprintln!("{m}");
                }
            })?;
            for r in &o.ranking {
                println!("{}\t{:.4}\t{}", r.rank, r.mean_score, r.key);
            }
            eprintln!("ranking -> {}", o.output_dir.join("ranking.csv").display());
            if !o.failures.is_empty() {
                eprintln!("{} configurations failed; see errors.txt", o.failures.len());
            }
        }
    }
    Ok(())
}
