//! Variant-level resampling and the prefix-level validation split.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eventlog::{EventLog, PrefixSample, Variant};
use crate::rng;

/// Which variants go to the test log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_variants: BTreeSet<Variant>,
    pub seed: u64,
}

/// `train` (Tr), `test` (Te) and the source log `full` (Tr+Te).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogPartition {
    pub train: EventLog,
    pub test: EventLog,
    pub full: EventLog,
}

/// Round half up; `x` is a non-negative product of a fraction and a count.
pub fn round_count(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Moves every case of `spec.test_variants` into the test log.
pub fn apply(log: &EventLog, spec: &SplitSpec) -> Result<LogPartition> {
    if spec.test_variants.is_empty() {
        return Err(Error::InvalidSplit("no test variants".into()));
    }
    let present = log.variants();
    if let Some(v) = spec
        .test_variants
        .iter()
        .find(|v| !present.contains_key(*v))
    {
        return Err(Error::InvalidSplit(format!(
            "test variant {v} does not occur in the log"
        )));
    }
    let (test, train) = log.partition_by_variants(&spec.test_variants);
    Ok(LogPartition {
        train,
        test,
        full: log.clone(),
    })
}

/// One partition per variant, in lexicographic variant order.
pub fn lovocv_splits(log: &EventLog) -> Result<Vec<LogPartition>> {
    let variants = log.variants();
    if variants.len() < 2 {
        return Err(Error::InvalidSplit(format!(
            "leave-one-variant-out needs at least 2 variants, log has {}",
            variants.len()
        )));
    }
    variants
        .into_keys()
        .map(|v| {
            apply(
                log,
                &SplitSpec {
                    test_variants: BTreeSet::from([v]),
                    seed: 0,
                },
            )
        })
        .collect()
}

/// `k` single-variant folds drawn uniformly without replacement from
/// `eligible`, returned in lexicographic order.
pub fn sample_single_variant_folds(
    eligible: &BTreeSet<Variant>,
    k: usize,
    seed: u64,
) -> Result<Vec<SplitSpec>> {
    if k == 0 || k > eligible.len() {
        return Err(Error::InvalidSplit(format!(
            "cannot draw {k} folds from {} eligible variants",
            eligible.len()
        )));
    }
    let all: Vec<&Variant> = eligible.iter().collect();
    let mut picked: Vec<usize> = index::sample(&mut rng::seeded(seed), all.len(), k).into_vec();
    picked.sort_unstable();
    Ok(picked
        .into_iter()
        .map(|i| SplitSpec {
            test_variants: BTreeSet::from([all[i].clone()]),
            seed,
        })
        .collect())
}

/// Uniformly selects `round(fraction * |eligible|)` variants for the test log.
pub fn select_fraction(
    eligible: &BTreeSet<Variant>,
    fraction: f64,
    seed: u64,
) -> Result<SplitSpec> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidSplit(format!(
            "fraction {fraction} outside (0, 1)"
        )));
    }
    let n = eligible.len();
    let k = round_count(fraction * n as f64);
    if k < 1 || k >= n {
        return Err(Error::InvalidSplit(format!(
            "fraction {fraction} of {n} variants gives {k} test variants"
        )));
    }
    let all: Vec<&Variant> = eligible.iter().collect();
    let picked = index::sample(&mut rng::seeded(seed), n, k);
    Ok(SplitSpec {
        test_variants: picked.iter().map(|i| all[i].clone()).collect(),
        seed,
    })
}

/// Every eligible variant as its own fold, in lexicographic order.
pub fn single_variant_folds(eligible: &BTreeSet<Variant>, seed: u64) -> Vec<SplitSpec> {
    eligible
        .iter()
        .map(|v| SplitSpec {
            test_variants: BTreeSet::from([v.clone()]),
            seed,
        })
        .collect()
}

/// `repeats` independent leave-fraction draws; repeat `r` uses a seed mixed
/// from `seed` and `r`.
pub fn repeated_fraction_folds(
    eligible: &BTreeSet<Variant>,
    fraction: f64,
    repeats: usize,
    seed: u64,
) -> Result<Vec<SplitSpec>> {
    (0..repeats)
        .map(|r| select_fraction(eligible, fraction, rng::mix(seed, r as u64)))
        .collect()
}

pub fn leave_fraction_out(log: &EventLog, fraction: f64, seed: u64) -> Result<LogPartition> {
    let eligible: BTreeSet<Variant> = log.variants().into_keys().collect();
    apply(log, &select_fraction(&eligible, fraction, seed)?)
}

/// Moves a uniform sample of `round(fraction * n)` prefixes to validation.
/// Both halves keep the input order.
pub fn validation_split(
    samples: &[PrefixSample],
    fraction: f64,
    seed: u64,
) -> Result<(Vec<PrefixSample>, Vec<PrefixSample>)> {
    if samples.len() < 5 {
        return Err(Error::InvalidSplit(format!(
            "validation split needs at least 5 prefixes, got {}",
            samples.len()
        )));
    }
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidSplit(format!(
            "validation fraction {fraction} outside [0, 1)"
        )));
    }
    let k = round_count(fraction * samples.len() as f64);
    let mut is_val = vec![false; samples.len()];
    for i in index::sample(&mut rng::seeded(seed), samples.len(), k) {
        is_val[i] = true;
    }
    let mut train = Vec::with_capacity(samples.len() - k);
    let mut val = Vec::with_capacity(k);
    for (s, v) in samples.iter().zip(is_val) {
        if v {
            val.push(s.clone());
        } else {
            train.push(s.clone());
        }
    }
    Ok((train, val))
}

/// Text manifest: one line per fold with index, seed and test variants
/// (labels joined by `;`, variants by ` | `).
pub fn manifest(specs: &[SplitSpec]) -> String {
    let mut out = String::from("# fold\tseed\ttest_variants\n");
    for (i, s) in specs.iter().enumerate() {
        let vs: Vec<String> = s.test_variants.iter().map(|v| v.0.join(";")).collect();
        writeln!(out, "{i}\t{}\t{}", s.seed, vs.join(" | ")).expect("write to string");
    }
    out
}
