use std::collections::HashMap;
use std::fmt;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::TrainedPredictor;
use crate::error::{Error, Result};
use crate::eventlog::{EventLog, Trace};
use crate::rng;

/// Side report of a simulation run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub n_traces: usize,
    pub max_len: usize,
    /// Indices (in log order) of traces cut off at `max_len`.
    pub truncated: Vec<usize>,
    /// Traces that ended with EOS before any activity.
    pub empty: usize,
}

impl fmt::Display for SimulationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "traces\t{}", self.n_traces)?;
        writeln!(f, "max_len\t{}", self.max_len)?;
        writeln!(f, "truncated\t{}", self.truncated.len())?;
        writeln!(f, "empty\t{}", self.empty)?;
        let idx: Vec<String> = self.truncated.iter().map(|i| i.to_string()).collect();
        writeln!(f, "truncated_indices\t{}", idx.join(","))
    }
}

/// Inverse-CDF draw; rounding slack falls to the last token with mass.
fn sample(p: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &x) in p.iter().enumerate() {
        if x > 0.0 {
            acc += x;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// Samples `n_traces` traces token by token from BOS until EOS or until a
/// trace holds `max_len` activities. EOS is not stored.
pub fn simulate_log(
    p: &TrainedPredictor,
    n_traces: usize,
    max_len: usize,
    seed: u64,
) -> Result<(EventLog, SimulationReport)> {
    if n_traces == 0 || max_len == 0 {
        return Err(Error::InvalidConfig(format!(
            "simulation needs n_traces >= 1 and max_len >= 1, got {n_traces} and {max_len}"
        )));
    }
    let vocab = &p.vocabulary;
    let eos = vocab.eos();
    let mut rng = rng::seeded(seed);
    let mut cache: HashMap<Vec<usize>, Vec<f64>> = HashMap::new();
    let mut traces = Vec::with_capacity(n_traces);
    let mut truncated = Vec::new();
    for i in 0..n_traces {
        let mut history = vec![vocab.bos()];
        loop {
            if history.len() > max_len {
                truncated.push(i);
                break;
            }
            let key = p.context(&history);
            let dist = match cache.get(&key) {
                Some(d) => d,
                None => {
                    let d = p.distribution(&history)?;
                    cache.entry(key).or_insert(d)
                }
            };
            let t = sample(dist, rng.random::<f64>());
            if t == eos {
                break;
            }
            history.push(t);
        }
        let labels = history[1..]
            .iter()
            .map(|&t| vocab.token(t).map(str::to_owned))
            .collect::<Result<Vec<_>>>()?;
        traces.push(Trace(labels));
    }
    let traces_empty = traces.iter().filter(|t: &&Trace| t.is_empty()).count();
    Ok((
        EventLog::new(traces),
        SimulationReport {
            n_traces,
            max_len,
            empty: traces_empty,
            truncated,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eventlog::Vocabulary;
    use crate::predictor::{markov_baseline, MarkovModel, PredictorModel};

    fn log(spec: &[(&str, usize)]) -> EventLog {
        spec.iter()
            .flat_map(|&(v, n)| std::iter::repeat_n(Trace::new(v.split(',')), n))
            .collect()
    }

    #[test]
    fn memorizer_reproduces_single_variant() {
        let p = markov_baseline(&log(&[("A,B", 10)]), 3).unwrap();
        let (sim, rep) = simulate_log(&p, 25, 10, 4).unwrap();
        assert_eq!(sim, log(&[("A,B", 25)]));
        assert!(rep.truncated.is_empty());
    }

    #[test]
    fn size_and_reproducibility() {
        let p = markov_baseline(&log(&[("A,B", 5), ("A,C,A", 5)]), 1).unwrap();
        let (a, ra) = simulate_log(&p, 37, 6, 9).unwrap();
        let (b, rb) = simulate_log(&p, 37, 6, 9).unwrap();
        assert_eq!(a.len(), 37);
        assert_eq!(a.to_text().unwrap(), b.to_text().unwrap());
        assert_eq!(ra, rb);
        assert!(a.traces().iter().all(|t| t.len() <= 6));
    }

    #[test]
    fn loops_are_truncated_and_flagged() {
        // After A the order-1 model continues with A 9 times out of 10.
        let p = markov_baseline(&log(&[("A,A,A,A,A,A,A,A,A,A", 1)]), 1).unwrap();
        let (sim, rep) = simulate_log(&p, 20, 3, 0).unwrap();
        assert!(sim.traces().iter().all(|t| t.len() <= 3));
        for &i in &rep.truncated {
            assert_eq!(sim.traces()[i].len(), 3);
        }
        assert!(!rep.truncated.is_empty());
    }

    #[test]
    fn eos_at_start_gives_empty_traces() {
        let vocabulary = Vocabulary::from_labels(["A"]);
        let doc = serde_json::json!({
            "order": 1,
            "contexts": [{"context": [vocabulary.bos()], "next": [[vocabulary.eos(), 1]]}],
        });
        let m: MarkovModel = serde_json::from_value(doc).unwrap();
        let p = TrainedPredictor {
            vocabulary,
            model: PredictorModel::Markov(m),
        };
        let (sim, rep) = simulate_log(&p, 5, 4, 1).unwrap();
        assert_eq!(sim.len(), 5);
        assert!(sim.traces().iter().all(|t| t.is_empty()));
        assert!(rep.truncated.is_empty());
        assert_eq!(rep.empty, 5);
    }

    #[test]
    fn zero_sizes_rejected() {
        let p = markov_baseline(&log(&[("A", 1)]), 1).unwrap();
        assert!(simulate_log(&p, 0, 3, 0).is_err());
        assert!(simulate_log(&p, 3, 0, 0).is_err());
    }

    #[test]
    fn inverse_cdf() {
        let p = [0.0, 0.25, 0.0, 0.75];
        assert_eq!(sample(&p, 0.0), 1);
        assert_eq!(sample(&p, 0.2499), 1);
        assert_eq!(sample(&p, 0.25), 3);
        assert_eq!(sample(&p, 0.9999999999999999), 3);
    }
}
