use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{PredictorModel, TrainedPredictor};
use crate::error::{Error, Result};
use crate::eventlog::{build_vocabulary, EventLog};

/// Next-token counts for every context of length `0..=order` observed in
/// BOS-led training histories. Unseen contexts back off to shorter ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MarkovDoc", into = "MarkovDoc")]
pub struct MarkovModel {
    pub order: usize,
    counts: HashMap<Vec<usize>, Vec<(usize, u64)>>,
}

#[derive(Serialize, Deserialize)]
struct MarkovDoc {
    order: usize,
    /// Sorted by context for a stable file layout.
    contexts: Vec<ContextCounts>,
}

#[derive(Serialize, Deserialize)]
struct ContextCounts {
    context: Vec<usize>,
    next: Vec<(usize, u64)>,
}

impl From<MarkovModel> for MarkovDoc {
    fn from(m: MarkovModel) -> Self {
        let mut contexts: Vec<ContextCounts> = m
            .counts
            .into_iter()
            .map(|(context, next)| ContextCounts { context, next })
            .collect();
        contexts.sort_by(|a, b| a.context.cmp(&b.context));
        MarkovDoc {
            order: m.order,
            contexts,
        }
    }
}

impl TryFrom<MarkovDoc> for MarkovModel {
    type Error = Error;

    fn try_from(doc: MarkovDoc) -> Result<Self> {
        if doc.order == 0 {
            return Err(Error::InvalidConfig("Markov order must be positive".into()));
        }
        Ok(MarkovModel {
            order: doc.order,
            counts: doc
                .contexts
                .into_iter()
                .map(|c| (c.context, c.next))
                .collect(),
        })
    }
}

impl MarkovModel {
    /// Counts for the longest observed suffix of `history` up to `order`.
    pub(crate) fn distribution(&self, history: &[usize], vocab_len: usize) -> Vec<f64> {
        let longest = self.order.min(history.len());
        let mut p = vec![0.0; vocab_len];
        for k in (0..=longest).rev() {
            if let Some(next) = self.counts.get(&history[history.len() - k..]) {
                let total: u64 = next.iter().map(|&(_, c)| c).sum();
                for &(t, c) in next {
                    p[t] = c as f64 / total as f64;
                }
                return p;
            }
        }
        p
    }
}

/// Order that makes every context the complete BOS-led history.
pub fn full_context_order(log: &EventLog) -> usize {
    log.max_trace_len() + 1
}

pub fn markov_baseline(train_log: &EventLog, order: usize) -> Result<TrainedPredictor> {
    if train_log.is_empty() {
        return Err(Error::EmptyLog("training"));
    }
    if order == 0 {
        return Err(Error::InvalidConfig("Markov order must be positive".into()));
    }
    let vocabulary = build_vocabulary(train_log);
    let mut table: HashMap<Vec<usize>, HashMap<usize, u64>> = HashMap::new();
    for trace in train_log.traces() {
        let history = vocabulary.encode_history(trace.activities())?;
        for k in 1..=history.len() {
            let target = history.get(k).copied().unwrap_or(vocabulary.eos());
            for len in 0..=order.min(k) {
                *table
                    .entry(history[k - len..k].to_vec())
                    .or_default()
                    .entry(target)
                    .or_default() += 1;
            }
        }
    }
    let counts = table
        .into_iter()
        .map(|(ctx, next)| {
            let mut next: Vec<(usize, u64)> = next.into_iter().collect();
            next.sort_unstable();
            (ctx, next)
        })
        .collect();
    Ok(TrainedPredictor {
        vocabulary,
        model: PredictorModel::Markov(MarkovModel { order, counts }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eventlog::Trace;
    use crate::predictor::predict_next;

    fn log(spec: &[(&str, usize)]) -> EventLog {
        spec.iter()
            .flat_map(|&(v, n)| std::iter::repeat_n(Trace::new(v.split(',')), n))
            .collect()
    }

    fn labels(s: &str) -> Vec<String> {
        s.split(',').map(String::from).collect()
    }

    #[test]
    fn deterministic_successor() {
        let p = markov_baseline(&log(&[("A,B", 10)]), 3).unwrap();
        let d = predict_next(&p, &labels("A")).unwrap();
        assert_eq!(d[p.vocabulary.encode("B").unwrap()], 1.0);
    }

    #[test]
    fn even_split() {
        let p = markov_baseline(&log(&[("A,B", 5), ("A,C", 5)]), 1).unwrap();
        let v = &p.vocabulary;
        let d = predict_next(&p, &labels("A")).unwrap();
        assert_eq!(d[v.encode("B").unwrap()], 0.5);
        assert_eq!(d[v.encode("C").unwrap()], 0.5);
        let d = predict_next(&p, &[]).unwrap();
        assert_eq!(d[v.encode("A").unwrap()], 1.0);
        let d = predict_next(&p, &labels("A,B")).unwrap();
        assert_eq!(d[v.eos()], 1.0);
    }

    #[test]
    fn unseen_context_backs_off() {
        let p = markov_baseline(&log(&[("A,B,C", 3), ("B,A", 1)]), 2).unwrap();
        let v = &p.vocabulary;
        // <C,A> never seen; order-1 context <A> follows with B (3) or EOS (1).
        let d = predict_next(&p, &labels("C,A")).unwrap();
        assert_eq!(d[v.encode("B").unwrap()], 0.75);
        assert_eq!(d[v.eos()], 0.25);
        assert_eq!(d[v.bos()], 0.0);
        assert_eq!(d[v.pad()], 0.0);
    }

    #[test]
    fn unknown_label_is_error() {
        let p = markov_baseline(&log(&[("A", 1)]), 1).unwrap();
        assert!(matches!(
            predict_next(&p, &labels("Z")),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn serde_round_trip() {
        let p = markov_baseline(&log(&[("A,B", 5), ("A,C", 2)]), 2).unwrap();
        let q: TrainedPredictor =
            serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(p, q);
    }
}
