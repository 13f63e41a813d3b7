//! Event logs, variants, vocabularies and prefix extraction.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const LABEL_SEPARATOR: char = ';';

pub const BOS: &str = "<BOS>";
pub const EOS: &str = "<EOS>";
pub const PAD: &str = "<PAD>";

/// One case: the ordered activity labels it went through.
///
/// Played-out traces are never empty. Simulated traces may be (a predictor can
/// emit EOS straight after BOS), so the type does not forbid it.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Trace(pub Vec<String>);

/// A control-flow variant: identity is exact label-sequence equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Variant(pub Vec<String>);

impl Trace {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Self {
        Trace(labels.into_iter().map(Into::into).collect())
    }

    pub fn activities(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn variant(&self) -> Variant {
        Variant(self.0.clone())
    }
}

impl Variant {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Self {
        Variant(labels.into_iter().map(Into::into).collect())
    }

    pub fn activities(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0.join(","))
    }
}

impl std::borrow::Borrow<[String]> for Variant {
    fn borrow(&self) -> &[String] {
        &self.0
    }
}

impl From<Variant> for Trace {
    fn from(v: Variant) -> Self {
        Trace(v.0)
    }
}

/// An ordered list of traces. Order is preserved by every operation that
/// filters a log, so derived logs are reproducible.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventLog {
    traces: Vec<Trace>,
}

impl EventLog {
    pub fn new(traces: Vec<Trace>) -> Self {
        EventLog { traces }
    }

    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    pub fn into_traces(self) -> Vec<Trace> {
        self.traces
    }

    pub fn push(&mut self, trace: Trace) {
        self.traces.push(trace);
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn max_trace_len(&self) -> usize {
        self.traces.iter().map(Trace::len).max().unwrap_or(0)
    }

    /// Variant multiset, keyed in lexicographic variant order.
    pub fn variants(&self) -> BTreeMap<Variant, usize> {
        let mut counts: HashMap<&[String], usize> = HashMap::new();
        for t in &self.traces {
            *counts.entry(t.activities()).or_default() += 1;
        }
        counts
            .into_iter()
            .map(|(k, n)| (Variant(k.to_vec()), n))
            .collect()
    }

    /// Multiplicity of `v` in this log (0 if absent).
    pub fn occ(&self, v: &Variant) -> usize {
        self.traces.iter().filter(|t| t.0 == v.0).count()
    }

    pub fn labels(&self) -> BTreeSet<&str> {
        self.traces
            .iter()
            .flat_map(|t| t.0.iter().map(String::as_str))
            .collect()
    }

    /// Splits the log into (traces whose variant is in `set`, the rest).
    pub fn partition_by_variants(&self, set: &BTreeSet<Variant>) -> (EventLog, EventLog) {
        let (inside, outside): (Vec<Trace>, Vec<Trace>) = self
            .traces
            .iter()
            .cloned()
            .partition(|t| set.contains(t.activities()));
        (EventLog::new(inside), EventLog::new(outside))
    }

    pub fn concat(&self, other: &EventLog) -> EventLog {
        let mut traces = self.traces.clone();
        traces.extend(other.traces.iter().cloned());
        EventLog::new(traces)
    }

    /// Text form: one trace per line, labels joined by `;`. An empty trace is
    /// an empty line.
    pub fn to_text(&self) -> Result<String> {
        let mut out = String::new();
        for (i, t) in self.traces.iter().enumerate() {
            for (j, label) in t.0.iter().enumerate() {
                if label.is_empty()
                    || label.contains(LABEL_SEPARATOR)
                    || label.contains('\n')
                    || label.contains('\r')
                {
                    return Err(Error::InvalidConfig(format!(
                        "trace {i}: label {label:?} cannot be written to a log file"
                    )));
                }
                if j > 0 {
                    out.push(LABEL_SEPARATOR);
                }
                out.push_str(label);
            }
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_text(text: &str, origin: &Path) -> Result<EventLog> {
        let mut traces = Vec::new();
        if text.is_empty() {
            return Ok(EventLog::default());
        }
        let body = text.strip_suffix('\n').unwrap_or(text);
        for (i, raw) in body.split('\n').enumerate() {
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.is_empty() {
                traces.push(Trace::default());
                continue;
            }
            let labels: Vec<String> = line.split(LABEL_SEPARATOR).map(str::to_owned).collect();
            if let Some(pos) = labels.iter().position(|l| l.trim().is_empty()) {
                return Err(Error::Parse {
                    path: origin.to_path_buf(),
                    line: i + 1,
                    message: format!("empty activity label at position {}", pos + 1),
                });
            }
            traces.push(Trace(labels));
        }
        Ok(EventLog::new(traces))
    }
}

impl FromIterator<Trace> for EventLog {
    fn from_iter<I: IntoIterator<Item = Trace>>(iter: I) -> Self {
        EventLog::new(iter.into_iter().collect())
    }
}

pub fn variants(log: &EventLog) -> BTreeMap<Variant, usize> {
    log.variants()
}

pub fn occ(v: &Variant, log: &EventLog) -> usize {
    log.occ(v)
}

pub fn read_log(path: impl AsRef<Path>) -> Result<EventLog> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    EventLog::from_text(&text, path)
}

pub fn write_log(log: &EventLog, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, log.to_text()?).map_err(|e| Error::io(path, e))
}

/// Token index space: sorted activity labels, then BOS, EOS, PAD.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "VocabularyDoc", into = "VocabularyDoc")]
pub struct Vocabulary {
    activities: Vec<String>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyDoc {
    activities: Vec<String>,
}

impl TryFrom<VocabularyDoc> for Vocabulary {
    type Error = Error;

    fn try_from(doc: VocabularyDoc) -> Result<Self> {
        let n = doc.activities.len();
        let v = Vocabulary::from_labels(doc.activities);
        if v.activities.len() != n {
            return Err(Error::InvalidConfig(
                "duplicate labels in vocabulary".into(),
            ));
        }
        Ok(v)
    }
}

impl From<Vocabulary> for VocabularyDoc {
    fn from(v: Vocabulary) -> Self {
        VocabularyDoc {
            activities: v.activities,
        }
    }
}

impl Vocabulary {
    /// Deduplicates and sorts `labels`. Special-token names are dropped.
    pub fn from_labels<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Self {
        let set: BTreeSet<String> = labels
            .into_iter()
            .map(Into::into)
            .filter(|l| l != BOS && l != EOS && l != PAD)
            .collect();
        let activities: Vec<String> = set.into_iter().collect();
        let index = activities
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        Vocabulary { activities, index }
    }

    pub fn activities(&self) -> &[String] {
        &self.activities
    }

    pub fn n_activities(&self) -> usize {
        self.activities.len()
    }

    /// Total token count including the three specials.
    pub fn len(&self) -> usize {
        self.activities.len() + 3
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bos(&self) -> usize {
        self.activities.len()
    }

    pub fn eos(&self) -> usize {
        self.activities.len() + 1
    }

    pub fn pad(&self) -> usize {
        self.activities.len() + 2
    }

    pub fn encode(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.to_owned()))
    }

    pub fn token(&self, index: usize) -> Result<&str> {
        match index {
            i if i < self.activities.len() => Ok(&self.activities[i]),
            i if i == self.bos() => Ok(BOS),
            i if i == self.eos() => Ok(EOS),
            i if i == self.pad() => Ok(PAD),
            i => Err(Error::TokenOutOfRange {
                index: i,
                size: self.len(),
            }),
        }
    }

    /// `[BOS, a1, …, an]` as token indices.
    pub fn encode_history(&self, labels: &[String]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len() + 1);
        out.push(self.bos());
        for l in labels {
            out.push(self.encode(l)?);
        }
        Ok(out)
    }

    /// Left-truncates `history` to `window` tokens, then left-pads with PAD.
    pub fn window(&self, history: &[usize], window: usize) -> Vec<usize> {
        let tail = &history[history.len().saturating_sub(window)..];
        let mut out = vec![self.pad(); window - tail.len()];
        out.extend_from_slice(tail);
        out
    }
}

pub fn build_vocabulary(log: &EventLog) -> Vocabulary {
    Vocabulary::from_labels(log.labels())
}

/// A fixed-length input window and the token that follows it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PrefixSample {
    pub prefix: Vec<usize>,
    pub target: usize,
}

/// Every prefix of every trace, `BOS`-led, with the next activity (or EOS)
/// as target.
pub fn prefixes(log: &EventLog, vocab: &Vocabulary, window: usize) -> Result<Vec<PrefixSample>> {
    if window == 0 {
        return Err(Error::InvalidConfig(
            "prefix window must be at least 1".into(),
        ));
    }
    let mut out = Vec::with_capacity(log.traces().iter().map(|t| t.len() + 1).sum());
    for trace in log.traces() {
        let history = vocab.encode_history(trace.activities())?;
        for k in 1..=history.len() {
            let target = if k < history.len() {
                history[k]
            } else {
                vocab.eos()
            };
            out.push(PrefixSample {
                prefix: vocab.window(&history[..k], window),
                target,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn log(rows: &[&[&str]]) -> EventLog {
        rows.iter().map(|r| Trace::new(r.iter().copied())).collect()
    }

    #[test]
    fn variant_counts() {
        let l = log(&[&["A", "B"], &["A", "B"], &["A", "C"]]);
        let v = l.variants();
        assert_eq!(v.len(), 2);
        assert_eq!(v[&Variant::new(["A", "B"])], 2);
        assert_eq!(v[&Variant::new(["A", "C"])], 1);
        assert!(EventLog::default().variants().is_empty());
    }

    #[test]
    fn occ_counts_and_absent() {
        let l = log(&[&["A", "B"], &["A", "B"], &["A", "C"]]);
        assert_eq!(occ(&Variant::new(["A", "B"]), &l), 2);
        assert_eq!(occ(&Variant::new(["Z"]), &l), 0);
    }

    #[test]
    fn vocabulary_is_sorted_with_specials_last() {
        let v = build_vocabulary(&log(&[&["B", "A"]]));
        assert_eq!(v.activities(), &["A".to_string(), "B".to_string()]);
        assert_eq!(v.len(), 5);
        assert_eq!(v.token(v.bos()).unwrap(), BOS);
        assert_eq!(v.token(v.eos()).unwrap(), EOS);
        assert_eq!(v.token(v.pad()).unwrap(), PAD);
        let w = build_vocabulary(&log(&[&["A"], &["B"]]));
        assert_eq!(v, w);
    }

    #[test]
    fn prefixes_of_short_trace() {
        let l = log(&[&["A", "B"]]);
        let v = build_vocabulary(&l);
        let s = prefixes(&l, &v, 10).unwrap();
        assert_eq!(s.len(), 3);
        let targets: Vec<usize> = s.iter().map(|p| p.target).collect();
        assert_eq!(targets, vec![0, 1, v.eos()]);
        assert_eq!(s[0].prefix.len(), 10);
        assert_eq!(s[0].prefix[9], v.bos());
        assert!(s[0].prefix[..9].iter().all(|&t| t == v.pad()));
        assert_eq!(&s[2].prefix[7..], &[v.bos(), 0, 1]);
    }

    #[test]
    fn prefixes_truncate_on_the_left() {
        let labels: Vec<String> = (0..12).map(|i| format!("a{i:02}")).collect();
        let l = EventLog::new(vec![Trace(labels.clone())]);
        let v = build_vocabulary(&l);
        let s = prefixes(&l, &v, 10).unwrap();
        let last = s.last().unwrap();
        assert_eq!(last.target, v.eos());
        let expected: Vec<usize> = labels[2..].iter().map(|x| v.encode(x).unwrap()).collect();
        assert_eq!(last.prefix, expected);
    }

    #[test]
    fn read_simple_file() {
        let l = EventLog::from_text("A;B\nA;C\n", Path::new("x")).unwrap();
        assert_eq!(l, log(&[&["A", "B"], &["A", "C"]]));
        assert!(EventLog::from_text("", Path::new("x")).unwrap().is_empty());
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = EventLog::from_text("A;B\nA;;C\n", Path::new("bad.log")).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("l.log");
        let l = log(&[&["A", "B"], &[], &["C"]]);
        write_log(&l, &p).unwrap();
        assert_eq!(read_log(&p).unwrap(), l);
    }

    #[test]
    fn unknown_label_rejected() {
        let v = build_vocabulary(&log(&[&["A"]]));
        assert!(matches!(v.encode("Q"), Err(Error::UnknownLabel(_))));
    }

    fn arb_log() -> impl Strategy<Value = EventLog> {
        prop::collection::vec(prop::collection::vec(0u8..4, 1..8), 0..30).prop_map(|rows| {
            rows.into_iter()
                .map(|r| Trace(r.into_iter().map(|c| format!("L{c}")).collect()))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn occ_matches_variant_map(l in arb_log()) {
            let v = l.variants();
            prop_assert_eq!(v.values().sum::<usize>(), l.len());
            for (k, n) in &v {
                prop_assert_eq!(l.occ(k), *n);
            }
        }

        #[test]
        fn prefix_counts_and_targets(l in arb_log(), window in 1usize..12) {
            let vocab = Vocabulary::from_labels(["L0", "L1", "L2", "L3"]);
            let s = prefixes(&l, &vocab, window).unwrap();
            let expected: usize = l.traces().iter().map(|t| t.len() + 1).sum();
            prop_assert_eq!(s.len(), expected);
            for p in &s {
                prop_assert_eq!(p.prefix.len(), window);
                prop_assert!(p.target != vocab.bos() && p.target != vocab.pad());
            }
            prop_assert_eq!(s, prefixes(&l, &vocab, window).unwrap());
        }

        #[test]
        fn text_round_trip(l in arb_log()) {
            let text = l.to_text().unwrap();
            prop_assert_eq!(EventLog::from_text(&text, Path::new("p")).unwrap(), l);
        }
    }
}
