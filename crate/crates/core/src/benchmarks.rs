//! The six synthetic benchmark processes.
//!
//! | id | construct                                   | variants |
//! |----|---------------------------------------------|----------|
//! | 1  | AND split over five single activities       | 120      |
//! | 2  | seven sequential binary XOR splits          | 128      |
//! | 3  | eight XOR splits, 8th choice mirrors the 1st| 128      |
//! | 4  | three sequential two-activity IOR splits    | 64       |
//! | 5  | AND split over two five-activity sequences  | 252      |
//! | 6  | three sequential two-activity do-while loops| 27 (1–3 iterations each) |
//!
//! Labels follow `M<k>_A<i>`, with an `a`/`b` suffix where a construct offers
//! two alternatives.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::petrinet::{enumerate_variants, Marking, NetDocument, PetriNet, Transition};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct ModelId(u8);

impl ModelId {
    pub const ALL: [ModelId; 6] = [
        ModelId(1),
        ModelId(2),
        ModelId(3),
        ModelId(4),
        ModelId(5),
        ModelId(6),
    ];

    pub fn new(id: u8) -> Result<Self> {
        if (1..=6).contains(&id) {
            Ok(ModelId(id))
        } else {
            Err(Error::InvalidConfig(format!(
                "model id must be 1..=6, got {id}"
            )))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Variant count reported for the model in the original benchmark.
    pub fn reported_variants(self) -> usize {
        match self.0 {
            1 => 120,
            2 | 3 => 128,
            4 => 64,
            5 => 126,
            _ => 27,
        }
    }

    /// Visit bound under which variants are enumerated for analysis. Only the
    /// looped model needs one; the others are acyclic.
    pub fn analysis_visit_bound(self) -> usize {
        3
    }

    pub fn is_cyclic(self) -> bool {
        self.0 == 6
    }
}

impl TryFrom<u8> for ModelId {
    type Error = Error;

    fn try_from(id: u8) -> Result<Self> {
        ModelId::new(id)
    }
}

impl From<ModelId> for u8 {
    fn from(id: ModelId) -> u8 {
        id.0
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "model{}", self.0)
    }
}

#[derive(Default)]
struct NetBuilder {
    places: Vec<String>,
    transitions: Vec<Transition>,
    arcs: Vec<(String, String)>,
}

impl NetBuilder {
    fn place(&mut self, name: impl Into<String>) -> String {
        let name = name.into();
        self.places.push(name.clone());
        name
    }

    fn transition(&mut self, t: Transition, inputs: &[&str], outputs: &[&str]) {
        for p in inputs {
            self.arcs.push(((*p).to_owned(), t.id.clone()));
        }
        for p in outputs {
            self.arcs.push((t.id.clone(), (*p).to_owned()));
        }
        self.transitions.push(t);
    }

    fn activity(&mut self, label: &str, inputs: &[&str], outputs: &[&str]) {
        self.transition(
            Transition::labeled(format!("t_{label}"), label),
            inputs,
            outputs,
        );
    }

    fn silent(&mut self, id: &str, inputs: &[&str], outputs: &[&str]) {
        self.transition(Transition::silent(id), inputs, outputs);
    }

    fn finish(self, source: &str, sink: &str) -> PetriNet {
        PetriNet::new(NetDocument {
            places: self.places,
            transitions: self.transitions,
            arcs: self.arcs,
            initial_marking: Marking::with([(source, 1)]),
            final_marking: Marking::with([(sink, 1)]),
        })
        .expect("benchmark nets are well-formed")
    }
}

pub fn build_model(id: ModelId) -> PetriNet {
    match id.0 {
        1 => parallel_singletons(),
        2 => xor_chain(),
        3 => xor_chain_with_dependency(),
        4 => ior_chain(),
        5 => parallel_sequences(),
        _ => loop_chain(),
    }
}

fn parallel_singletons() -> PetriNet {
    let mut b = NetBuilder::default();
    let source = b.place("source");
    let sink = b.place("sink");
    let mut before = Vec::new();
    let mut after = Vec::new();
    for i in 1..=5 {
        before.push(b.place(format!("p{i}_in")));
        after.push(b.place(format!("p{i}_out")));
    }
    let before_refs: Vec<&str> = before.iter().map(String::as_str).collect();
    let after_refs: Vec<&str> = after.iter().map(String::as_str).collect();
    b.silent("and_split", &[&source], &before_refs);
    for i in 0..5 {
        b.activity(&format!("M1_A{}", i + 1), &[&before[i]], &[&after[i]]);
    }
    b.silent("and_join", &after_refs, &[&sink]);
    b.finish(&source, &sink)
}

fn xor_chain() -> PetriNet {
    let mut b = NetBuilder::default();
    let places: Vec<String> = (0..=7).map(|i| b.place(format!("p{i}"))).collect();
    for i in 1..=7 {
        for alt in ["a", "b"] {
            b.activity(&format!("M2_A{i}{alt}"), &[&places[i - 1]], &[&places[i]]);
        }
    }
    b.finish(&places[0], &places[7])
}

/// The first choice leaves a token in a memory place that the eighth split
/// consumes, so only the matching alternative can fire at the end.
fn xor_chain_with_dependency() -> PetriNet {
    let mut b = NetBuilder::default();
    let places: Vec<String> = (0..=8).map(|i| b.place(format!("p{i}"))).collect();
    let memory_a = b.place("memory_a");
    let memory_b = b.place("memory_b");
    b.activity("M3_A1a", &[&places[0]], &[&places[1], &memory_a]);
    b.activity("M3_A1b", &[&places[0]], &[&places[1], &memory_b]);
    for i in 2..=7 {
        for alt in ["a", "b"] {
            b.activity(&format!("M3_A{i}{alt}"), &[&places[i - 1]], &[&places[i]]);
        }
    }
    b.activity("M3_A8a", &[&places[7], &memory_a], &[&places[8]]);
    b.activity("M3_A8b", &[&places[7], &memory_b], &[&places[8]]);
    b.finish(&places[0], &places[8])
}

/// Each IOR split is a silent three-way choice (only a, only b, both) whose
/// branches bypass the skipped activity's done-place directly.
fn ior_chain() -> PetriNet {
    let mut b = NetBuilder::default();
    let stages: Vec<String> = (0..=3).map(|i| b.place(format!("p{i}"))).collect();
    for i in 1..=3 {
        let todo_a = b.place(format!("s{i}_a_todo"));
        let todo_b = b.place(format!("s{i}_b_todo"));
        let done_a = b.place(format!("s{i}_a_done"));
        let done_b = b.place(format!("s{i}_b_done"));
        let entry = stages[i - 1].as_str();
        b.silent(&format!("s{i}_only_a"), &[entry], &[&todo_a, &done_b]);
        b.silent(&format!("s{i}_only_b"), &[entry], &[&done_a, &todo_b]);
        b.silent(&format!("s{i}_both"), &[entry], &[&todo_a, &todo_b]);
        b.activity(&format!("M4_A{i}a"), &[&todo_a], &[&done_a]);
        b.activity(&format!("M4_A{i}b"), &[&todo_b], &[&done_b]);
        b.silent(&format!("s{i}_join"), &[&done_a, &done_b], &[&stages[i]]);
    }
    b.finish(&stages[0], &stages[3])
}

fn parallel_sequences() -> PetriNet {
    let mut b = NetBuilder::default();
    let source = b.place("source");
    let sink = b.place("sink");
    let branch_places: Vec<Vec<String>> = (0..2)
        .map(|k| {
            (0..=5)
                .map(|j| b.place(format!("b{}_{j}", k + 1)))
                .collect()
        })
        .collect();
    b.silent(
        "and_split",
        &[&source],
        &[&branch_places[0][0], &branch_places[1][0]],
    );
    for (k, places) in branch_places.iter().enumerate() {
        for j in 0..5 {
            let label = format!("M5_A{}", k * 5 + j + 1);
            b.activity(&label, &[&places[j]], &[&places[j + 1]]);
        }
    }
    b.silent(
        "and_join",
        &[&branch_places[0][5], &branch_places[1][5]],
        &[&sink],
    );
    b.finish(&source, &sink)
}

/// Do-while loops: the body runs once, then a silent choice either repeats
/// it or moves on.
fn loop_chain() -> PetriNet {
    let mut b = NetBuilder::default();
    let entries: Vec<String> = (0..=3).map(|i| b.place(format!("p{i}"))).collect();
    for i in 1..=3 {
        let mid = b.place(format!("l{i}_mid"));
        let end = b.place(format!("l{i}_end"));
        let start = entries[i - 1].as_str();
        b.activity(&format!("M6_A{i}a"), &[start], &[&mid]);
        b.activity(&format!("M6_A{i}b"), &[&mid], &[&end]);
        b.silent(&format!("l{i}_redo"), &[&end], &[start]);
        b.silent(&format!("l{i}_exit"), &[&end], &[&entries[i]]);
    }
    b.finish(&entries[0], &entries[3])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub model: ModelId,
    pub net_file: String,
    pub reported_variants: usize,
    pub enumerated_variants: usize,
    pub visit_bound: usize,
}

/// Enumerates every model and returns the manifest rows. Model 5 is the one
/// row where the reported and enumerated counts differ (126 vs 252).
pub fn manifest() -> Result<Vec<ManifestEntry>> {
    ModelId::ALL
        .iter()
        .map(|&id| {
            let bound = id.analysis_visit_bound();
            let enumerated = enumerate_variants(&build_model(id), bound)?.len();
            Ok(ManifestEntry {
                model: id,
                net_file: format!("{id}.json"),
                reported_variants: id.reported_variants(),
                enumerated_variants: enumerated,
                visit_bound: bound,
            })
        })
        .collect()
}

/// Writes `model<k>.json` for every benchmark plus `manifest.csv` into `dir`.
pub fn export_all(dir: &std::path::Path) -> Result<Vec<ManifestEntry>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let rows = manifest()?;
    for row in &rows {
        build_model(row.model).save(dir.join(&row.net_file))?;
    }
    let path = dir.join("manifest.csv");
    let mut out = Vec::new();
    writeln!(
        out,
        "model,net_file,reported_variants,enumerated_variants,visit_bound"
    )
    .expect("write to vec");
    for r in &rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.model.get(),
            r.net_file,
            r.reported_variants,
            r.enumerated_variants,
            r.visit_bound
        )
        .expect("write to vec");
    }
    std::fs::write(&path, out).map_err(|e| Error::io(&path, e))?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::petrinet::{playout, PlayoutConfig};
    use std::collections::BTreeSet;

    fn model(i: u8) -> PetriNet {
        build_model(ModelId::new(i).unwrap())
    }

    #[test]
    fn model_ids_are_checked() {
        assert!(ModelId::new(0).is_err());
        assert!(ModelId::new(7).is_err());
        assert_eq!(ModelId::new(6).unwrap().get(), 6);
    }

    #[test]
    fn model1_starts_with_the_and_split() {
        let net = model(1);
        let on = net.enabled(net.initial_marking());
        assert_eq!(on, BTreeSet::from(["and_split".to_string()]));
    }

    #[test]
    fn model1_traces_are_permutations() {
        let variants = enumerate_variants(&model(1), 3).unwrap();
        assert_eq!(variants.len(), 120);
        let expected: BTreeSet<String> = (1..=5).map(|i| format!("M1_A{i}")).collect();
        for v in &variants {
            let set: BTreeSet<String> = v.0.iter().cloned().collect();
            assert_eq!(v.len(), 5);
            assert_eq!(set, expected);
        }
    }

    #[test]
    fn model2_has_128_length7_variants() {
        let variants = enumerate_variants(&model(2), 3).unwrap();
        assert_eq!(variants.len(), 128);
        assert!(variants.iter().all(|v| v.len() == 7));
    }

    #[test]
    fn model2_playout_positions_follow_their_xor() {
        let log = playout(&model(2), &PlayoutConfig::new(1000, 3, 5)).unwrap();
        for t in log.traces() {
            assert_eq!(t.len(), 7);
            for (pos, label) in t.activities().iter().enumerate() {
                let i = pos + 1;
                assert!(label == &format!("M2_A{i}a") || label == &format!("M2_A{i}b"));
            }
        }
    }

    #[test]
    fn model3_last_choice_mirrors_first() {
        let variants = enumerate_variants(&model(3), 3).unwrap();
        assert_eq!(variants.len(), 128);
        for v in &variants {
            assert_eq!(v.len(), 8);
            let first = v.0[0].strip_prefix("M3_A1").unwrap();
            let last = v.0[7].strip_prefix("M3_A8").unwrap();
            assert_eq!(first, last);
        }
    }

    #[test]
    fn model4_has_64_variants() {
        let variants = enumerate_variants(&model(4), 3).unwrap();
        assert_eq!(variants.len(), 64);
        assert!(variants.iter().all(|v| (3..=6).contains(&v.len())));
    }

    #[test]
    fn model5_enumerates_all_interleavings() {
        let variants = enumerate_variants(&model(5), 3).unwrap();
        assert_eq!(variants.len(), 252);
        for v in &variants {
            let pos = |l: &str| v.0.iter().position(|x| x == l).unwrap();
            for k in 1..5 {
                assert!(pos(&format!("M5_A{k}")) < pos(&format!("M5_A{}", k + 1)));
                assert!(pos(&format!("M5_A{}", k + 5)) < pos(&format!("M5_A{}", k + 6)));
            }
        }
    }

    #[test]
    fn model6_bounded_to_three_iterations() {
        let variants = enumerate_variants(&model(6), 3).unwrap();
        assert_eq!(variants.len(), 27);
        assert_eq!(enumerate_variants(&model(6), 1).unwrap().len(), 1);
        assert_eq!(enumerate_variants(&model(6), 2).unwrap().len(), 8);
    }

    #[test]
    fn labels_are_distinct_within_each_model() {
        for id in ModelId::ALL {
            let net = build_model(id);
            let labeled: Vec<&str> = net
                .transitions()
                .iter()
                .filter_map(|t| t.label.as_deref())
                .collect();
            let unique: BTreeSet<&str> = labeled.iter().copied().collect();
            assert_eq!(labeled.len(), unique.len(), "{id}");
        }
    }

    #[test]
    fn export_writes_nets_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let rows = export_all(dir.path()).unwrap();
        assert_eq!(rows.len(), 6);
        let m5 = rows.iter().find(|r| r.model.get() == 5).unwrap();
        assert_eq!((m5.reported_variants, m5.enumerated_variants), (126, 252));
        let reloaded = PetriNet::load(dir.path().join("model2.json")).unwrap();
        assert_eq!(reloaded, model(2));
        let text = std::fs::read_to_string(dir.path().join("manifest.csv")).unwrap();
        assert!(text.lines().count() == 7);
    }
}
