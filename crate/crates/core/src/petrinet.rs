//! Labeled place/transition nets, play-out and bounded variant enumeration.
//!
//! Arcs have weight one. Transitions with no label are silent: they fire like
//! any other transition but leave no event in the trace.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::Path;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eventlog::{EventLog, Trace, Variant};
use crate::rng;

/// Attempts per trace before play-out gives up on a dead-ending net.
pub const PLAYOUT_RETRIES: usize = 100;

/// A single run is abandoned after this many firings. Only reachable for
/// nets whose markings keep growing, where the visit bound never triggers.
pub const MAX_RUN_FIRINGS: usize = 100_000;

pub const DEFAULT_ENUMERATION_BUDGET: usize = 5_000_000;

/// Token counts per place; absent places hold zero tokens.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Marking(BTreeMap<String, u32>);

impl Marking {
    pub fn new() -> Self {
        Marking::default()
    }

    pub fn with<S: Into<String>>(tokens: impl IntoIterator<Item = (S, u32)>) -> Self {
        let mut m = Marking::new();
        for (p, n) in tokens {
            m.set(p, n);
        }
        m
    }

    pub fn get(&self, place: &str) -> u32 {
        self.0.get(place).copied().unwrap_or(0)
    }

    pub fn set(&mut self, place: impl Into<String>, count: u32) {
        let place = place.into();
        if count == 0 {
            self.0.remove(&place);
        } else {
            self.0.insert(place, count);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.0.iter().map(|(p, &n)| (p.as_str(), n))
    }

    pub fn total(&self) -> u64 {
        self.0.values().map(|&n| u64::from(n)).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub id: String,
    /// `None` for a silent transition.
    pub label: Option<String>,
}

impl Transition {
    pub fn labeled(id: impl Into<String>, label: impl Into<String>) -> Self {
        Transition {
            id: id.into(),
            label: Some(label.into()),
        }
    }

    pub fn silent(id: impl Into<String>) -> Self {
        Transition {
            id: id.into(),
            label: None,
        }
    }
}

/// On-disk form of a net. Arcs are `[from, to]` pairs; one endpoint must be a
/// place and the other a transition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetDocument {
    pub places: Vec<String>,
    pub transitions: Vec<Transition>,
    pub arcs: Vec<(String, String)>,
    pub initial_marking: Marking,
    pub final_marking: Marking,
}

type Dense = Vec<u32>;

/// A validated net with dense index tables for fast firing.
#[derive(Clone, Debug)]
pub struct PetriNet {
    doc: NetDocument,
    place_index: HashMap<String, usize>,
    transition_index: HashMap<String, usize>,
    inputs: Vec<Vec<usize>>,
    outputs: Vec<Vec<usize>>,
    initial: Dense,
    final_: Dense,
}

impl PartialEq for PetriNet {
    fn eq(&self, other: &Self) -> bool {
        self.doc == other.doc
    }
}

impl PetriNet {
    pub fn new(doc: NetDocument) -> Result<Self> {
        let mut place_index = HashMap::new();
        for (i, p) in doc.places.iter().enumerate() {
            if place_index.insert(p.clone(), i).is_some() {
                return Err(Error::InvalidNet(format!("duplicate place `{p}`")));
            }
        }
        let mut transition_index = HashMap::new();
        for (i, t) in doc.transitions.iter().enumerate() {
            if place_index.contains_key(&t.id) {
                return Err(Error::InvalidNet(format!(
                    "`{}` names both a place and a transition",
                    t.id
                )));
            }
            if transition_index.insert(t.id.clone(), i).is_some() {
                return Err(Error::InvalidNet(format!(
                    "duplicate transition `{}`",
                    t.id
                )));
            }
        }
        if !doc.transitions.iter().any(|t| t.label.is_some()) {
            return Err(Error::InvalidNet("net has no labeled transition".into()));
        }

        let mut inputs = vec![Vec::new(); doc.transitions.len()];
        let mut outputs = vec![Vec::new(); doc.transitions.len()];
        let mut seen = HashSet::new();
        for (from, to) in &doc.arcs {
            if !seen.insert((from.as_str(), to.as_str())) {
                return Err(Error::InvalidNet(format!("duplicate arc {from} -> {to}")));
            }
            match (
                place_index.get(from),
                transition_index.get(to),
                transition_index.get(from),
                place_index.get(to),
            ) {
                (Some(&p), Some(&t), _, _) => inputs[t].push(p),
                (_, _, Some(&t), Some(&p)) => outputs[t].push(p),
                _ => {
                    return Err(Error::InvalidNet(format!(
                        "arc {from} -> {to} must connect an existing place and transition"
                    )))
                }
            }
        }
        for list in inputs.iter_mut().chain(outputs.iter_mut()) {
            list.sort_unstable();
        }

        let dense = |m: &Marking, what: &str| -> Result<Dense> {
            let mut d = vec![0; doc.places.len()];
            for (p, n) in m.iter() {
                let &i = place_index.get(p).ok_or_else(|| {
                    Error::InvalidNet(format!("{what} marks unknown place `{p}`"))
                })?;
                d[i] = n;
            }
            Ok(d)
        };
        let initial = dense(&doc.initial_marking, "initial marking")?;
        let final_ = dense(&doc.final_marking, "final marking")?;

        Ok(PetriNet {
            doc,
            place_index,
            transition_index,
            inputs,
            outputs,
            initial,
            final_,
        })
    }

    pub fn document(&self) -> &NetDocument {
        &self.doc
    }

    pub fn places(&self) -> &[String] {
        &self.doc.places
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.doc.transitions
    }

    pub fn initial_marking(&self) -> &Marking {
        &self.doc.initial_marking
    }

    pub fn final_marking(&self) -> &Marking {
        &self.doc.final_marking
    }

    /// Distinct non-silent labels, sorted.
    pub fn labels(&self) -> BTreeSet<&str> {
        self.doc
            .transitions
            .iter()
            .filter_map(|t| t.label.as_deref())
            .collect()
    }

    pub fn inputs(&self, transition: &str) -> Result<Vec<&str>> {
        let t = self.transition(transition)?;
        Ok(self.inputs[t]
            .iter()
            .map(|&p| self.doc.places[p].as_str())
            .collect())
    }

    pub fn outputs(&self, transition: &str) -> Result<Vec<&str>> {
        let t = self.transition(transition)?;
        Ok(self.outputs[t]
            .iter()
            .map(|&p| self.doc.places[p].as_str())
            .collect())
    }

    fn transition(&self, id: &str) -> Result<usize> {
        self.transition_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownTransition(id.to_owned()))
    }

    /// Places outside the net are ignored.
    fn to_dense(&self, m: &Marking) -> Dense {
        let mut d = vec![0; self.doc.places.len()];
        for (p, n) in m.iter() {
            if let Some(&i) = self.place_index.get(p) {
                d[i] = n;
            }
        }
        d
    }

    fn to_marking(&self, d: &[u32]) -> Marking {
        Marking::with(
            d.iter()
                .enumerate()
                .filter(|(_, &n)| n > 0)
                .map(|(i, &n)| (self.doc.places[i].clone(), n)),
        )
    }

    fn is_enabled(&self, m: &[u32], t: usize) -> bool {
        self.inputs[t].iter().all(|&p| m[p] >= 1)
    }

    fn fire_dense(&self, m: &mut [u32], t: usize) {
        for &p in &self.inputs[t] {
            m[p] -= 1;
        }
        for &p in &self.outputs[t] {
            m[p] += 1;
        }
    }

    /// Ids of the transitions whose input places all hold a token.
    pub fn enabled(&self, m: &Marking) -> BTreeSet<String> {
        let d = self.to_dense(m);
        (0..self.doc.transitions.len())
            .filter(|&t| self.is_enabled(&d, t))
            .map(|t| self.doc.transitions[t].id.clone())
            .collect()
    }

    pub fn fire(&self, m: &Marking, transition: &str) -> Result<Marking> {
        let t = self.transition(transition)?;
        let mut d = self.to_dense(m);
        if !self.is_enabled(&d, t) {
            return Err(Error::NotEnabled(transition.to_owned()));
        }
        self.fire_dense(&mut d, t);
        Ok(self.to_marking(&d))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        PetriNet::new(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }
}

pub fn enabled(net: &PetriNet, m: &Marking) -> BTreeSet<String> {
    net.enabled(m)
}

pub fn fire(net: &PetriNet, m: &Marking, transition: &str) -> Result<Marking> {
    net.fire(m, transition)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayoutConfig {
    pub n_traces: usize,
    /// Upper bound on how often one full marking may occur within a run.
    pub max_marking_visits: usize,
    pub seed: u64,
}

impl PlayoutConfig {
    pub fn new(n_traces: usize, max_marking_visits: usize, seed: u64) -> Self {
        PlayoutConfig {
            n_traces,
            max_marking_visits,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_traces == 0 || self.max_marking_visits == 0 {
            return Err(Error::InvalidConfig(
                "play-out needs n_traces >= 1 and max_marking_visits >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Per-run bookkeeping of how often each marking has been reached.
struct Visits {
    counts: HashMap<Dense, usize>,
    bound: usize,
}

impl Visits {
    fn start(initial: &Dense, bound: usize) -> Self {
        let mut counts = HashMap::new();
        counts.insert(initial.clone(), 1);
        Visits { counts, bound }
    }

    fn admits(&self, m: &Dense) -> bool {
        self.counts.get(m).copied().unwrap_or(0) < self.bound
    }

    fn enter(&mut self, m: &Dense) {
        *self.counts.entry(m.clone()).or_default() += 1;
    }

    fn leave(&mut self, m: &Dense) {
        if let Some(n) = self.counts.get_mut(m) {
            *n -= 1;
            if *n == 0 {
                self.counts.remove(m);
            }
        }
    }
}

impl PetriNet {
    /// Transitions that are enabled in `m` and whose successor marking is
    /// still under the visit bound.
    fn admissible(&self, m: &Dense, visits: &Visits, scratch: &mut Dense) -> Vec<usize> {
        (0..self.doc.transitions.len())
            .filter(|&t| self.is_enabled(m, t))
            .filter(|&t| {
                scratch.clone_from(m);
                self.fire_dense(scratch, t);
                visits.admits(scratch)
            })
            .collect()
    }

    fn run_once(&self, bound: usize, rng: &mut rng::Rng) -> Option<Trace> {
        let mut m = self.initial.clone();
        let mut visits = Visits::start(&m, bound);
        let mut scratch = m.clone();
        let mut labels = Vec::new();
        for _ in 0..MAX_RUN_FIRINGS {
            if m == self.final_ {
                return Some(Trace(labels));
            }
            let choices = self.admissible(&m, &visits, &mut scratch);
            if choices.is_empty() {
                return None;
            }
            let t = choices[rng.random_range(0..choices.len())];
            self.fire_dense(&mut m, t);
            visits.enter(&m);
            if let Some(l) = &self.doc.transitions[t].label {
                labels.push(l.clone());
            }
        }
        None
    }
}

/// Random firing runs from the initial to the final marking, choosing
/// uniformly among admissible transitions at every step.
pub fn playout(net: &PetriNet, cfg: &PlayoutConfig) -> Result<EventLog> {
    cfg.validate()?;
    let mut rng = rng::seeded(cfg.seed);
    let mut traces = Vec::with_capacity(cfg.n_traces);
    for i in 0..cfg.n_traces {
        let trace = (0..PLAYOUT_RETRIES)
            .find_map(|_| net.run_once(cfg.max_marking_visits, &mut rng))
            .ok_or(Error::PlayoutExhausted {
                trace: i,
                attempts: PLAYOUT_RETRIES,
            })?;
        traces.push(trace);
    }
    Ok(EventLog::new(traces))
}

/// Every distinct label sequence that reaches the final marking without any
/// marking occurring more than `max_marking_visits` times in the run.
pub fn enumerate_variants(net: &PetriNet, max_marking_visits: usize) -> Result<BTreeSet<Variant>> {
    enumerate_variants_with_budget(net, max_marking_visits, DEFAULT_ENUMERATION_BUDGET)
}

pub fn enumerate_variants_with_budget(
    net: &PetriNet,
    max_marking_visits: usize,
    budget: usize,
) -> Result<BTreeSet<Variant>> {
    if max_marking_visits == 0 {
        return Err(Error::InvalidConfig(
            "max_marking_visits must be >= 1".into(),
        ));
    }
    let mut visits = Visits::start(&net.initial, max_marking_visits);
    let mut found = BTreeSet::new();
    let mut labels: Vec<String> = Vec::new();
    if net.initial == net.final_ {
        found.insert(Variant::default());
        return Ok(found);
    }
    let mut scratch = net.initial.clone();
    let mut stack = vec![Frame {
        choices: net.admissible(&net.initial, &visits, &mut scratch),
        marking: net.initial.clone(),
        next: 0,
        labeled: false,
    }];
    let mut fired = 0usize;
    while let Some(top) = stack.last_mut() {
        if top.next == top.choices.len() {
            let done = stack.pop().expect("non-empty stack");
            if !stack.is_empty() {
                visits.leave(&done.marking);
            }
            if done.labeled {
                labels.pop();
            }
            continue;
        }
        let t = top.choices[top.next];
        top.next += 1;
        fired += 1;
        if fired > budget {
            return Err(Error::ExplorationBudget(budget));
        }
        let mut m = top.marking.clone();
        net.fire_dense(&mut m, t);
        visits.enter(&m);
        let labeled = match &net.doc.transitions[t].label {
            Some(l) => {
                labels.push(l.clone());
                true
            }
            None => false,
        };
        if m == net.final_ {
            if !found.contains(labels.as_slice()) {
                found.insert(Variant(labels.clone()));
            }
            visits.leave(&m);
            if labeled {
                labels.pop();
            }
            continue;
        }
        let choices = net.admissible(&m, &visits, &mut scratch);
        stack.push(Frame {
            marking: m,
            choices,
            next: 0,
            labeled,
        });
    }
    Ok(found)
}

struct Frame {
    marking: Dense,
    choices: Vec<usize>,
    next: usize,
    labeled: bool,
}
