//! Variant-multiplicity fitness, precision and generalisation.
//!
//! All three metrics sum `min(Occ(v, Sim), Occ(v, Ref))` over a variant set
//! and normalise by a log size. When `|Sim|` differs from `|Tr+Te|` the
//! simulated counts are scaled by `|Tr+Te| / |Sim|` before taking the min.
//! The scaling is carried out in integers (`min(occ_sim * N, occ_ref * S)`
//! with a single final division) so results are exact and independent of
//! summation order.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eventlog::EventLog;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub fitness: f64,
    pub precision: f64,
    pub generalisation: f64,
    pub size_tr: usize,
    pub size_te: usize,
    pub size_sim: usize,
    /// `|Tr+Te| / |Sim|`; 1 when the simulated log has the reference size.
    pub correction: f64,
}

impl MetricsReport {
    pub fn mean_score(&self) -> f64 {
        (self.fitness + self.precision + self.generalisation) / 3.0
    }
}

fn counts(log: &EventLog) -> HashMap<&[String], u128> {
    let mut m = HashMap::new();
    for t in log.traces() {
        *m.entry(t.activities()).or_default() += 1;
    }
    m
}

/// `Σ_{v ∈ Var(over)} min(occ_sim(v) * n_ref, occ_ref(v) * n_sim)` where the
/// `Var(over)` iteration domain is either the reference or the simulated log.
fn overlap(
    over: &HashMap<&[String], u128>,
    sim: &HashMap<&[String], u128>,
    reference: &HashMap<&[String], u128>,
    sim_scale: u128,
    ref_scale: u128,
) -> u128 {
    over.keys()
        .map(|v| {
            let s = sim.get(v).copied().unwrap_or(0) * sim_scale;
            let r = reference.get(v).copied().unwrap_or(0) * ref_scale;
            s.min(r)
        })
        .sum()
}

fn ratio(num: u128, den: u128) -> f64 {
    num as f64 / den as f64
}

/// Share of the training log's variant multiplicities reproduced in `sim`.
pub fn fitness(sim: &EventLog, tr: &EventLog) -> Result<f64> {
    if tr.is_empty() {
        return Err(Error::EmptyLog("training"));
    }
    let (s, r) = (counts(sim), counts(tr));
    Ok(ratio(overlap(&r, &s, &r, 1, 1), tr.len() as u128))
}

/// Share of the simulated log that is backed, by multiplicity, in `full`.
pub fn precision(sim: &EventLog, full: &EventLog) -> Result<f64> {
    if sim.is_empty() {
        return Err(Error::EmptyLog("simulated"));
    }
    let (s, r) = (counts(sim), counts(full));
    Ok(ratio(overlap(&s, &s, &r, 1, 1), sim.len() as u128))
}

/// Share of the held-out test variants' multiplicities reproduced in `sim`.
pub fn generalisation(sim: &EventLog, te: &EventLog) -> Result<f64> {
    if te.is_empty() {
        return Err(Error::EmptyLog("test"));
    }
    let (s, r) = (counts(sim), counts(te));
    Ok(ratio(overlap(&r, &s, &r, 1, 1), te.len() as u128))
}

/// All three metrics with the size correction applied to `sim`.
pub fn evaluate(sim: &EventLog, tr: &EventLog, te: &EventLog) -> Result<MetricsReport> {
    if tr.is_empty() {
        return Err(Error::EmptyLog("training"));
    }
    if te.is_empty() {
        return Err(Error::EmptyLog("test"));
    }
    if sim.is_empty() {
        return Err(Error::EmptyLog("simulated"));
    }
    let n = (tr.len() + te.len()) as u128;
    let s_len = sim.len() as u128;
    let s = counts(sim);
    let tr_c = counts(tr);
    let te_c = counts(te);
    let mut full_c = tr_c.clone();
    for (k, v) in &te_c {
        *full_c.entry(k).or_default() += v;
    }

    // Scaled Occ(v,Sim) = occ * n / s_len; multiply both sides by s_len.
    let fitness = ratio(
        overlap(&tr_c, &s, &tr_c, n, s_len),
        tr.len() as u128 * s_len,
    );
    let generalisation = ratio(
        overlap(&te_c, &s, &te_c, n, s_len),
        te.len() as u128 * s_len,
    );
    // The scaled simulated log has n traces.
    let precision = ratio(overlap(&s, &s, &full_c, n, s_len), n * s_len);

    Ok(MetricsReport {
        fitness,
        precision,
        generalisation,
        size_tr: tr.len(),
        size_te: te.len(),
        size_sim: sim.len(),
        correction: ratio(n, s_len),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eventlog::Trace;

    fn log(spec: &[(&str, usize)]) -> EventLog {
        spec.iter()
            .flat_map(|&(v, n)| std::iter::repeat_n(Trace::new(v.split(',')), n))
            .collect()
    }

    #[test]
    fn fitness_examples() {
        let tr = log(&[("A", 6), ("B", 4)]);
        let sim = log(&[("A", 7), ("B", 4), ("C", 1)]);
        assert_eq!(fitness(&sim, &tr).unwrap(), 1.0);
        assert_eq!(fitness(&log(&[("A", 12)]), &tr).unwrap(), 0.6);
    }

    #[test]
    fn precision_examples() {
        let full = log(&[("A", 6), ("B", 4), ("C", 2)]);
        let sim = log(&[("A", 7), ("B", 4), ("C", 1)]);
        assert_eq!(precision(&sim, &full).unwrap(), 11.0 / 12.0);
        let sim = log(&[("A", 6), ("B", 4), ("D", 2)]);
        assert_eq!(precision(&sim, &full).unwrap(), 10.0 / 12.0);
        assert_eq!(precision(&full, &full).unwrap(), 1.0);
    }

    #[test]
    fn generalisation_examples() {
        let te = log(&[("C", 2)]);
        let sim = log(&[("A", 7), ("B", 4), ("C", 1)]);
        assert_eq!(generalisation(&sim, &te).unwrap(), 0.5);
        assert_eq!(generalisation(&log(&[("A", 3)]), &te).unwrap(), 0.0);
    }

    #[test]
    fn empty_logs_are_errors() {
        let l = log(&[("A", 1)]);
        let e = EventLog::default();
        assert!(fitness(&l, &e).is_err());
        assert!(precision(&e, &l).is_err());
        assert!(generalisation(&l, &e).is_err());
        assert!(evaluate(&e, &l, &l).is_err());
    }

    #[test]
    fn evaluate_without_correction_matches_components() {
        let tr = log(&[("A", 6), ("B", 4)]);
        let te = log(&[("C", 2)]);
        let sim = log(&[("A", 7), ("B", 4), ("C", 1)]);
        let r = evaluate(&sim, &tr, &te).unwrap();
        assert_eq!(r.correction, 1.0);
        assert_eq!(r.fitness, 1.0);
        assert_eq!(r.precision, 11.0 / 12.0);
        assert_eq!(r.generalisation, 0.5);
    }

    #[test]
    fn doubling_sim_leaves_report_unchanged() {
        let tr = log(&[("A", 6), ("B", 4)]);
        let te = log(&[("C", 2)]);
        let sim = log(&[("A", 7), ("B", 4), ("C", 1)]);
        let doubled = sim.concat(&sim);
        let a = evaluate(&sim, &tr, &te).unwrap();
        let b = evaluate(&doubled, &tr, &te).unwrap();
        assert_eq!(
            (a.fitness, a.precision, a.generalisation),
            (b.fitness, b.precision, b.generalisation)
        );
        assert_eq!(b.correction, 0.5);
    }

    #[test]
    fn identity_gives_ones() {
        let tr = log(&[("A", 6), ("B", 4)]);
        let te = log(&[("C", 2)]);
        let r = evaluate(&tr.concat(&te), &tr, &te).unwrap();
        assert_eq!((r.fitness, r.precision, r.generalisation), (1.0, 1.0, 1.0));
    }
}
