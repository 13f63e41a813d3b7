use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::MetricsReport;

/// One row of `folds.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldRow {
    pub model: String,
    pub fold: usize,
    /// Held-out variants, labels joined by `;`, variants by ` | `.
    pub test_variants: String,
    pub fitness: f64,
    pub precision: f64,
    pub generalisation: f64,
    pub size_tr: usize,
    pub size_te: usize,
    pub size_sim: usize,
    pub correction: f64,
}

impl FoldRow {
    pub fn new(model: &str, fold: usize, test_variants: String, r: &MetricsReport) -> Self {
        FoldRow {
            model: model.to_owned(),
            fold,
            test_variants,
            fitness: r.fitness,
            precision: r.precision,
            generalisation: r.generalisation,
            size_tr: r.size_tr,
            size_te: r.size_te,
            size_sim: r.size_sim,
            correction: r.correction,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Arithmetic mean and population standard deviation. Values are summed
    /// in sorted order so the result does not depend on row order.
    pub fn of(values: &[f64]) -> MeanStd {
        let mut values = values.to_vec();
        values.sort_by(f64::total_cmp);
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        MeanStd {
            mean,
            std: var.sqrt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub model: String,
    pub setting: String,
    pub fitness: MeanStd,
    pub precision: MeanStd,
    pub generalisation: MeanStd,
    pub folds: usize,
}

impl AggregateRow {
    pub fn mean_score(&self) -> f64 {
        (self.fitness.mean + self.precision.mean + self.generalisation.mean) / 3.0
    }
}

/// Groups rows by model (in first-appearance order) and summarizes each group.
pub fn aggregate(rows: &[FoldRow], setting: &str) -> Vec<AggregateRow> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: BTreeMap<&str, Vec<&FoldRow>> = BTreeMap::new();
    for r in rows {
        let g = groups.entry(&r.model).or_default();
        if g.is_empty() {
            order.push(&r.model);
        }
        g.push(r);
    }
    order
        .into_iter()
        .map(|model| {
            let g = &groups[model];
            let col =
                |f: fn(&FoldRow) -> f64| MeanStd::of(&g.iter().map(|r| f(r)).collect::<Vec<_>>());
            AggregateRow {
                model: model.to_owned(),
                setting: setting.to_owned(),
                fitness: col(|r| r.fitness),
                precision: col(|r| r.precision),
                generalisation: col(|r| r.generalisation),
                folds: g.len(),
            }
        })
        .collect()
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| {
        if !e.is_io_error() {
            return Error::Csv(e);
        }
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!("checked io kind"),
        }
    }
}

pub fn write_folds_csv(rows: &[FoldRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record([
        "model",
        "fold",
        "test_variants",
        "fitness",
        "precision",
        "generalisation",
        "size_tr",
        "size_te",
        "size_sim",
        "correction",
    ])
    .map_err(csv_err(path))?;
    for r in rows {
        w.write_record([
            r.model.clone(),
            r.fold.to_string(),
            r.test_variants.clone(),
            r.fitness.to_string(),
            r.precision.to_string(),
            r.generalisation.to_string(),
            r.size_tr.to_string(),
            r.size_te.to_string(),
            r.size_sim.to_string(),
            r.correction.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_folds_csv(path: &Path) -> Result<Vec<FoldRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize().map(|row| row.map_err(Error::Csv)).collect()
}

pub fn write_aggregate_csv(rows: &[AggregateRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record([
        "model",
        "setting",
        "fitness_mean",
        "fitness_std",
        "precision_mean",
        "precision_std",
        "generalisation_mean",
        "generalisation_std",
        "folds",
    ])
    .map_err(csv_err(path))?;
    for r in rows {
        w.write_record([
            r.model.clone(),
            r.setting.clone(),
            r.fitness.mean.to_string(),
            r.fitness.std.to_string(),
            r.precision.mean.to_string(),
            r.precision.std.to_string(),
            r.generalisation.mean.to_string(),
            r.generalisation.std.to_string(),
            r.folds.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Markdown table with one row per (model, setting) and `mean ± std` cells.
pub fn markdown_table(rows: &[AggregateRow]) -> String {
    let mut out = String::from(
        "| Model | Setting | Folds | Fitness | Precision | Generalisation |\n|---|---|---|---|---|---|\n",
    );
    let cell = |m: &MeanStd| format!("{:.2} ± {:.2}", m.mean, m.std);
    for r in rows {
        writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} |",
            r.model,
            r.setting,
            r.folds,
            cell(&r.fitness),
            cell(&r.precision),
            cell(&r.generalisation)
        )
        .expect("write to string");
    }
    out
}
