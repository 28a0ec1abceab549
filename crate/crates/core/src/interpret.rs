//! Importance reports built from a forest's per-column Mean Decrease Gini.
//!
//! Per-dataset feature importance sums a feature's columns over all
//! variables, divides by the number of variables and min-max normalizes
//! across features. Per-variable importance sums each variable's columns
//! and divides by the largest variable total.

use std::io::Write;
use std::str::FromStr;

use indexmap::IndexMap;

use crate::classifiers::TrainedModel;
use crate::error::{Error, Result};
use crate::features::stats;
use crate::tabular::{format_float, split_column_name};

/// Min-max normalization; an all-equal input maps to zeros and sets the flag.
pub fn normalize_min_max(values: &[f64]) -> (Vec<f64>, bool) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return (vec![0.0; values.len()], true);
    }
    (values.iter().map(|v| (v - lo) / (hi - lo)).collect(), false)
}

pub fn normalize_by_max(values: &[f64]) -> Result<Vec<f64>> {
    let hi = values.iter().copied().fold(0.0, f64::max);
    if !(hi > 0.0) {
        return Err(Error::Importance("untrained or degenerate forest".into()));
    }
    Ok(values.iter().map(|v| v / hi).collect())
}

/// Sums column importances per (variable, feature) cell, checking that every
/// column belongs to the catalog and to a variable in 1..=dims.
fn accumulate(columns: &[String], importance: &[f64], dims: usize, catalog: &[String]) -> Result<Vec<Vec<f64>>> {
    if columns.len() != importance.len() {
        return Err(Error::Importance(format!(
            "{} columns but {} importance values",
            columns.len(),
            importance.len()
        )));
    }
    let mut grid = vec![vec![0.0; catalog.len()]; dims];
    for (c, &v) in columns.iter().zip(importance) {
        let (d, f) = split_column_name(c)
            .ok_or_else(|| Error::Importance(format!("column {c:?} is not a var<d>_<feature> name")))?;
        let fi = catalog
            .iter()
            .position(|x| x == f)
            .ok_or_else(|| Error::Importance(format!("column {c:?} is not in the feature catalog")))?;
        if d == 0 || d > dims {
            return Err(Error::Importance(format!(
                "column {c:?} refers to a variable outside 1..={dims}"
            )));
        }
        grid[d - 1][fi] += v;
    }
    Ok(grid)
}

fn forest_parts(model: &TrainedModel) -> Result<&[f64]> {
    model
        .importance()
        .ok_or_else(|| Error::Importance(format!("model type {} carries no importance", model.model.kind())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureImportance {
    pub dataset: String,
    pub features: Vec<String>,
    /// Per-feature sum over variables divided by the number of variables.
    pub raw: Vec<f64>,
    /// `raw` min-max normalized into [0, 1].
    pub values: Vec<f64>,
    /// Set when every raw value was equal and `values` is all zeros.
    pub degenerate: bool,
}

impl FeatureImportance {
    pub fn total(&self) -> f64 {
        stats::sum(&self.values)
    }
}

pub fn feature_importance_by_dataset(
    dataset: &str,
    columns: &[String],
    importance: &[f64],
    dims: usize,
    catalog: &[String],
) -> Result<FeatureImportance> {
    if dims == 0 {
        return Err(Error::Importance("dataset has no variables".into()));
    }
    let grid = accumulate(columns, importance, dims, catalog)?;
    let raw: Vec<f64> = (0..catalog.len())
        .map(|f| grid.iter().map(|row| row[f]).sum::<f64>() / dims as f64)
        .collect();
    let (values, degenerate) = normalize_min_max(&raw);
    Ok(FeatureImportance {
        dataset: dataset.to_string(),
        features: catalog.to_vec(),
        raw,
        values,
        degenerate,
    })
}

pub fn feature_importance_of_model(model: &TrainedModel) -> Result<FeatureImportance> {
    feature_importance_by_dataset(
        &model.dataset,
        &model.columns,
        forest_parts(model)?,
        model.dims,
        &model.catalog,
    )
}

/// Mean of the normalized per-dataset values, per feature.
pub fn average_feature_importance(reports: &[FeatureImportance]) -> Result<IndexMap<String, f64>> {
    let first = reports
        .first()
        .ok_or_else(|| Error::Importance("no dataset reports to average".into()))?;
    let mut out: IndexMap<String, f64> = first.features.iter().map(|f| (f.clone(), 0.0)).collect();
    for r in reports {
        if r.features != first.features {
            return Err(Error::Importance(format!(
                "dataset {} uses a different feature catalog",
                r.dataset
            )));
        }
        for (f, v) in r.features.iter().zip(&r.values) {
            out[f] += v;
        }
    }
    let n = reports.len() as f64;
    out.values_mut().for_each(|v| *v /= n);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VarianceKind {
    #[default]
    Sample,
    Population,
}

impl FromStr for VarianceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sample" => Ok(VarianceKind::Sample),
            "population" => Ok(VarianceKind::Population),
            other => Err(Error::Config(format!("unknown variance kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariableStats {
    pub sum: f64,
    pub max: f64,
    pub min: f64,
    pub mean: f64,
    pub median: f64,
    pub var: f64,
    pub sd: f64,
    pub variables: usize,
}

impl VariableStats {
    pub fn of(values: &[f64], kind: VarianceKind) -> VariableStats {
        let n = values.len();
        let sum = stats::sum(values);
        let mean = sum / n as f64;
        let ss = stats::sum(&values.iter().map(|v| (v - mean) * (v - mean)).collect::<Vec<_>>());
        let var = match (kind, n) {
            (_, 0 | 1) => 0.0,
            (VarianceKind::Sample, _) => ss / (n - 1) as f64,
            (VarianceKind::Population, _) => ss / n as f64,
        };
        VariableStats {
            sum,
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            mean,
            median: stats::median(values),
            var,
            sd: var.sqrt(),
            variables: n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableImportance {
    pub dataset: String,
    /// Per-variable totals divided by the largest total; the maximum is 1.
    pub values: Vec<f64>,
    pub stats: VariableStats,
}

pub fn variable_importance(
    dataset: &str,
    columns: &[String],
    importance: &[f64],
    dims: usize,
    catalog: &[String],
    kind: VarianceKind,
) -> Result<VariableImportance> {
    let grid = accumulate(columns, importance, dims, catalog)?;
    let totals: Vec<f64> = grid.iter().map(|row| stats::sum(row)).collect();
    let values = normalize_by_max(&totals)?;
    let stats = VariableStats::of(&values, kind);
    Ok(VariableImportance {
        dataset: dataset.to_string(),
        values,
        stats,
    })
}

pub fn variable_importance_of_model(model: &TrainedModel, kind: VarianceKind) -> Result<VariableImportance> {
    variable_importance(
        &model.dataset,
        &model.columns,
        forest_parts(model)?,
        model.dims,
        &model.catalog,
        kind,
    )
}

/// Equal-width bin counts over [0, 1]. Bins are right-closed, (a, b], with
/// 0 itself in the first bin; values outside [0, 1] are clamped.
pub fn histogram(values: &[f64], bins: usize) -> Vec<usize> {
    let mut counts = vec![0; bins];
    if bins == 0 {
        return counts;
    }
    for &v in values {
        let scaled = v.clamp(0.0, 1.0) * bins as f64;
        let nearest = scaled.round();
        let edge = if (scaled - nearest).abs() < 1e-9 {
            nearest
        } else {
            scaled.ceil()
        };
        let idx = (edge as usize).saturating_sub(1).min(bins - 1);
        counts[idx] += 1;
    }
    counts
}

fn flush<W: Write>(mut w: csv::Writer<W>, what: &str) -> Result<()> {
    w.flush().map_err(|e| Error::io(what, e))
}

/// `dataset,feature,importance` in report order.
pub fn write_heatmap_csv<W: Write>(reports: &[FeatureImportance], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["dataset", "feature", "importance"])?;
    for r in reports {
        for (f, v) in r.features.iter().zip(&r.values) {
            w.write_record([r.dataset.as_str(), f, &format_float(*v)])?;
        }
    }
    flush(w, "<heatmap csv>")
}

/// Datasets ordered by total normalized importance (descending, stable).
pub fn ordered_datasets(reports: &[FeatureImportance]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..reports.len()).collect();
    order.sort_by(|&a, &b| reports[b].total().total_cmp(&reports[a].total()));
    order
}

/// Like the heatmap CSV, with datasets in `ordered_datasets` order, features
/// by descending importance and a 1-based `rank` within the dataset.
pub fn write_ordered_heatmap_csv<W: Write>(reports: &[FeatureImportance], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["dataset", "feature", "importance", "rank"])?;
    for d in ordered_datasets(reports) {
        let r = &reports[d];
        let mut idx: Vec<usize> = (0..r.values.len()).collect();
        idx.sort_by(|&a, &b| r.values[b].total_cmp(&r.values[a]));
        for (rank, &f) in idx.iter().enumerate() {
            w.write_record([
                r.dataset.as_str(),
                &r.features[f],
                &format_float(r.values[f]),
                &(rank + 1).to_string(),
            ])?;
        }
    }
    flush(w, "<ordered heatmap csv>")
}

pub fn write_average_csv<W: Write>(average: &IndexMap<String, f64>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["feature", "importance"])?;
    for (f, v) in average {
        w.write_record([f.as_str(), &format_float(*v)])?;
    }
    flush(w, "<average importance csv>")
}

/// `dataset,variable,importance` with 1-based variables.
pub fn write_variable_csv<W: Write>(reports: &[VariableImportance], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["dataset", "variable", "importance"])?;
    for r in reports {
        for (d, v) in r.values.iter().enumerate() {
            w.write_record([r.dataset.as_str(), &(d + 1).to_string(), &format_float(*v)])?;
        }
    }
    flush(w, "<variable csv>")
}

pub fn write_stats_csv<W: Write>(reports: &[VariableImportance], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "Datasets",
        "Sum",
        "Max",
        "Min",
        "Mean",
        "Median",
        "Var",
        "SD",
        "Variables",
    ])?;
    for r in reports {
        let s = &r.stats;
        let mut rec = vec![r.dataset.clone()];
        rec.extend([s.sum, s.max, s.min, s.mean, s.median, s.var, s.sd].map(format_float));
        rec.push(s.variables.to_string());
        w.write_record(&rec)?;
    }
    flush(w, "<stats csv>")
}

pub fn write_histogram_csv<W: Write>(reports: &[VariableImportance], bins: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["dataset", "bin", "lower", "upper", "count"])?;
    for r in reports {
        for (b, c) in histogram(&r.values, bins).into_iter().enumerate() {
            w.write_record([
                r.dataset.clone(),
                (b + 1).to_string(),
                format_float(b as f64 / bins as f64),
                format_float((b + 1) as f64 / bins as f64),
                c.to_string(),
            ])?;
        }
    }
    flush(w, "<histogram csv>")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn min_max_examples() {
        assert_eq!(normalize_min_max(&[2.0, 4.0, 1.0]), (vec![1.0 / 3.0, 1.0, 0.0], false));
        assert_eq!(normalize_min_max(&[0.5, 0.5]), (vec![0.0, 0.0], true));
    }

    #[test]
    fn dropped_feature_counts_as_zero() {
        let catalog = names(&["a", "b", "c"]);
        // feature c has no surviving column
        let cols = names(&["var1_a", "var1_b", "var2_a", "var2_b"]);
        let r = feature_importance_by_dataset("d", &cols, &[1.0, 3.0, 3.0, 5.0], 2, &catalog).unwrap();
        assert_eq!(r.raw, vec![2.0, 4.0, 0.0]);
        assert_eq!(r.values, vec![0.5, 1.0, 0.0]);
    }

    #[test]
    fn unknown_column_is_an_error() {
        let r = feature_importance_by_dataset("d", &names(&["var1_zz"]), &[1.0], 1, &names(&["a"]));
        assert!(r.is_err());
        let r = feature_importance_by_dataset("d", &names(&["var3_a"]), &[1.0], 2, &names(&["a"]));
        assert!(r.is_err());
    }

    #[test]
    fn variable_values_and_stats() {
        let cat = names(&["a", "b"]);
        let cols = names(&["var1_a", "var1_b", "var2_a", "var2_b"]);
        let r = variable_importance("d", &cols, &[0.5, 0.5, 0.4, 0.4], 2, &cat, VarianceKind::Sample).unwrap();
        assert_eq!(r.values, vec![1.0, 0.8]);
        assert!((r.stats.sum - 1.8).abs() < 1e-12);
        assert!((r.stats.mean - 0.9).abs() < 1e-12);
        assert!((r.stats.var - 0.02).abs() < 1e-12);
        let p = VariableStats::of(&r.values, VarianceKind::Population);
        assert!((p.var - 0.01).abs() < 1e-12);
        let zero = variable_importance("d", &cols, &[0.0; 4], 2, &cat, VarianceKind::Sample);
        assert!(zero.unwrap_err().to_string().contains("untrained or degenerate forest"));
    }

    #[test]
    fn histogram_bins() {
        assert_eq!(histogram(&[1.0, 0.839], 10), vec![0, 0, 0, 0, 0, 0, 0, 0, 1, 1]);
        assert_eq!(
            histogram(&[0.0, 0.1, 0.3, 0.30001], 10),
            vec![2, 0, 1, 1, 0, 0, 0, 0, 0, 0]
        );
        assert_eq!(histogram(&[1.0; 4], 10)[9], 4);
    }

    #[test]
    fn ordered_datasets_are_stable() {
        let mk = |d: &str, v: Vec<f64>| FeatureImportance {
            dataset: d.into(),
            features: names(&["a", "b"]),
            raw: v.clone(),
            values: v,
            degenerate: false,
        };
        let reps = vec![
            mk("x", vec![0.0, 1.0]),
            mk("y", vec![1.0, 1.0]),
            mk("z", vec![1.0, 0.0]),
        ];
        assert_eq!(ordered_datasets(&reps), vec![1, 0, 2]);
    }
}
