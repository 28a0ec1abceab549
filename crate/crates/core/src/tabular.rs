//! Reshaping per-channel features into one wide row per instance, and the
//! feature CSV format.

use std::io::{Read, Write};

use rayon::prelude::*;

use crate::data::MtsDataset;
use crate::error::{Error, Result};
use crate::features::{extract_features, FeatureCatalog, FeatureValue};

/// One row per instance; columns `var{d}_{feature}` in channel-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub column_names: Vec<String>,
    pub rows: Vec<Vec<FeatureValue>>,
    pub labels: Vec<String>,
    pub instance_ids: Vec<String>,
}

pub fn column_name(dim: usize, feature: &str) -> String {
    format!("var{dim}_{feature}")
}

/// Splits `var{d}_{feature}` into its 1-based variable index and feature name.
pub fn split_column_name(name: &str) -> Option<(usize, &str)> {
    let rest = name.strip_prefix("var")?;
    let (digits, feature) = rest.split_once('_')?;
    let d: usize = digits.parse().ok()?;
    (d >= 1 && !feature.is_empty()).then_some((d, feature))
}

/// Channel-major column names for `dims` variables.
pub fn column_names(dims: usize, catalog: &FeatureCatalog) -> Vec<String> {
    (1..=dims)
        .flat_map(|d| catalog.names().into_iter().map(move |f| column_name(d, f)))
        .collect()
}

impl FeatureMatrix {
    pub fn new(
        column_names: Vec<String>,
        rows: Vec<Vec<FeatureValue>>,
        labels: Vec<String>,
        instance_ids: Vec<String>,
    ) -> Result<Self> {
        if rows.len() != labels.len() || rows.len() != instance_ids.len() {
            return Err(Error::Dataset(format!(
                "{} rows, {} labels, {} ids",
                rows.len(),
                labels.len(),
                instance_ids.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for c in &column_names {
            if !seen.insert(c.as_str()) {
                return Err(Error::Dataset(format!("duplicate column {c}")));
            }
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != column_names.len()) {
            return Err(Error::Dataset(format!(
                "row {i} has {} cells, expected {}",
                r.len(),
                column_names.len()
            )));
        }
        Ok(FeatureMatrix {
            column_names,
            rows,
            labels,
            instance_ids,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.column_names.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    pub fn column(&self, j: usize) -> Vec<FeatureValue> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn na_count(&self) -> usize {
        self.rows.iter().flatten().filter(|v| v.is_none()).count()
    }

    /// Dense values; fails if any cell is NA.
    pub fn to_dense(&self) -> Result<Vec<Vec<f64>>> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                r.iter()
                    .enumerate()
                    .map(|(j, v)| {
                        v.ok_or_else(|| {
                            Error::Model(format!(
                                "NA in row {} column {}; run preprocessing first",
                                self.instance_ids[i], self.column_names[j]
                            ))
                        })
                    })
                    .collect()
            })
            .collect()
    }
}

/// Computes the feature catalog for every channel of every instance and lays
/// the results out as one row per instance.
pub fn extract_dataset(dataset: &MtsDataset, catalog: &FeatureCatalog) -> FeatureMatrix {
    let rows: Vec<Vec<FeatureValue>> = dataset
        .instances
        .par_iter()
        .map(|inst| {
            let per_channel: Vec<Vec<FeatureValue>> = inst
                .channels
                .par_iter()
                .map(|ch| extract_features(ch, catalog))
                .collect();
            per_channel.into_iter().flatten().collect()
        })
        .collect();
    FeatureMatrix {
        column_names: column_names(dataset.dims, catalog),
        rows,
        labels: dataset.labels(),
        instance_ids: dataset.instances.iter().map(|i| i.id.clone()).collect(),
    }
}

/// 17 significant digits; enough for any f64 to round-trip.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_feature_csv<W: Write>(matrix: &FeatureMatrix, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["id".to_string(), "label".to_string()];
    header.extend(matrix.column_names.iter().cloned());
    w.write_record(&header)?;
    for ((row, id), label) in matrix.rows.iter().zip(&matrix.instance_ids).zip(&matrix.labels) {
        let mut rec = Vec::with_capacity(row.len() + 2);
        rec.push(id.clone());
        rec.push(label.clone());
        rec.extend(row.iter().map(|v| v.map_or_else(|| "NA".to_string(), format_float)));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("feature csv", e))?;
    Ok(())
}

/// Reads a feature CSV. When `expected_columns` is given the header must
/// match it exactly.
pub fn read_feature_csv<R: Read>(input: R, expected_columns: Option<&[String]>) -> Result<FeatureMatrix> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.len() < 2 || &header[0] != "id" || &header[1] != "label" {
        return Err(Error::parse(1, "feature csv header must start with id,label"));
    }
    let columns: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
    if let Some(expected) = expected_columns {
        if expected != columns.as_slice() {
            return Err(Error::parse(
                1,
                "feature csv header does not match the expected columns",
            ));
        }
    }
    let mut rows = Vec::new();
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != columns.len() + 2 {
            return Err(Error::parse(
                line,
                format!("expected {} fields, found {}", columns.len() + 2, rec.len()),
            ));
        }
        ids.push(rec[0].to_string());
        labels.push(rec[1].to_string());
        let row = rec
            .iter()
            .skip(2)
            .map(|cell| {
                if cell == "NA" || cell.is_empty() {
                    Ok(None)
                } else {
                    cell.parse::<f64>()
                        .map(|v| v.is_finite().then_some(v))
                        .map_err(|_| Error::parse(line, format!("invalid number {cell:?}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    FeatureMatrix::new(columns, rows, labels, ids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Channel, MtsInstance};

    fn toy(n: usize, dims: usize) -> MtsDataset {
        let instances = (0..n)
            .map(|i| MtsInstance {
                id: format!("s{i}"),
                channels: (0..dims)
                    .map(|d| Channel::new((0..30).map(|t| ((t * (i + 2) + d) as f64).sin()).collect()))
                    .collect(),
                label: if i % 2 == 0 { "a".into() } else { "b".into() },
            })
            .collect();
        MtsDataset::new("toy", instances, vec!["a".into(), "b".into()]).unwrap()
    }

    #[test]
    fn shape_and_names() {
        let m = extract_dataset(&toy(2, 3), &FeatureCatalog::default());
        assert_eq!(m.n_rows(), 2);
        assert_eq!(m.n_cols(), 123);
        assert_eq!(m.column_names[0], "var1_length");
        assert_eq!(m.column_names[41], "var2_length");
    }

    #[test]
    fn channel_major_index() {
        let cat = FeatureCatalog::default();
        let m = extract_dataset(&toy(1, 3), &cat);
        for d in 1..=3 {
            for (k, f) in cat.names().iter().enumerate() {
                assert_eq!(m.column_index(&column_name(d, f)), Some((d - 1) * cat.len() + k));
            }
        }
    }

    #[test]
    fn split_names() {
        assert_eq!(split_column_name("var12_x_acf1"), Some((12, "x_acf1")));
        assert_eq!(split_column_name("var0_x"), None);
        assert_eq!(split_column_name("foo"), None);
    }

    #[test]
    fn csv_round_trip_with_na_and_awkward_floats() {
        let m = FeatureMatrix::new(
            vec!["var1_a".into(), "var1_b".into()],
            vec![
                vec![Some(0.1 + 0.2), None],
                vec![Some(-1e-300), Some(12345.678901234567)],
            ],
            vec!["x".into(), "y,z".into()],
            vec!["0".into(), "1".into()],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_feature_csv(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains(",NA"));
        let back = read_feature_csv(buf.as_slice(), Some(&m.column_names)).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.rows[0][0].unwrap().to_bits(), (0.1f64 + 0.2).to_bits());
    }

    #[test]
    fn header_mismatch_is_error() {
        let m = FeatureMatrix::new(
            vec!["var1_a".into()],
            vec![vec![Some(1.0)]],
            vec!["x".into()],
            vec!["0".into()],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_feature_csv(&m, &mut buf).unwrap();
        assert!(read_feature_csv(buf.as_slice(), Some(&["var1_b".to_string()])).is_err());
    }
}
