//! 1-nearest-neighbour with Euclidean distance on min-max scaled features.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(x: &[Vec<f64>]) -> MinMaxScaler {
        let p = x.first().map_or(0, Vec::len);
        let mut min = vec![f64::INFINITY; p];
        let mut max = vec![f64::NEG_INFINITY; p];
        for row in x {
            for (j, &v) in row.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        MinMaxScaler { min, max }
    }

    /// Scales into [0, 1], clipping out-of-range values; degenerate columns
    /// map to 0.
    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, &v)| {
                let span = self.max[j] - self.min[j];
                if span > 0.0 {
                    ((v - self.min[j]) / span).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NnModel {
    pub scaler: MinMaxScaler,
    pub train_rows: Vec<Vec<f64>>,
    pub train_labels: Vec<usize>,
}

impl NnModel {
    /// `None` when there is no training row.
    pub fn fit(x: &[Vec<f64>], y: &[usize]) -> Option<NnModel> {
        if x.is_empty() {
            return None;
        }
        let scaler = MinMaxScaler::fit(x);
        let train_rows = x.iter().map(|r| scaler.transform_row(r)).collect();
        Some(NnModel {
            scaler,
            train_rows,
            train_labels: y.to_vec(),
        })
    }

    /// Index of the nearest training row and its squared distance; the
    /// earliest row wins ties.
    pub fn nearest(&self, row: &[f64]) -> (usize, f64) {
        let q = self.scaler.transform_row(row);
        let mut best = (0, f64::INFINITY);
        for (i, t) in self.train_rows.iter().enumerate() {
            let d: f64 = t.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        self.train_labels[self.nearest(row).0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_match_has_zero_distance() {
        let x = vec![vec![1.0, 5.0], vec![3.0, 2.0], vec![2.0, 9.0]];
        let m = NnModel::fit(&x, &[0, 1, 2]).unwrap();
        assert_eq!(m.nearest(&[3.0, 2.0]), (1, 0.0));
        assert_eq!(m.predict_row(&[2.0, 9.0]), 2);
    }

    #[test]
    fn ties_go_to_earlier_row() {
        let x = vec![vec![0.0], vec![2.0]];
        let m = NnModel::fit(&x, &[1, 0]).unwrap();
        assert_eq!(m.predict_row(&[1.0]), 1);
    }

    #[test]
    fn scaler_bounds_and_degenerate_columns() {
        let x = vec![vec![1.0, 4.0], vec![3.0, 4.0], vec![2.0, 4.0]];
        let s = MinMaxScaler::fit(&x);
        let scaled: Vec<Vec<f64>> = x.iter().map(|r| s.transform_row(r)).collect();
        assert_eq!(scaled, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 0.0]]);
        assert_eq!(s.transform_row(&[10.0, -3.0]), vec![1.0, 0.0]);
    }

    #[test]
    fn empty_train() {
        assert!(NnModel::fit(&[], &[]).is_none());
    }
}
