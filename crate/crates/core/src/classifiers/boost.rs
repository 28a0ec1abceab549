//! Multiclass boosting of Gini trees (SAMME weighting).
//!
//! Stands in for boosted C5.0: each round fits a weighted tree, its stage
//! weight is ln((1 - e)/e) + ln(K - 1), and misclassified rows are
//! up-weighted by exp(alpha). Rounds whose weighted error reaches 1 - 1/K
//! are discarded and stop training; a perfect round stops training after
//! being kept.

use serde::{Deserialize, Serialize};

use super::tree::{argmax_class, DecisionTree, TreeParams};

/// Error floor used to give a perfect round a finite weight.
pub const MIN_ERROR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    pub n_rounds: usize,
    pub tree: TreeParams,
}

impl Default for BoostParams {
    fn default() -> Self {
        BoostParams {
            n_rounds: 10,
            tree: TreeParams {
                min_leaf: 2,
                max_depth: Some(6),
                mtry: None,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostStage {
    pub tree: DecisionTree,
    pub alpha: f64,
    /// Weighted training error of this round.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    pub hyperparams: BoostParams,
    pub n_classes: usize,
    pub stages: Vec<BoostStage>,
    /// Majority training class, used only if no round was retained.
    pub fallback_class: usize,
}

pub fn stage_weight(error: f64, n_classes: usize) -> f64 {
    let e = error.max(MIN_ERROR);
    ((1.0 - e) / e).ln() + ((n_classes as f64) - 1.0).ln()
}

impl BoostedModel {
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, params: BoostParams) -> BoostedModel {
        let n = x.len();
        let k = n_classes.max(2) as f64;
        let mut weights = vec![1.0 / n as f64; n];
        let mut counts = vec![0.0; n_classes];
        y.iter().for_each(|&c| counts[c] += 1.0);
        let fallback_class = argmax_class(&counts);
        let mut stages = Vec::new();
        let tree_params = TreeParams {
            mtry: None,
            ..params.tree
        };

        for _ in 0..params.n_rounds {
            let tree = DecisionTree::fit_weighted::<rand_chacha::ChaCha8Rng>(
                x,
                y,
                &weights,
                (0..n).collect(),
                n_classes,
                tree_params,
                None,
            );
            let wrong: Vec<bool> = x.iter().zip(y).map(|(row, &c)| tree.predict_row(row) != c).collect();
            let total: f64 = weights.iter().sum();
            let error = wrong
                .iter()
                .zip(&weights)
                .filter(|(w, _)| **w)
                .fold(0.0, |acc, (_, v)| acc + v)
                / total;
            if error >= 1.0 - 1.0 / k {
                break;
            }
            let alpha = stage_weight(error, n_classes);
            stages.push(BoostStage { tree, alpha, error });
            if error <= 0.0 {
                break;
            }
            let boost = alpha.exp();
            for (w, &bad) in weights.iter_mut().zip(&wrong) {
                if bad {
                    *w *= boost;
                }
            }
            let s: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= s);
        }
        BoostedModel {
            hyperparams: params,
            n_classes,
            stages,
            fallback_class,
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        if self.stages.is_empty() {
            return self.fallback_class;
        }
        let mut score = vec![0.0; self.n_classes];
        for s in &self.stages {
            score[s.tree.predict_row(row)] += s.alpha;
        }
        argmax_class(&score)
    }
}
