//! CART-style classification tree with weighted Gini splits.
//!
//! Candidate splits are visited in ascending column index, then ascending
//! threshold; the first strictly best Gini decrease wins. Thresholds are
//! midpoints between adjacent distinct observed values and rows with
//! `x <= threshold` go left.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
    /// Columns sampled per split; `None` examines every column.
    pub mtry: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            min_leaf: 1,
            max_depth: None,
            mtry: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        column: usize,
        threshold: f64,
        left: usize,
        right: usize,
        /// Share of the root's sample weight reaching this node.
        weight_fraction: f64,
        /// Parent Gini minus the weighted child Gini.
        gini_decrease: f64,
    },
    Leaf {
        class: usize,
        /// Class proportions of the weighted samples in the leaf.
        distribution: Vec<f64>,
    },
}

/// Nodes stored flat; index 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub n_classes: usize,
    pub nodes: Vec<TreeNode>,
}

const TIE_EPS: f64 = 1e-12;

fn gini(counts: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / total) * (c / total)).sum::<f64>()
}

/// Class with the largest weight; ties go to the lowest class index.
pub(crate) fn argmax_class(weights: &[f64]) -> usize {
    let mut best = 0;
    for (c, &w) in weights.iter().enumerate() {
        if w > weights[best] {
            best = c;
        }
    }
    best
}

struct Builder<'a, R: Rng> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    weights: &'a [f64],
    n_classes: usize,
    params: TreeParams,
    root_weight: f64,
    rng: Option<&'a mut R>,
    nodes: Vec<TreeNode>,
}

struct BestSplit {
    column: usize,
    threshold: f64,
    decrease: f64,
    left: Vec<usize>,
    right: Vec<usize>,
}

impl<R: Rng> Builder<'_, R> {
    fn class_weights(&self, samples: &[usize]) -> (Vec<f64>, f64) {
        let mut counts = vec![0.0; self.n_classes];
        for &s in samples {
            counts[self.y[s]] += self.weights[s];
        }
        let total = counts.iter().sum();
        (counts, total)
    }

    fn leaf(&mut self, counts: &[f64], total: f64) -> usize {
        let distribution = if total > 0.0 {
            counts.iter().map(|c| c / total).collect()
        } else {
            vec![0.0; self.n_classes]
        };
        self.nodes.push(TreeNode::Leaf {
            class: argmax_class(counts),
            distribution,
        });
        self.nodes.len() - 1
    }

    fn candidate_columns(&mut self) -> Vec<usize> {
        let p = self.x.first().map_or(0, Vec::len);
        match (self.params.mtry, self.rng.as_deref_mut()) {
            (Some(m), Some(rng)) if m < p => {
                let mut cols = sample(rng, p, m.max(1)).into_vec();
                cols.sort_unstable();
                cols
            }
            _ => (0..p).collect(),
        }
    }

    fn best_split(&mut self, samples: &[usize], parent_gini: f64, total: f64) -> Option<BestSplit> {
        let min_leaf = self.params.min_leaf.max(1);
        let mut best: Option<(usize, f64, f64, usize)> = None;
        let mut order: Vec<usize> = samples.to_vec();
        let mut best_order: Vec<usize> = Vec::new();
        for column in self.candidate_columns() {
            let x = self.x;
            order.sort_by(|&a, &b| x[a][column].total_cmp(&x[b][column]).then(a.cmp(&b)));
            let mut left = vec![0.0; self.n_classes];
            let mut left_w = 0.0;
            let (mut right, _) = self.class_weights(&order);
            for i in 0..order.len() - 1 {
                let s = order[i];
                let w = self.weights[s];
                left[self.y[s]] += w;
                right[self.y[s]] -= w;
                left_w += w;
                let n_left = i + 1;
                let n_right = order.len() - n_left;
                if n_left < min_leaf || n_right < min_leaf {
                    continue;
                }
                let a = x[s][column];
                let b = x[order[i + 1]][column];
                if !(a < b) {
                    continue;
                }
                let right_w = total - left_w;
                let child = (left_w / total) * gini(&left, left_w) + (right_w / total) * gini(&right, right_w);
                let decrease = parent_gini - child;
                let better = match best {
                    None => decrease > TIE_EPS,
                    Some((_, _, d, _)) => decrease > d + TIE_EPS,
                };
                if better {
                    let mut threshold = a + (b - a) / 2.0;
                    if !(threshold < b) {
                        threshold = a;
                    }
                    best = Some((column, threshold, decrease, n_left));
                    best_order.clone_from(&order);
                }
            }
        }
        let (column, threshold, decrease, n_left) = best?;
        let right = best_order.split_off(n_left);
        Some(BestSplit {
            column,
            threshold,
            decrease,
            left: best_order,
            right,
        })
    }

    fn grow(&mut self, samples: Vec<usize>, depth: usize) -> usize {
        let (counts, total) = self.class_weights(&samples);
        let impurity = gini(&counts, total);
        let at_depth = self.params.max_depth.is_some_and(|d| depth >= d);
        if impurity <= TIE_EPS || at_depth || samples.len() < 2 * self.params.min_leaf.max(1) || total <= 0.0 {
            return self.leaf(&counts, total);
        }
        let Some(split) = self.best_split(&samples, impurity, total) else {
            return self.leaf(&counts, total);
        };
        let id = self.nodes.len();
        self.nodes.push(TreeNode::Leaf {
            class: 0,
            distribution: Vec::new(),
        });
        let left = self.grow(split.left, depth + 1);
        let right = self.grow(split.right, depth + 1);
        self.nodes[id] = TreeNode::Split {
            column: split.column,
            threshold: split.threshold,
            left,
            right,
            weight_fraction: total / self.root_weight,
            gini_decrease: split.decrease,
        };
        id
    }
}

impl DecisionTree {
    /// Fits a tree on the rows listed in `samples` (repeats allowed, as in a
    /// bootstrap draw), each weighted by `weights[row]`.
    pub fn fit_weighted<R: Rng>(
        x: &[Vec<f64>],
        y: &[usize],
        weights: &[f64],
        samples: Vec<usize>,
        n_classes: usize,
        params: TreeParams,
        rng: Option<&mut R>,
    ) -> DecisionTree {
        let root_weight: f64 = samples.iter().map(|&s| weights[s]).sum();
        let mut b = Builder {
            x,
            y,
            weights,
            n_classes,
            params,
            root_weight,
            rng,
            nodes: Vec::new(),
        };
        b.grow(samples, 0);
        DecisionTree {
            n_classes,
            nodes: b.nodes,
        }
    }

    /// Unweighted fit on every row, all columns considered at each split.
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, params: TreeParams) -> DecisionTree {
        let weights = vec![1.0; x.len()];
        DecisionTree::fit_weighted::<rand_chacha::ChaCha8Rng>(
            x,
            y,
            &weights,
            (0..x.len()).collect(),
            n_classes,
            TreeParams { mtry: None, ..params },
            None,
        )
    }

    fn leaf_for(&self, row: &[f64]) -> &TreeNode {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Split {
                    column,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if row[*column] <= *threshold { *left } else { *right },
                leaf => return leaf,
            }
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        match self.leaf_for(row) {
            TreeNode::Leaf { class, .. } => *class,
            TreeNode::Split { .. } => unreachable!(),
        }
    }

    pub fn distribution(&self, row: &[f64]) -> &[f64] {
        match self.leaf_for(row) {
            TreeNode::Leaf { distribution, .. } => distribution,
            TreeNode::Split { .. } => unreachable!(),
        }
    }

    /// Sum over split nodes of weight fraction times Gini decrease, per column.
    pub fn importances(&self, n_columns: usize) -> Vec<f64> {
        let mut imp = vec![0.0; n_columns];
        for node in &self.nodes {
            if let TreeNode::Split {
                column,
                weight_fraction,
                gini_decrease,
                ..
            } = node
            {
                imp[*column] += weight_fraction * gini_decrease;
            }
        }
        imp
    }

    pub fn depth(&self) -> usize {
        fn go(t: &DecisionTree, i: usize) -> usize {
            match &t.nodes[i] {
                TreeNode::Split { left, right, .. } => 1 + go(t, *left).max(go(t, *right)),
                TreeNode::Leaf { .. } => 0,
            }
        }
        go(self, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Leaf { .. })).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[f64]) -> Vec<Vec<f64>> {
        v.iter().map(|&a| vec![a]).collect()
    }

    /// Exhaustive oracle: try every midpoint and keep the best Gini decrease.
    fn oracle_best_threshold(x: &[f64], y: &[usize]) -> f64 {
        let g = |idx: &[usize]| {
            let n = idx.len() as f64;
            let mut c = [0.0; 2];
            idx.iter().for_each(|&i| c[y[i]] += 1.0);
            1.0 - c.iter().map(|v| (v / n).powi(2)).sum::<f64>()
        };
        let all: Vec<usize> = (0..x.len()).collect();
        let mut vals = x.to_vec();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        let mut best = (f64::NEG_INFINITY, 0.0);
        for w in vals.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let (l, r): (Vec<usize>, Vec<usize>) = all.iter().partition(|&&i| x[i] <= t);
            let d = g(&all) - (l.len() as f64 * g(&l) + r.len() as f64 * g(&r)) / x.len() as f64;
            if d > best.0 {
                best = (d, t);
            }
        }
        best.1
    }

    #[test]
    fn single_split_at_midpoint() {
        let xs = [1.0, 2.0, 9.0, 10.0];
        let y = [0, 0, 1, 1];
        let t = DecisionTree::fit(&col(&xs), &y, 2, TreeParams::default());
        assert_eq!(t.nodes.len(), 3);
        match &t.nodes[0] {
            TreeNode::Split { threshold, .. } => {
                assert_eq!(*threshold, 5.5);
                assert_eq!(*threshold, oracle_best_threshold(&xs, &y));
            }
            _ => panic!("expected split"),
        }
        for (row, &label) in col(&xs).iter().zip(&y) {
            assert_eq!(t.predict_row(row), label);
        }
    }

    #[test]
    fn single_class_is_one_leaf() {
        let t = DecisionTree::fit(&col(&[1.0, 2.0, 3.0]), &[1, 1, 1], 2, TreeParams::default());
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.predict_row(&[0.0]), 1);
    }

    #[test]
    fn conflicting_duplicates_keep_majority() {
        let x = col(&[1.0, 1.0, 1.0]);
        let t = DecisionTree::fit(&x, &[0, 1, 1], 2, TreeParams::default());
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.predict_row(&[1.0]), 1);
        let d = t.distribution(&[1.0]);
        assert!((d[0] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn leaf_tie_goes_to_lowest_class() {
        let t = DecisionTree::fit(&col(&[1.0, 1.0]), &[1, 0], 2, TreeParams::default());
        assert_eq!(t.predict_row(&[1.0]), 0);
    }

    #[test]
    fn max_depth_limits_growth() {
        let xs: Vec<f64> = (0..16).map(f64::from).collect();
        let y: Vec<usize> = (0..16).map(|i| i % 2).collect();
        let t = DecisionTree::fit(
            &col(&xs),
            &y,
            2,
            TreeParams {
                max_depth: Some(2),
                ..TreeParams::default()
            },
        );
        assert!(t.depth() <= 2);
    }

    #[test]
    fn first_column_wins_ties() {
        // both columns separate the classes perfectly
        let x = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let t = DecisionTree::fit(&x, &[0, 1], 2, TreeParams::default());
        match &t.nodes[0] {
            TreeNode::Split { column, .. } => assert_eq!(*column, 0),
            _ => panic!(),
        }
    }
}
