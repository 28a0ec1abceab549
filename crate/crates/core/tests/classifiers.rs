use cmfmts::classifiers::boost::{BoostParams, BoostedModel};
use cmfmts::classifiers::forest::{ForestModel, ForestParams};
use cmfmts::classifiers::knn::{MinMaxScaler, NnModel};
use cmfmts::classifiers::tree::{DecisionTree, TreeNode, TreeParams};
use cmfmts::classifiers::{ModelKind, ModelParams, TrainedModel};
use cmfmts::tabular::FeatureMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_data(rng: &mut ChaCha8Rng, n: usize, p: usize, k: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let x = (0..n)
        .map(|_| (0..p).map(|_| rng.gen_range(-3.0..3.0)).collect())
        .collect();
    let y = (0..n).map(|_| rng.gen_range(0..k)).collect();
    (x, y)
}

/// Recomputes split contributions straight from the node list.
fn recomputed_importance(trees: &[DecisionTree], p: usize) -> Vec<f64> {
    let mut imp = vec![0.0; p];
    for t in trees {
        for node in &t.nodes {
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
    }
    imp.iter().map(|v| v / trees.len() as f64).collect()
}

#[test]
fn forest_importance_is_additive_and_nonnegative() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (x, y) = random_data(&mut rng, 60, 8, 3);
    let f = ForestModel::fit(
        &x,
        &y,
        3,
        ForestParams {
            n_trees: 40,
            seed: 3,
            ..ForestParams::default()
        },
    );
    let again = recomputed_importance(&f.trees, 8);
    for (a, b) in f.importance.iter().zip(&again) {
        assert!(*a >= 0.0);
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn forest_is_identical_across_thread_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (x, y) = random_data(&mut rng, 50, 6, 2);
    let params = ForestParams {
        n_trees: 30,
        seed: 99,
        ..ForestParams::default()
    };
    let fit_with = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| ForestModel::fit(&x, &y, 2, params))
    };
    assert_eq!(fit_with(1), fit_with(4));
}

/// Walks the tree with the rows reaching each node and checks that every
/// threshold sits midway between that node's adjacent values.
fn check_node(t: &DecisionTree, x: &[Vec<f64>], node: usize, rows: &[usize]) {
    if let TreeNode::Split {
        column,
        threshold,
        left,
        right,
        ..
    } = &t.nodes[node]
    {
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[i][*column] <= *threshold);
        assert!(!l.is_empty() && !r.is_empty(), "empty child");
        let below = l.iter().map(|&i| x[i][*column]).fold(f64::NEG_INFINITY, f64::max);
        let above = r.iter().map(|&i| x[i][*column]).fold(f64::INFINITY, f64::min);
        assert!(
            (threshold - (below + above) / 2.0).abs() <= 1e-12,
            "threshold {threshold} is not a midpoint"
        );
        check_node(t, x, *left, &l);
        check_node(t, x, *right, &r);
    }
}

#[test]
fn split_thresholds_are_midpoints_and_children_nonempty() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (x, y) = random_data(&mut rng, 40, 3, 2);
    let t = DecisionTree::fit(&x, &y, 2, TreeParams::default());
    assert!(t.nodes.len() > 3);
    check_node(&t, &x, 0, &(0..x.len()).collect::<Vec<_>>());
}

#[test]
fn tree_beats_majority_baseline_on_training_rows() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (x, y) = random_data(&mut rng, 50, 4, 3);
    let t = DecisionTree::fit(&x, &y, 3, TreeParams::default());
    let acc = x.iter().zip(&y).filter(|(r, c)| t.predict_row(r) == **c).count();
    let mut counts = [0; 3];
    y.iter().for_each(|&c| counts[c] += 1);
    assert!(acc >= *counts.iter().max().unwrap());
}

#[test]
fn permuting_columns_keeps_predictions() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    // class depends on two columns through well-separated rules, so no
    // two candidate splits share the same Gini decrease
    let x: Vec<Vec<f64>> = (0..60)
        .map(|_| (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect())
        .collect();
    let y: Vec<usize> = x.iter().map(|r| usize::from(r[0] > 0.4 || r[1] > 1.7)).collect();
    let perm = [2, 0, 3, 1];
    let px: Vec<Vec<f64>> = x.iter().map(|r| perm.iter().map(|&j| r[j]).collect()).collect();
    let a = DecisionTree::fit(&x, &y, 2, TreeParams::default());
    let b = DecisionTree::fit(&px, &y, 2, TreeParams::default());
    for q in (0..200).map(|_| (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect::<Vec<f64>>()) {
        let pq: Vec<f64> = perm.iter().map(|&j| q[j]).collect();
        assert_eq!(a.predict_row(&q), b.predict_row(&pq));
    }
}

#[test]
fn boosting_improves_on_a_stump_for_xor() {
    // XOR with off-centre boundaries so single stumps have positive gain
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let x: Vec<Vec<f64>> = (0..120)
        .map(|_| vec![rng.gen_range(0.0..8.0), rng.gen_range(0.0..8.0)])
        .collect();
    let y: Vec<usize> = x.iter().map(|r| usize::from((r[0] < 3.0) != (r[1] < 5.0))).collect();
    let stump = TreeParams {
        min_leaf: 1,
        max_depth: Some(1),
        mtry: None,
    };
    let single = DecisionTree::fit(&x, &y, 2, stump);
    let boosted = BoostedModel::fit(
        &x,
        &y,
        2,
        BoostParams {
            n_rounds: 10,
            tree: stump,
        },
    );
    let hits = |f: &dyn Fn(&[f64]) -> usize| x.iter().zip(&y).filter(|(r, c)| f(r) == **c).count();
    let a1 = hits(&|r| single.predict_row(r));
    let a2 = hits(&|r| boosted.predict_row(r));
    assert!(a2 > a1, "boosted {a2} vs stump {a1}");
}

/// Brute-force 1NN: scaled distances, first minimum wins.
fn oracle_1nn(train: &[Vec<f64>], labels: &[usize], q: &[f64]) -> usize {
    let p = train[0].len();
    let lo: Vec<f64> = (0..p)
        .map(|j| train.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min))
        .collect();
    let hi: Vec<f64> = (0..p)
        .map(|j| train.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let scale = |r: &[f64]| -> Vec<f64> {
        (0..p)
            .map(|j| {
                if hi[j] > lo[j] {
                    ((r[j] - lo[j]) / (hi[j] - lo[j])).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect()
    };
    let sq = scale(q);
    let dists: Vec<f64> = train
        .iter()
        .map(|r| scale(r).iter().zip(&sq).map(|(a, b)| (a - b).powi(2)).sum())
        .collect();
    let best = dists.iter().copied().fold(f64::INFINITY, f64::min);
    labels[dists.iter().position(|&d| d == best).unwrap()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn nn_matches_brute_force(seed in any::<u64>(), n in 1usize..=10, p in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // small integer grid so exact ties occur
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.gen_range(0..4) as f64).collect()).collect();
        let y: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        let m = NnModel::fit(&x, &y).unwrap();
        for _ in 0..10 {
            let q: Vec<f64> = (0..p).map(|_| rng.gen_range(-1..5) as f64).collect();
            prop_assert_eq!(m.predict_row(&q), oracle_1nn(&x, &y, &q));
        }
    }

    #[test]
    fn scaler_maps_train_into_unit_box(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut x, _) = random_data(&mut rng, 12, 4, 2);
        for r in &mut x { r[3] = 7.0; }
        let s = MinMaxScaler::fit(&x);
        let t: Vec<Vec<f64>> = x.iter().map(|r| s.transform_row(r)).collect();
        for j in 0..3 {
            let col: Vec<f64> = t.iter().map(|r| r[j]).collect();
            prop_assert_eq!(col.iter().copied().fold(f64::INFINITY, f64::min), 0.0);
            prop_assert_eq!(col.iter().copied().fold(f64::NEG_INFINITY, f64::max), 1.0);
        }
        prop_assert!(t.iter().all(|r| r[3] == 0.0));
    }

    #[test]
    fn boosting_stage_weights_match_formula(seed in any::<u64>(), k in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = random_data(&mut rng, 40, 3, k);
        let m = BoostedModel::fit(&x, &y, k, BoostParams {
            n_rounds: 6,
            tree: TreeParams { min_leaf: 2, max_depth: Some(2), mtry: None },
        });
        for s in &m.stages {
            prop_assert!(s.error < 1.0 - 1.0 / k as f64);
            let e = s.error.max(1e-10);
            let want = ((1.0 - e) / e).ln() + ((k - 1) as f64).ln();
            prop_assert!((s.alpha - want).abs() < 1e-12);
            prop_assert!(s.alpha >= 0.0);
        }
    }
}

#[test]
fn model_predictions_are_deterministic_and_empty_matrix_is_fine() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (x, y) = random_data(&mut rng, 30, 3, 2);
    let names: Vec<String> = (0..3).map(|j| format!("var1_f{j}")).collect();
    let m = FeatureMatrix::new(
        names.clone(),
        x.iter().map(|r| r.iter().copied().map(Some).collect()).collect(),
        y.iter().map(|c| format!("c{c}")).collect(),
        (0..30).map(|i| i.to_string()).collect(),
    )
    .unwrap();
    let mut params = ModelParams::default();
    params.forest.n_trees = 25;
    params.forest.seed = 4;
    let a = TrainedModel::fit(ModelKind::Forest, &m, &params, "d", 1, &[]).unwrap();
    let b = TrainedModel::fit(ModelKind::Forest, &m, &params, "d", 1, &[]).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    assert_eq!(a.predict(&m).unwrap(), b.predict(&m).unwrap());
    let empty = FeatureMatrix::new(names, vec![], vec![], vec![]).unwrap();
    assert!(a.predict(&empty).unwrap().is_empty());
}
