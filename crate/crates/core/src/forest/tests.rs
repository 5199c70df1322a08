use super::*;
use crate::data::gen_friedman1;
use crate::split::Cut;

fn small_params(n: usize, p: usize) -> ForestParams {
    ForestParams { n_trees: 10, ..ForestParams::defaults(n, p) }.with_seed(11)
}

fn stump(missing_left: usize, missing_right: usize) -> Tree<f64> {
    Tree {
        nodes: vec![
            TreeNode::Internal {
                cut: Cut { feature: 0, position: 0.5 },
                left: 1,
                right: 2,
                missing_left,
                missing_right,
                n_rows: 4,
                mean: 5.0,
                gain: 25.0,
            },
            TreeNode::Leaf { mean: 0.0, rows: vec![0, 1] },
            TreeNode::Leaf { mean: 10.0, rows: vec![2, 3] },
        ],
        bag: vec![0, 1, 2, 3],
        cart_evaluations: 0,
    }
}

fn hand_forest(trees: Vec<Tree<f64>>, n_train: usize) -> Forest<f64> {
    let params = ForestParams { n_trees: trees.len(), ..ForestParams::defaults(n_train, 1) };
    Forest { trees, params, n_features: 1, n_train }
}

#[test]
fn defaults_for_two_hundred_rows() {
    let p = ForestParams::defaults(200, 5);
    assert_eq!((p.mtry, p.subsample, p.nodesize, p.n_trees), (1, 127, 5, 100));
    assert!(!p.replacement);
}

#[test]
fn nodesize_stops_at_root() {
    let d = gen_friedman1::<f64>(5, 1.0, 3).unwrap();
    let params = ForestParams { subsample: 5, nodesize: 5, ..small_params(5, 5) };
    let tree = build_tree(&d, &params, 1).unwrap();
    assert_eq!(tree.nodes.len(), 1);
    let mean = d.response().iter().sum::<f64>() / 5.0;
    assert!((tree.predict_complete(&[0.1; 5]) - mean).abs() < 1e-12);
}

#[test]
fn fully_missing_feature_is_never_cut() {
    let d = gen_friedman1::<f64>(60, 1.0, 4).unwrap();
    let cells: Vec<(usize, usize)> = (0..60).map(|i| (i, 2)).collect();
    let d = d.with_masked(&cells);
    let params = ForestParams { mtry: 5, nodesize: 1, ..small_params(60, 5) };
    let forest = train_forest(&d, &params).unwrap();
    for tree in forest.trees() {
        for node in tree.nodes() {
            if let TreeNode::Internal { cut, .. } = node {
                assert_ne!(cut.feature, 2);
            }
        }
    }
}

#[test]
fn assignation_equals_classic_on_complete_data() {
    let d = gen_friedman1::<f64>(50, 1.0, 5).unwrap();
    let a = train_forest(&d, &small_params(50, 5)).unwrap();
    let c = train_forest(&d, &ForestParams { split_rule: SplitRule::Classic, ..small_params(50, 5) }).unwrap();
    assert_eq!(a.trees, c.trees);
}

#[test]
fn classic_rejects_missing() {
    let d = gen_friedman1::<f64>(20, 1.0, 5).unwrap().with_masked(&[(0, 0)]);
    let params = ForestParams { split_rule: SplitRule::Classic, ..small_params(20, 5) };
    assert!(train_forest(&d, &params).is_err());
}

#[test]
fn subsample_larger_than_n_rejected() {
    let d = gen_friedman1::<f64>(20, 1.0, 5).unwrap();
    let params = ForestParams { subsample: 21, ..small_params(20, 5) };
    assert!(train_forest(&d, &params).is_err());
}

#[test]
fn bags_have_requested_size() {
    let d = gen_friedman1::<f64>(40, 1.0, 6).unwrap();
    for replacement in [false, true] {
        let params = ForestParams { replacement, ..small_params(40, 5) };
        let f = train_forest(&d, &params).unwrap();
        for t in f.trees() {
            assert_eq!(t.bag().len(), params.subsample);
            if !replacement {
                assert!(t.bag().windows(2).all(|w| w[0] < w[1]));
            }
        }
    }
}

#[test]
fn one_tree_forest_is_its_tree() {
    let d = gen_friedman1::<f64>(40, 1.0, 7).unwrap();
    let params = ForestParams { n_trees: 1, ..small_params(40, 5) };
    let f = train_forest(&d, &params).unwrap();
    let t = build_tree(&d, &params, tree_seed(params.seed, 0)).unwrap();
    for i in 0..40 {
        let x = d.complete_row(i).unwrap();
        assert_eq!(f.predict_complete(&x).unwrap(), t.predict_complete(&x));
    }
}

#[test]
fn deep_tree_reproduces_training_rows() {
    let d = gen_friedman1::<f64>(30, 1.0, 8).unwrap();
    let params = ForestParams { n_trees: 1, mtry: 5, subsample: 30, nodesize: 1, ..small_params(30, 5) };
    let f = train_forest(&d, &params).unwrap();
    for i in 0..30 {
        let x = d.complete_row(i).unwrap();
        assert!((f.predict_complete(&x).unwrap() - d.y(i)).abs() < 1e-12);
    }
}

#[test]
fn observed_query_matches_complete_prediction() {
    let d = gen_friedman1::<f64>(80, 1.0, 9).unwrap().with_masked(&[(0, 0), (3, 1), (5, 3), (9, 3)]);
    let f = train_forest(&d, &small_params(80, 5)).unwrap();
    let x = [0.2, 0.4, 0.6, 0.8, 0.1];
    let opt: Vec<Option<f64>> = x.iter().map(|&v| Some(v)).collect();
    for seed in 0..20 {
        assert_eq!(f.predict_with_missing(&opt, seed).unwrap(), f.predict_complete(&x).unwrap());
    }
}

#[test]
fn all_missing_on_left_goes_left() {
    let f = hand_forest(vec![stump(3, 0)], 4);
    for seed in 0..50 {
        assert_eq!(f.predict_with_missing(&[None], seed).unwrap(), 0.0);
    }
}

#[test]
fn no_training_missing_stops_at_node() {
    let f = hand_forest(vec![stump(0, 0)], 4);
    assert_eq!(f.predict_with_missing(&[None], 1).unwrap(), 5.0);
}

#[test]
fn balanced_stump_averages_to_five() {
    let f = hand_forest(vec![stump(2, 2)], 4);
    let total: f64 = (0..10_000).map(|s| f.predict_with_missing(&[None], s).unwrap()).sum();
    let mean = total / 10_000.0;
    assert!((mean - 5.0).abs() < 0.2, "{mean}");
}

#[test]
fn proximity_of_single_leaf_is_all_ones() {
    let d = gen_friedman1::<f64>(6, 1.0, 1).unwrap();
    let params = ForestParams { n_trees: 3, subsample: 4, nodesize: 4, ..small_params(6, 5) };
    let f = train_forest(&d, &params).unwrap();
    let k = f.proximity_matrix(&d).unwrap();
    for i in 0..6 {
        assert!(k.row(i).iter().all(|&v| v == 1.0));
    }
}

#[test]
fn proximity_counts_shared_cells() {
    let d = Dataset::complete(vec![vec![0.1], vec![0.2], vec![0.7], vec![0.9]], vec![0.0, 0.0, 10.0, 10.0]).unwrap();
    let mut other = stump(0, 0);
    if let TreeNode::Internal { cut, .. } = &mut other.nodes[0] {
        cut.position = 0.8;
    }
    other.nodes[1] = TreeNode::Leaf { mean: 10.0 / 3.0, rows: vec![0, 1, 2] };
    other.nodes[2] = TreeNode::Leaf { mean: 10.0, rows: vec![3] };
    let f = hand_forest(vec![stump(0, 0), other], 4);
    let k = f.proximity_matrix(&d).unwrap();
    assert_eq!(k.get(0, 1), 1.0);
    assert_eq!(k.get(1, 2), 0.5);
    assert_eq!(k.get(0, 3), 0.0);
    assert_eq!(k.get(2, 3), 0.5);
}

#[test]
fn format_round_trip() {
    let d = gen_friedman1::<f64>(60, 1.0, 2).unwrap().with_masked(&[(1, 0), (2, 0), (4, 3)]);
    let mia = ForestParams { split_rule: SplitRule::Mia, ..small_params(60, 5) };
    for params in [small_params(60, 5), mia] {
        let f = train_forest(&d, &params).unwrap();
        let mut buf = Vec::new();
        write_forest(&f, &mut buf).unwrap();
        let back: Forest<f64> = read_forest(buf.as_slice()).unwrap();
        assert_eq!(back, f);
    }
}

#[test]
fn format_errors_carry_line() {
    let d = gen_friedman1::<f64>(20, 1.0, 2).unwrap();
    let f = train_forest(&d, &ForestParams { n_trees: 1, ..small_params(20, 5) }).unwrap();
    let mut buf = Vec::new();
    write_forest(&f, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap().replacen("internal", "interior", 1);
    let err = read_forest::<f64, _>(text.as_bytes()).unwrap_err().to_string();
    assert!(err.contains("line 5"), "{err}");
    assert!(read_forest::<f64, _>("nonsense\n".as_bytes()).is_err());
}

#[test]
fn unused_feature_has_zero_purity() {
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for i in 0..40 {
        let x = i as f64 / 40.0;
        rows.push(vec![x, 0.5]);
        y.push(if x < 0.5 { 0.0 } else { 10.0 });
    }
    let d = Dataset::complete(rows, y).unwrap();
    let params = ForestParams { n_trees: 5, mtry: 2, ..ForestParams::defaults(40, 2) };
    let f = train_forest(&d, &params).unwrap();
    let imp = variable_importance(&f, &d).unwrap();
    assert_eq!(imp.inc_node_purity[1], 0.0);
    assert!(imp.inc_node_purity[0] > 0.0);
    assert!(imp.pct_inc_mse[0] > imp.pct_inc_mse[1]);
}
