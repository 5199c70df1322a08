use assignforest::split::{
    best_assignation_dichotomy, best_assignation_exhaustive, best_cut_and_assignation, classic_best_cut,
    criterion_of_view, dichotomy_budget, FeatureView, NodeView,
};
use assignforest::{data, Assignation, Dataset, SearchMode, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Parent variance minus weighted child variances, all in plain f64.
fn oracle_gain(left: &[f64], right: &[f64]) -> f64 {
    let sse = |v: &[f64]| {
        if v.is_empty() {
            return 0.0;
        }
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|y| (y - m) * (y - m)).sum::<f64>()
    };
    let all: Vec<f64> = left.iter().chain(right).copied().collect();
    let n = all.len() as f64;
    ((sse(&all) - sse(left) - sse(right)) / n).max(0.0)
}

fn brute_force(observed: &[(f64, f64)], missing: &[f64], z: f64) -> f64 {
    let l0: Vec<f64> = observed.iter().filter(|p| p.0 < z).map(|p| p.1).collect();
    let r0: Vec<f64> = observed.iter().filter(|p| p.0 >= z).map(|p| p.1).collect();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << missing.len()) {
        let mut l = l0.clone();
        let mut r = r0.clone();
        for (k, &y) in missing.iter().enumerate() {
            if mask >> k & 1 == 1 {
                l.push(y);
            } else {
                r.push(y);
            }
        }
        best = best.max(oracle_gain(&l, &r));
    }
    best
}

fn random_node(rng: &mut ChaCha8Rng, max_rows: usize, max_missing: usize) -> (Vec<(f64, f64)>, Vec<f64>) {
    let n = rng.random_range(2..=max_rows);
    let n_miss = rng.random_range(0..=max_missing.min(n - 2));
    let observed = (0..n - n_miss).map(|_| (rng.random::<f64>(), rng.random_range(-5.0..25.0))).collect();
    let missing = (0..n_miss).map(|_| rng.random_range(-5.0..25.0)).collect();
    (observed, missing)
}

#[test]
fn exhaustive_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..300 {
        let (obs, miss) = random_node(&mut rng, 12, 6);
        let view = FeatureView::from_parts(0, &obs, &miss);
        for z in view.cut_positions() {
            let (_, gain, _) = best_assignation_exhaustive(&view, z);
            let oracle = brute_force(&obs, &miss, z);
            assert!((gain - oracle).abs() <= 1e-12 * oracle.max(1.0), "{gain} vs {oracle}");
        }
    }
}

#[test]
fn optimal_assignation_is_ordered_by_response() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let (obs, miss) = random_node(&mut rng, 12, 6);
        let view = FeatureView::from_parts(0, &obs, &miss);
        for z in view.cut_positions() {
            let (a, _, _) = best_assignation_exhaustive(&view, z);
            let sorted = view.missing_responses();
            let (low, high) = sorted.split_at(a.threshold);
            if let (Some(l), Some(h)) = (low.last(), high.first()) {
                assert!(l <= h);
            }
        }
    }
}

#[test]
fn criterion_matches_oracle_for_any_threshold() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let (obs, miss) = random_node(&mut rng, 10, 5);
        let view = FeatureView::from_parts(0, &obs, &miss);
        let sorted = view.missing_responses();
        for z in view.cut_positions() {
            for w in 0..=miss.len() {
                for side in [Side::Left, Side::Right] {
                    let g = criterion_of_view(&view, z, Assignation { threshold: w, low_side: side }).unwrap();
                    let mut l: Vec<f64> = obs.iter().filter(|p| p.0 < z).map(|p| p.1).collect();
                    let mut r: Vec<f64> = obs.iter().filter(|p| p.0 >= z).map(|p| p.1).collect();
                    let (low, high) = sorted.split_at(w);
                    match side {
                        Side::Left => {
                            l.extend(low);
                            r.extend(high);
                        }
                        Side::Right => {
                            r.extend(low);
                            l.extend(high);
                        }
                    }
                    assert!((g - oracle_gain(&l, &r)).abs() < 1e-9);
                }
            }
        }
    }
}

#[test]
fn dichotomy_respects_budget_and_rarely_misses() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut cuts = 0;
    let mut misses = 0;
    for _ in 0..200 {
        let (obs, miss) = random_node(&mut rng, 120, 60);
        let view = FeatureView::from_parts(0, &obs, &miss);
        for z in view.cut_positions() {
            let (_, ge, _) = best_assignation_exhaustive(&view, z);
            let (_, gd, ev) = best_assignation_dichotomy(&view, z);
            assert!(ev <= dichotomy_budget(miss.len()) + 3);
            assert!(gd <= ge + 1e-12);
            cuts += 1;
            if ge - gd > 1e-12 {
                misses += 1;
            }
        }
    }
    assert!((misses as f64) < 0.1 * cuts as f64, "{misses}/{cuts}");
}

#[test]
fn complete_data_reduces_to_classic_cart() {
    for seed in 0..20 {
        let d: Dataset<f64> = data::gen_friedman1(40, 1.0, seed).unwrap();
        let rows: Vec<usize> = (0..40).collect();
        let node = NodeView::new(&d, &rows);
        let features = [0, 1, 2, 3, 4];
        let classic = classic_best_cut(&node, &features).unwrap();
        for mode in [SearchMode::Exhaustive, SearchMode::Dichotomy] {
            let ours = best_cut_and_assignation(&node, &features, mode).unwrap();
            assert_eq!(ours.cut, classic.cut);
            assert_eq!(ours.gain, classic.gain);
        }
    }
}
