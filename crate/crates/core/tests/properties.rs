use proptest::prelude::*;
use proptest::sample::subsequence;

use iscore_core::bda::{beats, merge_modules, run_bda, run_bda_once, BdaConfig, VariableModule};
use iscore_core::data::DiscreteDataset;
use iscore_core::iscore::{global_stats, iscore, make_partition};
use iscore_core::metrics::{auc, auc_rank, confusion, roc_curve, sensitivity, specificity};
use iscore_core::predictor::{combine_modules, fit_module_classifier, predictivity};
use iscore_core::simgen::{generate, Model, SimSpec};

const LEVELS: u32 = 3;

/// n rows, p columns with codes in 0..LEVELS, and a non-constant real response.
fn dataset(max_p: usize) -> impl Strategy<Value = DiscreteDataset> {
    (2usize..=max_p, 8usize..60).prop_flat_map(|(p, n)| {
        (
            prop::collection::vec(prop::collection::vec(0..LEVELS, n), p),
            prop::collection::vec(-5i32..=5, n),
        )
            .prop_filter("response must vary", |(_, y)| y.iter().any(|&v| v != y[0]))
            .prop_map(move |(cols, y)| {
                let y = y.into_iter().map(f64::from).collect();
                DiscreteDataset::with_levels(
                    cols,
                    y,
                    DiscreteDataset::default_names(p),
                    vec![LEVELS; p],
                )
                .unwrap()
            })
    })
}

fn with_subset(max_p: usize) -> impl Strategy<Value = (DiscreteDataset, Vec<usize>)> {
    dataset(max_p).prop_flat_map(|ds| {
        let p = ds.p();
        (Just(ds), subsequence((0..p).collect::<Vec<_>>(), 1..=p))
    })
}

fn binary_scores() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..200)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(prop::bool::ANY, n),
                prop::collection::vec(-20i32..20, n),
            )
        })
        .prop_filter("both classes", |(y, _)| {
            y.iter().any(|&b| b) && y.iter().any(|&b| !b)
        })
        .prop_map(|(y, s)| {
            (
                y.into_iter().map(|b| f64::from(u8::from(b))).collect(),
                s.into_iter().map(|v| f64::from(v) / 4.0).collect(),
            )
        })
}

fn permute_rows(ds: &DiscreteDataset, order: &[usize]) -> DiscreteDataset {
    let cols = ds
        .columns()
        .iter()
        .map(|c| order.iter().map(|&i| c[i]).collect())
        .collect();
    let y = order.iter().map(|&i| ds.y()[i]).collect();
    DiscreteDataset::with_levels(cols, y, ds.names().to_vec(), ds.levels().to_vec()).unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

/// Exhaustive pairwise count: P(s⁺ > s⁻) + ½ P(s⁺ = s⁻).
fn pairwise_auc(y: &[f64], s: &[f64]) -> f64 {
    let (mut num, mut pairs) = (0.0, 0.0);
    for i in 0..y.len() {
        for j in 0..y.len() {
            if y[i] == 1.0 && y[j] == 0.0 {
                pairs += 1.0;
                num += if s[i] > s[j] {
                    1.0
                } else if s[i] == s[j] {
                    0.5
                } else {
                    0.0
                };
            }
        }
    }
    num / pairs
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn partition_invariants((ds, subset) in with_subset(5)) {
        let part = make_partition(&ds, &subset).unwrap();
        let n = ds.n();
        prop_assert_eq!(part.cells.iter().map(|c| c.count).sum::<usize>(), n);
        prop_assert!(part.cells.iter().all(|c| c.count >= 1));
        let max_cells = (LEVELS as usize).pow(subset.len() as u32).min(n);
        prop_assert!(part.num_cells() <= max_cells);
        let (ybar, _) = global_stats(&ds);
        let total: f64 = part.cells.iter().map(|c| c.count as f64 * c.mean).sum();
        prop_assert!(close(total, n as f64 * ybar, 1e-12));
    }

    #[test]
    fn iscore_is_nonnegative_and_normalized((ds, subset) in with_subset(5)) {
        let v = iscore(&ds, &subset).unwrap();
        prop_assert!(v.raw >= 0.0 && v.standardized >= 0.0);
        prop_assert_eq!(v.standardized, v.raw / (v.n as f64 * v.variance));
    }

    #[test]
    fn row_order_does_not_matter(
        (ds, subset) in with_subset(5),
        seed in any::<u64>(),
    ) {
        let mut order: Vec<usize> = (0..ds.n()).collect();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
        let a = iscore(&ds, &subset).unwrap().standardized;
        let b = iscore(&permute_rows(&ds, &order), &subset).unwrap().standardized;
        prop_assert!(close(a, b, 1e-12), "{} vs {}", a, b);
    }

    #[test]
    fn level_relabeling_does_not_matter(
        (ds, subset) in with_subset(5),
        shift in 1u32..LEVELS,
    ) {
        let j = subset[0];
        let mut cols = ds.columns().to_vec();
        for c in cols[j].iter_mut() {
            *c = (*c + shift) % LEVELS;
        }
        let relabeled = DiscreteDataset::with_levels(
            cols, ds.y().to_vec(), ds.names().to_vec(), ds.levels().to_vec()).unwrap();
        let a = iscore(&ds, &subset).unwrap().standardized;
        let b = iscore(&relabeled, &subset).unwrap().standardized;
        prop_assert!(close(a, b, 1e-12), "{} vs {}", a, b);
    }

    #[test]
    fn response_shift_and_scale(
        (ds, subset) in with_subset(5),
        a in -100.0f64..100.0,
        b in prop_oneof![-50.0f64..-0.01, 0.01f64..50.0],
    ) {
        let y: Vec<f64> = ds.y().iter().map(|v| a + b * v).collect();
        let moved = ds.with_response(y).unwrap();
        let before = iscore(&ds, &subset).unwrap();
        let after = iscore(&moved, &subset).unwrap();
        prop_assert!(close(before.standardized, after.standardized, 1e-9));
        prop_assert!(close(after.raw, b * b * before.raw, 1e-9));
    }

    #[test]
    fn trapezoid_equals_rank_and_pairwise((y, s) in binary_scores()) {
        let trap = auc(&y, &s).unwrap();
        prop_assert!((trap - auc_rank(&y, &s).unwrap()).abs() <= 1e-12);
        prop_assert!((trap - pairwise_auc(&y, &s)).abs() <= 1e-12);
    }

    #[test]
    fn auc_symmetry_and_monotone_invariance((y, s) in binary_scores()) {
        let neg: Vec<f64> = s.iter().map(|v| -v).collect();
        prop_assert!((auc(&y, &s).unwrap() + auc(&y, &neg).unwrap() - 1.0).abs() <= 1e-12);
        let lifted: Vec<f64> = s.iter().map(|v| (v / 10.0).exp() * 3.0 + 7.0).collect();
        prop_assert_eq!(auc(&y, &s).unwrap(), auc(&y, &lifted).unwrap());
    }

    #[test]
    fn roc_shape((y, s) in binary_scores()) {
        let roc = roc_curve(&y, &s).unwrap();
        let first = roc.points.first().unwrap();
        let last = roc.points.last().unwrap();
        prop_assert_eq!((first.fpr, first.tpr), (0.0, 0.0));
        prop_assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
        for w in roc.points.windows(2) {
            prop_assert!(w[0].fpr <= w[1].fpr && w[0].tpr <= w[1].tpr);
        }
        for p in &roc.points {
            prop_assert!((0.0..=1.0).contains(&p.fpr) && (0.0..=1.0).contains(&p.tpr));
        }
    }

    #[test]
    fn rates_match_enumeration((y, s) in binary_scores(), t in -6.0f64..6.0) {
        let c = confusion(&y, &s, t).unwrap();
        let pos = y.iter().filter(|&&v| v == 1.0).count() as u64;
        let tp = y.iter().zip(&s).filter(|&(&l, &v)| l == 1.0 && v > t).count() as u64;
        let tn = y.iter().zip(&s).filter(|&(&l, &v)| l == 0.0 && v <= t).count() as u64;
        prop_assert_eq!((c.tp, c.tn, c.positives()), (tp, tn, pos));
        prop_assert_eq!(sensitivity(&c).unwrap(), tp as f64 / pos as f64);
        prop_assert_eq!(specificity(&c).unwrap(), tn as f64 / (y.len() as u64 - pos) as f64);
    }

    #[test]
    fn merge_ignores_input_order(
        raw in prop::collection::vec((subsequence((0..6usize).collect::<Vec<_>>(), 1..=3), 0u8..5), 1..20),
        seed in any::<u64>(),
    ) {
        let modules: Vec<VariableModule> = raw
            .into_iter()
            .map(|(variables, score)| VariableModule {
                variables,
                score: f64::from(score),
                provenance: 1,
            })
            .collect();
        let mut shuffled = modules.clone();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        rand::seq::SliceRandom::shuffle(shuffled.as_mut_slice(), &mut rng);
        let a = merge_modules(modules.clone());
        prop_assert_eq!(&a, &merge_modules(shuffled));
        prop_assert_eq!(a.iter().map(|m| m.provenance).sum::<usize>(), modules.len());
    }

    #[test]
    fn greedy_steps_are_optimal_and_match_iscore((ds, initial) in with_subset(7)) {
        let trace = run_bda_once(&ds, &initial, 1).unwrap();
        prop_assert_eq!(trace.steps[0].subset.len(), initial.len());
        for step in &trace.steps {
            let direct = iscore(&ds, &step.subset).unwrap().standardized;
            prop_assert!(close(step.score, direct, 1e-12), "{} vs {}", step.score, direct);
        }
        for (w, &dropped) in trace.steps.windows(2).zip(&trace.dropped_order) {
            let (before, after) = (&w[0].subset, &w[1].subset);
            let tentative: Vec<(usize, f64)> = before
                .iter()
                .map(|&v| {
                    let rest: Vec<usize> = before.iter().copied().filter(|&u| u != v).collect();
                    (v, iscore(&ds, &rest).unwrap().standardized)
                })
                .collect();
            let best = tentative.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
            let tie_winner = tentative.iter().find(|t| !beats(best, t.1)).unwrap().0;
            prop_assert_eq!(dropped, tie_winner);
            prop_assert!(!after.contains(&dropped) && after.len() + 1 == before.len());
        }
    }

    #[test]
    fn module_predictions_stay_in_range((ds, subset) in with_subset(4)) {
        let mc = fit_module_classifier(&ds, &subset).unwrap();
        let preds = mc.predict(&ds).unwrap();
        let lo = ds.y().iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ds.y().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(preds.iter().all(|&p| p >= lo - 1e-12 && p <= hi + 1e-12));
    }

    #[test]
    fn combination_is_convex(
        (ds, subset) in with_subset(4),
        w1 in 0.01f64..10.0,
        w2 in 0.0f64..10.0,
    ) {
        let a = fit_module_classifier(&ds, &subset[..1]).unwrap();
        let b = fit_module_classifier(&ds, &subset).unwrap();
        let pa = a.predict(&ds).unwrap();
        let pb = b.predict(&ds).unwrap();
        let c = combine_modules(&[(a, w1), (b, w2)], &ds).unwrap();
        for i in 0..ds.n() {
            let (lo, hi) = (pa[i].min(pb[i]), pa[i].max(pb[i]));
            prop_assert!(c[i] >= lo - 1e-12 && c[i] <= hi + 1e-12);
        }
    }

    #[test]
    fn predictivity_ignores_class_naming((ds, subset) in with_subset(4)) {
        let y: Vec<f64> = ds.y().iter().map(|&v| f64::from(u8::from(v > 0.0))).collect();
        prop_assume!(y.contains(&1.0) && y.contains(&0.0));
        let flipped: Vec<f64> = y.iter().map(|v| 1.0 - v).collect();
        let a = predictivity(&ds.with_response(y).unwrap(), &subset).unwrap();
        let b = predictivity(&ds.with_response(flipped).unwrap(), &subset).unwrap();
        prop_assert!((a.theta_c - b.theta_c).abs() < 1e-12);
        prop_assert!((0.5 - 1e-12..=1.0 + 1e-12).contains(&a.theta_c));
        prop_assert!((a.case.values().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!((a.control.values().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn bda_is_deterministic(seed in any::<u64>(), b in 1usize..20) {
        let ds = generate(&SimSpec { model: Model::Example1, n: 200, p: 12, seed: 1 }).unwrap();
        let cfg = BdaConfig { b, k: 5, seed, min_size: 1 };
        let first = run_bda(&ds, &cfg).unwrap();
        let again = run_bda(&ds, &cfg).unwrap();
        prop_assert_eq!(
            serde_json::to_string(&first.record(ds.names())).unwrap(),
            serde_json::to_string(&again.record(ds.names())).unwrap()
        );
        for w in first.modules.windows(2) {
            prop_assert!(w[0].score > w[1].score
                || (w[0].score == w[1].score && w[0].variables < w[1].variables));
        }
    }
}

#[test]
fn null_scores_do_not_grow_along_the_drop_path() {
    let k = 8;
    let mut at_k = 0.0;
    let mut at_2 = 0.0;
    for seed in 0..200u64 {
        let ds = generate(&SimSpec {
            model: Model::Noise,
            n: 1000,
            p: k,
            seed: 9000 + seed,
        })
        .unwrap();
        let all: Vec<usize> = (0..k).collect();
        let trace = run_bda_once(&ds, &all, 2).unwrap();
        at_k += trace.steps.first().unwrap().score;
        at_2 += trace.steps.last().unwrap().score;
    }
    let (at_k, at_2) = (at_k / 200.0, at_2 / 200.0);
    assert!(at_k <= at_2 + 2.0, "size {k}: {at_k}, size 2: {at_2}");
}
