mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::desk;
use ghcf_core::corpus::{filter_min_interactions, loo_split, Entry, Interaction, RatingMatrix};
use ghcf_core::eval::{hr_at_k, mrr, ndcg_at_k, sample_candidates, EvalConfig, TEST_STREAM};
use ghcf_core::models::{bpr_loss, gate_fuse, infonce_loss, FoldData};
use ghcf_core::nn::Matrix;
use ghcf_core::rng::streams;
use ghcf_core::topics::{
    aggregate_profiles, prune_topics, soft_assign_reduced, Keyword, ProfileNorm, Projection, TopicModel,
};
use proptest::collection::vec;
use proptest::prelude::*;

fn interaction(u: u8, i: u8, ts: i64) -> Interaction {
    Interaction {
        user_id: format!("u{u}"),
        item_id: format!("i{i}"),
        rating: 1.0 + (ts % 5) as f64,
        timestamp: ts,
        review_text: None,
    }
}

fn matrix_from(rows: &[Vec<(usize, i64)>], n_items: usize) -> RatingMatrix {
    let rows = rows
        .iter()
        .map(|r| {
            let mut seen = BTreeMap::new();
            for &(item, ts) in r {
                seen.insert(item % n_items, ts);
            }
            seen.into_iter()
                .map(|(item, timestamp)| Entry { item, rating: 4.0, timestamp })
                .collect()
        })
        .collect();
    RatingMatrix::from_rows(rows, n_items)
}

fn topic_model(centroids: &[Vec<f64>]) -> TopicModel {
    let k = centroids.len();
    let d = centroids[0].len();
    TopicModel {
        projection: Projection {
            mean: vec![0.0; d],
            components: Matrix::identity(d),
            eigenvalues: vec![1.0; d],
            explained_variance_ratio: vec![1.0 / d as f64; d],
        },
        centroids: Matrix::from_rows(centroids).unwrap(),
        keywords: (0..k).map(|t| vec![Keyword { term: format!("w{t}"), weight: 1.0 }]).collect(),
        prevalence: vec![1.0 / k as f64; k],
        labels: (0..k).map(|t| format!("t{t}")).collect(),
    }
}

proptest! {
    #[test]
    fn filtered_users_meet_threshold_at_fixpoint(
        raw in vec((0u8..15, 0u8..20, 0i64..50), 1..200),
        k in 1usize..6,
    ) {
        let interactions: Vec<Interaction> = raw.iter().map(|&(u, i, t)| interaction(u, i, t)).collect();
        let mut distinct: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for it in &interactions {
            distinct.entry(it.user_id.clone()).or_default().insert(it.item_id.clone());
        }
        let expected: Vec<&String> = distinct.iter().filter(|(_, s)| s.len() >= k).map(|(u, _)| u).collect();
        match filter_min_interactions(&interactions, k) {
            Ok(f) => {
                prop_assert_eq!(f.catalog.users.iter().collect::<Vec<_>>(), expected);
                prop_assert!(f.matrix.rows.iter().all(|r| r.len() >= k));
                // Filtering the survivors again changes nothing.
                let again = filter_min_interactions(&f.retained, k).unwrap();
                prop_assert_eq!(again.matrix, f.matrix);
                prop_assert_eq!(again.removed_users, 0);
            }
            Err(_) => prop_assert!(expected.is_empty()),
        }
    }

    #[test]
    fn folds_partition_each_user_history(
        rows in vec(vec((0usize..30, 0i64..20), 1..12), 1..25),
        seed in 0u64..1000,
        n_folds in 1usize..4,
    ) {
        let m = matrix_from(&rows, 30);
        let split = loo_split(&m, n_folds, seed, 3).unwrap();
        prop_assert_eq!(split.folds.len(), n_folds);
        for fold in &split.folds {
            for u in 0..m.n_users {
                let all: Vec<usize> = m.row(u).iter().map(|e| e.item).collect();
                let train: Vec<usize> = fold.train.row(u).iter().map(|e| e.item).collect();
                if all.len() < 3 {
                    prop_assert!(split.excluded_users.contains(&u));
                    prop_assert!(fold.test_item[u].is_none() && fold.valid_item[u].is_none());
                    prop_assert!(train.is_empty());
                    continue;
                }
                let (t, v) = (fold.test_item[u].unwrap(), fold.valid_item[u].unwrap());
                prop_assert_ne!(t, v);
                prop_assert!(!train.contains(&t) && !train.contains(&v));
                let mut back = train.clone();
                back.extend([t, v]);
                back.sort_unstable();
                prop_assert_eq!(back, all);
            }
        }
    }

    #[test]
    fn soft_assignments_and_profiles_are_distributions(
        centroids in vec(vec(-3.0f64..3.0, 3), 2..7),
        points in vec(vec(-3.0f64..3.0, 3), 1..20),
        beta in prop_oneof![Just(f64::INFINITY), 0.01f64..50.0],
    ) {
        let c = Matrix::from_rows(&centroids).unwrap();
        let dists: Vec<Vec<f64>> = points.iter().map(|p| soft_assign_reduced(p, &c, beta).0).collect();
        for d in &dists {
            prop_assert!(d.iter().all(|&x| x >= 0.0));
            prop_assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        let n = dists.len();
        let owners: Vec<(usize, usize)> = (0..n).map(|r| (r % 4, r % 5)).collect();
        // Drop every third pair so some owners fall back to the corpus mean.
        let rows: Vec<Vec<Entry>> = (0..4)
            .map(|u| {
                (0..5)
                    .filter(|&i| (u + i) % 3 != 0)
                    .map(|item| Entry { item, rating: 3.0, timestamp: 0 })
                    .collect()
            })
            .collect();
        let m = RatingMatrix::from_rows(rows, 5);
        let p = aggregate_profiles(&dists, &owners, &m, ProfileNorm::Simplex).unwrap();
        for row in p.users.iter().chain(&p.items) {
            let s: f64 = row.iter().sum();
            prop_assert!(row.iter().all(|&x| x >= 0.0));
            prop_assert!(s == 0.0 || (s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn pruning_relabels_without_losing_documents(
        centroids in vec(vec(-1.0f64..1.0, 3), 2..9),
        labels in vec(0usize..8, 1..150),
        min_prevalence in 0.0f64..0.5,
    ) {
        let k = centroids.len();
        let assignments: Vec<usize> = labels.iter().map(|&l| l % k).collect();
        let model = topic_model(&centroids);
        let out = prune_topics(&model, &assignments, min_prevalence).unwrap();
        let kk = out.model.k();
        prop_assert_eq!(out.assignments.len(), assignments.len());
        prop_assert_eq!(out.merges.len(), k - kk);
        prop_assert!(out.assignments.iter().all(|&a| a < kk));
        let n = assignments.len() as f64;
        for t in 0..kk {
            let share = out.assignments.iter().filter(|&&a| a == t).count() as f64 / n;
            prop_assert!((out.model.prevalence[t] - share).abs() < 1e-12);
            prop_assert!(kk == 1 || share >= min_prevalence - 1e-12);
        }
        // Merging only coarsens: documents that shared a topic still do.
        for a in 0..assignments.len() {
            for b in a + 1..assignments.len() {
                if assignments[a] == assignments[b] {
                    prop_assert_eq!(out.assignments[a], out.assignments[b]);
                }
            }
        }
    }

    #[test]
    fn fused_state_lies_between_its_inputs(
        h in vec(-5.0f64..5.0, 8),
        t in vec(-5.0f64..5.0, 8),
        w in vec(-2.0f64..2.0, 32),
        b in vec(-2.0f64..2.0, 4),
    ) {
        let h = Matrix::new(2, 4, h).unwrap();
        let t = Matrix::new(2, 4, t).unwrap();
        let (_, gate, fused) = gate_fuse(&h, &t, &Matrix::new(4, 8, w).unwrap(), &Matrix::new(1, 4, b).unwrap()).unwrap();
        for i in 0..2 {
            for j in 0..4 {
                let (x, y) = (h.get(i, j), t.get(i, j));
                let g = gate.get(i, j);
                prop_assert!((0.0..=1.0).contains(&g));
                prop_assert!(fused.get(i, j) >= x.min(y) - 1e-12 && fused.get(i, j) <= x.max(y) + 1e-12);
            }
        }
    }

    #[test]
    fn ranking_loss_pairs_sum_past_two_log_two(a in -30.0f64..30.0, b in -30.0f64..30.0) {
        let (ab, _, _) = bpr_loss(&[a], &[b]).unwrap();
        let (ba, _, _) = bpr_loss(&[b], &[a]).unwrap();
        prop_assert!(ab > 0.0 && ba > 0.0);
        prop_assert!(ab + ba >= 2.0 * std::f64::consts::LN_2 - 1e-12);
    }

    #[test]
    fn contrastive_loss_is_non_negative(
        a in vec(-3.0f64..3.0, 12),
        f in vec(-3.0f64..3.0, 12),
        tau in 0.05f64..2.0,
    ) {
        let a = Matrix::new(4, 3, a).unwrap();
        let f = Matrix::new(4, 3, f).unwrap();
        if let Ok((loss, _, _)) = infonce_loss(&a, &f, tau) {
            prop_assert!(loss >= 0.0 && loss.is_finite());
        }
    }

    #[test]
    fn single_user_metrics_are_sandwiched(r in 1usize..=10) {
        let (m, nd, hr) = (mrr(&[r]).unwrap(), ndcg_at_k(&[r], 10).unwrap(), hr_at_k(&[r], 10).unwrap());
        prop_assert!((m - 1.0 / r as f64).abs() < 1e-15);
        prop_assert!((nd - 1.0 / (r as f64 + 1.0).log2()).abs() < 1e-15);
        prop_assert!(m <= nd + 1e-15 && nd <= hr && hr == 1.0);
    }
}

#[test]
fn candidates_never_include_known_items_in_any_fold() {
    let d = desk(41);
    let eval = EvalConfig::default();
    for (f, fold) in d.split.folds.iter().enumerate() {
        let data = FoldData::new(fold, None);
        for (validation, stream) in [(false, TEST_STREAM), (true, streams::VALIDATION)] {
            for target in data.targets(validation) {
                let u = target.user;
                let mut known: BTreeSet<usize> = fold.train.row(u).iter().map(|e| e.item).collect();
                known.insert(fold.test_item[u].unwrap());
                known.insert(fold.valid_item[u].unwrap());
                let c = sample_candidates(u, f, target.positive, &target.interacted, d.n_items, &eval, stream).unwrap();
                assert_eq!(c.items[0], target.positive);
                assert!(c.items[1..].iter().all(|i| !known.contains(i)), "fold {f} user {u}");
            }
        }
    }
}
