#![allow(dead_code)]

use ghcf_core::models::{ModelConfig, ModelKind, Pair, SignalBatch};
use ghcf_core::nn::Matrix;
use ghcf_core::rng::RngStream;

pub struct Toy {
    pub x: Matrix,
    pub signal: SignalBatch,
    pub pairs: Vec<Pair>,
}

fn simplex(rng: &mut RngStream, d: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..d).map(|_| rng.uniform() + 0.05).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

/// Random users over `n_items` items with `n_topics`-dimensional profiles.
pub fn toy(seed: u64, n_users: usize, n_items: usize, n_topics: usize) -> Toy {
    let mut rng = RngStream::new(seed, 77);
    let mut x = Matrix::zeros(n_users, n_items);
    let mut pairs = Vec::new();
    for u in 0..n_users {
        let mut seen = Vec::new();
        for i in 0..n_items {
            if rng.uniform() < 0.4 {
                x.set(u, i, rng.uniform_range(0.1, 2.0));
                seen.push(i);
            }
        }
        if seen.is_empty() {
            x.set(u, u % n_items, 1.0);
            seen.push(u % n_items);
        }
        let unseen: Vec<usize> = (0..n_items).filter(|i| !seen.contains(i)).collect();
        for _ in 0..2 {
            let pos = seen[rng.below(seen.len())];
            let neg = if unseen.is_empty() { (pos + 1) % n_items } else { unseen[rng.below(unseen.len())] };
            pairs.push(Pair { row: u, pos, neg });
        }
    }
    let user = Matrix::from_rows(&(0..n_users).map(|_| simplex(&mut rng, n_topics)).collect::<Vec<_>>()).unwrap();
    let item = Matrix::from_rows(
        &(0..n_users)
            .map(|_| {
                let v = simplex(&mut rng, n_topics);
                let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                v.into_iter().map(|a| a / n).collect()
            })
            .collect::<Vec<_>>(),
    )
    .unwrap();
    Toy {
        x,
        signal: SignalBatch { user, item },
        pairs,
    }
}

/// Toy configuration with every loss term switched on.
pub fn toy_config(kind: ModelKind, seed: u64, n_items: usize) -> ModelConfig {
    let mut c = ModelConfig::default().for_kind(kind);
    c.layer_sizes = vec![n_items, 8];
    c.seed = seed;
    c.dropout_rate = 0.2;
    c.lambda_reg_w = 1e-2;
    c.lambda_reg_i = 1e-2;
    c.lambda_mmse = 0.3;
    c.gamma = 0.8;
    if c.lambda_cl > 0.0 {
        c.lambda_cl = 0.5;
    }
    c
}

/// A small split synthetic corpus with random topic-style profiles.
pub struct Desk {
    pub split: ghcf_core::corpus::SplitResult,
    pub table: ghcf_core::models::SignalTable,
    pub n_items: usize,
}

pub fn desk(seed: u64) -> Desk {
    use ghcf_core::corpus::{filter_min_interactions, loo_split, synth_corpus, SynthSpec};
    use ghcf_core::models::SignalTable;
    use ghcf_core::topics::Profiles;

    let spec = SynthSpec {
        n_users: 60,
        n_items: 40,
        n_topics: 3,
        interactions_min: 6,
        interactions_max: 9,
        ..SynthSpec::default()
    };
    let corpus = synth_corpus(&spec, seed).unwrap();
    let filtered = filter_min_interactions(&corpus.interactions, 3).unwrap();
    let split = loo_split(&filtered.matrix, 1, seed, 3).unwrap();
    let mut rng = RngStream::new(seed, 78);
    let n_users = filtered.catalog.n_users();
    let n_items = filtered.catalog.n_items();
    let profiles = Profiles {
        dim: 3,
        users: (0..n_users).map(|_| simplex(&mut rng, 3)).collect(),
        items: (0..n_items).map(|_| simplex(&mut rng, 3)).collect(),
        user_fallback: vec![false; n_users],
        item_fallback: vec![false; n_items],
    };
    let table = SignalTable::build(&profiles, &split.folds[0].train).unwrap();
    Desk { split, table, n_items }
}

/// Short training run settings for the desk corpus.
pub fn desk_config(kind: ModelKind, seed: u64, n_items: usize) -> ModelConfig {
    let mut c = ModelConfig::default().for_kind(kind);
    c.layer_sizes = vec![n_items, 16];
    c.seed = seed;
    c.epochs = 4;
    c.batch_size = 16;
    c.lr = 1e-2;
    c
}
