//! Planted-preference corpus generator.
//!
//! Users and items receive latent topic mixtures. Users pick items with
//! probability increasing in their affinity, rate them on a 1..5 scale, and
//! write reviews drawn from topic word lists. Each review also gets an
//! embedding built from its topic direction, a per-user style offset and
//! isotropic noise, standing in for a sentence encoder.

use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use super::Interaction;
use crate::rng::{streams, RngStream};
use crate::topics::EmbeddingMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub n_users: usize,
    pub n_items: usize,
    pub n_topics: usize,
    pub interactions_min: usize,
    pub interactions_max: usize,
    /// Rating noise standard deviation; ignored when `signal_fraction` is set.
    pub noise: f64,
    /// Target share of rating variance explained by topic affinity.
    pub signal_fraction: Option<f64>,
    pub rating_min: f64,
    pub rating_max: f64,
    pub user_concentration: f64,
    pub item_concentration: f64,
    /// Logit scale of affinity when users choose which items to rate.
    pub selection_sharpness: f64,
    pub review_words_min: usize,
    pub review_words_max: usize,
    /// Share of review words taken from the review's topic list (rest are fillers).
    pub topic_word_share: f64,
    pub embedding_dim: usize,
    pub embedding_noise: f64,
    pub style_scale: f64,
    /// Share of reviews written about an off-catalog "noise" theme.
    pub noise_topic_prevalence: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_users: 500,
            n_items: 300,
            n_topics: 5,
            interactions_min: 8,
            interactions_max: 12,
            noise: 0.5,
            signal_fraction: Some(0.7),
            rating_min: 1.0,
            rating_max: 5.0,
            user_concentration: 0.3,
            item_concentration: 0.15,
            selection_sharpness: 6.0,
            review_words_min: 8,
            review_words_max: 16,
            topic_word_share: 0.6,
            embedding_dim: 32,
            embedding_noise: 0.08,
            style_scale: 0.5,
            noise_topic_prevalence: 0.0,
        }
    }
}

/// Ground truth retained for tests and diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedTruth {
    pub user_mixtures: Vec<Vec<f64>>,
    pub item_mixtures: Vec<Vec<f64>>,
    pub item_dominant: Vec<usize>,
    /// One word list per planted topic; the noise theme list is last when present.
    pub topic_words: Vec<Vec<String>>,
    /// Topic each review was written about (`n_topics` marks the noise theme).
    pub review_topics: Vec<usize>,
    pub noise_std: f64,
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub interactions: Vec<Interaction>,
    pub embeddings: EmbeddingMatrix,
    pub truth: PlantedTruth,
}

const THEMES: &[&[&str]] = &[
    &["dark", "horror", "scary", "ghost", "haunted", "creepy", "blood", "terror", "nightmare", "zombie", "killer", "fear"],
    &["funny", "comedy", "laughs", "hilarious", "jokes", "witty", "silly", "humor", "sitcom", "parody", "giggle", "gags"],
    &["action", "explosions", "chase", "fight", "stunts", "heist", "gunfire", "combat", "hero", "villain", "mission", "adrenaline"],
    &["romance", "love", "couple", "wedding", "kiss", "heartfelt", "passion", "dating", "sweet", "tender", "affair", "chemistry"],
    &["space", "alien", "future", "robot", "galaxy", "starship", "planet", "dystopia", "cyborg", "orbit", "android", "warp"],
    &["documentary", "history", "facts", "interviews", "archive", "biography", "real", "events", "footage", "historian", "era", "truth"],
    &["animation", "cartoon", "kids", "family", "pixar", "animated", "colorful", "musical", "songs", "adventure", "talking", "magic"],
    &["drama", "tragedy", "grief", "emotional", "siblings", "loss", "struggle", "redemption", "tears", "powerful", "raw", "intimate"],
    &["mystery", "detective", "clues", "suspect", "twist", "whodunit", "murder", "investigation", "riddle", "sleuth", "alibi", "motive"],
    &["western", "cowboy", "frontier", "saloon", "outlaw", "sheriff", "desert", "ranch", "duel", "horse", "bounty", "canyon"],
];

const NOISE_THEME: &[&str] = &[
    "shipping", "package", "dvd", "case", "delivery", "refund", "seller", "disc", "scratched", "arrived", "box", "bluray",
];

const FILLERS: &[&str] = &[
    "the", "movie", "film", "was", "and", "a", "it", "really", "i", "this", "watch", "very",
];

fn topic_words(t: usize) -> Vec<String> {
    match THEMES.get(t) {
        Some(words) => words.iter().map(|w| w.to_string()).collect(),
        None => (0..12).map(|j| format!("topic{t}word{j}")).collect(),
    }
}

fn dirichlet(rng: &mut RngStream, alpha: f64, k: usize) -> Vec<f64> {
    let gamma = Gamma::new(alpha, 1.0).expect("positive concentration");
    let mut v: Vec<f64> = (0..k).map(|_| gamma.sample(rng).max(1e-300)).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &x)| if x > best.1 { (i, x) } else { best })
        .0
}

pub fn synth_corpus(spec: &SynthSpec, seed: u64) -> Result<SynthCorpus> {
    let infeasible = |msg: &str| Err(Error::InvalidArgument(format!("infeasible synthetic spec: {msg}")));
    if spec.n_users == 0 || spec.n_items == 0 || spec.n_topics == 0 {
        return infeasible("counts must be positive");
    }
    if spec.interactions_min > spec.interactions_max {
        return infeasible("interactions_min > interactions_max");
    }
    if spec.interactions_max > spec.n_items {
        return infeasible("more interactions per user than items");
    }
    if spec.review_words_min == 0 || spec.review_words_min > spec.review_words_max {
        return infeasible("review length range");
    }
    if !(0.0..1.0).contains(&spec.noise_topic_prevalence) {
        return infeasible("noise_topic_prevalence must be in [0, 1)");
    }
    if let Some(f) = spec.signal_fraction {
        if !(f > 0.0 && f <= 1.0) {
            return infeasible("signal_fraction must be in (0, 1]");
        }
    }
    if spec.embedding_dim == 0 {
        return infeasible("embedding_dim must be positive");
    }

    let mut rng = RngStream::new(seed, streams::SYNTH);
    let k = spec.n_topics;
    let words: Vec<Vec<String>> = (0..k).map(topic_words).collect();
    let noise_words: Vec<String> = NOISE_THEME.iter().map(|w| w.to_string()).collect();

    let user_mix: Vec<Vec<f64>> = (0..spec.n_users).map(|_| dirichlet(&mut rng, spec.user_concentration, k)).collect();
    let item_mix: Vec<Vec<f64>> = (0..spec.n_items).map(|_| dirichlet(&mut rng, spec.item_concentration, k)).collect();
    let item_dominant: Vec<usize> = item_mix.iter().map(|m| argmax(m)).collect();

    let unit = |rng: &mut RngStream, dim: usize, scale: f64| -> Vec<f64> {
        let v: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        v.into_iter().map(|x| scale * x / n).collect()
    };
    let dim = spec.embedding_dim;
    let directions: Vec<Vec<f64>> = (0..=k).map(|_| unit(&mut rng, dim, 1.0)).collect();
    let styles: Vec<Vec<f64>> = (0..spec.n_users).map(|_| unit(&mut rng, dim, spec.style_scale)).collect();

    struct Draft {
        user: usize,
        item: usize,
        affinity: f64,
        order: usize,
    }
    let mut drafts = Vec::new();
    for u in 0..spec.n_users {
        let n = spec.interactions_min + rng.below(spec.interactions_max - spec.interactions_min + 1);
        // Gumbel top-n over affinity logits samples without replacement.
        let mut keyed: Vec<(f64, usize, f64)> = (0..spec.n_items)
            .map(|i| {
                let a: f64 = user_mix[u].iter().zip(&item_mix[i]).map(|(x, y)| x * y).sum();
                let g = -(-rng.uniform().max(1e-300).ln()).ln();
                (spec.selection_sharpness * a + g, i, a)
            })
            .collect();
        keyed.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
        let mut picked: Vec<(usize, f64)> = keyed[..n].iter().map(|&(_, i, a)| (i, a)).collect();
        rng.shuffle(&mut picked);
        for (order, (item, affinity)) in picked.into_iter().enumerate() {
            drafts.push(Draft { user: u, item, affinity, order });
        }
    }

    let span = spec.rating_max - spec.rating_min;
    let noise_std = match spec.signal_fraction {
        Some(f) => {
            let n = drafts.len() as f64;
            let mean = drafts.iter().map(|d| span * d.affinity).sum::<f64>() / n;
            let var = drafts.iter().map(|d| (span * d.affinity - mean).powi(2)).sum::<f64>() / n;
            (var * (1.0 - f) / f).sqrt()
        }
        None => spec.noise,
    };

    let mut interactions = Vec::with_capacity(drafts.len());
    let mut review_topics = Vec::with_capacity(drafts.len());
    let mut emb = Vec::with_capacity(drafts.len() * dim);
    let mut review_ids = Vec::with_capacity(drafts.len());
    for d in &drafts {
        let rating = spec.rating_min + span * d.affinity + noise_std * rng.normal();
        let is_noise = spec.noise_topic_prevalence > 0.0 && rng.uniform() < spec.noise_topic_prevalence;
        let topic = if is_noise {
            k
        } else {
            // Reviewers write about the item aspects they care about.
            let joint: Vec<f64> = user_mix[d.user].iter().zip(&item_mix[d.item]).map(|(a, b)| a * b).collect();
            rng.weighted_index(&joint).unwrap_or(item_dominant[d.item])
        };
        let list = if is_noise { &noise_words } else { &words[topic] };

        let len = spec.review_words_min + rng.below(spec.review_words_max - spec.review_words_min + 1);
        let dominant = &words[item_dominant[d.item]];
        let mut tokens = vec![dominant[rng.below(dominant.len())].clone()];
        while tokens.len() < len {
            let w = if rng.uniform() < spec.topic_word_share {
                list[rng.below(list.len())].clone()
            } else {
                FILLERS[rng.below(FILLERS.len())].to_string()
            };
            tokens.push(w);
        }
        rng.shuffle(&mut tokens);
        let mut text = tokens.join(" ");
        if let Some(first) = text.get(..1) {
            text = first.to_uppercase() + &text[1..];
        }
        text.push(if rng.uniform() < 0.2 { '!' } else { '.' });

        let user_id = format!("u{:05}", d.user);
        let item_id = format!("i{:05}", d.item);
        review_ids.push(super::review_id(&user_id, &item_id));
        for j in 0..dim {
            let v = directions[topic][j] + styles[d.user][j] + spec.embedding_noise * rng.normal();
            emb.push(v as f32);
        }
        review_topics.push(topic);
        interactions.push(Interaction {
            user_id,
            item_id,
            rating,
            timestamp: 1_600_000_000 + (d.user as i64) * 10 + (d.order as i64) * 86_400,
            review_text: Some(text),
        });
    }

    let mut topic_words = words;
    if spec.noise_topic_prevalence > 0.0 {
        topic_words.push(noise_words);
    }
    Ok(SynthCorpus {
        interactions,
        embeddings: EmbeddingMatrix::new(dim, emb, review_ids)?,
        truth: PlantedTruth {
            user_mixtures: user_mix,
            item_mixtures: item_mix,
            item_dominant,
            topic_words,
            review_topics,
            noise_std,
        },
    })
}
