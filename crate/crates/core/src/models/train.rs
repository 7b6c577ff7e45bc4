use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use super::loss::{total_loss, LossBreakdown, Pair};
use super::network::{forward, init_params, ForwardOptions, ModelDims, SignalTable};
use crate::corpus::{zscore_label, FoldSplit, LabeledInteractions};
use crate::eval::{evaluate_users, EvalConfig, EvalTarget, FoldEvaluation};
use crate::hashing::{config_hash, file_sha256};
use crate::nn::{adam_step, AdamState, Matrix, Mode, ParamStore};
use crate::rng::{streams, RngStream, ALGORITHM};
use crate::{Error, Result};

/// Everything a training run or a scorer reads for one fold.
pub struct FoldData<'a> {
    pub split: &'a FoldSplit,
    /// z-score labels of the fold's train matrix.
    pub labels: LabeledInteractions,
    pub signal: Option<&'a SignalTable>,
}

impl<'a> FoldData<'a> {
    pub fn new(split: &'a FoldSplit, signal: Option<&'a SignalTable>) -> Self {
        FoldData {
            split,
            labels: zscore_label(&split.train),
            signal,
        }
    }

    pub fn n_items(&self) -> usize {
        self.split.train.n_items
    }

    /// Interaction rows: positive z-scores of train items, zero elsewhere.
    pub fn inputs(&self, users: &[usize]) -> Result<Matrix> {
        let n = self.n_items();
        let mut x = Matrix::zeros(users.len(), n);
        for (r, &u) in users.iter().enumerate() {
            let row = self.labels.zscores.get(u).ok_or_else(|| Error::Unknown {
                kind: "user index",
                id: u.to_string(),
            })?;
            let out = x.row_mut(r);
            for &(i, z) in row {
                if z > 0.0 {
                    out[i] = z;
                }
            }
        }
        Ok(x)
    }

    /// Held-out targets: the validation item when `validation`, else the test item.
    pub fn targets(&self, validation: bool) -> Vec<EvalTarget> {
        let s = self.split;
        s.eligible_users()
            .map(|u| {
                let (test, valid) = (s.test_item[u].unwrap(), s.valid_item[u].unwrap());
                let mut interacted: Vec<usize> = s.train.row(u).iter().map(|e| e.item).collect();
                interacted.push(test);
                interacted.push(valid);
                interacted.sort_unstable();
                interacted.dedup();
                EvalTarget {
                    user: u,
                    positive: if validation { valid } else { test },
                    interacted,
                }
            })
            .collect()
    }

    fn dims(&self) -> ModelDims {
        ModelDims {
            n_items: self.n_items(),
            user_profile_dim: self.signal.map_or(0, SignalTable::user_dim),
            item_profile_dim: self.signal.map_or(0, SignalTable::item_dim),
        }
    }
}

/// A trained (or freshly initialized) network ready for scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub dims: ModelDims,
    pub params: ParamStore,
}

impl Model {
    pub fn init(config: ModelConfig, dims: ModelDims) -> Result<Model> {
        let params = init_params(&config, &dims)?;
        Ok(Model { config, dims, params })
    }

    /// Eval-mode scores for each user over the whole catalog. The text
    /// signal is ignored by AE_BPR.
    pub fn predict_scores(&self, users: &[usize], data: &FoldData) -> Result<Matrix> {
        let x = data.inputs(users)?;
        let signal = match (self.config.variant.is_fused(), data.signal) {
            (true, Some(s)) => Some(s.batch(users)?),
            (true, None) => return Err(Error::Config(format!("{} needs profiles to score", self.config.kind()))),
            (false, _) => None,
        };
        let opts = ForwardOptions {
            mode: Mode::Eval,
            collaborative_view: false,
        };
        // Eval mode never draws.
        let mut rng = RngStream::new(self.config.seed, streams::DROPOUT);
        Ok(forward(&self.config, &self.params, &x, signal.as_ref(), &opts, &mut rng)?.x_hat)
    }

    pub fn evaluate(&self, data: &FoldData, cfg: &EvalConfig, validation: bool) -> Result<FoldEvaluation> {
        let (targets, stream) = if validation {
            (data.targets(true), streams::VALIDATION)
        } else {
            (data.targets(false), streams::EVAL)
        };
        evaluate_users(&targets, data.n_items(), data.split.fold_id, cfg, stream, |users| {
            self.predict_scores(users, data)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_hr10: f64,
    pub val_ndcg10: f64,
    pub wall_seconds: f64,
}

pub fn write_train_log(path: &Path, log: &[EpochLog]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::format(path, e.to_string()))?;
    for row in log {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters of the epoch with the best validation HR@10.
    pub model: Model,
    pub best_epoch: usize,
    pub best_val_hr10: f64,
    pub best_val_ndcg10: f64,
    pub steps: u64,
    pub log: Vec<EpochLog>,
    /// Per-batch loss terms of the last epoch, averaged.
    pub last_breakdown: LossBreakdown,
    /// Eligible users with no positive or no negative to sample.
    pub skipped_users: usize,
    /// Users whose item-side text signal is empty.
    pub empty_history_users: usize,
}

/// Draws a negative from unseen items (weight 1) and disliked items
/// (weight `disliked_weight`).
fn sample_negative(data: &FoldData, u: usize, disliked_weight: f64, rng: &mut RngStream) -> Option<usize> {
    let n = data.n_items();
    let seen = data.split.train.row(u).len();
    let disliked = &data.labels.disliked[u];
    let w_unseen = (n - seen) as f64;
    let w_disliked = disliked.len() as f64 * disliked_weight;
    if w_unseen + w_disliked <= 0.0 {
        return None;
    }
    let t = rng.uniform() * (w_unseen + w_disliked);
    if t >= w_unseen {
        let k = (((t - w_unseen) / disliked_weight) as usize).min(disliked.len() - 1);
        return Some(disliked[k]);
    }
    loop {
        let i = rng.below(n);
        if !data.split.train.contains(u, i) {
            return Some(i);
        }
    }
}

/// Samples the ranking pairs of one batch.
pub fn sample_pairs(cfg: &ModelConfig, data: &FoldData, users: &[usize], rng: &mut RngStream) -> Vec<Pair> {
    let mut pairs = Vec::with_capacity(users.len() * cfg.pos_per_user * cfg.neg_per_pos);
    for (row, &u) in users.iter().enumerate() {
        let pool = &data.labels.positives[u];
        for _ in 0..cfg.pos_per_user {
            let pos = pool[rng.below(pool.len())];
            for _ in 0..cfg.neg_per_pos {
                if let Some(neg) = sample_negative(data, u, cfg.disliked_weight, rng) {
                    pairs.push(Pair { row, pos, neg });
                }
            }
        }
    }
    pairs
}

/// Seeded training loop with per-epoch validation; keeps the parameters of
/// the best validation HR@10 (earliest epoch on ties).
pub fn train(config: &ModelConfig, data: &FoldData, val_cfg: &EvalConfig) -> Result<TrainOutcome> {
    let mut model = Model::init(config.clone(), data.dims())?;
    let cfg = &model.config;
    if cfg.variant.is_fused() && data.signal.is_none() {
        return Err(Error::Config(format!("{} needs profiles", cfg.kind())));
    }
    let adam_cfg = cfg.adam();
    let mut adam = AdamState::new(&model.params);
    let mut dropout_rng = RngStream::new(cfg.seed, streams::DROPOUT);
    let mut shuffle_rng = RngStream::new(cfg.seed, streams::SHUFFLE);
    let mut pair_rng = RngStream::new(cfg.seed, streams::PAIRS);
    let opts = ForwardOptions {
        mode: Mode::Train,
        collaborative_view: cfg.lambda_cl > 0.0,
    };

    let n = data.n_items();
    let mut trainable = Vec::new();
    let mut skipped = 0;
    for u in data.split.eligible_users() {
        let has_neg = data.split.train.row(u).len() < n || !data.labels.disliked[u].is_empty();
        if data.labels.positives[u].is_empty() || !has_neg {
            skipped += 1;
        } else {
            trainable.push(u);
        }
    }
    if trainable.is_empty() {
        return Err(Error::InvalidArgument("no user has a positive to train on".into()));
    }
    let empty_history_users = data
        .signal
        .map_or(0, |s| data.split.eligible_users().filter(|&u| s.empty_history[u]).count());

    let start = Instant::now();
    let initial = model.evaluate(data, val_cfg, true)?.metrics;
    let mut best = (initial.hr, 0usize, initial.ndcg, model.params.clone());
    let mut log = Vec::with_capacity(cfg.epochs);
    let mut last_breakdown = LossBreakdown::default();
    for epoch in 1..=cfg.epochs {
        let mut order = trainable.clone();
        shuffle_rng.shuffle(&mut order);
        let mut epoch_loss = 0.0;
        let mut sum = LossBreakdown::default();
        let mut batches = 0usize;
        for users in order.chunks(cfg.batch_size) {
            let x = data.inputs(users)?;
            let signal = match data.signal {
                Some(s) if cfg.variant.is_fused() => Some(s.batch(users)?),
                _ => None,
            };
            let pairs = sample_pairs(cfg, data, users, &mut pair_rng);
            if pairs.is_empty() {
                continue;
            }
            let trace = forward(cfg, &model.params, &x, signal.as_ref(), &opts, &mut dropout_rng)?;
            let (loss, grads) = total_loss(cfg, &model.params, &trace, &pairs)?;
            adam_step(&mut model.params, &grads, &mut adam, &adam_cfg)?;
            epoch_loss += loss.total * users.len() as f64;
            sum.bpr += loss.bpr;
            sum.cl += loss.cl;
            sum.reg_w += loss.reg_w;
            sum.reg_i += loss.reg_i;
            sum.mmse += loss.mmse;
            sum.total += loss.total;
            batches += 1;
        }
        if batches > 0 {
            let k = batches as f64;
            last_breakdown = LossBreakdown {
                bpr: sum.bpr / k,
                cl: sum.cl / k,
                reg_w: sum.reg_w / k,
                reg_i: sum.reg_i / k,
                mmse: sum.mmse / k,
                total: sum.total / k,
            };
        }
        let val = model.evaluate(data, val_cfg, true)?.metrics;
        log.push(EpochLog {
            epoch,
            train_loss: epoch_loss / trainable.len() as f64,
            val_hr10: val.hr,
            val_ndcg10: val.ndcg,
            wall_seconds: start.elapsed().as_secs_f64(),
        });
        if val.hr > best.0 {
            best = (val.hr, epoch, val.ndcg, model.params.clone());
        }
    }
    let steps = adam.step;
    model.params = best.3;
    Ok(TrainOutcome {
        model,
        best_epoch: best.1,
        best_val_hr10: best.0,
        best_val_ndcg10: best.2,
        steps,
        log,
        last_breakdown,
        skipped_users: skipped,
        empty_history_users,
    })
}

pub const PARAMS_FILE: &str = "params.bin";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";

/// JSON side of a checkpoint; the parameters live in a binary blob next to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointManifest {
    pub model: String,
    pub config: ModelConfig,
    pub config_hash: String,
    pub dims: ModelDims,
    pub fold: usize,
    pub best_epoch: usize,
    pub steps: u64,
    pub val_hr10: f64,
    pub val_ndcg10: f64,
    pub rng: String,
    pub params_file: String,
    pub params_sha256: String,
    /// Hash of the upstream inputs (split and profiles) the run consumed.
    pub inputs_hash: String,
}

pub fn save_checkpoint(dir: &Path, outcome: &TrainOutcome, fold: usize, inputs_hash: &str) -> Result<CheckpointManifest> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let params_path = dir.join(PARAMS_FILE);
    outcome.model.params.save(&params_path)?;
    let manifest = CheckpointManifest {
        model: outcome.model.config.kind().name(),
        config: outcome.model.config.clone(),
        config_hash: config_hash(&outcome.model.config)?,
        dims: outcome.model.dims,
        fold,
        best_epoch: outcome.best_epoch,
        steps: outcome.steps,
        val_hr10: outcome.best_val_hr10,
        val_ndcg10: outcome.best_val_ndcg10,
        rng: ALGORITHM.to_string(),
        params_file: PARAMS_FILE.to_string(),
        params_sha256: file_sha256(&params_path)?,
        inputs_hash: inputs_hash.to_string(),
    };
    let path = dir.join(CHECKPOINT_FILE);
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)?).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

/// Loads a checkpoint, verifying the parameter blob and config hashes.
pub fn load_checkpoint(dir: &Path) -> Result<(Model, CheckpointManifest)> {
    let path = dir.join(CHECKPOINT_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: CheckpointManifest = serde_json::from_str(&text)?;
    let found = config_hash(&manifest.config)?;
    if found != manifest.config_hash {
        return Err(Error::HashMismatch {
            what: format!("config in {}", path.display()),
            expected: manifest.config_hash.clone(),
            found,
        });
    }
    let params_path = dir.join(&manifest.params_file);
    let found = file_sha256(&params_path)?;
    if found != manifest.params_sha256 {
        return Err(Error::HashMismatch {
            what: params_path.display().to_string(),
            expected: manifest.params_sha256.clone(),
            found,
        });
    }
    let params = ParamStore::load(&params_path)?;
    let expected = init_params(&manifest.config, &manifest.dims)?;
    if !params.same_layout(&expected) {
        return Err(Error::format(&params_path, "parameter layout does not match the configuration"));
    }
    Ok((
        Model {
            config: manifest.config.clone(),
            dims: manifest.dims,
            params,
        },
        manifest,
    ))
}
