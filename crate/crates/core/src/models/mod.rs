//! AE-BPR, GHCF and GHC2F: networks, objectives, training and scoring.

mod config;
mod loss;
mod network;
mod train;

pub use config::{ModelConfig, ModelKind, Signal, Variant};
pub use loss::{bpr_loss, infonce_loss, mmse_loss, total_loss, LossBreakdown, Pair};
pub use network::{
    backward, forward, gate_fuse, history_signal, init_params, is_weight, text_signal, DecoderLayerTrace,
    EncoderLayerTrace, ForwardOptions, ForwardTrace, FusionTrace, ModelDims, SignalBatch, SignalTable, Upstream,
};
pub use train::{
    load_checkpoint, sample_pairs, save_checkpoint, train, write_train_log, CheckpointManifest, EpochLog, FoldData,
    Model, TrainOutcome, CHECKPOINT_FILE, PARAMS_FILE,
};
