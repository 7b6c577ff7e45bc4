//! Gated hybrid contrastive collaborative filtering workbench.
//!
//! The crate covers the full research loop for autoencoder recommenders that
//! fuse review-derived topic signals into the collaborative encoder:
//!
//! * [`corpus`]: ingestion, cleaning, min-interaction filtering, z-score
//!   labeling and leave-one-out splits, plus a planted-preference generator.
//! * [`topics`]: PCA reduction, k-means, c-TF-IDF keywords, prevalence
//!   pruning, soft topic assignment and user/item profile aggregation.
//! * [`nn`]: a small dense-network substrate with hand-written backward
//!   passes, Adam and a finite-difference gradient checker.
//! * [`models`]: AE-BPR, GHCF and GHC2F forward/backward, losses, training
//!   and scoring.
//! * [`eval`]: sampled leave-one-out ranking with HR@K, nDCG@K and MRR.
//! * [`stats`]: hypervolume, block ranking, Friedman, Nemenyi and
//!   critical-difference diagrams.

// `!(x > 0.0)` is how NaN gets rejected alongside non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod corpus;
pub mod error;
pub mod eval;
pub mod hashing;
pub mod models;
pub mod nn;
pub mod rng;
pub mod stats;
pub mod topics;

pub use error::{Error, Result};
