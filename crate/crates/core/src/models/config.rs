use std::fmt;

use serde::{Deserialize, Serialize};

use crate::nn::{Activation, AdamConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "AE_BPR")]
    AeBpr,
    #[serde(rename = "GHCF")]
    Ghcf,
    #[serde(rename = "GHC2F")]
    Ghc2f,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::AeBpr => "AE_BPR",
            Variant::Ghcf => "GHCF",
            Variant::Ghc2f => "GHC2F",
        }
    }

    pub fn is_fused(self) -> bool {
        self != Variant::AeBpr
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Signal {
    None,
    Topic,
    Text,
}

/// One of the five compared configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModelKind {
    pub variant: Variant,
    pub signal: Signal,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::new(Variant::AeBpr, Signal::None),
        ModelKind::new(Variant::Ghcf, Signal::Topic),
        ModelKind::new(Variant::Ghcf, Signal::Text),
        ModelKind::new(Variant::Ghc2f, Signal::Topic),
        ModelKind::new(Variant::Ghc2f, Signal::Text),
    ];

    pub const fn new(variant: Variant, signal: Signal) -> Self {
        ModelKind { variant, signal }
    }

    pub fn name(&self) -> String {
        match self.signal {
            Signal::None => self.variant.name().to_string(),
            Signal::Topic => format!("{}_Topic", self.variant.name()),
            Signal::Text => format!("{}_Text", self.variant.name()),
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Unknown {
                kind: "model",
                id: name.to_string(),
            })
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Architecture, loss weights and training schedule.
///
/// The layer layout, learning rate and SELU follow the reference setup.
/// Batch size, epochs, loss weights, dropout and the sampling mix are our
/// own defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub variant: Variant,
    pub signal: Signal,
    /// Encoder widths starting at the catalog size. A leading 0 is replaced
    /// by the catalog size in [`ModelConfig::resolve`].
    pub layer_sizes: Vec<usize>,
    pub activation: Activation,
    /// Activation of the last decoder layer (the score layer).
    pub output_activation: Activation,
    pub dropout_rate: f64,
    /// Also apply dropout after each intermediate fusion.
    pub fusion_dropout: bool,
    pub tied_decoder: bool,
    /// Width of the combined text signal T; the bottleneck width if unset.
    pub text_dim: Option<usize>,
    pub gamma: f64,
    pub tau: f64,
    pub lambda_cl: f64,
    pub lambda_reg_w: f64,
    pub lambda_reg_i: f64,
    pub lambda_mmse: f64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Positives sampled per user per epoch.
    pub pos_per_user: usize,
    pub neg_per_pos: usize,
    /// Sampling weight of a disliked item relative to an unseen one.
    pub disliked_weight: f64,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            variant: Variant::AeBpr,
            signal: Signal::None,
            layer_sizes: vec![0, 4096],
            activation: Activation::Selu,
            output_activation: Activation::Identity,
            dropout_rate: 0.2,
            fusion_dropout: false,
            tied_decoder: true,
            text_dim: None,
            gamma: 1.0,
            tau: 0.2,
            lambda_cl: 0.1,
            lambda_reg_w: 1e-5,
            lambda_reg_i: 1e-5,
            lambda_mmse: 0.0,
            lr: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            batch_size: 128,
            epochs: 30,
            pos_per_user: 1,
            neg_per_pos: 1,
            disliked_weight: 2.0,
            seed: 0,
        }
    }
}

impl ModelConfig {
    /// Copy configured for one of the five models. The contrastive weight is
    /// zeroed for variants without a contrastive pathway.
    pub fn for_kind(&self, kind: ModelKind) -> ModelConfig {
        let mut c = self.clone();
        c.variant = kind.variant;
        c.signal = kind.signal;
        if kind.variant != Variant::Ghc2f {
            c.lambda_cl = 0.0;
        }
        c
    }

    pub fn kind(&self) -> ModelKind {
        ModelKind::new(self.variant, self.signal)
    }

    /// Fills a leading 0 in `layer_sizes` with `n_items` and validates.
    pub fn resolve(mut self, n_items: usize) -> Result<ModelConfig> {
        if self.layer_sizes.first() == Some(&0) {
            self.layer_sizes[0] = n_items;
        }
        self.validate(n_items)?;
        Ok(self)
    }

    pub fn validate(&self, n_items: usize) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.layer_sizes.len() < 2 {
            return bad("layer_sizes needs the input width and at least one encoder layer".into());
        }
        if self.layer_sizes[0] != n_items {
            return bad(format!("layer_sizes[0] = {} but the catalog has {n_items} items", self.layer_sizes[0]));
        }
        if self.layer_sizes.contains(&0) {
            return bad("layer widths must be positive".into());
        }
        match (self.variant, self.signal) {
            (Variant::AeBpr, Signal::None) => {}
            (Variant::AeBpr, _) => return bad("AE_BPR takes no text signal".into()),
            (_, Signal::None) => return bad(format!("{} needs a topic or text signal", self.variant.name())),
            _ => {}
        }
        if self.lambda_cl != 0.0 && self.variant != Variant::Ghc2f {
            return bad(format!("lambda_cl > 0 requires GHC2F, got {}", self.variant.name()));
        }
        if !(self.tau > 0.0) {
            return bad("tau must be positive".into());
        }
        for (name, v) in [
            ("gamma", self.gamma),
            ("lambda_cl", self.lambda_cl),
            ("lambda_reg_w", self.lambda_reg_w),
            ("lambda_reg_i", self.lambda_reg_i),
            ("lambda_mmse", self.lambda_mmse),
            ("disliked_weight", self.disliked_weight),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(format!("{name} must be finite and non-negative"));
            }
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return bad("dropout_rate must lie in [0, 1)".into());
        }
        if !(self.lr > 0.0) {
            return bad("lr must be positive".into());
        }
        if self.batch_size == 0 || self.pos_per_user == 0 || self.neg_per_pos == 0 {
            return bad("batch_size, pos_per_user and neg_per_pos must be positive".into());
        }
        if self.text_dim == Some(0) {
            return bad("text_dim must be positive".into());
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    pub fn bottleneck(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn signal_width(&self) -> usize {
        self.text_dim.unwrap_or_else(|| self.bottleneck())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.adam_eps,
        }
    }
}
