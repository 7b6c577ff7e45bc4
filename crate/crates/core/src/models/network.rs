use serde::{Deserialize, Serialize};

use super::config::{ModelConfig, Variant};
use crate::corpus::RatingMatrix;
use crate::nn::{
    dense_backward, dense_forward, dropout, dropout_backward, lecun_uniform, sigmoid, Activation, GradStore, Matrix,
    Mode, ParamStore, DEFAULT_NORM_EPS,
};
use crate::rng::{streams, RngStream};
use crate::topics::Profiles;
use crate::{Error, Result};

pub fn enc_w(l: usize) -> String {
    format!("enc.{l}.w")
}
pub fn enc_b(l: usize) -> String {
    format!("enc.{l}.b")
}
pub fn dec_w(l: usize) -> String {
    format!("dec.{l}.w")
}
pub fn dec_b(l: usize) -> String {
    format!("dec.{l}.b")
}
pub fn gate_w(l: usize) -> String {
    format!("gate.{l}.w")
}
pub fn gate_b(l: usize) -> String {
    format!("gate.{l}.b")
}
pub fn text_w(l: usize) -> String {
    format!("text.{l}.w")
}
pub const TEXT_USER_W: &str = "text.user.w";
pub const TEXT_ITEM_W: &str = "text.item.w";
pub const ALIGN_W: &str = "align.w";

/// Widths of the side inputs, fixed at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    pub n_items: usize,
    pub user_profile_dim: usize,
    pub item_profile_dim: usize,
}

/// Builds the parameter store. Shared parameters are drawn in a fixed order
/// and the contrastive alignment map last, so GHCF and GHC2F start from the
/// same shared weights under one seed.
pub fn init_params(cfg: &ModelConfig, dims: &ModelDims) -> Result<ParamStore> {
    cfg.validate(dims.n_items)?;
    let mut rng = RngStream::new(cfg.seed, streams::INIT);
    let mut p = ParamStore::new();
    let sizes = &cfg.layer_sizes;
    let k = cfg.depth();
    for l in 1..=k {
        p.insert(enc_w(l), lecun_uniform(&mut rng, sizes[l], sizes[l - 1]))?;
        p.insert(enc_b(l), Matrix::zeros(1, sizes[l]))?;
    }
    for l in 1..=k {
        if !cfg.tied_decoder {
            p.insert(dec_w(l), lecun_uniform(&mut rng, sizes[l - 1], sizes[l]))?;
        }
        p.insert(dec_b(l), Matrix::zeros(1, sizes[l - 1]))?;
    }
    if cfg.variant.is_fused() {
        if dims.user_profile_dim == 0 || dims.item_profile_dim == 0 {
            return Err(Error::Config(format!("{} needs non-empty profiles", cfg.variant.name())));
        }
        let dt = cfg.signal_width();
        p.insert(TEXT_USER_W, lecun_uniform(&mut rng, dt, dims.user_profile_dim))?;
        p.insert(TEXT_ITEM_W, lecun_uniform(&mut rng, dt, dims.item_profile_dim))?;
        for l in 1..=k {
            p.insert(text_w(l), lecun_uniform(&mut rng, sizes[l], dt))?;
            p.insert(gate_w(l), lecun_uniform(&mut rng, sizes[l], 2 * sizes[l]))?;
            p.insert(gate_b(l), Matrix::zeros(1, sizes[l]))?;
        }
    }
    if cfg.variant == Variant::Ghc2f {
        let d = cfg.bottleneck();
        p.insert(ALIGN_W, lecun_uniform(&mut rng, d, d))?;
    }
    Ok(p)
}

/// Names of weight matrices (penalized by the weight regularizer; biases are not).
pub fn is_weight(name: &str) -> bool {
    name.ends_with(".w")
}

/// Per-user side inputs of the text pathway: the user's own profile and the
/// L2-normalized mean profile of the items in the user's train history.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalTable {
    pub user: Vec<Vec<f64>>,
    pub item_history: Vec<Vec<f64>>,
    /// Users whose item side is zero (empty history or degenerate mean).
    pub empty_history: Vec<bool>,
}

impl SignalTable {
    pub fn build(profiles: &Profiles, train: &RatingMatrix) -> Result<SignalTable> {
        if profiles.users.len() != train.n_users || profiles.items.len() != train.n_items {
            return Err(Error::Shape(format!(
                "profiles cover {} users / {} items, matrix has {} / {}",
                profiles.users.len(),
                profiles.items.len(),
                train.n_users,
                train.n_items
            )));
        }
        let d = profiles.items.first().map_or(0, Vec::len);
        let mut item_history = Vec::with_capacity(train.n_users);
        let mut empty_history = Vec::with_capacity(train.n_users);
        for u in 0..train.n_users {
            let (v, empty) = history_signal(train.row(u).iter().map(|e| e.item), &profiles.items, d);
            item_history.push(v);
            empty_history.push(empty);
        }
        Ok(SignalTable {
            user: profiles.users.clone(),
            item_history,
            empty_history,
        })
    }

    pub fn user_dim(&self) -> usize {
        self.user.first().map_or(0, Vec::len)
    }

    pub fn item_dim(&self) -> usize {
        self.item_history.first().map_or(0, Vec::len)
    }

    pub fn batch(&self, users: &[usize]) -> Result<SignalBatch> {
        let pick = |table: &Vec<Vec<f64>>| -> Result<Matrix> {
            let rows = users
                .iter()
                .map(|&u| {
                    table.get(u).cloned().ok_or_else(|| Error::Unknown {
                        kind: "user index",
                        id: u.to_string(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Matrix::from_rows(&rows)
        };
        Ok(SignalBatch {
            user: pick(&self.user)?,
            item: pick(&self.item_history)?,
        })
    }
}

/// Masked mean of item profiles, L2-normalized. Returns a zero vector and
/// `true` when the history is empty or the mean vanishes.
pub fn history_signal(items: impl Iterator<Item = usize>, item_profiles: &[Vec<f64>], dim: usize) -> (Vec<f64>, bool) {
    let mut sum = vec![0.0; dim];
    let mut n = 0usize;
    for i in items {
        for (s, v) in sum.iter_mut().zip(&item_profiles[i]) {
            *s += v;
        }
        n += 1;
    }
    if n == 0 {
        return (sum, true);
    }
    sum.iter_mut().for_each(|s| *s /= n as f64);
    let norm = sum.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm <= DEFAULT_NORM_EPS {
        return (vec![0.0; dim], true);
    }
    sum.iter_mut().for_each(|s| *s /= norm);
    (sum, false)
}

/// Side inputs for a batch, rows aligned with the interaction rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalBatch {
    pub user: Matrix,
    pub item: Matrix,
}

/// Cached gated-fusion quantities of one encoder layer.
#[derive(Debug, Clone)]
pub struct FusionTrace {
    pub t: Matrix,
    pub gate_input: Matrix,
    pub gate: Matrix,
    pub fused: Matrix,
    pub dropout_mask: Option<Matrix>,
}

#[derive(Debug, Clone)]
pub struct EncoderLayerTrace {
    pub input: Matrix,
    pub pre: Matrix,
    pub h: Matrix,
    pub fusion: Option<FusionTrace>,
}

#[derive(Debug, Clone)]
pub struct DecoderLayerTrace {
    pub input: Matrix,
    pub pre: Matrix,
    pub out: Matrix,
}

/// Everything the backward pass needs from one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub x: Matrix,
    pub signal: Option<SignalBatch>,
    /// Combined text signal T before the per-layer projections.
    pub text: Option<Matrix>,
    pub encoder: Vec<EncoderLayerTrace>,
    /// Bottleneck before dropout (z_fused for fused variants).
    pub z_pre: Matrix,
    pub z: Matrix,
    pub z_mask: Option<Matrix>,
    /// Decoder layers in execution order (bottleneck first).
    pub decoder: Vec<DecoderLayerTrace>,
    pub x_hat: Matrix,
    /// Plain encoder chain (gates bypassed), only when requested.
    pub cf: Option<Vec<DecoderLayerTrace>>,
}

impl ForwardTrace {
    pub fn z_cf(&self) -> Option<&Matrix> {
        self.cf.as_ref().map(|c| &c.last().unwrap().out)
    }

    pub fn gates(&self) -> impl Iterator<Item = &Matrix> {
        self.encoder.iter().filter_map(|l| l.fusion.as_ref().map(|f| &f.gate))
    }

    pub fn projected_signals(&self) -> impl Iterator<Item = &Matrix> {
        self.encoder.iter().filter_map(|l| l.fusion.as_ref().map(|f| &f.t))
    }
}

pub struct ForwardOptions {
    pub mode: Mode,
    /// Also run the gate-free encoder chain for the contrastive view.
    pub collaborative_view: bool,
}

fn activation_for_decoder(cfg: &ModelConfig, l: usize) -> Activation {
    if l == 1 {
        cfg.output_activation
    } else {
        cfg.activation
    }
}

/// `T = γ·(U·P_uᵀ + I·P_iᵀ)`.
pub fn text_signal(params: &ParamStore, signal: &SignalBatch, gamma: f64) -> Result<Matrix> {
    let mut t = dense_forward(&signal.user, params.get(TEXT_USER_W)?, None)?;
    t.add_assign(&dense_forward(&signal.item, params.get(TEXT_ITEM_W)?, None)?)?;
    t.scale(gamma);
    Ok(t)
}

/// `g = σ(W_g·[h; T] + b_g)`, `fused = g ⊙ h + (1 − g) ⊙ T`.
pub fn gate_fuse(h: &Matrix, t: &Matrix, w: &Matrix, b: &Matrix) -> Result<(Matrix, Matrix, Matrix)> {
    if h.shape() != t.shape() {
        return Err(Error::Shape(format!("gate: h {:?} vs T {:?}", h.shape(), t.shape())));
    }
    let gate_input = h.hstack(t)?;
    let gate = dense_forward(&gate_input, w, Some(b))?.map(sigmoid);
    let fused = Matrix::from_fn(h.rows(), h.cols(), |i, j| {
        let g = gate.get(i, j);
        g * h.get(i, j) + (1.0 - g) * t.get(i, j)
    });
    Ok((gate_input, gate, fused))
}

pub fn forward(
    cfg: &ModelConfig,
    params: &ParamStore,
    x: &Matrix,
    signal: Option<&SignalBatch>,
    opts: &ForwardOptions,
    rng: &mut RngStream,
) -> Result<ForwardTrace> {
    let k = cfg.depth();
    if x.cols() != cfg.layer_sizes[0] {
        return Err(Error::Shape(format!("input width {} vs {}", x.cols(), cfg.layer_sizes[0])));
    }
    let fused_variant = cfg.variant.is_fused();
    let (signal, text) = if fused_variant {
        let s = signal.ok_or_else(|| Error::Config(format!("{} needs a text signal", cfg.variant.name())))?;
        if s.user.rows() != x.rows() || s.item.rows() != x.rows() {
            return Err(Error::Shape("signal batch rows differ from interaction rows".into()));
        }
        (Some(s.clone()), Some(text_signal(params, s, cfg.gamma)?))
    } else {
        (None, None)
    };

    let mut encoder = Vec::with_capacity(k);
    let mut input = x.clone();
    for l in 1..=k {
        let pre = dense_forward(&input, params.get(&enc_w(l))?, Some(params.get(&enc_b(l))?))?;
        let h = cfg.activation.forward(&pre);
        let (next, fusion) = match &text {
            Some(t_all) => {
                let t = dense_forward(t_all, params.get(&text_w(l))?, None)?;
                let (gate_input, gate, fused) = gate_fuse(&h, &t, params.get(&gate_w(l))?, params.get(&gate_b(l))?)?;
                let (out, dropout_mask) = if l < k && cfg.fusion_dropout {
                    dropout(&fused, cfg.dropout_rate, opts.mode, rng)?
                } else {
                    (fused.clone(), None)
                };
                (
                    out,
                    Some(FusionTrace {
                        t,
                        gate_input,
                        gate,
                        fused,
                        dropout_mask,
                    }),
                )
            }
            None => (h.clone(), None),
        };
        encoder.push(EncoderLayerTrace {
            input: std::mem::replace(&mut input, next),
            pre,
            h,
            fusion,
        });
    }
    // `input` now holds the last layer's (fused) output, never dropped above.
    let z_pre = input;
    let (z, z_mask) = dropout(&z_pre, cfg.dropout_rate, opts.mode, rng)?;

    let mut decoder = Vec::with_capacity(k);
    let mut y = z.clone();
    for l in (1..=k).rev() {
        let mut pre = if cfg.tied_decoder {
            y.matmul(params.get(&enc_w(l))?)?
        } else {
            dense_forward(&y, params.get(&dec_w(l))?, None)?
        };
        pre.add_row_broadcast(params.get(&dec_b(l))?.data())?;
        let out = activation_for_decoder(cfg, l).forward(&pre);
        decoder.push(DecoderLayerTrace {
            input: std::mem::replace(&mut y, out.clone()),
            pre,
            out,
        });
    }
    let x_hat = y;
    x_hat.ensure_finite("reconstruction")?;

    let cf = if opts.collaborative_view {
        let mut chain = Vec::with_capacity(k);
        let mut c = x.clone();
        for l in 1..=k {
            let pre = dense_forward(&c, params.get(&enc_w(l))?, Some(params.get(&enc_b(l))?))?;
            let out = cfg.activation.forward(&pre);
            chain.push(DecoderLayerTrace {
                input: std::mem::replace(&mut c, out.clone()),
                pre,
                out,
            });
        }
        Some(chain)
    } else {
        None
    };

    Ok(ForwardTrace {
        x: x.clone(),
        signal,
        text,
        encoder,
        z_pre,
        z,
        z_mask,
        decoder,
        x_hat,
        cf,
    })
}

/// Upstream gradients entering the network from the loss terms.
pub struct Upstream {
    pub x_hat: Matrix,
    /// Gradient on the pre-dropout bottleneck (contrastive term).
    pub z_pre: Option<Matrix>,
    /// Gradient on the gate-free bottleneck.
    pub z_cf: Option<Matrix>,
    /// Gradient on each projected text signal T_l (signal regularizer).
    pub projected: Option<Vec<Matrix>>,
}

pub fn backward(cfg: &ModelConfig, params: &ParamStore, trace: &ForwardTrace, up: &Upstream) -> Result<GradStore> {
    let k = cfg.depth();
    let mut grads = params.zeros_like();

    let mut dy = up.x_hat.clone();
    for (idx, layer) in trace.decoder.iter().enumerate().rev() {
        let l = k - idx;
        let dpre = activation_for_decoder(cfg, l).backward(&layer.pre, &layer.out, &dy)?;
        grads.accumulate(&dec_b(l), 1.0, &Matrix::row_vector(&dpre.col_sums()))?;
        if cfg.tied_decoder {
            let w = params.get(&enc_w(l))?;
            grads.accumulate(&enc_w(l), 1.0, &layer.input.matmul_tn(&dpre)?)?;
            dy = dpre.matmul_nt(w)?;
        } else {
            let g = dense_backward(&layer.input, params.get(&dec_w(l))?, &dpre)?;
            grads.accumulate(&dec_w(l), 1.0, &g.weight)?;
            dy = g.input;
        }
    }

    let mut d_fused = dropout_backward(trace.z_mask.as_ref(), &dy)?;
    if let Some(dz) = &up.z_pre {
        d_fused.add_assign(dz)?;
    }
    let mut d_text = trace.text.as_ref().map(|t| Matrix::zeros(t.rows(), t.cols()));
    for l in (1..=k).rev() {
        let layer = &trace.encoder[l - 1];
        let dh = match &layer.fusion {
            Some(f) => {
                let (n, m) = f.gate.shape();
                let mut dh = Matrix::zeros(n, m);
                let mut dt = Matrix::zeros(n, m);
                let mut dlogit = Matrix::zeros(n, m);
                for i in 0..n {
                    for j in 0..m {
                        let g = f.gate.get(i, j);
                        let dfz = d_fused.get(i, j);
                        dh.set(i, j, dfz * g);
                        dt.set(i, j, dfz * (1.0 - g));
                        dlogit.set(i, j, dfz * (layer.h.get(i, j) - f.t.get(i, j)) * g * (1.0 - g));
                    }
                }
                let gg = dense_backward(&f.gate_input, params.get(&gate_w(l))?, &dlogit)?;
                grads.accumulate(&gate_w(l), 1.0, &gg.weight)?;
                grads.accumulate(&gate_b(l), 1.0, &gg.bias)?;
                let (dh_gate, dt_gate) = gg.input.hsplit(m);
                dh.add_assign(&dh_gate)?;
                dt.add_assign(&dt_gate)?;
                if let Some(extra) = &up.projected {
                    dt.add_assign(&extra[l - 1])?;
                }
                let text = trace.text.as_ref().unwrap();
                let q = params.get(&text_w(l))?;
                grads.accumulate(&text_w(l), 1.0, &dt.matmul_tn(text)?)?;
                d_text.as_mut().unwrap().add_assign(&dt.matmul(q)?)?;
                dh
            }
            None => d_fused,
        };
        let dpre = cfg.activation.backward(&layer.pre, &layer.h, &dh)?;
        let g = dense_backward(&layer.input, params.get(&enc_w(l))?, &dpre)?;
        grads.accumulate(&enc_w(l), 1.0, &g.weight)?;
        grads.accumulate(&enc_b(l), 1.0, &g.bias)?;
        d_fused = if l > 1 {
            let below = trace.encoder[l - 2].fusion.as_ref().and_then(|f| f.dropout_mask.as_ref());
            dropout_backward(below, &g.input)?
        } else {
            g.input
        };
    }

    if let (Some(dt), Some(signal)) = (&d_text, &trace.signal) {
        grads.accumulate(TEXT_USER_W, cfg.gamma, &dt.matmul_tn(&signal.user)?)?;
        grads.accumulate(TEXT_ITEM_W, cfg.gamma, &dt.matmul_tn(&signal.item)?)?;
    }

    if let (Some(dz), Some(chain)) = (&up.z_cf, &trace.cf) {
        let mut d = dz.clone();
        for l in (1..=k).rev() {
            let layer = &chain[l - 1];
            let dpre = cfg.activation.backward(&layer.pre, &layer.out, &d)?;
            let g = dense_backward(&layer.input, params.get(&enc_w(l))?, &dpre)?;
            grads.accumulate(&enc_w(l), 1.0, &g.weight)?;
            grads.accumulate(&enc_b(l), 1.0, &g.bias)?;
            d = g.input;
        }
    }
    Ok(grads)
}
