use serde::{Deserialize, Serialize};

use super::config::{ModelConfig, Variant};
use super::network::{backward, is_weight, ForwardTrace, Upstream, ALIGN_W};
use crate::nn::{
    dense_forward, l2_normalize_rows, l2_normalize_rows_backward, sigmoid, softplus, GradStore, Matrix, ParamStore,
    DEFAULT_NORM_EPS,
};
use crate::{Error, Result};

/// One sampled ranking pair: batch row, positive item, negative item.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pair {
    pub row: usize,
    pub pos: usize,
    pub neg: usize,
}

/// Mean of `softplus(−(s⁺ − s⁻))` and its gradients with respect to each
/// positive and negative score.
pub fn bpr_loss(s_pos: &[f64], s_neg: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    if s_pos.len() != s_neg.len() || s_pos.is_empty() {
        return Err(Error::Shape(format!("bpr over {} / {} scores", s_pos.len(), s_neg.len())));
    }
    let n = s_pos.len() as f64;
    let mut loss = 0.0;
    let mut dpos = Vec::with_capacity(s_pos.len());
    let mut dneg = Vec::with_capacity(s_pos.len());
    for (&p, &q) in s_pos.iter().zip(s_neg) {
        let diff = p - q;
        loss += softplus(-diff);
        let g = -sigmoid(-diff) / n;
        dpos.push(g);
        dneg.push(-g);
    }
    Ok((loss / n, dpos, dneg))
}

/// `Σ m (r − x̂)² / Σ m` and its gradient with respect to `x_hat`.
pub fn mmse_loss(r: &[f64], x_hat: &[f64], mask: &[f64]) -> Result<(f64, Vec<f64>)> {
    if r.len() != x_hat.len() || r.len() != mask.len() {
        return Err(Error::Shape("mmse operands differ in length".into()));
    }
    let m: f64 = mask.iter().sum();
    if !(m > 0.0) {
        return Err(Error::InvalidArgument("mmse with an empty mask".into()));
    }
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(r.len());
    for ((&ri, &xi), &mi) in r.iter().zip(x_hat).zip(mask) {
        let e = xi - ri;
        loss += mi * e * e;
        grad.push(2.0 * mi * e / m);
    }
    Ok((loss / m, grad))
}

/// InfoNCE between row-aligned views: anchors `a` against candidates `f`,
/// cosine similarity over `tau`, mean over anchors. Returns the loss and the
/// gradients with respect to the unnormalized `a` and `f`.
pub fn infonce_loss(a: &Matrix, f: &Matrix, tau: f64) -> Result<(f64, Matrix, Matrix)> {
    if a.shape() != f.shape() || a.rows() == 0 {
        return Err(Error::Shape(format!("infonce views {:?} vs {:?}", a.shape(), f.shape())));
    }
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument("tau must be positive".into()));
    }
    let (an, a_norms) = l2_normalize_rows(a, DEFAULT_NORM_EPS)?;
    let (fn_, f_norms) = l2_normalize_rows(f, DEFAULT_NORM_EPS)?;
    let b = a.rows();
    let mut logits = an.matmul_nt(&fn_)?;
    logits.scale(1.0 / tau);
    let mut loss = 0.0;
    let mut dlogits = Matrix::zeros(b, b);
    for i in 0..b {
        let row = logits.row(i);
        let mx = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = row.iter().map(|&v| (v - mx).exp()).sum();
        let lse = mx + sum.ln();
        loss += lse - row[i];
        for j in 0..b {
            let p = (row[j] - lse).exp();
            dlogits.set(i, j, (p - if i == j { 1.0 } else { 0.0 }) / b as f64);
        }
    }
    dlogits.scale(1.0 / tau);
    let d_an = dlogits.matmul(&fn_)?;
    let d_fn = dlogits.matmul_tn(&an)?;
    Ok((
        loss / b as f64,
        l2_normalize_rows_backward(&an, &a_norms, &d_an),
        l2_normalize_rows_backward(&fn_, &f_norms, &d_fn),
    ))
}

/// Value of each term of the objective for one batch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub bpr: f64,
    pub cl: f64,
    pub reg_w: f64,
    pub reg_i: f64,
    pub mmse: f64,
    pub total: f64,
}

/// Composite objective and its gradient for a traced batch.
///
/// `BPR + λ_CL·CL + λ_w·Σ‖W‖² + λ_i·mean_b Σ_l ‖T_l‖² + λ_mmse·MMSE`. The
/// contrastive pathway is skipped entirely when `λ_CL = 0`.
pub fn total_loss(
    cfg: &ModelConfig,
    params: &ParamStore,
    trace: &ForwardTrace,
    pairs: &[Pair],
) -> Result<(LossBreakdown, GradStore)> {
    if cfg.lambda_cl > 0.0 && cfg.variant != Variant::Ghc2f {
        return Err(Error::Config(format!("lambda_cl > 0 requires GHC2F, got {}", cfg.variant.name())));
    }
    let x_hat = &trace.x_hat;
    let b = x_hat.rows();
    let mut out = LossBreakdown::default();
    let mut d_xhat = Matrix::zeros(b, x_hat.cols());

    let s_pos: Vec<f64> = pairs.iter().map(|p| x_hat.get(p.row, p.pos)).collect();
    let s_neg: Vec<f64> = pairs.iter().map(|p| x_hat.get(p.row, p.neg)).collect();
    let (bpr, dpos, dneg) = bpr_loss(&s_pos, &s_neg)?;
    out.bpr = bpr;
    for (k, p) in pairs.iter().enumerate() {
        let r = d_xhat.row_mut(p.row);
        r[p.pos] += dpos[k];
        r[p.neg] += dneg[k];
    }

    if cfg.lambda_mmse > 0.0 {
        let users: Vec<usize> = (0..b).filter(|&i| trace.x.row(i).iter().any(|&v| v != 0.0)).collect();
        if !users.is_empty() {
            let scale = cfg.lambda_mmse / users.len() as f64;
            let mut total = 0.0;
            for &i in &users {
                let r = trace.x.row(i);
                let mask: Vec<f64> = r.iter().map(|&v| (v != 0.0) as u8 as f64).collect();
                let (l, g) = mmse_loss(r, x_hat.row(i), &mask)?;
                total += l;
                for (d, gi) in d_xhat.row_mut(i).iter_mut().zip(g) {
                    *d += scale * gi;
                }
            }
            out.mmse = total / users.len() as f64;
        }
    }

    let mut up = Upstream {
        x_hat: d_xhat,
        z_pre: None,
        z_cf: None,
        projected: None,
    };
    if cfg.lambda_reg_i > 0.0 && cfg.variant.is_fused() {
        let scale = 2.0 * cfg.lambda_reg_i / b as f64;
        up.projected = Some(
            trace
                .projected_signals()
                .map(|t| {
                    let mut m = t.clone();
                    m.scale(scale);
                    m
                })
                .collect(),
        );
    }

    let mut align_grad = None;
    if cfg.lambda_cl > 0.0 {
        let z_cf = trace
            .z_cf()
            .ok_or_else(|| Error::InvalidArgument("contrastive loss needs the collaborative view".into()))?;
        let align = params.get(ALIGN_W)?;
        let a = dense_forward(z_cf, align, None)?;
        let (cl, mut da, mut df) = infonce_loss(&a, &trace.z_pre, cfg.tau)?;
        out.cl = cl;
        da.scale(cfg.lambda_cl);
        df.scale(cfg.lambda_cl);
        up.z_pre = Some(df);
        up.z_cf = Some(da.matmul(align)?);
        align_grad = Some(da.matmul_tn(z_cf)?);
    }

    let mut grads = backward(cfg, params, trace, &up)?;
    if let Some(g) = align_grad {
        grads.accumulate(ALIGN_W, 1.0, &g)?;
    }
    if cfg.variant.is_fused() {
        out.reg_i = trace.projected_signals().map(|t| t.sum_sq()).sum::<f64>() / b as f64;
    }
    for (name, w) in params.iter() {
        if is_weight(name) {
            out.reg_w += w.sum_sq();
            if cfg.lambda_reg_w > 0.0 {
                grads.accumulate(name, 2.0 * cfg.lambda_reg_w, w)?;
            }
        }
    }
    out.total = out.bpr
        + cfg.lambda_cl * out.cl
        + cfg.lambda_reg_w * out.reg_w
        + cfg.lambda_reg_i * out.reg_i
        + cfg.lambda_mmse * out.mmse;
    if !out.total.is_finite() {
        return Err(Error::NonFinite("total loss".into()));
    }
    Ok((out, grads))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bpr_values() {
        let (l, _, _) = bpr_loss(&[0.3], &[0.3]).unwrap();
        assert!((l - std::f64::consts::LN_2).abs() < 1e-12);
        let (l, _, _) = bpr_loss(&[5.0], &[0.0]).unwrap();
        assert!((l - (1.0 + (-5.0f64).exp()).ln()).abs() < 1e-15);
        let mut prev = f64::INFINITY;
        for d in -10..10 {
            let (l, _, _) = bpr_loss(&[d as f64], &[0.0]).unwrap();
            assert!(l < prev);
            prev = l;
        }
        let (a, _, _) = bpr_loss(&[1.5], &[-0.5]).unwrap();
        let (b, _, _) = bpr_loss(&[-0.5], &[1.5]).unwrap();
        assert!(a + b > 2.0 * std::f64::consts::LN_2);
    }

    #[test]
    fn mmse_values() {
        let (l, _) = mmse_loss(&[1.0, 2.0, 3.0], &[1.5, 2.0, 2.0], &[1.0; 3]).unwrap();
        assert!((l - (0.25 + 1.0) / 3.0).abs() < 1e-12);
        let (l, _) = mmse_loss(&[1.0, 0.0], &[0.0, 9.0], &[1.0, 0.0]).unwrap();
        assert_eq!(l, 1.0);
        let (l, g) = mmse_loss(&[1.0, 0.0], &[1.0, -4.0], &[1.0, 0.0]).unwrap();
        assert_eq!(l, 0.0);
        assert_eq!(g, vec![0.0, 0.0]);
        assert!(mmse_loss(&[1.0], &[1.0], &[0.0]).is_err());
    }

    #[test]
    fn infonce_values() {
        let a = Matrix::from_rows(&[vec![0.3, -1.2, 2.0]]).unwrap();
        let f = Matrix::from_rows(&[vec![1.0, 0.5, 0.1]]).unwrap();
        let (l, _, _) = infonce_loss(&a, &f, 0.2).unwrap();
        assert!(l.abs() < 1e-12);
        let same = Matrix::filled(4, 3, 0.7);
        let (l, _, _) = infonce_loss(&same, &same, 0.2).unwrap();
        assert!((l - 4f64.ln()).abs() < 1e-9);
        let eye = Matrix::identity(4);
        let (l, _, _) = infonce_loss(&eye, &eye, 0.1).unwrap();
        assert!(l < 4f64.ln() / 10.0);
        assert!(l >= 0.0);
        assert!(infonce_loss(&Matrix::zeros(2, 3), &Matrix::filled(2, 3, 1.0), 0.1).is_err());
    }
}
