use serde::{Deserialize, Serialize};

use super::{GradStore, ParamStore};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: ParamStore,
    pub v: ParamStore,
    pub step: u64,
}

impl AdamState {
    pub fn new(params: &ParamStore) -> Self {
        AdamState {
            m: params.zeros_like(),
            v: params.zeros_like(),
            step: 0,
        }
    }
}

/// One bias-corrected Adam update. Gradients are checked for finiteness
/// before any parameter is touched.
pub fn adam_step(params: &mut ParamStore, grads: &GradStore, state: &mut AdamState, cfg: &AdamConfig) -> Result<()> {
    if !params.same_layout(grads) || !params.same_layout(&state.m) || !params.same_layout(&state.v) {
        return Err(Error::Shape("optimizer state does not match parameters".into()));
    }
    if let Some((name, _)) = grads.iter().find(|(_, g)| !g.is_finite()) {
        return Err(Error::NonFinite(format!("gradient of {name}")));
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for (((_, p), (_, g)), ((_, m), (_, v))) in params
        .iter_mut()
        .zip(grads.iter())
        .zip(state.m.iter_mut().zip(state.v.iter_mut()))
    {
        for (((pi, &gi), mi), vi) in p
            .data_mut()
            .iter_mut()
            .zip(g.data())
            .zip(m.data_mut().iter_mut())
            .zip(v.data_mut().iter_mut())
        {
            *mi = cfg.beta1 * *mi + (1.0 - cfg.beta1) * gi;
            *vi = cfg.beta2 * *vi + (1.0 - cfg.beta2) * gi * gi;
            let m_hat = *mi / c1;
            let v_hat = *vi / c2;
            *pi -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Matrix;

    fn scalar_store(w: f64) -> ParamStore {
        let mut p = ParamStore::new();
        p.insert("w", Matrix::filled(1, 1, w)).unwrap();
        p
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = scalar_store(0.3);
        let g = p.zeros_like();
        let mut s = AdamState::new(&p);
        for _ in 0..10 {
            adam_step(&mut p, &g, &mut s, &AdamConfig::default()).unwrap();
        }
        assert_eq!(p.get("w").unwrap().get(0, 0), 0.3);
        assert_eq!(s.step, 10);
    }

    #[test]
    fn quadratic_converges() {
        let cfg = AdamConfig {
            lr: 0.01,
            ..AdamConfig::default()
        };
        let mut p = scalar_store(1.0);
        let mut s = AdamState::new(&p);
        for _ in 0..500 {
            let w = p.get("w").unwrap().get(0, 0);
            let g = scalar_store(2.0 * w);
            adam_step(&mut p, &g, &mut s, &cfg).unwrap();
        }
        assert!(p.get("w").unwrap().get(0, 0).abs() < 0.05);
    }

    #[test]
    fn runs_are_bit_identical() {
        let run = || {
            let mut p = scalar_store(0.7);
            let mut s = AdamState::new(&p);
            for k in 0..50 {
                let g = scalar_store((k as f64).sin());
                adam_step(&mut p, &g, &mut s, &AdamConfig::default()).unwrap();
            }
            p.get("w").unwrap().get(0, 0).to_bits()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn non_finite_gradient_names_parameter() {
        let mut p = scalar_store(1.0);
        let mut s = AdamState::new(&p);
        let g = scalar_store(f64::NAN);
        match adam_step(&mut p, &g, &mut s, &AdamConfig::default()) {
            Err(Error::NonFinite(msg)) => assert!(msg.contains('w')),
            other => panic!("{other:?}"),
        }
        assert_eq!(p.get("w").unwrap().get(0, 0), 1.0);
    }
}
