//! Central finite-difference verification of analytic gradients.

use super::{GradStore, ParamStore};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckConfig {
    pub step: f64,
    pub tol: f64,
    /// Denominator floor so coordinates with vanishing gradients do not
    /// produce spurious relative errors.
    pub floor: f64,
    /// Coordinates sampled per tensor; tensors this size or smaller are checked exhaustively.
    pub max_per_tensor: usize,
    pub seed: u64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig {
            step: 1e-5,
            tol: 1e-4,
            floor: 1e-6,
            max_per_tensor: 64,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub worst: Option<(String, usize)>,
    pub checked: usize,
    pub passed: bool,
}

/// relative error `|a - n| / max(|a|, |n|, floor)`
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

/// Compares `analytic` against central differences of `loss` around `params`.
/// `loss` must be a pure function of the parameters (fixed masks and samples).
pub fn grad_check(
    mut loss: impl FnMut(&ParamStore) -> f64,
    params: &ParamStore,
    analytic: &GradStore,
    cfg: &GradCheckConfig,
) -> GradCheckReport {
    let mut work = params.clone();
    let mut rng = RngStream::new(cfg.seed, 0);
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst: None,
        checked: 0,
        passed: true,
    };
    let names: Vec<String> = params.names().cloned().collect();
    for name in names {
        let n = params.get(&name).map(|m| m.len()).unwrap_or(0);
        let coords: Vec<usize> = if n <= cfg.max_per_tensor {
            (0..n).collect()
        } else {
            rng.sample_without_replacement(n, cfg.max_per_tensor)
        };
        let Ok(grad) = analytic.get(&name) else {
            report.passed = false;
            report.worst = Some((name, 0));
            report.max_rel_error = f64::INFINITY;
            continue;
        };
        for idx in coords {
            let orig = params.get(&name).unwrap().data()[idx];
            work.get_mut(&name).unwrap().data_mut()[idx] = orig + cfg.step;
            let up = loss(&work);
            work.get_mut(&name).unwrap().data_mut()[idx] = orig - cfg.step;
            let down = loss(&work);
            work.get_mut(&name).unwrap().data_mut()[idx] = orig;
            let numeric = (up - down) / (2.0 * cfg.step);
            let err = relative_error(grad.data()[idx], numeric, cfg.floor);
            report.checked += 1;
            if !(err <= report.max_rel_error) {
                report.max_rel_error = err;
                report.worst = Some((name.clone(), idx));
            }
        }
    }
    report.passed &= report.max_rel_error < cfg.tol;
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Matrix;

    fn store(v: &[f64]) -> ParamStore {
        let mut p = ParamStore::new();
        p.insert("w", Matrix::row_vector(v)).unwrap();
        p
    }

    #[test]
    fn linear_loss_matches_exactly() {
        let p = store(&[0.5, -1.0, 2.0]);
        let g = store(&[1.0, 1.0, 1.0]);
        let r = grad_check(|q| q.get("w").unwrap().sum(), &p, &g, &GradCheckConfig::default());
        assert!(r.passed);
        assert!(r.max_rel_error < 1e-9, "{}", r.max_rel_error);
        assert_eq!(r.checked, 3);
    }

    #[test]
    fn corrupted_gradient_fails() {
        let p = store(&[0.5, -1.0, 2.0]);
        let g = store(&[1.0, 1.1, 1.0]);
        let r = grad_check(|q| q.get("w").unwrap().sum(), &p, &g, &GradCheckConfig::default());
        assert!(!r.passed);
        assert_eq!(r.worst, Some(("w".to_string(), 1)));
    }
}
