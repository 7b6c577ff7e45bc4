//! Layer primitives with hand-derived backward passes.

use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::rng::RngStream;
use crate::{Error, Result};

pub const SELU_LAMBDA: f64 = 1.050_700_987_355_480_5;
pub const SELU_ALPHA: f64 = 1.673_263_242_354_377_3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Selu,
    Relu,
    Sigmoid,
    Identity,
}

/// Logistic function evaluated without overflow for large |x|.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Selu => {
                if x > 0.0 {
                    SELU_LAMBDA * x
                } else {
                    SELU_LAMBDA * SELU_ALPHA * x.exp_m1()
                }
            }
            Activation::Relu => x.max(0.0),
            Activation::Sigmoid => sigmoid(x),
            Activation::Identity => x,
        }
    }

    /// Derivative at pre-activation `x` given the output `y = apply(x)`.
    #[inline]
    pub fn derivative(self, x: f64, y: f64) -> f64 {
        match self {
            Activation::Selu => {
                if x > 0.0 {
                    SELU_LAMBDA
                } else {
                    y + SELU_LAMBDA * SELU_ALPHA
                }
            }
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Identity => 1.0,
        }
    }

    pub fn forward(self, pre: &Matrix) -> Matrix {
        pre.map(|x| self.apply(x))
    }

    pub fn backward(self, pre: &Matrix, post: &Matrix, upstream: &Matrix) -> Result<Matrix> {
        if pre.shape() != upstream.shape() || post.shape() != upstream.shape() {
            return Err(Error::Shape("activation backward".into()));
        }
        let data = pre
            .data()
            .iter()
            .zip(post.data())
            .zip(upstream.data())
            .map(|((&x, &y), &g)| g * self.derivative(x, y))
            .collect();
        Matrix::new(pre.rows(), pre.cols(), data)
    }
}

/// `input · Wᵀ + b` for `input` B×in, `W` out×in and `b` of width out.
pub fn dense_forward(input: &Matrix, weight: &Matrix, bias: Option<&Matrix>) -> Result<Matrix> {
    let mut out = input.matmul_nt(weight)?;
    if let Some(b) = bias {
        out.add_row_broadcast(b.data())?;
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct DenseGrads {
    pub input: Matrix,
    pub weight: Matrix,
    pub bias: Matrix,
}

pub fn dense_backward(input: &Matrix, weight: &Matrix, upstream: &Matrix) -> Result<DenseGrads> {
    if upstream.cols() != weight.rows() || upstream.rows() != input.rows() {
        return Err(Error::Shape(format!(
            "dense backward: upstream {:?}, weight {:?}, input {:?}",
            upstream.shape(),
            weight.shape(),
            input.shape()
        )));
    }
    Ok(DenseGrads {
        input: upstream.matmul(weight)?,
        weight: upstream.matmul_tn(input)?,
        bias: Matrix::row_vector(&upstream.col_sums()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Train,
    Eval,
}

/// Inverted dropout. The returned mask holds the per-unit scale
/// (0 or `1/(1-rate)`) and is `None` when the layer acted as identity.
pub fn dropout(x: &Matrix, rate: f64, mode: Mode, rng: &mut RngStream) -> Result<(Matrix, Option<Matrix>)> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::InvalidArgument(format!("dropout rate {rate} outside [0, 1)")));
    }
    if mode == Mode::Eval || rate == 0.0 {
        return Ok((x.clone(), None));
    }
    let keep = 1.0 / (1.0 - rate);
    let mask_data: Vec<f64> = (0..x.len())
        .map(|_| if rng.uniform() < rate { 0.0 } else { keep })
        .collect();
    let mask = Matrix::new(x.rows(), x.cols(), mask_data)?;
    let y = x.zip_map(&mask, |a, m| a * m)?;
    Ok((y, Some(mask)))
}

pub fn dropout_backward(mask: Option<&Matrix>, upstream: &Matrix) -> Result<Matrix> {
    match mask {
        Some(m) => upstream.zip_map(m, |g, s| g * s),
        None => Ok(upstream.clone()),
    }
}

pub const DEFAULT_NORM_EPS: f64 = 1e-12;

/// Unit-length copy of `v` and the original norm.
pub fn l2_normalize(v: &[f64], eps: f64) -> Result<(Vec<f64>, f64)> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > eps) {
        return Err(Error::DegenerateVector { norm, eps });
    }
    Ok((v.iter().map(|x| x / norm).collect(), norm))
}

/// Applies the normalization Jacobian `(I - v̄v̄ᵀ)/‖v‖` to `upstream`.
pub fn l2_normalize_backward(unit: &[f64], norm: f64, upstream: &[f64]) -> Vec<f64> {
    let proj: f64 = unit.iter().zip(upstream).map(|(u, g)| u * g).sum();
    unit.iter().zip(upstream).map(|(u, g)| (g - u * proj) / norm).collect()
}

/// Row-wise [`l2_normalize`] returning unit rows and their norms.
pub fn l2_normalize_rows(m: &Matrix, eps: f64) -> Result<(Matrix, Vec<f64>)> {
    let mut out = Matrix::zeros(m.rows(), m.cols());
    let mut norms = Vec::with_capacity(m.rows());
    for i in 0..m.rows() {
        let (u, n) = l2_normalize(m.row(i), eps)?;
        out.row_mut(i).copy_from_slice(&u);
        norms.push(n);
    }
    Ok((out, norms))
}

pub fn l2_normalize_rows_backward(unit: &Matrix, norms: &[f64], upstream: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(unit.rows(), unit.cols());
    for i in 0..unit.rows() {
        let g = l2_normalize_backward(unit.row(i), norms[i], upstream.row(i));
        out.row_mut(i).copy_from_slice(&g);
    }
    out
}
