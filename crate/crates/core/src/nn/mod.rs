//! Dense-network substrate: matrices, layers, parameters, Adam and gradient checking.

mod adam;
mod gradcheck;
mod layers;
mod matrix;
mod params;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use gradcheck::{grad_check, relative_error, GradCheckConfig, GradCheckReport};
pub use layers::{
    dense_backward, dense_forward, dropout, dropout_backward, l2_normalize, l2_normalize_backward,
    l2_normalize_rows, l2_normalize_rows_backward, sigmoid, softplus, Activation, DenseGrads, Mode,
    DEFAULT_NORM_EPS, SELU_ALPHA, SELU_LAMBDA,
};
pub use matrix::{axpy, dot, Matrix};
pub use params::{lecun_uniform, GradStore, ParamStore};
